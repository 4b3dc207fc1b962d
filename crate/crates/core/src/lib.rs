//! Nonparametric adaptive importance sampling by stochastic mirror descent.
//!
//! The sampler maintains a kernel mixture over all past draws, reweighted by
//! tempered importance weights `w^eta` and blended with a heavy-tailed
//! exploration density. See [`samplers::midas_run`] for the main loop.

pub mod baselines;
pub mod dump;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod samplers;
pub mod targets;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelFamily};
pub use metrics::WeightedSampleSet;
pub use policy::{MixturePolicy, ParticleStore, Proposal, WeightKind};
pub use rng::{seeded_rng, stream_rng, SimRng};
pub use samplers::{Algorithm, RunConfig, Schedule};
pub use targets::{ExplorationDensity, Target};
