//! The kernel-mixture policy and its particle storage.

mod mixture;
mod prefix_tree;
mod store;

pub use mixture::{MixturePolicy, Proposal, SubsampledProposal};
pub use prefix_tree::PrefixSumTree;
pub use store::{ParticleStore, WeightKind};
