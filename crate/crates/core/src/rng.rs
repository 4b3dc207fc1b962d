//! Reproducible random streams.
//!
//! Every run in a sweep gets its own ChaCha8 stream: the generator is keyed by
//! the base seed and the run index selects the ChaCha stream id. Two runs of a
//! sweep therefore never share a stream, and a single run can be replayed from
//! `(base_seed, index)` alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `index` of the family keyed by `base_seed`.
pub fn stream_rng(base_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

/// Generator for a single stand-alone run.
pub fn seeded_rng(seed: u64) -> SimRng {
    stream_rng(seed, 0)
}
