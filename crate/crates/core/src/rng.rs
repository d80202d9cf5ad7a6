//! Seeded random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream derived from the
//! run seed, so adding draws in one subsystem never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RngStream = ChaCha8Rng;

/// Independent stream identifiers derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Stage layout, resets, obstacle motion and scan noise.
    Environment = 1,
    /// Epsilon-greedy exploration draws.
    Exploration = 2,
    /// Replay-buffer batch sampling.
    Replay = 3,
    /// Dropout masks.
    Dropout = 4,
    /// Network weight initialization.
    Init = 5,
}

pub fn stream(seed: u64, which: Stream) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}
