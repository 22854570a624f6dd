//! Per-path random streams.
//!
//! A stream is keyed by `(master, path, stage)`: the master seed keys a
//! ChaCha8 generator and `(path, stage)` selects one of its 2^64 streams.
//! Paths never share state, so output does not depend on how paths are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sampling stage. Each stage draws from its own stream so adding a
/// consumer to one stage leaves the others untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stage {
    Gamma = 1,
    Gaussian = 2,
    Factor = 3,
}

/// Master seed plus path index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub path: u64,
}

impl Seed {
    pub fn new(master: u64, path: u64) -> Self {
        Self { master, path }
    }

    pub fn rng(&self, stage: Stage) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream_id(self.path, stage));
        rng
    }
}

/// SplitMix64 finalizer over `(path, stage)`; bijective in `path` for a fixed stage.
fn stream_id(path: u64, stage: Stage) -> u64 {
    let mut z = path
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((stage as u64) << 56 | stage as u64);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
