//! Seed derivation and RNG construction.
//!
//! Every random stream in the pipeline is a [`ChaCha8Rng`] seeded from a
//! 64-bit value obtained by mixing a parent seed with a stream label, so runs
//! and sub-streams never need to coordinate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `parent`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(parent ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labels for the independent sub-streams of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    History = 0x4849_5354,
    Truncation = 0x5452_554e,
    Traits = 0x5452_4149,
    Cousins = 0x434f_5553,
    PairSample = 0x5041_4952,
}

pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    rng_from_seed(derive_seed(seed, stream as u64))
}
