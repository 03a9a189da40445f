//! Per-trial random streams.
//!
//! A trial is identified by one 64-bit seed. Each consumer draws from its
//! own ChaCha stream under that seed, so adding a draw in one place never
//! shifts the numbers seen by another, and every mode solved on a trial
//! sees the same channels.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Substream {
    FadingUserEn = 1,
    FadingUserHrris = 2,
    FadingUserEve = 3,
    FadingHrrisEn = 4,
    CsiError = 5,
    PhaseInit = 6,
}

pub fn substream(seed: u64, which: Substream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

/// SplitMix64 finalizer; used to spread small integers over 64 bits.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
