//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`stream`], which returns a
//! ChaCha8 generator keyed by `seed` with the 64-bit stream id `stream_id`.
//! ChaCha is counter based: the output for a given `(seed, stream_id)` is a
//! fixed function of the block counter, so a sweep point draws the same
//! numbers no matter how many workers run or in what order points finish.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SweepRng = ChaCha8Rng;

pub fn stream(seed: u64, stream_id: u64) -> SweepRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Standard complex Gaussian, E|z|^2 = 1.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Stable stream id for a tuple of small integers.
pub fn stream_id(parts: &[i64]) -> u64 {
    // FNV-1a over the little-endian bytes
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
