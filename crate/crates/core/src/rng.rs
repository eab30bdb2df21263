//! Deterministic random numbers.
//!
//! The generator is xoshiro256++ seeded through SplitMix64 (the
//! `seed_from_u64` construction of `rand_xoshiro`). Floats are built from the
//! top 53 bits of each 64-bit output, Gaussian deviates use the Box-Muller
//! transform, and integer ranges use a 128-bit widening multiply. None of
//! these conversions depend on `rand` version details, so a seed produces the
//! same stream on every platform.
//!
//! Independent sub-streams (per channel, per processing stage) are derived
//! with [`derive_seed`], never by drawing from a parent stream, so results do
//! not depend on the order in which channels are processed.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::{Error, Result};

/// Stream tags used when splitting a user seed into independent sub-streams.
pub mod stream {
    pub const SCAL: u64 = 0x5343_414c_0000_0000;
    pub const NOISE: u64 = 0x4e4f_4953_0000_0000;
    pub const ALLPASS1: u64 = 0x4150_3100_0000_0000;
    pub const SIGNAL: u64 = 0x5349_474e_0000_0000;
    pub const ROOM: u64 = 0x524f_4f4d_0000_0000;
    pub const SENSOR: u64 = 0x534e_5352_0000_0000;
    pub const DECORR: u64 = 0x4445_4352_0000_0000;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of sub-stream `stream` from a parent seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// FNV-1a over bytes; stable across platforms and toolchains, unlike
/// `std::hash::DefaultHasher`.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// A fresh generator for sub-stream `stream` of `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        Self::new(derive_seed(seed, stream))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]`.
    pub fn next_uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(Error::InvalidRange { lo, hi });
        }
        Ok(self.uniform(lo, hi))
    }

    pub(crate) fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_f64();
        (lo + (hi - lo) * u).min(hi)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn next_index(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u128 + 1;
        lo + ((u128::from(self.next_u64()) * span) >> 64) as usize
    }

    /// Standard normal deviate (Box-Muller, one output per two uniforms).
    pub fn next_gaussian(&mut self) -> f64 {
        // 1 - u lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngState::new(42);
        let mut b = RngState::new(42);
        let va = a.next_uniform(-0.6, 0.6).unwrap();
        assert!((-0.6..=0.6).contains(&va));
        assert_eq!(va.to_bits(), b.next_uniform(-0.6, 0.6).unwrap().to_bits());
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn degenerate_range_returns_bound() {
        let mut r = RngState::new(3);
        assert_eq!(r.next_uniform(0.3, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn inverted_range_is_an_error() {
        let mut r = RngState::new(3);
        assert!(matches!(
            r.next_uniform(1.0, 0.0),
            Err(Error::InvalidRange { .. })
        ));
    }

    #[test]
    fn uniform_mean_is_one_half() {
        // Mean of 1e6 U[0,1] draws has sigma = 1/sqrt(12e6) ~ 2.9e-4; 0.002 is ~7 sigma.
        let mut r = RngState::new(7);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| r.next_uniform(0.0, 1.0).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
    }

    #[test]
    fn different_seeds_are_uncorrelated() {
        let mut a = RngState::new(1);
        let mut b = RngState::new(2);
        let xa: Vec<f64> = (0..100_000).map(|_| a.next_f64()).collect();
        let xb: Vec<f64> = (0..100_000).map(|_| b.next_f64()).collect();
        assert!(correlation(&xa, &xb).abs() < 0.01);
    }

    #[test]
    fn substreams_differ() {
        assert_ne!(derive_seed(5, stream::SCAL), derive_seed(5, stream::NOISE));
        assert_ne!(
            derive_seed(5, stream::SCAL),
            derive_seed(5, stream::SCAL + 1)
        );
        let mut a = RngState::substream(5, stream::SCAL);
        let mut b = RngState::substream(5, stream::SCAL + 1);
        let xa: Vec<f64> = (0..100_000).map(|_| a.next_f64()).collect();
        let xb: Vec<f64> = (0..100_000).map(|_| b.next_f64()).collect();
        assert!(correlation(&xa, &xb).abs() < 0.01);
    }

    #[test]
    fn index_stays_in_range_and_hits_both_ends() {
        let mut r = RngState::new(11);
        let draws: Vec<usize> = (0..10_000).map(|_| r.next_index(32, 40)).collect();
        assert!(draws.iter().all(|&n| (32..=40).contains(&n)));
        assert!(draws.contains(&32) && draws.contains(&40));
    }

    #[test]
    fn gaussian_moments() {
        let mut r = RngState::new(9);
        let n = 200_000;
        let x: Vec<f64> = (0..n).map(|_| r.next_gaussian()).collect();
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn fnv_is_stable() {
        // Reference FNV-1a 64 values.
        assert_eq!(hash_bytes(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(hash_bytes(b"a"), 0xaf63_dc4c_8601_ec8c);
    }
}
