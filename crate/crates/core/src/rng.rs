//! Deterministic randomness.
//!
//! Every stochastic operator draws through the [`Draws`] trait so that a run
//! is a pure function of its seed, and so tests can substitute scripted
//! sources (for example a source that always returns `1.0`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Source of the three primitive draws the optimizers need.
pub trait Draws {
    /// Uniform real in `[0, 1)`.
    fn uniform(&mut self) -> f64;
    /// Standard normal N(0, 1).
    fn standard_normal(&mut self) -> f64;
    /// Uniform integer in `[low, high]`, both ends inclusive.
    fn int_inclusive(&mut self, low: usize, high: usize) -> usize;
}

impl<D: Draws + ?Sized> Draws for &mut D {
    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }
    fn standard_normal(&mut self) -> f64 {
        (**self).standard_normal()
    }
    fn int_inclusive(&mut self, low: usize, high: usize) -> usize {
        (**self).int_inclusive(low, high)
    }
}

/// One seeded stream per run. ChaCha8 gives the same sequence on every
/// platform for a given seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Draws for RngStream {
    fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    fn int_inclusive(&mut self, low: usize, high: usize) -> usize {
        debug_assert!(low <= high);
        self.inner.random_range(low..=high)
    }
}

/// Mixes a base seed with a label into an independent 64-bit seed
/// (FNV-1a over the label, then a splitmix64 finalizer).
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
            assert_eq!(a.int_inclusive(2, 9), b.int_inclusive(2, 9));
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = RngStream::new(1);
        let mut b = RngStream::new(2);
        let xs: Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngStream::new(7);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn derived_seeds_depend_on_label() {
        assert_ne!(derive_seed(5, "sphere"), derive_seed(5, "rastrigin"));
        assert_eq!(derive_seed(5, "sphere"), derive_seed(5, "sphere"));
    }
}
