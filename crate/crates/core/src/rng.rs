//! Seeded random source shared by every randomized routine in the workspace.
//!
//! All sampling goes through [`Rng`] so that a run is reproducible from its
//! seed alone: same seed, same draw sequence, on every platform. The stream
//! is ChaCha8 (via `rand_chacha`), a fixed, documented generator whose output
//! does not depend on word size or OS.

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw from [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw from [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.inner.sample::<f64, _>(rand_distr::StandardNormal)
    }

    /// Draws an index distributed according to `probs`, which must be
    /// nonnegative and sum to 1 (within rounding). Any rounding remainder
    /// is absorbed by the last index.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        assert!(!probs.is_empty(), "categorical draw over empty support");
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Uniform point on the probability simplex with `k` coordinates
    /// (normalized exponential draws).
    pub fn simplex(&mut self, k: usize) -> Vec<f64> {
        assert!(k >= 1, "simplex needs at least one coordinate");
        let mut v: Vec<f64> = (0..k).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let sum: f64 = v.iter().sum();
        for x in &mut v {
            *x /= sum;
        }
        v
    }

    /// Fisher-Yates shuffle driven by this stream.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    /// Child generator seeded from this stream.
    pub fn derive(&mut self) -> Rng {
        Rng::new(self.inner.random::<u64>())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses several seed components into one. Used to name independent
/// streams, e.g. one per sweep cell, without the streams overlapping.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x6A09_E667_F3BC_C909u64;
    for &p in parts {
        h = splitmix64(h ^ p);
        h = h.rotate_left(17);
    }
    splitmix64(h)
}
