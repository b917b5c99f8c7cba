//! Seeded randomness: one named PRNG, prefix-sum inverse-CDF draws, and
//! distinct-index sampling. Every randomized routine in the crate funnels
//! through this module so a fixed seed replays bit-identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The PRNG used throughout: ChaCha with 8 rounds, seedable from a `u64`,
/// identical stream on every platform.
pub type Prng = ChaCha8Rng;

/// Creates the crate-wide PRNG from a user seed.
pub fn rng_from_seed(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// Derives an independent child seed for a subtask (repetition, stage, ...).
///
/// SplitMix64 finalizer over the pair; cheap and well mixed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut x = master ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Inverse-CDF sampler over a prefix-sum array: O(n) build, O(log n) per draw.
///
/// Zero-mass entries are never selected.
pub struct WeightedCdf<F: Scalar> {
    prefix: Vec<F>,
    total: F,
}

impl<F: Scalar> WeightedCdf<F> {
    /// Builds the sampler from nonnegative masses. Returns `None` when the
    /// total mass is zero or non-finite (callers handle the degenerate case).
    pub fn new(masses: &[F]) -> Option<Self> {
        let mut prefix = Vec::with_capacity(masses.len());
        let mut acc = F::zero();
        for &m in masses {
            debug_assert!(m >= F::zero(), "negative mass in CDF");
            acc = acc + m;
            prefix.push(acc);
        }
        if acc <= F::zero() || !acc.is_finite() {
            return None;
        }
        Some(Self {
            prefix,
            total: acc,
        })
    }

    pub fn total(&self) -> F {
        self.total
    }

    /// Draws one index with probability proportional to its mass.
    pub fn sample(&self, rng: &mut Prng) -> usize {
        let u: f64 = rng.random();
        let target = crate::scalar::num::<F>(u) * self.total;
        // First prefix strictly above the target; never lands on a
        // zero-mass entry because its prefix equals its predecessor's.
        let idx = self.prefix.partition_point(|&p| p <= target);
        idx.min(self.prefix.len() - 1)
    }
}

/// Draws `m` distinct indices uniformly from `0..n`, in selection order.
///
/// Partial Fisher–Yates; with `m == n` this is a full permutation, i.e.
/// sampling without replacement that covers the whole range.
pub fn sample_distinct(n: usize, m: usize, rng: &mut Prng) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::invalid(format!(
            "cannot draw {m} distinct indices from a range of {n}"
        )));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(pool)
}
