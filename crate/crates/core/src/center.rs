//! Centers in feature space and the `(k, z)`-clustering cost.
//!
//! A center is either the image of a dataset point or a linear combination
//! `Σ αᵢ ϕ(sᵢ)` over a support set; cluster means use `αᵢ = w(sᵢ)/w(Q)`.
//! Distances to centers expand into kernel values only.

use rayon::prelude::*;

use crate::dataset::WeightedSet;
use crate::error::{Error, Result};
use crate::kernel::{KernelOracle, SQDIST_CLAMP_REL};
use crate::scalar::{as_f64, num, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum Center<F: Scalar> {
    /// `ϕ(x_index)` for a dataset index.
    DataPoint(usize),
    /// `Σ coeffs[a] · ϕ(x_{support[a]})`.
    Combination { support: Vec<usize>, coeffs: Vec<F> },
}

impl<F: Scalar> Center<F> {
    /// Cluster mean of a weighted index set: `αᵢ = wᵢ / Σ w`.
    pub fn weighted_mean(support: Vec<usize>, weights: &[F]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyInput("center support is empty".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::invalid("support/weight length mismatch"));
        }
        let total: F = weights.iter().copied().sum();
        if !(total > F::zero()) {
            return Err(Error::invalid("center support has zero total weight"));
        }
        let coeffs = weights.iter().map(|&w| w / total).collect();
        Ok(Center::Combination { support, coeffs })
    }

    pub fn support_len(&self) -> usize {
        match self {
            Center::DataPoint(_) => 1,
            Center::Combination { support, .. } => support.len(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Center::DataPoint(i) => {
                if *i >= n {
                    return Err(Error::IndexOutOfRange { index: *i, len: n });
                }
            }
            Center::Combination { support, coeffs } => {
                if support.is_empty() {
                    return Err(Error::EmptyInput("center support is empty".into()));
                }
                if support.len() != coeffs.len() {
                    return Err(Error::invalid("support/coeff length mismatch"));
                }
                let mut seen = std::collections::HashSet::with_capacity(support.len());
                for &s in support {
                    if s >= n {
                        return Err(Error::IndexOutOfRange { index: s, len: n });
                    }
                    if !seen.insert(s) {
                        return Err(Error::invalid(format!("duplicate support index {s}")));
                    }
                }
                for &a in coeffs {
                    if !a.is_finite() {
                        return Err(Error::NonFinite {
                            context: "center coefficient".into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A center with its self-Gram term `Σₐ Σᵦ αₐ αᵦ K(sₐ, sᵦ)` precomputed, so
/// each point query costs `O(|support|)` kernel evaluations.
#[derive(Debug, Clone)]
pub struct PreparedCenter<F: Scalar> {
    pub support: Vec<usize>,
    pub coeffs: Vec<F>,
    pub gram_cc: F,
}

impl<F: Scalar> PreparedCenter<F> {
    pub fn prepare(oracle: &KernelOracle<F>, center: &Center<F>) -> Result<Self> {
        center.validate(oracle.len())?;
        Ok(match center {
            Center::DataPoint(i) => PreparedCenter {
                support: vec![*i],
                coeffs: vec![F::one()],
                gram_cc: oracle.diag(*i),
            },
            Center::Combination { support, coeffs } => {
                let gram_cc = center_gram(oracle, support, coeffs);
                PreparedCenter {
                    support: support.clone(),
                    coeffs: coeffs.clone(),
                    gram_cc,
                }
            }
        })
    }

    /// Clamped squared distance from `ϕ(x_i)` to this center.
    #[inline]
    pub fn sqdist_to(&self, oracle: &KernelOracle<F>, i: usize) -> F {
        let mut cross = F::zero();
        for (s, &a) in self.support.iter().zip(&self.coeffs) {
            cross = cross + a * oracle.eval(i, *s);
        }
        let r = oracle.diag(i) - num::<F>(2.0) * cross + self.gram_cc;
        if r > F::zero() {
            r
        } else {
            F::zero()
        }
    }
}

/// `Σₐ Σᵦ αₐ αᵦ K(sₐ, sᵦ)` for a center's support.
pub fn center_gram<F: Scalar>(oracle: &KernelOracle<F>, support: &[usize], coeffs: &[F]) -> F {
    let mut acc = F::zero();
    for (a, &sa) in support.iter().enumerate() {
        for (b, &sb) in support.iter().enumerate() {
            acc = acc + coeffs[a] * coeffs[b] * oracle.eval(sa, sb);
        }
    }
    acc
}

/// `‖ϕ(x_i) - c‖²` with the same clamp contract as `kernel_distance`;
/// supply `gram_cc` to reuse a precomputed self-Gram term.
pub fn center_sqdist<F: Scalar>(
    oracle: &KernelOracle<F>,
    i: usize,
    center: &Center<F>,
    gram_cc: Option<F>,
) -> Result<F> {
    center.validate(oracle.len())?;
    if i >= oracle.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: oracle.len(),
        });
    }
    let (support, coeffs): (&[usize], &[F]) = match center {
        Center::DataPoint(j) => (std::slice::from_ref(j), &[]),
        Center::Combination { support, coeffs } => (support, coeffs),
    };
    let one = [F::one()];
    let coeffs: &[F] = if coeffs.is_empty() { &one } else { coeffs };
    let gram = gram_cc.unwrap_or_else(|| center_gram(oracle, support, coeffs));
    let mut cross = F::zero();
    for (s, &a) in support.iter().zip(coeffs) {
        cross = cross + a * oracle.eval(i, *s);
    }
    let r = oracle.diag(i) - num::<F>(2.0) * cross + gram;
    let scale = F::one().max(oracle.diag(i) + gram.abs());
    let threshold = num::<F>(SQDIST_CLAMP_REL) * scale;
    if r < -threshold {
        return Err(Error::IndefiniteKernel {
            radicand: as_f64(r),
            threshold: as_f64(threshold),
        });
    }
    Ok(r.max(F::zero()))
}

/// Raises a squared distance to the `z/2`-th power: `dist^z`.
#[inline]
pub(crate) fn pow_z<F: Scalar>(sqdist: F, z: F) -> F {
    let two = num::<F>(2.0);
    if z == two {
        sqdist
    } else if z == F::one() {
        sqdist.sqrt()
    } else {
        sqdist.powf(z / two)
    }
}

/// Total cost and nearest-center assignment.
#[derive(Debug, Clone)]
pub struct CostResult<F: Scalar> {
    pub total: F,
    /// Per set entry, the index (into the center list) of its nearest center;
    /// distance ties go to the lowest center index.
    pub assignment: Vec<usize>,
}

/// `cost_z(X, C) = Σ w(x) · (min_c ‖ϕ(x) - c‖)^z` over a weighted index set.
///
/// Gram terms of each center are computed once and reused. Parallel over
/// points; totals are reduced in entry order, so the result is identical for
/// any thread count.
pub fn cost_z<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    centers: &[Center<F>],
    z: F,
) -> Result<CostResult<F>> {
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    if !(z >= F::one()) {
        return Err(Error::invalid(format!("z must be >= 1, got {z}")));
    }
    let prepared: Vec<PreparedCenter<F>> = centers
        .iter()
        .map(|c| PreparedCenter::prepare(oracle, c))
        .collect::<Result<_>>()?;
    Ok(cost_z_prepared(oracle, set, &prepared, z))
}

pub(crate) fn cost_z_prepared<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    prepared: &[PreparedCenter<F>],
    z: F,
) -> CostResult<F> {
    let per_point: Vec<(usize, F)> = set
        .indices
        .par_iter()
        .with_min_len(128)
        .map(|&idx| nearest_center(oracle, prepared, idx))
        .collect();
    let mut total = F::zero();
    let mut assignment = Vec::with_capacity(per_point.len());
    for ((best, d2), &w) in per_point.into_iter().zip(&set.weights) {
        total = total + w * pow_z(d2, z);
        assignment.push(best);
    }
    CostResult { total, assignment }
}

/// Total cost only, no assignment. Partial sums over fixed-size chunks are
/// combined in chunk order, so the value is independent of the thread count.
pub(crate) fn cost_total_prepared<F: Scalar>(
    oracle: &KernelOracle<F>,
    set: &WeightedSet<F>,
    prepared: &[PreparedCenter<F>],
    z: F,
) -> F {
    const CHUNK: usize = 2048;
    let m = set.len();
    let nchunks = m.div_ceil(CHUNK);
    let partials: Vec<F> = (0..nchunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * CHUNK;
            let hi = ((ci + 1) * CHUNK).min(m);
            let mut acc = F::zero();
            for pos in lo..hi {
                let (_, d2) = nearest_center(oracle, prepared, set.indices[pos]);
                acc = acc + set.weights[pos] * pow_z(d2, z);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(F::zero(), |a, b| a + b)
}

#[inline]
pub(crate) fn nearest_center<F: Scalar>(
    oracle: &KernelOracle<F>,
    prepared: &[PreparedCenter<F>],
    idx: usize,
) -> (usize, F) {
    let mut best = 0usize;
    let mut best_d2 = prepared[0].sqdist_to(oracle, idx);
    for (c, p) in prepared.iter().enumerate().skip(1) {
        let d2 = p.sqdist_to(oracle, idx);
        if d2 < best_d2 {
            best_d2 = d2;
            best = c;
        }
    }
    (best, best_d2)
}
