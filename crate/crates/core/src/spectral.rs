//! Spectral clustering through the weighted kernel k-means reduction:
//! weights `w_i = D_ii` and kernel `K = D⁻¹ A D⁻¹` turn a similarity matrix
//! into a weighted kernel k-means instance the coreset pipeline solves
//! without any eigendecomposition.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::coreset::{build_coreset_rng, BuildConfig, FirstSeed};
use crate::dataset::{DatasetHandle, WeightedDataset, WeightedSet};
use crate::error::{Error, Result};
use crate::kernel::{KernelOracle, KernelSpec};
use crate::matrix::DenseMatrix;
use crate::sampling::{self, derive_seed, rng_from_seed};
use crate::scalar::{as_f64, num, Scalar};
use crate::solver::{evaluate_on_full, kmeanspp_seed_rng, lloyd, LloydConfig};

/// An `n × n` nonnegative-diagonal symmetric similarity, either dense or
/// induced on the fly from a base kernel over input vectors.
pub enum SimilarityMatrix<F: Scalar> {
    Dense(DenseMatrix<F>),
    Induced(KernelOracle<F>),
}

impl<F: Scalar> SimilarityMatrix<F> {
    pub fn dense(matrix: DenseMatrix<F>) -> Result<Self> {
        for i in 0..matrix.n() {
            if matrix.at(i, i) < F::zero() {
                return Err(Error::invalid(format!(
                    "similarity diagonal entry {i} is negative: {}",
                    matrix.at(i, i)
                )));
            }
        }
        Ok(SimilarityMatrix::Dense(matrix))
    }

    /// Similarity induced by an analytic kernel over a vector dataset.
    pub fn induced(dataset: DatasetHandle<F>, spec: KernelSpec<F>) -> Result<Self> {
        let oracle = KernelOracle::from_spec(dataset, spec)?;
        for i in 0..oracle.len() {
            if oracle.diag(i) < F::zero() {
                return Err(Error::invalid(format!(
                    "induced similarity has negative diagonal at {i}"
                )));
            }
        }
        Ok(SimilarityMatrix::Induced(oracle))
    }

    pub fn n(&self) -> usize {
        match self {
            SimilarityMatrix::Dense(m) => m.n(),
            SimilarityMatrix::Induced(o) => o.len(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> F {
        match self {
            SimilarityMatrix::Dense(m) => m.at(i, j),
            SimilarityMatrix::Induced(o) => o.eval(i, j),
        }
    }
}

/// How the degree vector was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeMode {
    Exact,
    Sampled { sample_size: usize },
}

/// Diagonal degrees `D_ii`, all strictly positive.
#[derive(Debug, Clone)]
pub struct DegreeVector<F: Scalar> {
    pub values: Vec<F>,
    pub mode: DegreeMode,
}

/// Exact row sums: `D_ii = Σ_j A_ij`, `O(n²)` accesses.
pub fn degrees_exact<F: Scalar>(sim: &SimilarityMatrix<F>) -> Result<DegreeVector<F>> {
    let n = sim.n();
    let values: Vec<F> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| sim.at(i, j)).sum())
        .collect();
    for (row, &v) in values.iter().enumerate() {
        if !(v > F::zero()) || !v.is_finite() {
            return Err(Error::NonPositiveDegree {
                row,
                value: as_f64(v),
            });
        }
    }
    Ok(DegreeVector {
        values,
        mode: DegreeMode::Exact,
    })
}

/// Subsampled degree estimates `D̂_ii = (n/|S|) Σ_{j∈S} A_ij` with one
/// uniform index sample shared by all rows; `O(n·|S|)` accesses. With
/// `sample_size == n` this reproduces [`degrees_exact`] exactly.
pub fn degrees_sampled<F: Scalar>(
    sim: &SimilarityMatrix<F>,
    sample_size: usize,
    seed: u64,
) -> Result<DegreeVector<F>> {
    let n = sim.n();
    if sample_size < 1 || sample_size > n {
        return Err(Error::invalid(format!(
            "degree sample size must be in [1, {n}], got {sample_size}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut sample = sampling::sample_distinct(n, sample_size, &mut rng)?;
    // Ascending order: cache friendly, and the full sample sums rows in the
    // same order as the exact path.
    sample.sort_unstable();
    let scale = num::<F>(n as f64) / num::<F>(sample_size as f64);
    let values: Vec<F> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s: F = sample.iter().map(|&j| sim.at(i, j)).sum();
            scale * s
        })
        .collect();
    for (row, &v) in values.iter().enumerate() {
        if !(v > F::zero()) || !v.is_finite() {
            return Err(Error::NonPositiveDegree {
                row,
                value: as_f64(v),
            });
        }
    }
    Ok(DegreeVector {
        values,
        mode: DegreeMode::Sampled { sample_size },
    })
}

/// Builds the weighted kernel k-means instance: weights `w_i = D_ii` over
/// opaque ids and a lazily evaluated kernel `K(i, j) = A_ij / (D_ii·D_jj)`.
pub fn spectral_reduce<F: Scalar>(
    sim: Arc<SimilarityMatrix<F>>,
    degrees: &DegreeVector<F>,
) -> Result<KernelOracle<F>> {
    let n = sim.n();
    if degrees.values.len() != n {
        return Err(Error::invalid(format!(
            "degree vector has {} entries for an {n}x{n} similarity",
            degrees.values.len()
        )));
    }
    for (row, &d) in degrees.values.iter().enumerate() {
        if !(d > F::zero()) {
            return Err(Error::NonPositiveDegree {
                row,
                value: as_f64(d),
            });
        }
    }
    let dataset = Arc::new(WeightedDataset::opaque(n, degrees.values.clone())?);
    let inv_degree = degrees.values.iter().map(|&d| F::one() / d).collect();
    KernelOracle::scaled_similarity(dataset, sim, inv_degree)
}

#[derive(Debug, Clone)]
pub struct SpectralConfig {
    /// Coreset size for the reduced instance.
    pub coreset_size: usize,
    /// Shared column sample size for degree estimation; sample sizes >= n
    /// (or `exact_degrees`) switch to exact row sums.
    pub degree_sample_size: usize,
    pub exact_degrees: bool,
    pub lloyd: LloydConfig,
    pub first_seed: FirstSeed,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            coreset_size: 2000,
            degree_sample_size: 1000,
            exact_degrees: false,
            lloyd: LloydConfig::default(),
            first_seed: FirstSeed::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralTimings {
    pub degrees_s: f64,
    pub coreset_s: f64,
    pub solve_s: f64,
    pub assign_s: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralOutcome<F: Scalar> {
    /// Cluster id per input row.
    pub partition: Vec<usize>,
    /// Weighted kernel k-means objective of the returned partition,
    /// computed with the same degrees used for clustering.
    pub objective: F,
    pub degree_mode: DegreeMode,
    pub coreset_entries: usize,
    pub timings: SpectralTimings,
}

/// Full pipeline: degree estimation, reduction to weighted kernel k-means,
/// coreset, kernelized k-means++ with Lloyd refinement on the coreset, and
/// an assignment pass over all rows.
pub fn spectral_cluster<F: Scalar>(
    sim: Arc<SimilarityMatrix<F>>,
    k: usize,
    cfg: &SpectralConfig,
    seed: u64,
) -> Result<SpectralOutcome<F>> {
    let n = sim.n();
    if k < 2 {
        return Err(Error::invalid(format!("spectral clustering needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("k = {k} exceeds n = {n}")));
    }

    let t0 = Instant::now();
    let degrees = if cfg.exact_degrees || cfg.degree_sample_size >= n {
        degrees_exact(&sim)?
    } else {
        degrees_sampled(&sim, cfg.degree_sample_size, derive_seed(seed, 1))?
    };
    let degree_mode = degrees.mode;
    let degrees_s = t0.elapsed().as_secs_f64();

    let oracle = spectral_reduce(sim, &degrees)?;
    let set = WeightedSet::full(oracle.dataset());

    let t1 = Instant::now();
    let mut build_rng = rng_from_seed(derive_seed(seed, 2));
    let build = BuildConfig::new(k, num::<F>(2.0), num::<F>(0.5))
        .with_samples(cfg.coreset_size);
    let coreset = build_coreset_rng(&oracle, &set, &build, &mut build_rng)?;
    let coreset_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let cset = coreset.as_set();
    let mut solve_rng = rng_from_seed(derive_seed(seed, 3));
    let init = kmeanspp_seed_rng(&oracle, &cset, k, &mut solve_rng)?;
    let solution = lloyd(&oracle, &cset, &init, k, &cfg.lloyd)?;
    let solve_s = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let eval = evaluate_on_full(&oracle, &set, &solution)?;
    let assign_s = t3.elapsed().as_secs_f64();

    Ok(SpectralOutcome {
        partition: eval.assignment,
        objective: eval.objective,
        degree_mode,
        coreset_entries: coreset.len(),
        timings: SpectralTimings {
            degrees_s,
            coreset_s,
            solve_s,
            assign_s,
        },
    })
}
