//! Kernel functions and the oracle that answers `K(x, y)` queries for
//! dataset indices. The feature map is never materialized; every geometric
//! quantity downstream goes through pairwise kernel values.

use std::sync::Arc;

use crate::dataset::{DatasetHandle, PointStore};
use crate::error::{Error, Result};
use crate::matrix::{sym_eigenvalues, DenseMatrix};
use crate::sampling;
use crate::scalar::{as_f64, num, Scalar};

/// Relative tolerance for clamping tiny negative squared distances.
pub const SQDIST_CLAMP_REL: f64 = 1e-9;

/// Kernel family and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec<F: Scalar> {
    /// `K(x, y) = <x, y>`
    Linear,
    /// `K(x, y) = exp(-‖x-y‖² / (2σ²))`, or with `unsquared` the variant
    /// `exp(-‖x-y‖ / (2σ²))`.
    Rbf { sigma: F, unsquared: bool },
    /// `K(x, y) = (<x, y> + c)^degree`
    Polynomial { c: F, degree: u32 },
    /// Entries come from a user-supplied symmetric matrix.
    Precomputed,
    /// Degree-scaled similarity `K(i, j) = A_ij / (D_ii · D_jj)` from the
    /// spectral reduction.
    ScaledSimilarity,
}

impl<F: Scalar> KernelSpec<F> {
    pub fn rbf(sigma: F) -> Self {
        KernelSpec::Rbf {
            sigma,
            unsquared: false,
        }
    }

    pub fn polynomial(c: F, degree: u32) -> Self {
        KernelSpec::Polynomial { c, degree }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Rbf { sigma, .. } => {
                if !(sigma > F::zero()) || !sigma.is_finite() {
                    return Err(Error::invalid(format!("rbf sigma must be positive, got {sigma}")));
                }
            }
            KernelSpec::Polynomial { c, degree } => {
                if !(c >= F::zero()) || !c.is_finite() {
                    return Err(Error::invalid(format!(
                        "polynomial offset c must be >= 0, got {c}"
                    )));
                }
                if degree < 1 {
                    return Err(Error::invalid("polynomial degree must be >= 1"));
                }
            }
            KernelSpec::Linear | KernelSpec::Precomputed | KernelSpec::ScaledSimilarity => {}
        }
        Ok(())
    }
}

enum Backend<F: Scalar> {
    Analytic(KernelSpec<F>),
    Precomputed(DenseMatrix<F>),
    ScaledSimilarity {
        sim: Arc<crate::spectral::SimilarityMatrix<F>>,
        inv_degree: Vec<F>,
    },
}

/// Evaluates `K` for pairs of dataset indices. Immutable after construction
/// and safe to share across worker threads; the diagonal is cached.
pub struct KernelOracle<F: Scalar> {
    dataset: DatasetHandle<F>,
    backend: Backend<F>,
    diag: Vec<F>,
}

fn dot<F: Scalar>(x: &[F], y: &[F]) -> F {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

fn sq_norm_diff<F: Scalar>(x: &[F], y: &[F]) -> F {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn eval_analytic<F: Scalar>(spec: &KernelSpec<F>, x: &[F], y: &[F]) -> F {
    match *spec {
        KernelSpec::Linear => dot(x, y),
        KernelSpec::Rbf { sigma, unsquared } => {
            let d2 = sq_norm_diff(x, y);
            let arg = if unsquared { d2.sqrt() } else { d2 };
            (-arg / (num::<F>(2.0) * sigma * sigma)).exp()
        }
        KernelSpec::Polynomial { c, degree } => (dot(x, y) + c).powi(degree as i32),
        KernelSpec::Precomputed | KernelSpec::ScaledSimilarity => {
            unreachable!("non-analytic spec evaluated on vectors")
        }
    }
}

impl<F: Scalar> KernelOracle<F> {
    /// Oracle for an analytic kernel over a vector dataset.
    pub fn from_spec(dataset: DatasetHandle<F>, spec: KernelSpec<F>) -> Result<Self> {
        spec.validate()?;
        match spec {
            KernelSpec::Precomputed | KernelSpec::ScaledSimilarity => {
                return Err(Error::invalid(
                    "use KernelOracle::precomputed / spectral_reduce for matrix-backed kernels",
                ))
            }
            _ => {}
        }
        if !matches!(dataset.store(), PointStore::Vectors { .. }) {
            return Err(Error::invalid(
                "analytic kernels need coordinate vectors",
            ));
        }
        let diag = (0..dataset.len())
            .map(|i| eval_analytic(&spec, dataset.point(i), dataset.point(i)))
            .collect::<Vec<_>>();
        let oracle = Self {
            dataset,
            backend: Backend::Analytic(spec),
            diag,
        };
        oracle.validate_diag()?;
        Ok(oracle)
    }

    /// Oracle backed by a precomputed symmetric matrix; entries are returned
    /// bit-exactly. Runs a sampled nonnegativity check on squared distances
    /// to surface clearly indefinite inputs early.
    pub fn precomputed(dataset: DatasetHandle<F>, matrix: DenseMatrix<F>) -> Result<Self> {
        if matrix.n() != dataset.len() {
            return Err(Error::invalid(format!(
                "kernel matrix is {}x{} but dataset has {} entries",
                matrix.n(),
                matrix.n(),
                dataset.len()
            )));
        }
        let diag = (0..matrix.n()).map(|i| matrix.at(i, i)).collect();
        let oracle = Self {
            dataset,
            backend: Backend::Precomputed(matrix),
            diag,
        };
        oracle.validate_diag()?;
        oracle.spot_check_pairs(1024, 0x5eed)?;
        Ok(oracle)
    }

    pub(crate) fn scaled_similarity(
        dataset: DatasetHandle<F>,
        sim: Arc<crate::spectral::SimilarityMatrix<F>>,
        inv_degree: Vec<F>,
    ) -> Result<Self> {
        let diag = (0..dataset.len())
            .map(|i| sim.at(i, i) * inv_degree[i] * inv_degree[i])
            .collect();
        let oracle = Self {
            dataset,
            backend: Backend::ScaledSimilarity { sim, inv_degree },
            diag,
        };
        oracle.validate_diag()?;
        Ok(oracle)
    }

    fn validate_diag(&self) -> Result<()> {
        for (i, &d) in self.diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("K({i}, {i})"),
                });
            }
        }
        Ok(())
    }

    fn spot_check_pairs(&self, pairs: usize, seed: u64) -> Result<()> {
        let n = self.len();
        let mut rng = sampling::rng_from_seed(seed);
        use rand::Rng;
        for _ in 0..pairs {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            self.kernel_distance(i, j)?;
        }
        Ok(())
    }

    pub fn dataset(&self) -> &DatasetHandle<F> {
        &self.dataset
    }

    pub fn len(&self) -> usize {
        self.dataset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dataset.is_empty()
    }

    /// The kernel family this oracle evaluates.
    pub fn spec(&self) -> KernelSpec<F> {
        match &self.backend {
            Backend::Analytic(spec) => spec.clone(),
            Backend::Precomputed(_) => KernelSpec::Precomputed,
            Backend::ScaledSimilarity { .. } => KernelSpec::ScaledSimilarity,
        }
    }

    /// `K(x_i, x_j)`. Hot path: no bounds diagnostics beyond slice panics.
    #[inline]
    pub fn eval(&self, i: usize, j: usize) -> F {
        match &self.backend {
            Backend::Analytic(spec) => {
                eval_analytic(spec, self.dataset.point(i), self.dataset.point(j))
            }
            Backend::Precomputed(m) => m.at(i, j),
            Backend::ScaledSimilarity { sim, inv_degree } => {
                sim.at(i, j) * inv_degree[i] * inv_degree[j]
            }
        }
    }

    /// Cached `K(x_i, x_i)`.
    #[inline]
    pub fn diag(&self, i: usize) -> F {
        self.diag[i]
    }

    /// Checked kernel evaluation with range and finiteness diagnostics.
    pub fn kernel_eval(&self, i: usize, j: usize) -> Result<F> {
        let n = self.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        let v = self.eval(i, j);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: format!("K({i}, {j}); check kernel parameters"),
            });
        }
        Ok(v)
    }

    /// Squared feature-space distance `‖ϕ(x_i) - ϕ(x_j)‖²`, with tiny
    /// negative radicands clamped to zero. Hot path; for the checked variant
    /// see [`kernel_distance`](Self::kernel_distance).
    #[inline]
    pub fn sqdist(&self, i: usize, j: usize) -> F {
        let r = self.diag[i] + self.diag[j] - num::<F>(2.0) * self.eval(i, j);
        if r > F::zero() {
            r
        } else {
            F::zero()
        }
    }

    /// `‖ϕ(x_i) - ϕ(x_j)‖` with the clamp contract: radicands in
    /// `[-1e-9 · scale, 0)` are treated as zero, anything lower is an error
    /// (an indefinite precomputed matrix), where
    /// `scale = max(1, K(i,i) + K(j,j))`.
    pub fn kernel_distance(&self, i: usize, j: usize) -> Result<F> {
        let n = self.len();
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        let r = self.diag[i] + self.diag[j] - num::<F>(2.0) * self.eval(i, j);
        let scale = F::one().max(self.diag[i] + self.diag[j]);
        let threshold = num::<F>(SQDIST_CLAMP_REL) * scale;
        if r < -threshold {
            return Err(Error::IndefiniteKernel {
                radicand: as_f64(r),
                threshold: as_f64(threshold),
            });
        }
        Ok(r.max(F::zero()).sqrt())
    }

    /// Minimum eigenvalue of a sampled `m × m` principal submatrix together
    /// with its trace; the approximate PSD contract is
    /// `min_eigenvalue >= -1e-8 · trace`. `m` is capped at 64.
    pub fn psd_spot_check(&self, m: usize, seed: u64) -> Result<PsdCheck> {
        let m = m.clamp(1, 64).min(self.len());
        let mut rng = sampling::rng_from_seed(seed);
        let idx = sampling::sample_distinct(self.len(), m, &mut rng)?;
        let mut sub = vec![F::zero(); m * m];
        for a in 0..m {
            for b in 0..m {
                sub[a * m + b] = self.eval(idx[a], idx[b]);
            }
        }
        let trace: F = (0..m).map(|a| sub[a * m + a]).sum();
        let eigs = sym_eigenvalues(&mut sub, m);
        let min_eigenvalue = eigs
            .into_iter()
            .fold(F::infinity(), |acc, e| acc.min(e));
        Ok(PsdCheck {
            min_eigenvalue: as_f64(min_eigenvalue),
            trace: as_f64(trace),
            size: m,
        })
    }
}

/// Result of a sampled positive-semidefiniteness check.
#[derive(Debug, Clone, Copy)]
pub struct PsdCheck {
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub size: usize,
}

impl PsdCheck {
    pub fn passes(&self) -> bool {
        self.min_eigenvalue >= -1e-8 * self.trace
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::WeightedDataset;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn vec_dataset(points: Vec<Vec<f64>>) -> DatasetHandle<f64> {
        Arc::new(WeightedDataset::from_vectors_unweighted(points).unwrap())
    }

    #[test]
    fn linear_kernel_is_dot_product() {
        let ds = vec_dataset(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let oracle = KernelOracle::from_spec(ds, KernelSpec::Linear).unwrap();
        assert_eq!(oracle.kernel_eval(0, 1).unwrap(), 11.0);
    }

    #[test]
    fn polynomial_orthogonal_vectors() {
        let ds = vec_dataset(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let oracle =
            KernelOracle::from_spec(ds, KernelSpec::polynomial(0.0, 2)).unwrap();
        assert_eq!(oracle.kernel_eval(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn rbf_same_point_is_one() {
        let ds = vec_dataset(vec![vec![3.0, -1.0], vec![3.0, -1.0]]);
        let oracle = KernelOracle::from_spec(ds, KernelSpec::rbf(50.0)).unwrap();
        assert_eq!(oracle.kernel_eval(0, 1).unwrap(), 1.0);
        assert_eq!(oracle.kernel_distance(0, 1).unwrap(), 0.0);
    }

    #[test]
    fn rbf_unsquared_variant_differs() {
        let ds = vec_dataset(vec![vec![0.0], vec![2.0]]);
        let squared = KernelOracle::from_spec(ds.clone(), KernelSpec::rbf(1.0)).unwrap();
        let unsquared = KernelOracle::from_spec(
            ds,
            KernelSpec::Rbf {
                sigma: 1.0,
                unsquared: true,
            },
        )
        .unwrap();
        assert_relative_eq!(squared.eval(0, 1), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(unsquared.eval(0, 1), (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn distance_identical_point_is_zero() {
        let ds = vec_dataset(vec![vec![1.5, 2.5]]);
        for spec in [
            KernelSpec::Linear,
            KernelSpec::rbf(2.0),
            KernelSpec::polynomial(1.0, 3),
        ] {
            let oracle = KernelOracle::from_spec(ds.clone(), spec).unwrap();
            assert_eq!(oracle.kernel_distance(0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn linear_distance_reduces_to_euclidean() {
        let ds = vec_dataset(vec![vec![0.0], vec![3.0]]);
        let oracle = KernelOracle::from_spec(ds, KernelSpec::Linear).unwrap();
        assert_relative_eq!(oracle.kernel_distance(0, 1).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn quadratic_distance_matches_explicit_feature_map() {
        // Feature map of (<x,y>)^2 in 2-D: (x1², √2·x1x2, x2²).
        let ds = vec_dataset(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let oracle = KernelOracle::from_spec(ds, KernelSpec::polynomial(0.0, 2)).unwrap();
        let phi = |x: &[f64]| {
            vec![
                x[0] * x[0],
                std::f64::consts::SQRT_2 * x[0] * x[1],
                x[1] * x[1],
            ]
        };
        let (a, b) = (phi(&[1.0, 0.0]), phi(&[0.0, 1.0]));
        let euclid: f64 = a
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        assert_relative_eq!(euclid, std::f64::consts::SQRT_2, max_relative = 1e-15);
        assert_relative_eq!(
            oracle.kernel_distance(0, 1).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-12
        );
    }

    #[test]
    fn precomputed_returns_entries_bit_exactly() {
        let ds = Arc::new(WeightedDataset::<f64>::opaque(2, vec![1.0, 1.0]).unwrap());
        let m = DenseMatrix::new(2, vec![2.0, 0.5, 0.5, 3.0]).unwrap();
        let oracle = KernelOracle::precomputed(ds, m).unwrap();
        assert_eq!(oracle.kernel_eval(0, 1).unwrap(), 0.5);
        assert_eq!(oracle.diag(1), 3.0);
    }

    #[test]
    fn indefinite_precomputed_matrix_is_rejected() {
        // K(0,0)+K(1,1)-2K(0,1) = 2 - 6 = -4 < 0: not realizable by any
        // feature map.
        let ds = Arc::new(WeightedDataset::<f64>::opaque(2, vec![1.0, 1.0]).unwrap());
        let m = DenseMatrix::new(2, vec![1.0, 3.0, 3.0, 1.0]).unwrap();
        let err = match KernelOracle::precomputed(ds, m) {
            Err(e) => e,
            Ok(_) => panic!("indefinite matrix accepted"),
        };
        assert!(matches!(err, Error::IndefiniteKernel { .. }), "{err}");
    }

    #[test]
    fn out_of_range_index_is_reported() {
        let ds = vec_dataset(vec![vec![0.0]]);
        let oracle = KernelOracle::from_spec(ds, KernelSpec::Linear).unwrap();
        assert!(matches!(
            oracle.kernel_eval(0, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 1 })
        ));
    }

    #[test]
    fn invalid_parameters_rejected() {
        let ds = vec_dataset(vec![vec![0.0]]);
        assert!(KernelOracle::from_spec(ds.clone(), KernelSpec::rbf(0.0)).is_err());
        assert!(KernelOracle::from_spec(ds.clone(), KernelSpec::polynomial(-1.0, 2)).is_err());
        assert!(KernelOracle::from_spec(ds, KernelSpec::polynomial(0.0, 0)).is_err());
    }

    #[test]
    fn psd_spot_check_passes_for_analytic_kernels() {
        use rand::Rng;
        let mut rng = crate::sampling::rng_from_seed(12);
        let points: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.random::<f64>() * 10.0).collect())
            .collect();
        let ds = vec_dataset(points);
        for spec in [
            KernelSpec::Linear,
            KernelSpec::rbf(5.0),
            KernelSpec::polynomial(1.0, 4),
        ] {
            let oracle = KernelOracle::from_spec(ds.clone(), spec).unwrap();
            let check = oracle.psd_spot_check(64, 99).unwrap();
            assert!(check.passes(), "{check:?}");
        }
    }

    proptest! {
        #[test]
        fn kernel_symmetry(
            xs in proptest::collection::vec(
                proptest::collection::vec(-50.0f64..50.0, 3), 2..12),
            sigma in 0.5f64..100.0,
            c in 0.0f64..4.0,
            degree in 1u32..5,
        ) {
            let ds = vec_dataset(xs.clone());
            for spec in [KernelSpec::Linear, KernelSpec::rbf(sigma), KernelSpec::polynomial(c, degree)] {
                let oracle = KernelOracle::from_spec(ds.clone(), spec).unwrap();
                for i in 0..xs.len() {
                    for j in 0..xs.len() {
                        prop_assert_eq!(oracle.eval(i, j), oracle.eval(j, i));
                    }
                }
            }
        }

        #[test]
        fn sqdist_nonnegative(
            xs in proptest::collection::vec(
                proptest::collection::vec(-20.0f64..20.0, 2), 2..10),
            sigma in 0.5f64..50.0,
        ) {
            let ds = vec_dataset(xs.clone());
            let oracle = KernelOracle::from_spec(ds, KernelSpec::rbf(sigma)).unwrap();
            for i in 0..xs.len() {
                for j in 0..xs.len() {
                    prop_assert!(oracle.sqdist(i, j) >= 0.0);
                    prop_assert!(oracle.kernel_distance(i, j).unwrap() >= 0.0);
                }
            }
        }
    }
}
