//! Dense symmetric matrices for precomputed kernels and similarity inputs.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An `n × n` dense symmetric matrix, row-major.
#[derive(Debug, Clone)]
pub struct DenseMatrix<F: Scalar> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    /// Validates symmetry and finiteness on construction.
    pub fn new(n: usize, data: Vec<F>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("matrix is empty".into()));
        }
        if data.len() != n * n {
            return Err(Error::invalid(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        for (idx, &x) in data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("matrix entry ({}, {})", idx / n, idx % n),
                });
            }
        }
        let m = Self { n, data };
        for i in 0..n {
            for j in (i + 1)..n {
                let a = m.at(i, j);
                let b = m.at(j, i);
                let scale = F::one().max(a.abs().max(b.abs()));
                if (a - b).abs() > crate::scalar::num::<F>(1e-9) * scale {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
///
/// `mat` is row-major `n × n` and is destroyed. Intended for the sampled
/// PSD checks (n ≤ 64); not a general-purpose eigensolver.
pub(crate) fn sym_eigenvalues<F: Scalar>(mat: &mut [F], n: usize) -> Vec<F> {
    debug_assert_eq!(mat.len(), n * n);
    if n == 1 {
        return vec![mat[0]];
    }
    let eps = F::epsilon();
    let frob: F = mat.iter().map(|&x| x * x).sum::<F>().sqrt();
    let tol = eps * frob.max(F::one());
    for _sweep in 0..64 {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + mat[p * n + q] * mat[p * n + q];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = mat[p * n + q];
                if apq.abs() <= tol * crate::scalar::num::<F>(1e-3) {
                    continue;
                }
                let app = mat[p * n + p];
                let aqq = mat[q * n + q];
                let theta = (aqq - app) / (crate::scalar::num::<F>(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + F::one()).sqrt();
                    let mag = F::one() / denom;
                    if theta < F::zero() {
                        -mag
                    } else {
                        mag
                    }
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                // A <- J^T A J for the (p, q) rotation.
                for k in 0..n {
                    let akp = mat[k * n + p];
                    let akq = mat[k * n + q];
                    mat[k * n + p] = c * akp - s * akq;
                    mat[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = mat[p * n + k];
                    let aqk = mat[q * n + k];
                    mat[p * n + k] = c * apk - s * aqk;
                    mat[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| mat[i * n + i]).collect()
}
