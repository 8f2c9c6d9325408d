//! Dense matrix kernels: reduced QR, Cholesky solves, SVD and symmetric
//! eigendecomposition.
//!
//! These are single-threaded reference implementations. The decomposition
//! drivers only call them on small matrices (Gram systems, projected
//! unfoldings) or as baselines; the ALS engine avoids them on the large
//! unfoldings altogether.

mod cholesky;
mod eig;
mod qr;
mod svd;

pub use cholesky::{spd_inverse, spd_solve, CHOLESKY_PIVOT_TOL};
pub use eig::sym_eig;
pub use qr::{reduced_qr, QrFactors};
pub use svd::{dense_svd, dense_svd_parts};

use crate::matrix::Matrix;

/// Singular values (or eigenvalues) in descending order, with optional
/// vectors.
///
/// For [`dense_svd`] `values` are the singular values and `left`/`right`
/// hold `U` and `V` with `A = U·diag(σ)·Vᵀ`. For [`sym_eig`] `values` are
/// eigenvalues and `left` holds the eigenvectors; `right` is `None`.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub values: Vec<f64>,
    pub left: Option<Matrix>,
    pub right: Option<Matrix>,
}

impl SpectrumReport {
    /// `U·diag(σ)·Vᵀ`, when both vector sets are present.
    pub fn reconstruct(&self) -> Option<Matrix> {
        let (u, v) = (self.left.as_ref()?, self.right.as_ref()?);
        let mut us = u.clone();
        for (j, &s) in self.values.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul(&v.transpose()).ok()
    }
}

/// Flip each column so that its largest-magnitude entry is positive. The
/// same flips are mirrored onto `partner` when given.
pub(crate) fn fix_signs(vectors: &mut Matrix, mut partner: Option<&mut Matrix>) {
    for j in 0..vectors.cols() {
        let col = vectors.col(j);
        let mut best = 0.0f64;
        let mut sign = 1.0;
        for &v in col {
            if v.abs() > best {
                best = v.abs();
                sign = v.signum();
            }
        }
        if sign < 0.0 {
            vectors.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            if let Some(p) = partner.as_deref_mut() {
                if j < p.cols() {
                    p.col_mut(j).iter_mut().for_each(|x| *x = -*x);
                }
            }
        }
    }
}
