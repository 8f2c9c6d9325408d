use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative pivot threshold below which a Gram matrix counts as singular.
pub const CHOLESKY_PIVOT_TOL: f64 = 1e-13;

/// Solve `g·X = b` for symmetric positive definite `g` via Cholesky.
///
/// A pivot at or below `CHOLESKY_PIVOT_TOL · max(diag g)` is reported as
/// [`Error::SingularGram`].
pub fn spd_solve(g: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Gram matrix must be square, got {}x{}",
            n,
            g.cols()
        )));
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, system has {n}",
            b.rows()
        )));
    }
    let max_diag = (0..n).map(|i| g.get(i, i)).fold(0.0, f64::max);
    let floor = CHOLESKY_PIVOT_TOL * max_diag;

    // Lower factor, column-major.
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = g.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if !(d > floor) {
            return Err(Error::SingularGram {
                column: j,
                pivot: d,
                max_diag,
            });
        }
        let d = d.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let mut s = g.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }

    let mut x = b.clone();
    for c in 0..b.cols() {
        let col = x.col_mut(c);
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l.get(i, k) * col[k];
            }
            col[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l.get(k, i) * col[k];
            }
            col[i] = s / l.get(i, i);
        }
    }
    Ok(x)
}

/// `g⁻¹` for symmetric positive definite `g`.
pub fn spd_inverse(g: &Matrix) -> Result<Matrix> {
    spd_solve(g, &Matrix::identity(g.rows()))
}
