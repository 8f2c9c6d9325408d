use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::parallel::{axpy, dot};

/// Thin QR factors: `q` is `m × n` with orthonormal columns, `r` is `n × n`
/// upper triangular with a nonnegative diagonal.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: Matrix,
    pub r: Matrix,
}

/// Householder reduced QR of a tall (or square) matrix.
///
/// Rank deficiency is allowed; the corresponding diagonal entries of `r`
/// are then (near) zero.
pub fn reduced_qr(a: &Matrix) -> Result<QrFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!(
            "reduced QR needs rows >= cols, got {m}x{n}"
        )));
    }
    let mut w = a.clone();
    // Householder vectors, stored unnormalized with their squared norms.
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut r = Matrix::zeros(n, n);

    for k in 0..n {
        let x = &w.col(k)[k..];
        let norm = dot(x, x).sqrt();
        if norm == 0.0 {
            reflectors.push((Vec::new(), 0.0));
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        for j in k..n {
            let col = &mut w.col_mut(j)[k..];
            let t = -2.0 * dot(&v, col) / vv;
            axpy(col, t, &v);
        }
        reflectors.push((v, vv));
    }
    for j in 0..n {
        for i in 0..=j {
            r.set(i, j, w.get(i, j));
        }
    }

    let mut q = Matrix::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let (v, vv) = &reflectors[k];
        if *vv == 0.0 {
            continue;
        }
        for j in k..n {
            let col = &mut q.col_mut(j)[k..];
            let t = -2.0 * dot(v, col) / vv;
            axpy(col, t, v);
        }
    }

    for k in 0..n {
        if r.get(k, k) < 0.0 {
            for j in k..n {
                r.set(k, j, -r.get(k, j));
            }
            q.col_mut(k).iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(QrFactors { q, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        let a = Matrix::from_rows(&[&[3.0], &[4.0]]);
        let f = reduced_qr(&a).unwrap();
        assert!((f.q.get(0, 0) - 0.6).abs() < 1e-15);
        assert!((f.q.get(1, 0) - 0.8).abs() < 1e-15);
        assert!((f.r.get(0, 0) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_input() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = Matrix::from_rows(&[&[s, s], &[s, -s], &[0.0, 0.0]]);
        let f = reduced_qr(&a).unwrap();
        assert!(f.r.distance(&Matrix::identity(2)).unwrap() < 1e-14);
        assert!(f.q.distance(&a).unwrap() < 1e-14);
    }

    #[test]
    fn wide_is_rejected() {
        assert!(matches!(
            reduced_qr(&Matrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rank_deficient_is_allowed() {
        let a = Matrix::from_rows(&[
            &[1.0, 2.0, 0.0],
            &[2.0, 4.0, 0.0],
            &[3.0, 6.0, 0.0],
            &[1.0, 2.0, 0.0],
        ]);
        let f = reduced_qr(&a).unwrap();
        assert!(f.r.get(1, 1).abs() < 1e-14);
        assert_eq!(f.r.get(2, 2), 0.0);
        let back = f.q.matmul(&f.r).unwrap();
        assert!(back.distance(&a).unwrap() < 1e-13);
    }
}
