//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! the implicit QL algorithm.

use super::{fix_signs, SpectrumReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Leading `k` eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Only the lower triangle of `g` is read.
pub fn sym_eig(g: &Matrix, k: usize) -> Result<SpectrumReport> {
    let n = g.rows();
    if g.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "symmetric eigensolver needs a square matrix, got {}x{}",
            n,
            g.cols()
        )));
    }
    if k > n {
        return Err(Error::DimensionMismatch(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    if n == 0 {
        return Ok(SpectrumReport {
            values: Vec::new(),
            left: Some(Matrix::zeros(0, 0)),
            right: None,
        });
    }
    // Symmetrize from the lower triangle.
    let mut v = Matrix::from_fn(n, n, |i, j| if i >= j { g.get(i, j) } else { g.get(j, i) });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let idx = &idx[..k];
    let values = idx.iter().map(|&i| d[i]).collect();
    let mut vecs = Matrix::zeros(n, k);
    for (c, &i) in idx.iter().enumerate() {
        vecs.col_mut(c).copy_from_slice(v.col(i));
    }
    fix_signs(&mut vecs, None);
    Ok(SpectrumReport {
        values,
        left: Some(vecs),
        right: None,
    })
}

// `v` is addressed as V[i][j] = v.get(i, j).
fn tred2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        let val = v.get(i, i);
        v.set(n - 1, i, val);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

fn tql2(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let limit = 30 * n.max(1);
    let mut steps = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        let m = m.min(n - 1);
        if m > l {
            loop {
                steps += 1;
                if steps > limit {
                    return Err(Error::NoConvergence {
                        routine: "sym_eig",
                        limit,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (ci, ci1) = pair_mut(v, i);
                    for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Columns `i` and `i + 1` as disjoint mutable slices.
fn pair_mut(v: &mut Matrix, i: usize) -> (&mut [f64], &mut [f64]) {
    let rows = v.rows();
    let (a, b) = v.data_mut().split_at_mut((i + 1) * rows);
    (&mut a[i * rows..], &mut b[..rows])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let r = sym_eig(&Matrix::identity(3), 3).unwrap();
        assert_eq!(r.values, vec![1.0; 3]);
        assert!(r.left.unwrap().orthonormality_defect() < 1e-15);
    }

    #[test]
    fn diagonal_sorted() {
        let r = sym_eig(&Matrix::diag(&[1.0, 9.0, 4.0]), 2).unwrap();
        assert_eq!(r.values, vec![9.0, 4.0]);
        let u = r.left.unwrap();
        assert_eq!(u.cols(), 2);
        assert!((u.get(1, 0) - 1.0).abs() < 1e-15);
        assert!((u.get(2, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_by_two() {
        let g = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let r = sym_eig(&g, 2).unwrap();
        assert!((r.values[0] - 3.0).abs() < 1e-14);
        assert!((r.values[1] - 1.0).abs() < 1e-14);
        let u = r.left.unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((u.get(0, 0) - s).abs() < 1e-14 && (u.get(1, 0) - s).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(sym_eig(&Matrix::zeros(2, 3), 1).is_err());
        assert!(sym_eig(&Matrix::identity(2), 3).is_err());
    }
}
