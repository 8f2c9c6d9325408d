//! Golub-Kahan-Reinsch SVD: Householder bidiagonalization followed by
//! implicit-shift QR sweeps on the bidiagonal.

use super::{fix_signs, SpectrumReport};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Full SVD, values descending. Vectors (thin: `min(m,n)` columns) when
/// `want_vectors` is set.
pub fn dense_svd(a: &Matrix, want_vectors: bool) -> Result<SpectrumReport> {
    dense_svd_parts(a, want_vectors, want_vectors)
}

/// SVD computing only the requested vector sets.
pub fn dense_svd_parts(a: &Matrix, want_left: bool, want_right: bool) -> Result<SpectrumReport> {
    let (m, n) = (a.rows(), a.cols());
    if m.min(n) == 0 {
        return Ok(SpectrumReport {
            values: Vec::new(),
            left: want_left.then(|| Matrix::zeros(m, 0)),
            right: want_right.then(|| Matrix::zeros(n, 0)),
        });
    }
    let (values, mut left, mut right) = if m >= n {
        golub_kahan(a.clone(), want_left, want_right)?
    } else {
        let (s, u, v) = golub_kahan(a.transpose(), want_right, want_left)?;
        (s, v, u)
    };
    match (left.as_mut(), right.as_mut()) {
        (Some(u), v) => fix_signs(u, v),
        (None, Some(v)) => fix_signs(v, None),
        (None, None) => {}
    }
    Ok(SpectrumReport {
        values,
        left,
        right,
    })
}

#[inline]
fn col(m: usize, i: usize, j: usize) -> usize {
    i + j * m
}

/// Tall case (`m >= n`). Returns `(σ, U (m×n), V (n×n))`.
#[allow(clippy::needless_range_loop)]
fn golub_kahan(
    mut a: Matrix,
    want_u: bool,
    want_v: bool,
) -> Result<(Vec<f64>, Option<Matrix>, Option<Matrix>)> {
    let (m, n) = (a.rows(), a.cols());
    debug_assert!(m >= n);
    let nu = n;
    let mut s = vec![0.0; (m + 1).min(n)];
    let mut u = vec![0.0; if want_u { m * nu } else { 0 }];
    let mut v = vec![0.0; if want_v { n * n } else { 0 }];
    let mut e = vec![0.0; n];
    let mut work = vec![0.0; m];
    let ad = a.data_mut();

    let nct = (m - 1).min(n);
    let nrt = n.saturating_sub(2).min(m);
    for k in 0..nct.max(nrt) {
        if k < nct {
            let mut norm = 0.0f64;
            for i in k..m {
                norm = norm.hypot(ad[col(m, i, k)]);
            }
            s[k] = norm;
            if s[k] != 0.0 {
                if ad[col(m, k, k)] < 0.0 {
                    s[k] = -s[k];
                }
                for i in k..m {
                    ad[col(m, i, k)] /= s[k];
                }
                ad[col(m, k, k)] += 1.0;
            }
            s[k] = -s[k];
        }
        for j in (k + 1)..n {
            if k < nct && s[k] != 0.0 {
                let mut t = 0.0;
                for i in k..m {
                    t += ad[col(m, i, k)] * ad[col(m, i, j)];
                }
                t = -t / ad[col(m, k, k)];
                for i in k..m {
                    ad[col(m, i, j)] += t * ad[col(m, i, k)];
                }
            }
            e[j] = ad[col(m, k, j)];
        }
        if want_u && k < nct {
            for i in k..m {
                u[col(m, i, k)] = ad[col(m, i, k)];
            }
        }
        if k < nrt {
            let mut norm = 0.0f64;
            for i in (k + 1)..n {
                norm = norm.hypot(e[i]);
            }
            e[k] = norm;
            if e[k] != 0.0 {
                if e[k + 1] < 0.0 {
                    e[k] = -e[k];
                }
                for i in (k + 1)..n {
                    e[i] /= e[k];
                }
                e[k + 1] += 1.0;
            }
            e[k] = -e[k];
            if k + 1 < m && e[k] != 0.0 {
                for w in work.iter_mut().take(m).skip(k + 1) {
                    *w = 0.0;
                }
                for j in (k + 1)..n {
                    for i in (k + 1)..m {
                        work[i] += e[j] * ad[col(m, i, j)];
                    }
                }
                for j in (k + 1)..n {
                    let t = -e[j] / e[k + 1];
                    for i in (k + 1)..m {
                        ad[col(m, i, j)] += t * work[i];
                    }
                }
            }
            if want_v {
                for i in (k + 1)..n {
                    v[col(n, i, k)] = e[i];
                }
            }
        }
    }

    let mut p = n.min(m + 1);
    if nct < n {
        s[nct] = ad[col(m, nct, nct)];
    }
    if m < p {
        s[p - 1] = 0.0;
    }
    if nrt + 1 < p {
        e[nrt] = ad[col(m, nrt, p - 1)];
    }
    e[p - 1] = 0.0;

    if want_u {
        for j in nct..nu {
            for i in 0..m {
                u[col(m, i, j)] = 0.0;
            }
            u[col(m, j, j)] = 1.0;
        }
        for k in (0..nct).rev() {
            if s[k] != 0.0 {
                for j in (k + 1)..nu {
                    let mut t = 0.0;
                    for i in k..m {
                        t += u[col(m, i, k)] * u[col(m, i, j)];
                    }
                    t = -t / u[col(m, k, k)];
                    for i in k..m {
                        u[col(m, i, j)] += t * u[col(m, i, k)];
                    }
                }
                for i in k..m {
                    u[col(m, i, k)] = -u[col(m, i, k)];
                }
                u[col(m, k, k)] += 1.0;
                for i in 0..k {
                    u[col(m, i, k)] = 0.0;
                }
            } else {
                for i in 0..m {
                    u[col(m, i, k)] = 0.0;
                }
                u[col(m, k, k)] = 1.0;
            }
        }
    }

    if want_v {
        for k in (0..n).rev() {
            if k < nrt && e[k] != 0.0 {
                for j in (k + 1)..nu {
                    let mut t = 0.0;
                    for i in (k + 1)..n {
                        t += v[col(n, i, k)] * v[col(n, i, j)];
                    }
                    t = -t / v[col(n, k + 1, k)];
                    for i in (k + 1)..n {
                        v[col(n, i, j)] += t * v[col(n, i, k)];
                    }
                }
            }
            for i in 0..n {
                v[col(n, i, k)] = 0.0;
            }
            v[col(n, k, k)] = 1.0;
        }
    }

    // Rotate columns a, b of a column-major buffer with `rows` rows.
    fn rotate(buf: &mut [f64], rows: usize, a: usize, b: usize, cs: f64, sn: f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (first, second) = buf.split_at_mut(hi * rows);
        let ca = &mut first[lo * rows..(lo + 1) * rows];
        let cb = &mut second[..rows];
        let (xa, xb) = if a < b { (ca, cb) } else { (cb, ca) };
        for (x, y) in xa.iter_mut().zip(xb.iter_mut()) {
            let t = cs * *x + sn * *y;
            *y = -sn * *x + cs * *y;
            *x = t;
        }
    }

    let pp = p - 1;
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let limit = 100 * n.max(1);
    let mut steps = 0usize;
    while p > 0 {
        let mut k: isize = p as isize - 2;
        while k >= 0 {
            let ku = k as usize;
            if e[ku].abs() <= tiny + eps * (s[ku].abs() + s[ku + 1].abs()) {
                e[ku] = 0.0;
                break;
            }
            k -= 1;
        }
        let kase;
        if k == p as isize - 2 {
            kase = 4;
        } else {
            let mut ks: isize = p as isize - 1;
            while ks > k {
                let ksu = ks as usize;
                let t = (if ksu != p { e[ksu].abs() } else { 0.0 })
                    + (if ks != k + 1 { e[ksu - 1].abs() } else { 0.0 });
                if s[ksu].abs() <= tiny + eps * t {
                    s[ksu] = 0.0;
                    break;
                }
                ks -= 1;
            }
            if ks == k {
                kase = 3;
            } else if ks == p as isize - 1 {
                kase = 1;
            } else {
                kase = 2;
                k = ks;
            }
        }
        let k = (k + 1) as usize;

        match kase {
            1 => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    if want_v {
                        rotate(&mut v, n, j, p - 1, cs, sn);
                    }
                }
            }
            2 => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    if want_u {
                        rotate(&mut u, m, j, k - 1, cs, sn);
                    }
                }
            }
            3 => {
                steps += 1;
                if steps > limit {
                    return Err(Error::NoConvergence {
                        routine: "dense_svd",
                        limit,
                    });
                }
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                for j in k..p - 1 {
                    let mut t = f.hypot(g);
                    let mut cs = f / t;
                    let mut sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    if want_v {
                        rotate(&mut v, n, j, j + 1, cs, sn);
                    }
                    t = f.hypot(g);
                    cs = f / t;
                    sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    if want_u && j < m - 1 {
                        rotate(&mut u, m, j, j + 1, cs, sn);
                    }
                }
                e[p - 2] = f;
            }
            _ => {
                let mut k = k;
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    if want_v {
                        for i in 0..=pp {
                            v[col(n, i, k)] = -v[col(n, i, k)];
                        }
                    }
                }
                while k < pp {
                    if s[k] >= s[k + 1] {
                        break;
                    }
                    s.swap(k, k + 1);
                    if want_v && k < n - 1 {
                        for i in 0..n {
                            v.swap(col(n, i, k), col(n, i, k + 1));
                        }
                    }
                    if want_u && k < m - 1 {
                        for i in 0..m {
                            u.swap(col(m, i, k), col(m, i, k + 1));
                        }
                    }
                    k += 1;
                }
                p -= 1;
            }
        }
    }

    s.truncate(n);
    let u = want_u.then(|| Matrix::from_col_major(m, nu, u).expect("sized above"));
    let v = want_v.then(|| Matrix::from_col_major(n, n, v).expect("sized above"));
    Ok((s, u, v))
}
