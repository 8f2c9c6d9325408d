//! Column-major dense matrices.
//!
//! `Matrix` is the 2-D workhorse behind unfoldings, factor matrices and the
//! small Gram systems of the ALS engine. Storage is column-major so that a
//! mode-1 unfolding of a [`DenseTensor`](crate::DenseTensor) is the same
//! buffer reinterpreted.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::{self, ROW_CHUNK};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Wrap column-major `data`; its length must be `rows * cols`.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Build from row slices. Panics on ragged input; intended for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n), "ragged rows");
        Matrix::from_fn(m, n, |i, j| rows[i][j])
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Square matrix with `diag` on the diagonal.
    pub fn diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Matrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// The leading `k` columns.
    pub fn leading_cols(&self, k: usize) -> Matrix {
        assert!(k <= self.cols);
        Matrix {
            rows: self.rows,
            cols: k,
            data: self.data[..k * self.rows].to_vec(),
        }
    }

    /// The leading `k` rows.
    pub fn leading_rows(&self, k: usize) -> Matrix {
        assert!(k <= self.rows);
        Matrix::from_fn(k, self.cols, |i, j| self.get(i, j))
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                out.data[j + i * self.cols] = v;
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                parallel::axpy(dst, other.get(k, j), self.col(k));
            }
        }
        Ok(out)
    }

    /// `selfᵀ * other`.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.cols, other.cols, |i, j| {
            parallel::dot(self.col(i), other.col(j))
        }))
    }

    /// `selfᵀ * self`, reduced over fixed row chunks so the result does not
    /// depend on the number of worker threads.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let m = self.rows;
        let mut g = parallel::chunked_reduce(m.div_ceil(ROW_CHUNK), n * n, |c| {
            let r0 = c * ROW_CHUNK;
            let r1 = (r0 + ROW_CHUNK).min(m);
            let mut g = vec![0.0; n * n];
            for a in 0..n {
                let ca = &self.col(a)[r0..r1];
                for b in a..n {
                    g[a + b * n] = parallel::dot(ca, &self.col(b)[r0..r1]);
                }
            }
            g
        });
        for a in 0..n {
            for b in (a + 1)..n {
                g[b + a * n] = g[a + b * n];
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data: g,
        }
    }

    /// `self * small` where `small` is a few columns wide; row chunks are
    /// computed in parallel and never reduced across, so output is
    /// thread-count independent.
    pub fn mul_small(&self, small: &Matrix) -> Result<Matrix> {
        if self.cols != small.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, small.rows, small.cols
            )));
        }
        let m = self.rows;
        let k = small.cols;
        let blocks: Vec<Vec<f64>> = (0..m.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let r0 = c * ROW_CHUNK;
                let r1 = (r0 + ROW_CHUNK).min(m);
                let len = r1 - r0;
                let mut block = vec![0.0; len * k];
                for j in 0..k {
                    let dst = &mut block[j * len..(j + 1) * len];
                    for l in 0..self.cols {
                        parallel::axpy(dst, small.get(l, j), &self.col(l)[r0..r1]);
                    }
                }
                block
            })
            .collect();
        let mut out = Matrix::zeros(m, k);
        for (c, block) in blocks.iter().enumerate() {
            let r0 = c * ROW_CHUNK;
            let len = block.len() / k.max(1);
            for j in 0..k {
                out.col_mut(j)[r0..r0 + len].copy_from_slice(&block[j * len..(j + 1) * len]);
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        parallel::sum_squares(&self.data).sqrt()
    }

    /// `‖self − other‖_F`.
    pub fn distance(&self, other: &Matrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(s.sqrt())
    }

    /// `‖selfᵀ self − I‖_F`, the column-orthonormality defect.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.gram();
        g.distance(&Matrix::identity(self.cols))
            .expect("gram is square")
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_is_column_major() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(m.data(), &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0]);
        assert_eq!(m.get(2, 1), 6.0);
    }

    #[test]
    fn rejects_bad_length() {
        assert!(Matrix::from_col_major(2, 3, vec![0.0; 5]).is_err());
    }

    #[test]
    fn products_agree() {
        let a = Matrix::from_fn(5, 3, |i, j| (i as f64 + 1.0) * (j as f64 - 0.5));
        let b = Matrix::from_fn(5, 2, |i, j| (i * j) as f64 + 0.25);
        let direct = a.t_matmul(&b).unwrap();
        let via_transpose = a.transpose().matmul(&b).unwrap();
        assert!(direct.distance(&via_transpose).unwrap() < 1e-12);
        assert!(a.matmul(&b).is_err());
    }

    #[test]
    fn gram_matches_t_matmul_across_chunks() {
        let a = Matrix::from_fn(3 * ROW_CHUNK + 17, 4, |i, j| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0
        });
        let g = a.gram();
        let h = a.t_matmul(&a).unwrap();
        assert!(g.distance(&h).unwrap() <= 1e-12 * h.frobenius_norm());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn mul_small_matches_matmul() {
        let a = Matrix::from_fn(2 * ROW_CHUNK + 5, 3, |i, j| ((i + 2 * j) % 13) as f64);
        let s = Matrix::from_rows(&[&[1.0, 0.5], &[-2.0, 0.0], &[0.25, 3.0]]);
        let x = a.mul_small(&s).unwrap();
        let y = a.matmul(&s).unwrap();
        assert_eq!(x, y);
    }
}
