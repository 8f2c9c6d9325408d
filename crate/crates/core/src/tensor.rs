//! Dense N-th order tensors, unfoldings and mode-n contractions.
//!
//! Data is stored in generalized column-major order: the first index varies
//! fastest. With that layout the mode-n unfolding column index of entry
//! `(i₁,…,i_N)` is `Σ_{k≠n} i_k·J_k` with `J_k = ∏_{m<k, m≠n} I_m` (0-based),
//! so viewing the buffer as `Q` consecutive slabs of shape `P × I_n`
//! (`P = ∏_{k<n} I_k`, `Q = ∏_{k>n} I_k`) gives
//!
//! ```text
//! A_(n)[i, p + q·P] = data[p + i·P + q·P·I_n]
//! ```
//!
//! Every contraction below walks those slabs in fixed chunks of
//! [`FIBER_CHUNK`] unfolding columns and never materializes `A_(n)`.
//!
//! Modes are 1-based throughout the public API.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::parallel::{self, FIBER_CHUNK};

/// Extents `(I₁,…,I_N)` of a tensor; `N ≥ 1`, every extent ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape(
                "a tensor needs at least one mode".into(),
            ));
        }
        if let Some(pos) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!(
                "extent of mode {} is zero",
                pos + 1
            )));
        }
        dims.iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape(format!("{dims:?} overflows the index range")))?;
        Ok(Shape(dims))
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Total number of entries, `∏ I_n`.
    pub fn numel(&self) -> usize {
        self.0.iter().product()
    }

    /// Extent of a 1-based mode.
    pub fn extent(&self, mode: usize) -> usize {
        self.0[mode - 1]
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.order() {
            return Err(Error::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// `(P, I_n, Q)`: product of extents before the mode, the extent, and the
    /// product after it.
    pub fn split(&self, mode: usize) -> (usize, usize, usize) {
        let k = mode - 1;
        let left = self.0[..k].iter().product();
        let right = self.0[k + 1..].iter().product();
        (left, self.0[k], right)
    }

    /// Number of columns of the mode-n unfolding, `∏_{k≠n} I_k`.
    pub fn unfolded_cols(&self, mode: usize) -> usize {
        let (p, _, q) = self.split(mode);
        p * q
    }

    /// Same shape with the extent of `mode` replaced.
    pub fn with_extent(&self, mode: usize, extent: usize) -> Shape {
        let mut d = self.0.clone();
        d[mode - 1] = extent;
        Shape(d)
    }

    /// Flat storage offset of a 0-based multi-index.
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.order());
        let mut off = 0;
        let mut stride = 1;
        for (&i, &d) in index.iter().zip(&self.0) {
            debug_assert!(i < d);
            off += i * stride;
            stride *= d;
        }
        off
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Dense tensor with generalized column-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.numel() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for shape {shape} ({} entries)",
                data.len(),
                shape.numel()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        let n = shape.numel();
        DenseTensor {
            shape,
            data: vec![0.0; n],
        }
    }

    /// Fill from a function of the 0-based multi-index.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let n = shape.numel();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; shape.order()];
        for _ in 0..n {
            data.push(f(&idx));
            for (i, &d) in idx.iter_mut().zip(shape.dims()) {
                *i += 1;
                if *i < d {
                    break;
                }
                *i = 0;
            }
        }
        DenseTensor { shape, data }
    }

    #[inline]
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.order()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a 0-based multi-index.
    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.shape.offset(index)]
    }

    /// Mode-n unfolding `A_(n)`, an `I_n × ∏_{k≠n} I_k` matrix.
    pub fn matricize(&self, mode: usize) -> Result<Matrix> {
        self.shape.check_mode(mode)?;
        let (p, i_n, q) = self.shape.split(mode);
        if p == 1 {
            return Matrix::from_col_major(i_n, q, self.data.clone());
        }
        let cols = p * q;
        let mut out = vec![0.0; self.data.len()];
        for qq in 0..q {
            for i in 0..i_n {
                let src = &self.data[qq * p * i_n + i * p..qq * p * i_n + (i + 1) * p];
                for (pp, &v) in src.iter().enumerate() {
                    out[i + (pp + qq * p) * i_n] = v;
                }
            }
        }
        Matrix::from_col_major(i_n, cols, out)
    }

    /// Inverse of [`matricize`](Self::matricize): fold an unfolding back into
    /// a tensor of shape `target`.
    pub fn tensorize(m: &Matrix, mode: usize, target: &Shape) -> Result<DenseTensor> {
        target.check_mode(mode)?;
        let (p, i_n, q) = target.split(mode);
        if m.rows() != i_n || m.cols() != p * q {
            return Err(Error::DimensionMismatch(format!(
                "a {}x{} matrix is not the mode-{mode} unfolding of shape {target}",
                m.rows(),
                m.cols()
            )));
        }
        if p == 1 {
            return DenseTensor::new(target.clone(), m.data().to_vec());
        }
        let mut data = vec![0.0; target.numel()];
        for qq in 0..q {
            for i in 0..i_n {
                let dst = &mut data[qq * p * i_n + i * p..qq * p * i_n + (i + 1) * p];
                for (pp, d) in dst.iter_mut().enumerate() {
                    *d = m.get(i, pp + qq * p);
                }
            }
        }
        DenseTensor::new(target.clone(), data)
    }

    /// Fold a `(∏_{k≠n} I_k) × K` matrix, i.e. the *transpose* of a mode-n
    /// unfolding, into a tensor whose mode-n extent is `K`.
    pub fn tensorize_transposed(mt: &Matrix, mode: usize, target: &Shape) -> Result<DenseTensor> {
        target.check_mode(mode)?;
        let (p, k, q) = target.split(mode);
        let j = p * q;
        if mt.rows() != j || mt.cols() != k {
            return Err(Error::DimensionMismatch(format!(
                "a {}x{} matrix is not a transposed mode-{mode} unfolding of shape {target}",
                mt.rows(),
                mt.cols()
            )));
        }
        if q == 1 {
            return DenseTensor::new(target.clone(), mt.data().to_vec());
        }
        let mut data = vec![0.0; target.numel()];
        for qq in 0..q {
            for kk in 0..k {
                let src = &mt.col(kk)[qq * p..(qq + 1) * p];
                data[kk * p + qq * p * k..kk * p + qq * p * k + p].copy_from_slice(src);
            }
        }
        DenseTensor::new(target.clone(), data)
    }

    /// `self ×_mode u`: contracts mode `mode` against the columns of `u`.
    pub fn mode_n_product(&self, u: &Matrix, mode: usize) -> Result<DenseTensor> {
        self.shape.check_mode(mode)?;
        let i_n = self.shape.extent(mode);
        if u.cols() != i_n {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product needs {i_n} columns, factor has {}",
                u.cols()
            )));
        }
        // (U·A_(n))ᵀ = A_(n)ᵀ·Uᵀ
        let yt = self.unfold_t_times(mode, &u.transpose())?;
        DenseTensor::tensorize_transposed(&yt, mode, &self.shape.with_extent(mode, u.rows()))
    }

    /// Apply several mode products along distinct modes, in ascending mode
    /// order.
    pub fn multi_mode_product(&self, factors: &[(&Matrix, usize)]) -> Result<DenseTensor> {
        let mut sorted: Vec<(&Matrix, usize)> = factors.to_vec();
        sorted.sort_by_key(|&(_, m)| m);
        for w in sorted.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(Error::InvalidMode {
                    mode: w[0].1,
                    order: self.order(),
                });
            }
        }
        for &(_, m) in &sorted {
            self.shape.check_mode(m)?;
        }
        let mut cur: Option<DenseTensor> = None;
        for (u, m) in sorted {
            let next = cur.as_ref().unwrap_or(self).mode_n_product(u, m)?;
            cur = Some(next);
        }
        Ok(cur.unwrap_or_else(|| self.clone()))
    }

    fn chunk_count(&self, mode: usize) -> usize {
        self.shape.unfolded_cols(mode).div_ceil(FIBER_CHUNK)
    }

    /// Visit the slab pieces `(q, p0, p1)` that make up unfolding columns
    /// `[j0, j1)`; each piece covers columns `q·P + p0 .. q·P + p1`.
    fn for_each_piece(p: usize, j0: usize, j1: usize, mut f: impl FnMut(usize, usize, usize)) {
        let mut j = j0;
        while j < j1 {
            let q = j / p;
            let p0 = j - q * p;
            let p1 = (j1 - q * p).min(p);
            f(q, p0, p1);
            j = q * p + p1;
        }
    }

    /// `A_(mode) · m` for an `(∏_{k≠n} I_k) × r` matrix `m`, streamed over
    /// fiber chunks.
    pub fn unfold_times(&self, mode: usize, m: &Matrix) -> Result<Matrix> {
        self.shape.check_mode(mode)?;
        let (p, i_n, q) = self.shape.split(mode);
        if m.rows() != p * q {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} unfolding has {} columns, multiplier has {} rows",
                p * q,
                m.rows()
            )));
        }
        let r = m.cols();
        let len = i_n * r;
        let cols = p * q;
        let data = &self.data;
        let acc = parallel::chunked_reduce(self.chunk_count(mode), len, |c| {
            let j0 = c * FIBER_CHUNK;
            let j1 = (j0 + FIBER_CHUNK).min(cols);
            let mut part = vec![0.0; len];
            if p == 1 {
                for j in j0..j1 {
                    let fiber = &data[j * i_n..(j + 1) * i_n];
                    for cc in 0..r {
                        parallel::axpy(&mut part[cc * i_n..(cc + 1) * i_n], m.get(j, cc), fiber);
                    }
                }
            } else {
                Self::for_each_piece(p, j0, j1, |qq, p0, p1| {
                    let base = qq * p * i_n;
                    for cc in 0..r {
                        let mcol = &m.col(cc)[qq * p + p0..qq * p + p1];
                        for i in 0..i_n {
                            let x = &data[base + i * p + p0..base + i * p + p1];
                            part[i + cc * i_n] += parallel::dot(x, mcol);
                        }
                    }
                });
            }
            part
        });
        Matrix::from_col_major(i_n, r, acc)
    }

    /// `A_(mode)ᵀ · m` for an `I_n × r` matrix `m`, streamed over fiber
    /// chunks. Each output row depends on one fiber only, so no cross-chunk
    /// reduction is needed.
    pub fn unfold_t_times(&self, mode: usize, m: &Matrix) -> Result<Matrix> {
        self.shape.check_mode(mode)?;
        let (p, i_n, q) = self.shape.split(mode);
        if m.rows() != i_n {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} extent is {i_n}, multiplier has {} rows",
                m.rows()
            )));
        }
        let r = m.cols();
        let cols = p * q;
        let data = &self.data;
        let blocks: Vec<Vec<f64>> = (0..self.chunk_count(mode))
            .into_par_iter()
            .map(|c| {
                let j0 = c * FIBER_CHUNK;
                let j1 = (j0 + FIBER_CHUNK).min(cols);
                let len = j1 - j0;
                let mut block = vec![0.0; len * r];
                if p == 1 {
                    for j in j0..j1 {
                        let fiber = &data[j * i_n..(j + 1) * i_n];
                        for cc in 0..r {
                            block[j - j0 + cc * len] = parallel::dot(fiber, m.col(cc));
                        }
                    }
                } else {
                    Self::for_each_piece(p, j0, j1, |qq, p0, p1| {
                        let base = qq * p * i_n;
                        let off = qq * p + p0 - j0;
                        let w = p1 - p0;
                        for i in 0..i_n {
                            let x = &data[base + i * p + p0..base + i * p + p1];
                            for cc in 0..r {
                                let dst = &mut block[cc * len + off..cc * len + off + w];
                                parallel::axpy(dst, m.get(i, cc), x);
                            }
                        }
                    });
                }
                block
            })
            .collect();
        let mut out = Matrix::zeros(cols, r);
        for (c, block) in blocks.iter().enumerate() {
            let j0 = c * FIBER_CHUNK;
            let len = (j0 + FIBER_CHUNK).min(cols) - j0;
            for cc in 0..r {
                out.col_mut(cc)[j0..j0 + len].copy_from_slice(&block[cc * len..(cc + 1) * len]);
            }
        }
        Ok(out)
    }

    /// Gram matrix `A_(mode)·A_(mode)ᵀ` of the unfolding, streamed.
    pub fn unfold_gram(&self, mode: usize) -> Result<Matrix> {
        self.shape.check_mode(mode)?;
        let (p, i_n, q) = self.shape.split(mode);
        let cols = p * q;
        let data = &self.data;
        let mut g = parallel::chunked_reduce(self.chunk_count(mode), i_n * i_n, |c| {
            let j0 = c * FIBER_CHUNK;
            let j1 = (j0 + FIBER_CHUNK).min(cols);
            let mut part = vec![0.0; i_n * i_n];
            if p == 1 {
                for j in j0..j1 {
                    let fiber = &data[j * i_n..(j + 1) * i_n];
                    for b in 0..i_n {
                        let fb = fiber[b];
                        if fb != 0.0 {
                            parallel::axpy(&mut part[b * i_n..b * i_n + b + 1], fb, &fiber[..=b]);
                        }
                    }
                }
            } else {
                Self::for_each_piece(p, j0, j1, |qq, p0, p1| {
                    let base = qq * p * i_n;
                    for b in 0..i_n {
                        let xb = &data[base + b * p + p0..base + b * p + p1];
                        for a in 0..=b {
                            let xa = &data[base + a * p + p0..base + a * p + p1];
                            part[a + b * i_n] += parallel::dot(xa, xb);
                        }
                    }
                });
            }
            part
        });
        for b in 0..i_n {
            for a in 0..b {
                g[b + a * i_n] = g[a + b * i_n];
            }
        }
        Matrix::from_col_major(i_n, i_n, g)
    }

    pub fn frobenius_norm(&self) -> f64 {
        parallel::sum_squares(&self.data).sqrt()
    }

    /// `‖self − other‖_F`, accumulated in fixed chunks.
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "shapes {} and {} differ",
                self.shape, other.shape
            )));
        }
        let partials: Vec<f64> = self
            .data
            .par_chunks(parallel::NORM_CHUNK)
            .zip(other.data.par_chunks(parallel::NORM_CHUNK))
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
            .collect();
        Ok(partials.iter().sum::<f64>().sqrt())
    }

    /// Add `alpha * other` in place.
    pub fn add_scaled(&mut self, alpha: f64, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(format!(
                "shapes {} and {} differ",
                self.shape, other.shape
            )));
        }
        parallel::axpy(&mut self.data, alpha, &other.data);
        Ok(())
    }
}

/// `‖b − a‖_F / ‖a‖_F`.
pub fn relative_error(a: &DenseTensor, b: &DenseTensor) -> Result<f64> {
    let diff = a.distance(b)?;
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(diff / norm)
}

/// Target multilinear rank `(R₁,…,R_N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Truncation {
    ranks: Vec<usize>,
}

impl Truncation {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidTruncation("no ranks given".into()));
        }
        if let Some(pos) = ranks.iter().position(|&r| r == 0) {
            return Err(Error::InvalidTruncation(format!(
                "rank of mode {} is zero",
                pos + 1
            )));
        }
        Ok(Truncation { ranks })
    }

    /// No truncation at all: ranks equal to the extents.
    pub fn full(shape: &Shape) -> Self {
        Truncation {
            ranks: shape.dims().to_vec(),
        }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Rank of a 1-based mode.
    pub fn rank(&self, mode: usize) -> usize {
        self.ranks[mode - 1]
    }

    /// Check `1 ≤ R_n ≤ I_n` for every mode of `shape`.
    pub fn validate(&self, shape: &Shape) -> Result<()> {
        if self.ranks.len() != shape.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} ranks for a tensor of order {}",
                self.ranks.len(),
                shape.order()
            )));
        }
        for (n, (&r, &d)) in self.ranks.iter().zip(shape.dims()).enumerate() {
            if r > d {
                return Err(Error::RankTooLarge {
                    mode: n + 1,
                    rank: r,
                    detail: format!("extent is only {d}"),
                });
            }
        }
        Ok(())
    }

    pub fn as_shape(&self) -> Shape {
        Shape(self.ranks.clone())
    }
}

/// Core tensor plus column-orthonormal factor matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct TuckerTensor {
    core: DenseTensor,
    factors: Vec<Matrix>,
    origin_shape: Shape,
}

impl TuckerTensor {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a core of order {}",
                factors.len(),
                core.order()
            )));
        }
        for (n, (f, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if f.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} has {} columns, core extent is {r}",
                    n + 1,
                    f.cols()
                )));
            }
        }
        let origin_shape = Shape::new(factors.iter().map(Matrix::rows).collect())?;
        Ok(TuckerTensor {
            core,
            factors,
            origin_shape,
        })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    /// Factor of a 1-based mode.
    pub fn factor(&self, mode: usize) -> &Matrix {
        &self.factors[mode - 1]
    }

    pub fn origin_shape(&self) -> &Shape {
        &self.origin_shape
    }

    pub fn ranks(&self) -> &[usize] {
        self.core.dims()
    }

    /// `𝓖 ×₁ U⁽¹⁾ ⋯ ×_N U⁽ᴺ⁾`.
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        let fs: Vec<(&Matrix, usize)> = self.factors.iter().zip(1..).collect();
        self.core.multi_mode_product(&fs)
    }

    /// Largest `‖UᵀU − I‖_F / R_n` over the factors.
    pub fn max_orthonormality_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.orthonormality_defect() / f.cols() as f64)
            .fold(0.0, f64::max)
    }

    /// Stored values: core entries plus factor entries.
    pub fn stored_len(&self) -> usize {
        self.core.data().len() + self.factors.iter().map(|f| f.data().len()).sum::<usize>()
    }

    pub fn compression_ratio(&self) -> f64 {
        self.origin_shape.numel() as f64 / self.stored_len() as f64
    }
}
