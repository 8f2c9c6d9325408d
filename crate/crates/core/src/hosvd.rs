//! Truncated HOSVD drivers: t-HOSVD computes every factor from the input
//! tensor, st-HOSVD shrinks a working tensor after each mode. Factors come
//! from one of three engines.

use std::fmt;
use std::time::Instant;

use crate::als::{als_low_rank, AlsConfig, AlsReport};
use crate::error::{Error, Result};
use crate::linalg::{dense_svd, dense_svd_parts, reduced_qr, sym_eig};
use crate::matrix::Matrix;
use crate::tensor::{relative_error, DenseTensor, Shape, Truncation, TuckerTensor};

/// How each factor matrix is computed.
#[derive(Clone, Debug)]
pub enum FactorEngine {
    /// Leading left singular vectors of the unfolding.
    Svd,
    /// Leading eigenvectors of the unfolding's Gram matrix.
    Eig,
    /// Orthonormal basis of the ALS left factor.
    Als(AlsConfig),
}

impl FactorEngine {
    pub fn label(&self) -> &'static str {
        match self {
            FactorEngine::Svd => "svd",
            FactorEngine::Eig => "eig",
            FactorEngine::Als(_) => "als",
        }
    }
}

/// A permutation of the modes `1..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeOrder(Vec<usize>);

impl ModeOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &m in &order {
            if m == 0 || m > n || seen[m - 1] {
                return Err(Error::InvalidConfig(format!(
                    "mode order {order:?} is not a permutation of 1..={n}"
                )));
            }
            seen[m - 1] = true;
        }
        if n == 0 {
            return Err(Error::InvalidConfig("empty mode order".into()));
        }
        Ok(ModeOrder(order))
    }

    pub fn identity(n: usize) -> Self {
        ModeOrder((1..=n).collect())
    }

    pub fn modes(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for ModeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Clone, Debug, Default)]
pub enum OrderChoice {
    /// Ascending ranks, see [`select_order`].
    #[default]
    Auto,
    Fixed(ModeOrder),
}

impl From<ModeOrder> for OrderChoice {
    fn from(o: ModeOrder) -> Self {
        OrderChoice::Fixed(o)
    }
}

#[derive(Clone, Debug)]
pub struct ModeReport {
    pub mode: usize,
    /// Seconds spent computing this mode's factor (and, for st-HOSVD,
    /// shrinking the working tensor).
    pub seconds: f64,
    pub als: Option<AlsReport>,
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub method: String,
    /// Modes in the order they were processed.
    pub order: ModeOrder,
    /// One entry per mode, in processing order.
    pub per_mode: Vec<ModeReport>,
    pub rel_residual: f64,
    /// Factor plus core computation time; excludes the residual evaluation.
    pub seconds: f64,
}

impl DecompositionReport {
    /// Report of a 1-based mode.
    pub fn mode(&self, mode: usize) -> Option<&ModeReport> {
        self.per_mode.iter().find(|m| m.mode == mode)
    }

    /// ALS sweeps per mode in mode order; zero for non-ALS engines.
    pub fn iterations(&self) -> Vec<usize> {
        (1..=self.per_mode.len())
            .map(|m| {
                self.mode(m)
                    .and_then(|r| r.als.as_ref())
                    .map_or(0, |a| a.iterations)
            })
            .collect()
    }

    /// Per-mode achieved tolerance in mode order; zero for non-ALS engines.
    pub fn etas(&self) -> Vec<f64> {
        (1..=self.per_mode.len())
            .map(|m| {
                self.mode(m)
                    .and_then(|r| r.als.as_ref())
                    .map_or(0.0, |a| a.achieved_eta)
            })
            .collect()
    }

    /// Total time spent in the factor engines.
    pub fn engine_seconds(&self) -> f64 {
        self.per_mode.iter().map(|m| m.seconds).sum()
    }
}

/// Modes sorted by ascending rank, ties by ascending mode index.
pub fn select_order(trunc: &Truncation, shape: &Shape) -> ModeOrder {
    let n = shape.order().min(trunc.ranks().len());
    let mut modes: Vec<usize> = (1..=n).collect();
    modes.sort_by_key(|&m| (trunc.rank(m), m));
    ModeOrder(modes)
}

/// Replace an orthonormal basis `q` of a dominant subspace by the leading
/// left singular vectors of the projected unfolding `qᵀA_(n)`.
pub fn recover_singular_vectors(t: &DenseTensor, mode: usize, q: &Matrix) -> Result<Matrix> {
    let w = t.unfold_t_times(mode, q)?;
    let rotation = right_singular_basis(&w, q.cols(), mode)?;
    let mut u = q.matmul(&rotation)?;
    crate::linalg::fix_signs(&mut u, None);
    Ok(u)
}

/// Right singular vectors of `w` (`J × r`), i.e. left singular vectors of
/// `wᵀ`, as an `r × r` rotation.
fn right_singular_basis(w: &Matrix, r: usize, mode: usize) -> Result<Matrix> {
    let svd = dense_svd_parts(w, false, true)?;
    let v = svd.right.expect("requested");
    if v.cols() < r {
        return Err(Error::RankTooLarge {
            mode,
            rank: r,
            detail: format!("projected unfolding has only {} columns", v.cols()),
        });
    }
    Ok(v)
}

/// `B ×ₙ Uᵀ`, via the streamed `B_(n)ᵀU`.
fn project(b: &DenseTensor, mode: usize, u: &Matrix) -> Result<DenseTensor> {
    let mt = b.unfold_t_times(mode, u)?;
    DenseTensor::tensorize_transposed(&mt, mode, &b.shape().with_extent(mode, u.cols()))
}

fn check_rank_fits(b: &DenseTensor, mode: usize, r: usize) -> Result<()> {
    let cols = b.shape().unfolded_cols(mode);
    if r > cols {
        return Err(Error::RankTooLarge {
            mode,
            rank: r,
            detail: format!("unfolding has only {cols} columns"),
        });
    }
    Ok(())
}

fn svd_factor(b: &DenseTensor, mode: usize, r: usize) -> Result<Matrix> {
    let a = b.matricize(mode)?;
    let svd = dense_svd_parts(&a, true, false)?;
    Ok(svd.left.expect("requested").leading_cols(r))
}

fn eig_factor(b: &DenseTensor, mode: usize, r: usize) -> Result<Matrix> {
    let rows = b.shape().extent(mode);
    let cols = b.shape().unfolded_cols(mode);
    if rows <= cols {
        let g = b.unfold_gram(mode)?;
        return Ok(sym_eig(&g, r)?.left.expect("eigenvectors"));
    }
    // The leading eigenvectors of A·Aᵀ are A·V, V from the smaller AᵀA.
    let g = b.matricize(mode)?.gram();
    let v = sym_eig(&g, r)?.left.expect("eigenvectors");
    let mut u = reduced_qr(&b.unfold_times(mode, &v)?)?.q;
    crate::linalg::fix_signs(&mut u, None);
    Ok(u)
}

fn stamp(method: &str, engine: &FactorEngine, want_sv: bool) -> String {
    let sv = if want_sv && matches!(engine, FactorEngine::Als(_)) {
        "+sv"
    } else {
        ""
    };
    format!("{method}-{}{sv}", engine.label())
}

fn finish(
    t: &DenseTensor,
    core: DenseTensor,
    factors: Vec<Matrix>,
    method: String,
    order: ModeOrder,
    per_mode: Vec<ModeReport>,
    seconds: f64,
) -> Result<(TuckerTensor, DecompositionReport)> {
    let tucker = TuckerTensor::new(core, factors)?;
    let rel_residual = relative_error(t, &tucker.reconstruct()?)?;
    Ok((
        tucker,
        DecompositionReport {
            method,
            order,
            per_mode,
            rel_residual,
            seconds,
        },
    ))
}

/// Truncated HOSVD: every factor from the original tensor, then the core
/// `𝓐 ×₁ U⁽¹⁾ᵀ ⋯ ×_N U⁽ᴺ⁾ᵀ`.
///
/// With the ALS engine and `want_singular_vectors == false` the factors are
/// orthonormal bases of the dominant subspaces, not singular vectors.
pub fn t_hosvd(
    t: &DenseTensor,
    trunc: &Truncation,
    engine: &FactorEngine,
    want_singular_vectors: bool,
) -> Result<(TuckerTensor, DecompositionReport)> {
    trunc.validate(t.shape())?;
    let start = Instant::now();
    let mut factors = Vec::with_capacity(t.order());
    let mut per_mode = Vec::with_capacity(t.order());
    for mode in 1..=t.order() {
        let r = trunc.rank(mode);
        let t0 = Instant::now();
        let (u, als) = (|| -> Result<(Matrix, Option<AlsReport>)> {
            check_rank_fits(t, mode, r)?;
            Ok(match engine {
                FactorEngine::Svd => (svd_factor(t, mode, r)?, None),
                FactorEngine::Eig => (eig_factor(t, mode, r)?, None),
                FactorEngine::Als(cfg) => {
                    let (pair, rep) = als_low_rank(t, mode, r, cfg)?;
                    let q = reduced_qr(&pair.l)?.q;
                    let u = if want_singular_vectors {
                        recover_singular_vectors(t, mode, &q)?
                    } else {
                        q
                    };
                    (u, Some(rep))
                }
            })
        })()
        .map_err(|e| e.in_mode(mode))?;
        per_mode.push(ModeReport {
            mode,
            seconds: t0.elapsed().as_secs_f64(),
            als,
        });
        factors.push(u);
    }
    let mut core = project(t, 1, &factors[0])?;
    for (mode, u) in factors.iter().enumerate().skip(1) {
        core = project(&core, mode + 1, u)?;
    }
    let seconds = start.elapsed().as_secs_f64();
    finish(
        t,
        core,
        factors,
        stamp("t", engine, want_singular_vectors),
        ModeOrder::identity(t.order()),
        per_mode,
        seconds,
    )
}

/// Sequentially truncated HOSVD over `order`; the final working tensor is
/// the core.
pub fn st_hosvd(
    t: &DenseTensor,
    trunc: &Truncation,
    order: &OrderChoice,
    engine: &FactorEngine,
    want_singular_vectors: bool,
) -> Result<(TuckerTensor, DecompositionReport)> {
    trunc.validate(t.shape())?;
    let order = match order {
        OrderChoice::Auto => select_order(trunc, t.shape()),
        OrderChoice::Fixed(o) => {
            if o.modes().len() != t.order() {
                return Err(Error::InvalidConfig(format!(
                    "mode order {o} does not match tensor order {}",
                    t.order()
                )));
            }
            o.clone()
        }
    };
    let start = Instant::now();
    let mut factors: Vec<Option<Matrix>> = vec![None; t.order()];
    let mut per_mode = Vec::with_capacity(t.order());
    let mut b = t.clone();
    for &mode in order.modes() {
        let r = trunc.rank(mode);
        let t0 = Instant::now();
        let (u, next, als) = (|| -> Result<(Matrix, DenseTensor, Option<AlsReport>)> {
            check_rank_fits(&b, mode, r)?;
            let target = b.shape().with_extent(mode, r);
            Ok(match engine {
                FactorEngine::Svd => {
                    let svd = dense_svd(&b.matricize(mode)?, true)?;
                    let u = svd.left.expect("requested").leading_cols(r);
                    // (ΣVᵀ)ᵀ = V·Σ, leading r columns
                    let mut vs = svd.right.expect("requested").leading_cols(r);
                    for (j, &s) in svd.values.iter().take(r).enumerate() {
                        vs.col_mut(j).iter_mut().for_each(|x| *x *= s);
                    }
                    let next = DenseTensor::tensorize_transposed(&vs, mode, &target)?;
                    (u, next, None)
                }
                FactorEngine::Eig => {
                    let u = eig_factor(&b, mode, r)?;
                    let next = project(&b, mode, &u)?;
                    (u, next, None)
                }
                FactorEngine::Als(cfg) => {
                    let (pair, rep) = als_low_rank(&b, mode, r, cfg)?;
                    let qr = reduced_qr(&pair.l)?;
                    // B_(n) ← R̂·Rᵀ, held transposed as R·R̂ᵀ
                    let mut projected = pair.r.matmul(&qr.r.transpose())?;
                    let mut u = qr.q;
                    if want_singular_vectors {
                        let rot = right_singular_basis(&projected, r, mode)?;
                        u = u.matmul(&rot)?;
                        projected = projected.matmul(&rot)?;
                    }
                    let next = DenseTensor::tensorize_transposed(&projected, mode, &target)?;
                    (u, next, Some(rep))
                }
            })
        })()
        .map_err(|e| e.in_mode(mode))?;
        per_mode.push(ModeReport {
            mode,
            seconds: t0.elapsed().as_secs_f64(),
            als,
        });
        factors[mode - 1] = Some(u);
        b = next;
    }
    let seconds = start.elapsed().as_secs_f64();
    let factors = factors
        .into_iter()
        .map(|f| f.expect("every mode visited"))
        .collect();
    finish(
        t,
        b,
        factors,
        stamp("st", engine, want_singular_vectors),
        order,
        per_mode,
        seconds,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_by_ascending_rank() {
        let shape = Shape::new(vec![30, 30, 30]).unwrap();
        let o = select_order(&Truncation::new(vec![10, 5, 20]).unwrap(), &shape);
        assert_eq!(o.modes(), &[2, 1, 3]);
        let o = select_order(&Truncation::new(vec![5, 5, 5]).unwrap(), &shape);
        assert_eq!(o.modes(), &[1, 2, 3]);
        assert_eq!(o.to_string(), "1,2,3");
    }

    #[test]
    fn mode_order_validation() {
        assert!(ModeOrder::new(vec![2, 1, 3]).is_ok());
        assert!(ModeOrder::new(vec![1, 1, 3]).is_err());
        assert!(ModeOrder::new(vec![0, 1]).is_err());
        assert!(ModeOrder::new(vec![]).is_err());
    }

    #[test]
    fn superdiagonal_tensor() {
        let shape = Shape::new(vec![2, 2, 2]).unwrap();
        let t = DenseTensor::from_fn(shape, |ix| match ix {
            [0, 0, 0] => 3.0,
            [1, 1, 1] => 1.0,
            _ => 0.0,
        });
        let trunc = Truncation::new(vec![1, 1, 1]).unwrap();
        for engine in [FactorEngine::Svd, FactorEngine::Eig] {
            let (tk, rep) = t_hosvd(&t, &trunc, &engine, false).unwrap();
            assert!((tk.core().data()[0] - 3.0).abs() < 1e-14);
            assert!((rep.rel_residual - 1.0 / 10f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_beyond_unfolding_columns() {
        let t = DenseTensor::from_fn(Shape::new(vec![5, 2]).unwrap(), |ix| (ix[0] + ix[1]) as f64);
        let trunc = Truncation::new(vec![3, 2]).unwrap();
        assert!(matches!(
            t_hosvd(&t, &trunc, &FactorEngine::Svd, false),
            Err(Error::RankTooLarge { mode: 1, .. })
        ));
    }
}
