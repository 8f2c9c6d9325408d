//! Alternating least squares for the rank-`r` approximation `A_(n) ≈ L·Rᵀ`
//! of a tensor unfolding, driven entirely through the streamed contractions
//! so the unfolding is never formed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{reduced_qr, spd_inverse};
use crate::matrix::Matrix;
use crate::tensor::DenseTensor;

/// Initial left factor for [`als_low_rank`].
#[derive(Clone, Debug, Default)]
pub enum AlsInit {
    /// `Q` from the reduced QR of `A_(n)·S` with a seeded uniform `S`.
    #[default]
    RandomizedRangeQR,
    /// A caller-supplied `I_n × r` starting `L`.
    ProvidedMatrix(Matrix),
}

#[derive(Clone, Debug)]
pub struct AlsConfig {
    pub eta: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub init: AlsInit,
}

impl Default for AlsConfig {
    fn default() -> Self {
        AlsConfig {
            eta: 1e-4,
            max_iters: 50,
            seed: 0,
            init: AlsInit::RandomizedRangeQR,
        }
    }
}

impl AlsConfig {
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ALS tolerance must be positive and finite, got {}",
                self.eta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "ALS needs at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlsStatus {
    Converged,
    MaxItersReached,
}

#[derive(Clone, Debug)]
pub struct AlsReport {
    /// Number of sweeps (R-updates) performed.
    pub iterations: usize,
    /// `‖A − L_k R_kᵀ‖_F` after each R-update.
    pub residual_history: Vec<f64>,
    pub status: AlsStatus,
    /// Last consecutive-residual gap over the reference norm.
    pub achieved_eta: f64,
}

/// `A_(n) ≈ l·rᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub l: Matrix,
    pub r: Matrix,
}

/// Randomized range initializer: `Q` of `A_(n)·S`, `S` uniform on `[0,1)`.
pub fn als_init(t: &DenseTensor, mode: usize, r: usize, seed: u64) -> Result<Matrix> {
    t.shape().check_mode(mode)?;
    let rows = t.shape().extent(mode);
    if r == 0 || r > rows {
        return Err(Error::RankTooLarge {
            mode,
            rank: r,
            detail: format!("extent is only {rows}"),
        });
    }
    let cols = t.shape().unfolded_cols(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = Matrix::from_col_major(
        cols,
        r,
        (0..cols * r).map(|_| rng.random::<f64>()).collect(),
    )?;
    let y = t.unfold_times(mode, &s)?;
    let qr = reduced_qr(&y)?;
    let diag: Vec<f64> = (0..r).map(|i| qr.r.get(i, i)).collect();
    let max_diag = diag.iter().cloned().fold(0.0, f64::max);
    let min_diag = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max_diag > 0.0) || min_diag < 1e-13 * max_diag {
        return Err(Error::DegenerateInit {
            mode,
            min_diag,
            max_diag,
        });
    }
    Ok(qr.q)
}

struct RightUpdate {
    r: Matrix,
    gram_r: Matrix,
    residual: f64,
}

/// `R ← A_(n)ᵀL(LᵀL)⁻¹` plus the closed-form residual of `L·Rᵀ`.
fn update_right(t: &DenseTensor, mode: usize, l: &Matrix, norm_sq: f64) -> Result<RightUpdate> {
    let gram_l = l.gram();
    let w = t.unfold_t_times(mode, l)?;
    let r = w.mul_small(&spd_inverse(&gram_l)?)?;
    let gram_r = r.gram();
    let fit = gram_l.matmul(&gram_r)?.trace();
    let residual = (norm_sq - fit).max(0.0).sqrt();
    Ok(RightUpdate {
        r,
        gram_r,
        residual,
    })
}

/// `L ← A_(n)R(RᵀR)⁻¹`.
fn update_left(t: &DenseTensor, mode: usize, r: &Matrix, gram_r: &Matrix) -> Result<Matrix> {
    let z = t.unfold_times(mode, r)?;
    z.mul_small(&spd_inverse(gram_r)?)
}

/// One full sweep from `l`: R-update, then L-update.
///
/// The residual is that of `l·Rᵀ`, i.e. evaluated after the R-update.
pub fn als_sweep(t: &DenseTensor, mode: usize, l: &Matrix) -> Result<(FactorPair, f64)> {
    check_left(t, mode, l)?;
    let norm = t.frobenius_norm();
    let ru = update_right(t, mode, l, norm * norm)?;
    let l_next = update_left(t, mode, &ru.r, &ru.gram_r)?;
    Ok((FactorPair { l: l_next, r: ru.r }, ru.residual))
}

fn check_left(t: &DenseTensor, mode: usize, l: &Matrix) -> Result<()> {
    t.shape().check_mode(mode)?;
    if l.rows() != t.shape().extent(mode) {
        return Err(Error::DimensionMismatch(format!(
            "left factor has {} rows, mode {mode} has extent {}",
            l.rows(),
            t.shape().extent(mode)
        )));
    }
    Ok(())
}

fn rank_error(mode: usize, rank: usize) -> impl FnOnce(Error) -> Error {
    move |e| {
        match e {
        Error::SingularGram {
            column,
            pivot,
            max_diag,
        } => Error::RankTooLarge {
            mode,
            rank,
            detail: format!(
                "singular Gram matrix in ALS (pivot {pivot:e} at column {column}, max diagonal {max_diag:e})"
            ),
        },
        other => other,
    }
    }
}

/// Rank-`r` ALS approximation of the mode-`mode` unfolding.
///
/// Stops once two consecutive residuals differ by at most `η·‖t‖_F`; the
/// residual before the first sweep is taken as `‖t‖_F` (the zero
/// approximation). The returned pair is the one the last residual belongs
/// to: `R` is the least-squares partner of `L`.
pub fn als_low_rank(
    t: &DenseTensor,
    mode: usize,
    r: usize,
    cfg: &AlsConfig,
) -> Result<(FactorPair, AlsReport)> {
    cfg.validate()?;
    t.shape().check_mode(mode)?;
    let mut l = match &cfg.init {
        AlsInit::RandomizedRangeQR => als_init(t, mode, r, cfg.seed)?,
        AlsInit::ProvidedMatrix(m) => {
            check_left(t, mode, m)?;
            if m.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "initial factor has {} columns, rank is {r}",
                    m.cols()
                )));
            }
            m.clone()
        }
    };
    let norm = t.frobenius_norm();
    let norm_sq = norm * norm;
    let mut history = Vec::new();
    let mut prev = norm;
    loop {
        let ru = update_right(t, mode, &l, norm_sq).map_err(rank_error(mode, r))?;
        history.push(ru.residual);
        let gap = (prev - ru.residual).abs();
        prev = ru.residual;
        let achieved_eta = if norm > 0.0 { gap / norm } else { 0.0 };
        let status = if gap <= cfg.eta * norm {
            Some(AlsStatus::Converged)
        } else if history.len() >= cfg.max_iters {
            Some(AlsStatus::MaxItersReached)
        } else {
            None
        };
        if let Some(status) = status {
            let report = AlsReport {
                iterations: history.len(),
                residual_history: history,
                status,
                achieved_eta,
            };
            return Ok((FactorPair { l, r: ru.r }, report));
        }
        l = update_left(t, mode, &ru.r, &ru.gram_r).map_err(rank_error(mode, r))?;
    }
}
