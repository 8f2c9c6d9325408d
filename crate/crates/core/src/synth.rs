//! Synthetic test tensors, spectral tail sums, the flop-count model and the
//! a-posteriori error bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hosvd::{DecompositionReport, ModeOrder};
use crate::linalg::{dense_svd, reduced_qr};
use crate::matrix::Matrix;
use crate::tensor::{DenseTensor, Shape, Truncation, TuckerTensor};

/// `Σ_r λ_r a_r ∘ b_r ∘ ⋯` plus `δ·𝓔`.
#[derive(Clone, Debug)]
pub struct CpSpec {
    pub dims: Vec<usize>,
    pub rank: usize,
    pub lambda_range: (f64, f64),
    pub noise_delta: f64,
    pub seed: u64,
}

impl CpSpec {
    pub fn new(dims: Vec<usize>, rank: usize, noise_delta: f64, seed: u64) -> Self {
        CpSpec {
            dims,
            rank,
            lambda_range: (5.0, 10.0),
            noise_delta,
            seed,
        }
    }
}

/// `𝓖 ×₁ U⁽¹⁾ ⋯ ×_N U⁽ᴺ⁾` with a uniform core and random orthonormal
/// factors, plus `δ·𝓔`.
#[derive(Clone, Debug)]
pub struct TuckerSpec {
    pub dims: Vec<usize>,
    pub core_ranks: Vec<usize>,
    pub core_range: (f64, f64),
    pub noise_delta: f64,
    pub seed: u64,
}

impl TuckerSpec {
    pub fn new(dims: Vec<usize>, core_ranks: Vec<usize>, noise_delta: f64, seed: u64) -> Self {
        TuckerSpec {
            dims,
            core_ranks,
            core_range: (5.0, 10.0),
            noise_delta,
            seed,
        }
    }
}

/// A generated tensor and its noiseless base.
#[derive(Clone, Debug)]
pub struct Synthetic {
    pub noisy: DenseTensor,
    pub base: DenseTensor,
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "{name} [{lo}, {hi}] is not a valid interval"
        )));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "noise level must be nonnegative, got {delta}"
        )));
    }
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Matrix::from_col_major(rows, cols, data).expect("sized")
}

fn add_noise(rng: &mut ChaCha8Rng, base: &DenseTensor, delta: f64) -> DenseTensor {
    let mut noisy = base.clone();
    if delta > 0.0 {
        for x in noisy.data_mut() {
            let e: f64 = rng.sample(StandardNormal);
            *x += delta * e;
        }
    }
    noisy
}

pub fn gen_cp(spec: &CpSpec) -> Result<Synthetic> {
    let shape = Shape::new(spec.dims.clone())?;
    if spec.rank == 0 {
        return Err(Error::InvalidConfig("CP rank must be at least 1".into()));
    }
    check_range("lambda range", spec.lambda_range)?;
    check_delta(spec.noise_delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let r = spec.rank;
    let factors: Vec<Matrix> = shape
        .dims()
        .iter()
        .map(|&d| {
            let mut m = gaussian_matrix(&mut rng, d, r);
            for j in 0..r {
                let norm = crate::parallel::dot(m.col(j), m.col(j)).sqrt();
                m.col_mut(j).iter_mut().for_each(|x| *x /= norm);
            }
            m
        })
        .collect();
    let lambdas: Vec<f64> = (0..r)
        .map(|_| uniform(&mut rng, spec.lambda_range))
        .collect();
    // superdiagonal core
    let core_shape = Shape::new(vec![r; shape.order()])?;
    let core = DenseTensor::from_fn(core_shape, |ix| {
        if ix.iter().all(|&i| i == ix[0]) {
            lambdas[ix[0]]
        } else {
            0.0
        }
    });
    let fs: Vec<(&Matrix, usize)> = factors.iter().zip(1..).collect();
    let base = core.multi_mode_product(&fs)?;
    let noisy = add_noise(&mut rng, &base, spec.noise_delta);
    Ok(Synthetic { noisy, base })
}

pub fn gen_tucker(spec: &TuckerSpec) -> Result<Synthetic> {
    let shape = Shape::new(spec.dims.clone())?;
    let trunc = Truncation::new(spec.core_ranks.clone())?;
    trunc.validate(&shape)?;
    check_range("core range", spec.core_range)?;
    check_delta(spec.noise_delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let core_shape = trunc.as_shape();
    let core_data = (0..core_shape.numel())
        .map(|_| uniform(&mut rng, spec.core_range))
        .collect();
    let core = DenseTensor::new(core_shape, core_data)?;
    let factors = shape
        .dims()
        .iter()
        .zip(trunc.ranks())
        .map(|(&d, &r)| Ok(reduced_qr(&gaussian_matrix(&mut rng, d, r))?.q))
        .collect::<Result<Vec<_>>>()?;
    let base = TuckerTensor::new(core, factors)?.reconstruct()?;
    let noisy = add_noise(&mut rng, &base, spec.noise_delta);
    Ok(Synthetic { noisy, base })
}

/// Per-mode tail energies `γ_n = Σ_{r>R_n} σ_r⁽ⁿ⁾²` of the unfoldings.
#[derive(Clone, Debug)]
pub struct GammaReport {
    pub gammas: Vec<f64>,
    /// Full singular value list of each unfolding.
    pub spectra: Vec<Vec<f64>>,
}

impl GammaReport {
    pub fn sum(&self) -> f64 {
        self.gammas.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.gammas.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn gammas(t: &DenseTensor, trunc: &Truncation) -> Result<GammaReport> {
    trunc.validate(t.shape())?;
    let mut gammas = Vec::with_capacity(t.order());
    let mut spectra = Vec::with_capacity(t.order());
    for mode in 1..=t.order() {
        let s = dense_svd(&t.matricize(mode)?, false)
            .map_err(|e| e.in_mode(mode))?
            .values;
        let r = trunc.rank(mode);
        // sum from the small end for accuracy
        gammas.push(s.iter().skip(r).rev().map(|x| x * x).sum());
        spectra.push(s);
    }
    Ok(GammaReport { gammas, spectra })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostFlavor {
    TAls,
    TEig,
    TSvd,
    StAls,
    StEig,
    StSvd,
}

impl CostFlavor {
    pub const ALL: [CostFlavor; 6] = [
        CostFlavor::TAls,
        CostFlavor::TEig,
        CostFlavor::TSvd,
        CostFlavor::StAls,
        CostFlavor::StEig,
        CostFlavor::StSvd,
    ];
}

/// Leading-order flop estimate of a decomposition.
///
/// `iters` holds ALS sweeps per mode (indexed by mode, 1-based mode `n` at
/// position `n − 1`) and is ignored by the non-ALS flavors. For the st
/// flavors `order` decides which ranks have already been applied.
pub fn cost_model(
    trunc: &Truncation,
    shape: &Shape,
    order: &ModeOrder,
    flavor: CostFlavor,
    iters: &[usize],
) -> f64 {
    let dims: Vec<f64> = shape.dims().iter().map(|&d| d as f64).collect();
    let ranks: Vec<f64> = trunc.ranks().iter().map(|&r| r as f64).collect();
    let iter = |m: usize| iters.get(m - 1).copied().unwrap_or(1) as f64;
    let total: f64 = dims.iter().product();
    let n = dims.len();
    match flavor {
        CostFlavor::TSvd => (1..=n).map(|m| ranks[m - 1] * total).sum(),
        CostFlavor::TAls => (1..=n).map(|m| ranks[m - 1] * total * iter(m)).sum(),
        CostFlavor::TEig => (1..=n)
            .map(|m| dims[m - 1] * total + ranks[m - 1] * dims[m - 1] * dims[m - 1])
            .sum(),
        CostFlavor::StSvd | CostFlavor::StAls | CostFlavor::StEig => {
            let seq = order.modes();
            let mut cost = 0.0;
            // ∏ of ranks applied before step k
            let mut applied = 1.0;
            for (k, &m) in seq.iter().enumerate() {
                let remaining: f64 = seq[k..].iter().map(|&j| dims[j - 1]).product();
                let (i_m, r_m) = (dims[m - 1], ranks[m - 1]);
                cost += match flavor {
                    CostFlavor::StSvd => applied * r_m * remaining,
                    CostFlavor::StAls => applied * r_m * remaining * iter(m),
                    _ => applied * i_m * remaining + r_m * i_m * i_m,
                };
                applied *= r_m;
            }
            cost
        }
    }
}

/// Outcome of the a-posteriori error bound checks.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    pub rel_err: f64,
    /// `‖𝓐 − 𝓐̂‖_F² ≤ Σ γ_n`; `None` for ALS engines.
    pub gamma_holds: Option<bool>,
    /// `Σ γ_n − ‖𝓐 − 𝓐̂‖_F²` (rounding slack excluded).
    pub gamma_margin: f64,
    /// `rel_err² ≤ Σ (η_n² + γ_n/‖𝓐‖²)`.
    pub middle_holds: bool,
    pub middle_margin: f64,
    /// `rel_err ≤ √N (max η_n + √(max γ_n)/‖𝓐‖)`, with `√(max γ_n)` standing in
    /// for the unknown optimal error. This is the tighter form; the middle
    /// bound already implies it.
    pub right_holds: bool,
    pub right_margin: f64,
}

impl BoundCheck {
    pub fn all_hold(&self) -> bool {
        self.gamma_holds.unwrap_or(true) && self.middle_holds && self.right_holds
    }
}

/// Rounding allowance for the squared-norm comparisons, relative to `‖𝓐‖²`.
const BOUND_SLACK: f64 = 1e-12;

pub fn check_bounds(
    t: &DenseTensor,
    result: &TuckerTensor,
    report: &DecompositionReport,
    trunc: &Truncation,
) -> Result<BoundCheck> {
    let g = gammas(t, trunc)?;
    let norm = t.frobenius_norm();
    if norm == 0.0 {
        return Err(Error::ZeroReference);
    }
    let norm_sq = norm * norm;
    let err = t.distance(&result.reconstruct()?)?;
    let rel_err = err / norm;
    let etas = report.etas();
    let is_als = report.per_mode.iter().any(|m| m.als.is_some());

    let gamma_margin = g.sum() - err * err;
    let gamma_holds = (!is_als).then_some(gamma_margin >= -BOUND_SLACK * norm_sq);

    let middle_rhs: f64 = etas.iter().map(|e| e * e).sum::<f64>() + g.sum() / norm_sq;
    let middle_margin = middle_rhs - rel_err * rel_err;
    let middle_holds = middle_margin >= -BOUND_SLACK;

    let eta_max = etas.iter().cloned().fold(0.0, f64::max);
    let right_rhs = (t.order() as f64).sqrt() * (eta_max + g.max().sqrt() / norm);
    let right_margin = right_rhs - rel_err;
    let right_holds = right_margin >= -BOUND_SLACK;

    Ok(BoundCheck {
        rel_err,
        gamma_holds,
        gamma_margin,
        middle_holds,
        middle_margin,
        right_holds,
        right_margin,
    })
}
