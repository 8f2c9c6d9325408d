//! Higher-order orthogonal iteration, started from a given Tucker tensor.

use crate::error::{Error, Result};
use crate::linalg::dense_svd_parts;
use crate::matrix::Matrix;
use crate::tensor::{relative_error, DenseTensor, Truncation, TuckerTensor};

#[derive(Clone, Debug)]
pub struct HooiConfig {
    /// Stop once the fit changes by at most this much.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for HooiConfig {
    fn default() -> Self {
        HooiConfig {
            tol: 1e-12,
            max_iters: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HooiResult {
    pub tucker: TuckerTensor,
    pub iterations: usize,
    /// Fit `1 − ‖𝓐 − 𝓐̂‖_F/‖𝓐‖_F`; entry 0 is the fit of the starting point.
    pub fit_history: Vec<f64>,
    pub converged: bool,
}

impl HooiResult {
    pub fn rel_residual(&self) -> f64 {
        1.0 - self.fit_history.last().copied().unwrap_or(0.0)
    }
}

/// `B ×ₙ Uᵀ`.
fn project(b: &DenseTensor, mode: usize, u: &Matrix) -> Result<DenseTensor> {
    let mt = b.unfold_t_times(mode, u)?;
    DenseTensor::tensorize_transposed(&mt, mode, &b.shape().with_extent(mode, u.cols()))
}

/// Contract `t` with `Uᵀ` along every mode except `skip` (ascending).
fn project_except(t: &DenseTensor, factors: &[Matrix], skip: Option<usize>) -> Result<DenseTensor> {
    let mut y: Option<DenseTensor> = None;
    for (i, u) in factors.iter().enumerate() {
        let mode = i + 1;
        if Some(mode) == skip {
            continue;
        }
        y = Some(project(y.as_ref().unwrap_or(t), mode, u)?);
    }
    Ok(y.unwrap_or_else(|| t.clone()))
}

fn fit_of(t: &DenseTensor, core: &DenseTensor, factors: &[Matrix]) -> Result<f64> {
    let tk = TuckerTensor::new(core.clone(), factors.to_vec())?;
    Ok(1.0 - relative_error(t, &tk.reconstruct()?)?)
}

/// Refine `init` by HOOI, updating modes in ascending order each sweep.
///
/// Reaching `max_iters` is reported through `converged`, not as an error.
pub fn hooi(
    t: &DenseTensor,
    trunc: &Truncation,
    init: &TuckerTensor,
    cfg: &HooiConfig,
) -> Result<HooiResult> {
    trunc.validate(t.shape())?;
    if init.origin_shape() != t.shape() || init.ranks() != trunc.ranks() {
        return Err(Error::DimensionMismatch(format!(
            "initial Tucker tensor is {} with ranks {:?}, expected {} with ranks {:?}",
            init.origin_shape(),
            init.ranks(),
            t.shape(),
            trunc.ranks()
        )));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "HOOI tolerance must be positive, got {}",
            cfg.tol
        )));
    }
    let mut factors = init.factors().to_vec();
    let core = project_except(t, &factors, None)?;
    let mut fit_history = vec![fit_of(t, &core, &factors)?];
    let mut core = core;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        for mode in 1..=t.order() {
            let y = project_except(t, &factors, Some(mode))?;
            let r = trunc.rank(mode);
            let svd =
                dense_svd_parts(&y.matricize(mode)?, true, false).map_err(|e| e.in_mode(mode))?;
            let left = svd.left.expect("requested");
            if left.cols() < r {
                return Err(Error::RankTooLarge {
                    mode,
                    rank: r,
                    detail: format!("projected unfolding has only {} columns", left.cols()),
                });
            }
            factors[mode - 1] = left.leading_cols(r);
            if mode == t.order() {
                core = project(&y, mode, &factors[mode - 1])?;
            }
        }
        let fit = fit_of(t, &core, &factors)?;
        let change = (fit - fit_history.last().unwrap()).abs();
        fit_history.push(fit);
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(HooiResult {
        tucker: TuckerTensor::new(core, factors)?,
        iterations,
        fit_history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hosvd::{t_hosvd, FactorEngine};
    use crate::tensor::Shape;

    #[test]
    fn optimal_start_is_a_fixed_point() {
        let t = DenseTensor::from_fn(Shape::new(vec![3, 4, 5]).unwrap(), |ix| {
            (1 + ix[0]) as f64 * (2 + ix[1]) as f64 * (1 + ix[2] * ix[2]) as f64
        });
        let trunc = Truncation::new(vec![1, 1, 1]).unwrap();
        let (init, _) = t_hosvd(&t, &trunc, &FactorEngine::Svd, false).unwrap();
        let res = hooi(&t, &trunc, &init, &HooiConfig::default()).unwrap();
        assert_eq!(res.iterations, 1);
        assert!(res.converged);
        assert!(res.rel_residual() <= 1e-10);
    }

    #[test]
    fn rejects_mismatched_start() {
        let t = DenseTensor::zeros(Shape::new(vec![3, 3]).unwrap());
        let core = DenseTensor::zeros(Shape::new(vec![1, 1]).unwrap());
        let e = Matrix::from_rows(&[&[1.0], &[0.0], &[0.0]]);
        let init = TuckerTensor::new(core, vec![e.clone(), e]).unwrap();
        let trunc = Truncation::new(vec![2, 1]).unwrap();
        assert!(hooi(&t, &trunc, &init, &HooiConfig::default()).is_err());
    }
}
