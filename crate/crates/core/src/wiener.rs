//! Linear MMSE receive filter and optimal scalar gain for a fixed precoder.

use crate::error::{Result, SolverError};
use crate::linalg::{self, CMat, HermEig};
use crate::model::SystemConfig;

/// MMSE receive filter for precoder `f` at receive gain `gamma`:
/// `L = gamma * (H F)^H (H F F^H H^H + I)^{-1}`.
///
/// The filter scales linearly with `gamma`, so the composite estimator
/// `gamma^{-1} L` does not depend on it.
pub fn wiener_receiver(cfg: &SystemConfig, h: &CMat, f: &CMat, gamma: f64) -> Result<CMat> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(SolverError::NonPositiveScale { gamma });
    }
    if h.nrows() != cfg.n_id || h.ncols() != cfg.n_tx || f.nrows() != cfg.n_tx {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "H {}x{}, F {}x{} against config (n_tx={}, n_id={})",
                h.nrows(),
                h.ncols(),
                f.nrows(),
                f.ncols(),
                cfg.n_tx,
                cfg.n_id
            ),
        });
    }
    let hf = h * f;
    let a = linalg::hermitize(&(&hf * hf.adjoint())) + CMat::identity(cfg.n_id, cfg.n_id);
    // A >= I, so the solve cannot hit the conditioning guard.
    let solved = HermEig::new(&a).solve(&hf);
    Ok(solved.adjoint().scale(gamma))
}

/// Receive gain minimizing the weighted MSE for a fixed pair (F, L):
/// `gamma = a / b` with `a = trace(W L (H F F^H H^H + I) L^H)` and
/// `b = Re trace(W L H F)`.
///
/// The Wiener filter built at gain `gamma` has `gamma` itself as its optimal
/// gain, which makes this map a fixed point of the receiver update.
pub fn optimal_gamma(cfg: &SystemConfig, h: &CMat, f: &CMat, l: &CMat) -> Result<f64> {
    if l.nrows() != cfg.n_streams || l.ncols() != cfg.n_id {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "L {}x{} against config (n_streams={}, n_id={})",
                l.nrows(),
                l.ncols(),
                cfg.n_streams,
                cfg.n_id
            ),
        });
    }
    let lhf = l * h * f;
    let a: f64 = lhf
        .row_iter()
        .enumerate()
        .map(|(k, row)| cfg.weights[k] * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        + l.row_iter()
            .enumerate()
            .map(|(k, row)| cfg.weights[k] * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>();
    let b: f64 = lhf
        .diagonal()
        .iter()
        .enumerate()
        .map(|(k, z)| cfg.weights[k] * z.re)
        .sum();
    if !(b > 0.0) {
        return Err(SolverError::NoPositiveScale);
    }
    Ok(a / b)
}
