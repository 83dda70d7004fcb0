//! System model: configuration, channels, transceiver triple, and the
//! figures of merit everything else optimizes.
//!
//! Conventions (normalized units):
//! - ID-user noise is unit-variance CSCG per receive antenna; transmit power
//!   and energies are therefore expressed relative to the noise power.
//! - `H` is `n_id x n_tx`, `G` is `n_eh x n_tx`, the precoder `F` is
//!   `n_tx x n_streams`, the receive filter `L` is `n_streams x n_id`, and
//!   the receive gain `gamma` is a strictly positive real scalar (automatic
//!   gain control shared by all streams).
//! - Channel entries carry the pathloss `d^(-3/2)` amplitude scaling, i.e.
//!   a distance-d link has per-entry variance `d^-3`.

use crate::error::{Result, SolverError};
use crate::linalg::{self, CMat, CVec, HermEig, RVec};
use crate::rng;

/// Static description of the two-user downlink.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub n_tx: usize,
    /// Data streams for the ID user.
    pub n_streams: usize,
    /// ID-user receive antennas.
    pub n_id: usize,
    /// EH-user receive antennas.
    pub n_eh: usize,
    /// Transmit power budget (normalized).
    pub power_budget: f64,
    /// RF-to-DC conversion efficiency of the EH user, in (0, 1].
    pub efficiency: f64,
    /// Diagonal of the stream weight matrix W (nonnegative, not all zero).
    pub weights: RVec,
    /// Required harvested energy before efficiency scaling (normalized).
    pub target_energy: f64,
}

impl SystemConfig {
    pub fn new(
        n_tx: usize,
        n_streams: usize,
        n_id: usize,
        n_eh: usize,
        power_budget: f64,
        efficiency: f64,
        weights: RVec,
        target_energy: f64,
    ) -> Result<Self> {
        if n_tx == 0 || n_streams == 0 || n_id == 0 || n_eh == 0 {
            return Err(SolverError::InvalidConfig(
                "antenna and stream counts must be at least 1".into(),
            ));
        }
        if n_streams > n_tx.min(n_id) {
            return Err(SolverError::InvalidConfig(format!(
                "n_streams = {n_streams} exceeds min(n_tx, n_id) = {}",
                n_tx.min(n_id)
            )));
        }
        if !(power_budget > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "power_budget must be positive, got {power_budget}"
            )));
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "efficiency must lie in (0, 1], got {efficiency}"
            )));
        }
        if weights.len() != n_streams {
            return Err(SolverError::InvalidConfig(format!(
                "weights has {} entries, expected n_streams = {n_streams}",
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0) || weights.iter().all(|&w| w == 0.0) {
            return Err(SolverError::InvalidConfig(
                "weights must be nonnegative with at least one positive entry".into(),
            ));
        }
        if !(target_energy >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "target_energy must be nonnegative, got {target_energy}"
            )));
        }
        Ok(SystemConfig {
            n_tx,
            n_streams,
            n_id,
            n_eh,
            power_budget,
            efficiency,
            weights,
            target_energy,
        })
    }

    /// Same system with a different energy target.
    pub fn with_target_energy(&self, target_energy: f64) -> Self {
        SystemConfig {
            target_energy,
            ..self.clone()
        }
    }

    /// Same system with a different power budget.
    pub fn with_power_budget(&self, power_budget: f64) -> Self {
        SystemConfig {
            power_budget,
            ..self.clone()
        }
    }

    /// Same system with different stream weights.
    pub fn with_weights(&self, weights: RVec) -> Self {
        SystemConfig {
            weights,
            ..self.clone()
        }
    }

    /// W as a complex diagonal matrix.
    pub fn weight_matrix(&self) -> CMat {
        linalg::diag_c(&self.weights)
    }
}

/// One realization of the pair of downlink channels.
#[derive(Debug, Clone)]
pub struct ChannelPair {
    /// Transmitter -> ID user channel, `n_id x n_tx`.
    pub h: CMat,
    /// Transmitter -> EH user channel, `n_eh x n_tx`.
    pub g: CMat,
    /// Transmitter-to-ID distance in meters.
    pub dist_id: f64,
    /// Transmitter-to-EH distance in meters.
    pub dist_eh: f64,
    /// Seed the realization was drawn from.
    pub seed: u64,
}

/// The design variables: precoder, receive filter, receive gain.
#[derive(Debug, Clone)]
pub struct Transceiver {
    /// Precoder `F`, `n_tx x n_streams`.
    pub precoder: CMat,
    /// Receive filter `L`, `n_streams x n_id`.
    pub receiver: CMat,
    /// Receive gain `gamma > 0`.
    pub scale: f64,
}

impl Transceiver {
    /// Transmit power `trace(F F^H)` of this design.
    pub fn power(&self) -> f64 {
        linalg::frob2(&self.precoder)
    }
}

/// Draw a channel pair with i.i.d. CSCG entries of variance `d^-3`.
///
/// A single ChaCha8 stream keyed by `seed` supplies the draws: first the
/// real parts of `H` (column-major), then its imaginary parts, then the same
/// for `G`. Identical seeds reproduce bit-identical channels.
pub fn generate_channels(
    cfg: &SystemConfig,
    dist_id: f64,
    dist_eh: f64,
    seed: u64,
) -> Result<ChannelPair> {
    if !(dist_id > 0.0) || !(dist_eh > 0.0) {
        return Err(SolverError::InvalidConfig(format!(
            "distances must be positive, got ({dist_id}, {dist_eh})"
        )));
    }
    let mut r = rng::stream(seed);
    let amp_id = linalg::c(dist_id.powf(-1.5));
    let amp_eh = linalg::c(dist_eh.powf(-1.5));
    let h = rng::standard_complex_matrix(&mut r, cfg.n_id, cfg.n_tx) * amp_id;
    let g = rng::standard_complex_matrix(&mut r, cfg.n_eh, cfg.n_tx) * amp_eh;
    Ok(ChannelPair {
        h,
        g,
        dist_id,
        dist_eh,
        seed,
    })
}

/// Energy harvested by the EH user under precoder `f`:
/// `efficiency * trace(F^H G^H G F)`.
pub fn harvested_energy(cfg: &SystemConfig, g: &CMat, f: &CMat) -> Result<f64> {
    if g.ncols() != f.nrows() {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "G is {}x{} but F is {}x{}",
                g.nrows(),
                g.ncols(),
                f.nrows(),
                f.ncols()
            ),
        });
    }
    let gf = g * f;
    Ok(cfg.efficiency * linalg::frob2(&gf))
}

/// Received RF energy with unit conversion efficiency: `trace(F^H G^H G F)`.
/// This is the quantity the solvers constrain; [`harvested_energy`] scales
/// it by the configured efficiency.
pub fn received_energy(g: &CMat, f: &CMat) -> f64 {
    linalg::frob2(&(g * f))
}

/// Largest eigenvalue of `G^H G` and its unit eigenvector (phase-fixed).
///
/// `power_budget * gain` is the largest received energy any precoder within
/// the budget can deliver, attained by beamforming along the eigenvector.
pub fn energy_gain(g: &CMat) -> (f64, CVec) {
    let eig = HermEig::new(&(g.adjoint() * g));
    let gain = eig.max().max(0.0);
    let v = linalg::normalize_phase(&eig.vectors.column(0).into_owned());
    (gain, v)
}

/// Weighted mean-square error of the transceiver triple over data and noise:
/// `trace(W (gamma^-1 L H F - I)(gamma^-1 L H F - I)^H) + gamma^-2 trace(W L L^H)`.
pub fn weighted_mse(cfg: &SystemConfig, h: &CMat, trx: &Transceiver) -> Result<f64> {
    let (f, l, gamma) = (&trx.precoder, &trx.receiver, trx.scale);
    if !(gamma > 0.0) {
        return Err(SolverError::NonPositiveScale { gamma });
    }
    if h.nrows() != cfg.n_id
        || h.ncols() != cfg.n_tx
        || f.nrows() != cfg.n_tx
        || f.ncols() != cfg.n_streams
        || l.nrows() != cfg.n_streams
        || l.ncols() != cfg.n_id
    {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "H {}x{}, F {}x{}, L {}x{} against config ({}, {}, {})",
                h.nrows(),
                h.ncols(),
                f.nrows(),
                f.ncols(),
                l.nrows(),
                l.ncols(),
                cfg.n_tx,
                cfg.n_streams,
                cfg.n_id
            ),
        });
    }
    let ginv = linalg::c(1.0 / gamma);
    let e = l * h * f * ginv - CMat::identity(cfg.n_streams, cfg.n_streams);
    let signal_term: f64 = e
        .row_iter()
        .enumerate()
        .map(|(k, row)| cfg.weights[k] * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let noise_term: f64 = l
        .row_iter()
        .enumerate()
        .map(|(k, row)| cfg.weights[k] * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        / (gamma * gamma);
    Ok(signal_term + noise_term)
}

/// Minimum weighted MSE and achievable rate of a precoder, assuming the
/// receive side is chosen optimally:
/// `M = trace(W (F^H H^H H F + I)^-1)`, `R = log2 det(F^H H^H H F + I)` bits.
pub fn mmse_and_rate(cfg: &SystemConfig, h: &CMat, f: &CMat) -> Result<(f64, f64)> {
    if h.ncols() != f.nrows() || f.ncols() != cfg.n_streams || h.nrows() != cfg.n_id {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "H {}x{} with F {}x{} against config ({}, {}, {})",
                h.nrows(),
                h.ncols(),
                f.nrows(),
                f.ncols(),
                cfg.n_tx,
                cfg.n_streams,
                cfg.n_id
            ),
        });
    }
    let hf = h * f;
    let gram = hf.adjoint() * &hf;
    let eig = HermEig::new(&gram);
    let rate_bits: f64 = eig.values.iter().map(|&d| (1.0 + d.max(0.0)).log2()).sum();
    // (A + I)^-1 through the eigenbasis of A keeps the inverse Hermitian.
    let n = cfg.n_streams;
    let vh_w_v = eig.vectors.adjoint() * cfg.weight_matrix() * &eig.vectors;
    let mmse: f64 = (0..n)
        .map(|i| vh_w_v[(i, i)].re / (1.0 + eig.values[i].max(0.0)))
        .sum();
    Ok((mmse, rate_bits))
}

/// Link budget: per-antenna receive SNR in dB,
/// `tx_power_dbm - pathloss_db - (noise_psd_dbm_hz + 10 log10 bandwidth_hz)`.
pub fn snr_budget(
    noise_psd_dbm_hz: f64,
    bandwidth_hz: f64,
    tx_power_dbm: f64,
    pathloss_db: f64,
) -> f64 {
    let noise_power_dbm = noise_psd_dbm_hz + 10.0 * bandwidth_hz.log10();
    tx_power_dbm - pathloss_db - noise_power_dbm
}
