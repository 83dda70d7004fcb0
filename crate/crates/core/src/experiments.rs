//! Repeatable experiment drivers: tradeoff-region sweeps, convergence
//! histories, and an uncoded BER Monte-Carlo comparing transmit designs.

use crate::alternating::{self, weights_for, SolveOptions, SolveReport, WeightMode};
use crate::baselines;
use crate::error::{Result, SolverError};
use crate::kkt::EPS_FEAS;
use crate::linalg::CMat;
use crate::model::{self, ChannelPair, SystemConfig};
use crate::qam;
use crate::rng;
use crate::wiener;
use rand::Rng;
use rayon::prelude::*;
use std::fmt;

/// One solved grid point of a tradeoff region.
#[derive(Debug, Clone, Copy)]
pub struct RegionPoint {
    /// Received-energy target this point was solved for.
    pub target: f64,
    /// Received energy actually delivered.
    pub energy: f64,
    pub mse: f64,
    pub mmse: f64,
    pub rate_bits: f64,
    /// Energy multiplier; `None` at the max-energy corner.
    pub lambda: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Which tradeoff a region sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    /// Receiver-optimized MSE against energy, solved with unit weights.
    Mse,
    /// Achievable rate against energy, solved with channel-eigenvalue weights.
    Rate,
}

impl MetricKind {
    /// Stream weighting used while solving curves of this kind.
    pub fn weight_mode(self) -> WeightMode {
        match self {
            MetricKind::Mse => WeightMode::Identity,
            MetricKind::Rate => WeightMode::ChannelEigenvalues,
        }
    }

    /// Curve value of a solved point.
    pub fn value(self, p: &RegionPoint) -> f64 {
        match self {
            MetricKind::Mse => p.mmse,
            MetricKind::Rate => p.rate_bits,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Rate => "rate",
        }
    }
}

/// Tradeoff region of one channel draw, targets ascending, the exact
/// max-energy corner appended last.
#[derive(Debug, Clone)]
pub struct RegionCurve {
    pub kind: MetricKind,
    pub points: Vec<RegionPoint>,
    /// Energy of the unconstrained design; targets below it change nothing.
    pub e_id: f64,
    /// Largest attainable received energy.
    pub e_max: f64,
    /// Seed the per-point solves drew their random starts from.
    pub seed: u64,
    /// Error class and message of the grid point that ended the sweep early,
    /// if any. The solved points are kept; the closed-form corner is not
    /// appended to an aborted curve.
    pub aborted: Option<String>,
}

fn point_from(target: f64, report: &SolveReport) -> RegionPoint {
    RegionPoint {
        target,
        energy: report.energy,
        mse: report.mse,
        mmse: report.mmse,
        rate_bits: report.rate_bits,
        lambda: report.dual.map(|d| d.lambda_bar),
        converged: report.converged,
        iterations: report.iterations,
    }
}

/// Sweep the energy target across the attainable range.
///
/// Grid points are solved from the highest target downward, warm-starting
/// each solve with its tighter neighbor's precoder: region curves are
/// continuous, so chaining keeps the whole sweep on one solution branch and
/// the emitted curve monotone. Points come back ascending regardless.
pub fn sweep_region(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    kind: MetricKind,
    grid_size: usize,
    opts: &SolveOptions,
) -> Result<RegionCurve> {
    if grid_size < 2 {
        return Err(SolverError::InvalidConfig(format!(
            "region sweep needs at least 2 grid points, got {grid_size}"
        )));
    }
    let cfg = cfg.with_weights(weights_for(kind.weight_mode(), cfg, &ch.h));
    let ends = baselines::region_endpoints(&cfg, ch, opts)?;
    let top = ends.e_max * (1.0 - EPS_FEAS);
    let lo = ends.e_id.min(top);
    let mut points = Vec::with_capacity(grid_size + 1);
    let mut prev: Option<CMat> = None;
    for k in (0..grid_size).rev() {
        let target = lo + (top - lo) * k as f64 / (grid_size - 1) as f64;
        let o = SolveOptions {
            extra_inits: prev.iter().cloned().collect(),
            ..opts.clone()
        };
        match alternating::solve_with_options(&cfg.with_target_energy(target), ch, &o) {
            Ok(report) => {
                prev = Some(report.transceiver.precoder.clone());
                points.push(point_from(target, &report));
            }
            Err(err) => {
                points.reverse();
                return Ok(RegionCurve {
                    kind,
                    points,
                    e_id: ends.e_id,
                    e_max: ends.e_max,
                    seed: opts.seed,
                    aborted: Some(format!("{}: {err}", err.name())),
                });
            }
        }
    }
    points.reverse();
    points.push(point_from(ends.e_max, &ends.max_energy));
    Ok(RegionCurve {
        kind,
        points,
        e_id: ends.e_id,
        e_max: ends.e_max,
        seed: opts.seed,
        aborted: None,
    })
}

/// Full solve report under the given weighting, including the per-iteration
/// objective history of every start.
pub fn convergence_trace(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    mode: WeightMode,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    alternating::solve_with_weights(cfg, ch, mode, opts)
}

/// Transmit designs compared by the BER experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Joint MSE design with unit stream weights.
    WmmseIdentity,
    /// Rate-optimal covariance with a Wiener receive filter bolted on.
    RateOracle,
    /// Max-energy beamformer with a Wiener receive filter.
    EnergyBeamformer,
}

/// Fixed evaluation order of the schemes.
pub const ALL_SCHEMES: [Scheme; 3] = [
    Scheme::WmmseIdentity,
    Scheme::RateOracle,
    Scheme::EnergyBeamformer,
];

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::WmmseIdentity => "wmmse-identity",
            Scheme::RateOracle => "rate-oracle",
            Scheme::EnergyBeamformer => "energy-beamformer",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exact error counts of one scheme at one operating point.
#[derive(Debug, Clone, Copy)]
pub struct BerResult {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_total: u64,
}

impl BerResult {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits_total as f64
    }
}

/// Monte-Carlo controls. The information-user distance sets the transmit
/// power for each SNR point: per-antenna receive SNR equals
/// `P_T * dist_id^-3`, so `P_T = 10^(snr/10) * dist_id^3`.
#[derive(Debug, Clone)]
pub struct BerSetup {
    pub dist_id: f64,
    pub dist_eh: f64,
    pub snrs_db: Vec<f64>,
    /// Designs to simulate, in output order. Payload and noise draws do not
    /// depend on this list, so any subset reproduces the full run's counts.
    pub schemes: Vec<Scheme>,
    pub channels: usize,
    pub symbols_per_channel: usize,
    pub seed: u64,
    /// Multi-start count of the joint solver.
    pub starts: usize,
}

/// Substream tags of the experiment; fixed so every (channel, SNR) cell is
/// reproducible independent of scheduling.
pub(crate) const TAG_CHANNEL: u64 = 1;
pub(crate) const TAG_DATA: u64 = 2;
pub(crate) const TAG_SOLVER: u64 = 3;

/// Uncoded 4QAM BER of the selected schemes over random channel draws.
///
/// Each channel and SNR cell re-solves all requested designs at an energy
/// target of half the attainable maximum, then runs the same payload bits
/// and noise through all of them, so scheme comparisons share their
/// randomness. Results are grouped by SNR in input order, schemes in setup
/// order within each group.
pub fn ber_montecarlo(cfg: &SystemConfig, setup: &BerSetup) -> Result<Vec<BerResult>> {
    if setup.channels == 0 || setup.symbols_per_channel == 0 || setup.snrs_db.is_empty() {
        return Err(SolverError::InvalidConfig(
            "BER experiment needs channels >= 1, symbols >= 1, and at least one SNR".into(),
        ));
    }
    if setup.starts == 0 {
        return Err(SolverError::InvalidConfig(
            "BER experiment needs at least one solver start".into(),
        ));
    }
    if setup.schemes.is_empty() {
        return Err(SolverError::InvalidConfig(
            "BER experiment needs at least one scheme".into(),
        ));
    }
    for (i, s) in setup.schemes.iter().enumerate() {
        if setup.schemes[..i].contains(s) {
            return Err(SolverError::InvalidConfig(format!(
                "scheme {s} listed twice"
            )));
        }
    }
    let per_channel: Result<Vec<Vec<(u64, u64)>>> = (0..setup.channels as u64)
        .into_par_iter()
        .map(|ci| simulate_channel(cfg, setup, ci))
        .collect();
    let per_channel = per_channel?;

    let n_sch = setup.schemes.len();
    let mut out = Vec::with_capacity(setup.snrs_db.len() * n_sch);
    for (si, &snr_db) in setup.snrs_db.iter().enumerate() {
        for (hi, &scheme) in setup.schemes.iter().enumerate() {
            let mut bit_errors = 0u64;
            let mut bits_total = 0u64;
            for counts in &per_channel {
                let (e, b) = counts[si * n_sch + hi];
                bit_errors += e;
                bits_total += b;
            }
            out.push(BerResult {
                scheme,
                snr_db,
                bit_errors,
                bits_total,
            });
        }
    }
    Ok(out)
}

fn simulate_channel(cfg: &SystemConfig, setup: &BerSetup, ci: u64) -> Result<Vec<(u64, u64)>> {
    let ch_seed = rng::substream(setup.seed, &[TAG_CHANNEL, ci]);
    let ch = model::generate_channels(cfg, setup.dist_id, setup.dist_eh, ch_seed)?;
    let n_s = cfg.n_streams;
    let sym = setup.symbols_per_channel;
    let mut counts = Vec::with_capacity(setup.snrs_db.len() * setup.schemes.len());

    for (si, &snr_db) in setup.snrs_db.iter().enumerate() {
        let p_t = 10f64.powf(snr_db / 10.0) * setup.dist_id.powi(3);
        let (gain, _) = model::energy_gain(&ch.g);
        let e_bar = 0.5 * p_t * gain;
        let cfg_s = cfg.with_power_budget(p_t).with_target_energy(e_bar);

        // Monte-Carlo noise dwarfs the last digits of the transceiver, so the
        // inner solves run looser than the default without moving the BER.
        let opts = SolveOptions {
            starts: setup.starts,
            seed: rng::substream(setup.seed, &[TAG_SOLVER, ci, si as u64]),
            max_iters: 60,
            tol: 1e-6,
            ..SolveOptions::default()
        };

        // Payload and noise are drawn once per (channel, SNR) cell: bits
        // first, then the noise block, so counts are seed-stable and do not
        // depend on which schemes were requested.
        let mut data = rng::stream(rng::substream(setup.seed, &[TAG_DATA, ci, si as u64]));
        let mut bits = vec![false; 2 * n_s * sym];
        for b in bits.iter_mut() {
            *b = data.gen();
        }
        let symbols = CMat::from_fn(n_s, sym, |k, t| {
            let i = 2 * (t * n_s + k);
            qam::symbol(bits[i], bits[i + 1])
        });
        let noise = rng::standard_complex_matrix(&mut data, cfg.n_id, sym);

        for &scheme in &setup.schemes {
            let (f, l, gamma) = match scheme {
                Scheme::WmmseIdentity => {
                    let joint = alternating::solve_with_options(&cfg_s, &ch, &opts)?;
                    (
                        joint.transceiver.precoder,
                        joint.transceiver.receiver,
                        joint.transceiver.scale,
                    )
                }
                Scheme::RateOracle => {
                    let rate = baselines::rate_optimal_oracle(&cfg_s, &ch.h, &ch.g)?;
                    let l = wiener::wiener_receiver(&cfg_s, &ch.h, &rate.precoder, 1.0)?;
                    (rate.precoder, l, 1.0)
                }
                Scheme::EnergyBeamformer => {
                    let eh = baselines::energy_beamformer(&cfg_s, &ch)?;
                    (
                        eh.transceiver.precoder,
                        eh.transceiver.receiver,
                        eh.transceiver.scale,
                    )
                }
            };
            let received = &ch.h * &f * &symbols + &noise;
            let estimates = (&l * received).unscale(gamma);
            let mut errors = 0u64;
            for t in 0..sym {
                for k in 0..n_s {
                    let (b0, b1) = qam::slice(estimates[(k, t)]);
                    let i = 2 * (t * n_s + k);
                    errors += u64::from(b0 != bits[i]) + u64::from(b1 != bits[i + 1]);
                }
            }
            counts.push((errors, (2 * n_s * sym) as u64));
        }
    }
    Ok(counts)
}
