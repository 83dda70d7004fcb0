//! Alternating minimization over the receive filter and the precoder.
//!
//! Each iteration applies two exact block updates: the Wiener receive filter
//! for the current precoder, then the dual-certified precoder for that filter.
//! Both steps minimize the same weighted MSE, so the objective sequence is
//! nonincreasing. Multiple starts guard against the nonconvexity of the joint
//! problem: a deterministic warm start (the unconstrained solution, itself
//! started from eigen beamforming) plus seeded random starts, solved in
//! parallel and reduced with a deterministic tie-break.

use crate::error::{Result, SolverError};
use crate::kkt::{self, DualState, EPS_FEAS};
use crate::linalg::{self, CMat, HermEig, RVec};
use crate::model::{self, ChannelPair, SystemConfig, Transceiver};
use crate::rng;
use crate::wiener;
use rayon::prelude::*;

/// Multi-start and stopping controls.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Total starts: one or two deterministic warm starts (the relaxed
    /// optimum, then a just-feasible blend of it toward the top energy
    /// eigenvector when that design misses the target), the rest random.
    /// Also the start count of the relaxed solve run first.
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Relative objective-change stopping threshold.
    pub tol: f64,
    /// Optional additional stop requirement on the relative precoder change.
    /// Needed when the returned triple must satisfy tight stationarity
    /// residuals: the objective can flatten well before the iterates do.
    pub precoder_tol: Option<f64>,
    /// Seed of the random-start substreams.
    pub seed: u64,
    /// Extra deterministic starts, tried right after the warm start. Used to
    /// chain solutions along a sweep.
    pub extra_inits: Vec<CMat>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: 8,
            max_iters: 200,
            tol: 1e-8,
            precoder_tol: None,
            seed: 0,
            extra_inits: Vec::new(),
        }
    }
}

/// Objective snapshot taken after each full iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterRecord {
    /// Weighted MSE of the certified triple at this iteration.
    pub mse: f64,
    /// Received energy of the precoder (harvester efficiency not applied).
    pub energy: f64,
    /// Receiver-optimal MSE floor of the precoder.
    pub mmse: f64,
    /// Achievable rate of the precoder in bits.
    pub rate_bits: f64,
}

/// History of one start: its per-iteration records, or the error that ended it.
#[derive(Debug, Clone)]
pub struct StartRun {
    /// Position in the start list: deterministic warm starts lead, extra
    /// inits follow, random starts come last.
    pub index: usize,
    pub records: Vec<IterRecord>,
    pub converged: bool,
    /// Failure description for starts that produced no usable solution.
    pub error: Option<String>,
}

/// Best transceiver across starts together with its certificate and history.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub transceiver: Transceiver,
    pub mse: f64,
    /// Received energy (harvester efficiency not applied).
    pub energy: f64,
    pub mmse: f64,
    pub rate_bits: f64,
    /// Dual certificate of the final precoder solve. `None` when the energy
    /// target pinned the precoder to the max-energy beamformer.
    pub dual: Option<DualState>,
    /// Which start won: deterministic warm starts lead, extra inits follow,
    /// random starts come last.
    pub start_index: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Iteration history of the winning start.
    pub trace: Vec<IterRecord>,
    /// Iteration histories of every start, in start order.
    pub starts: Vec<StartRun>,
}

/// Receiver weighting policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Unit weight per stream.
    Identity,
    /// Stream k weighted by the k-th largest eigenvalue of `H^H H`. Steers
    /// the MSE objective toward the rate-optimal power allocation.
    ChannelEigenvalues,
}

/// Weight vector realizing a [`WeightMode`] for a concrete channel.
pub fn weights_for(mode: WeightMode, cfg: &SystemConfig, h: &CMat) -> RVec {
    match mode {
        WeightMode::Identity => RVec::from_element(cfg.n_streams, 1.0),
        WeightMode::ChannelEigenvalues => {
            let eig = HermEig::new(&linalg::hermitize(&(h.adjoint() * h)));
            RVec::from_fn(cfg.n_streams, |k, _| eig.values[k].max(0.0))
        }
    }
}

/// Eigen-beamforming start: top stream directions of `H^H H` at equal power.
pub fn eigen_init(cfg: &SystemConfig, h: &CMat) -> CMat {
    let eig = HermEig::new(&linalg::hermitize(&(h.adjoint() * h)));
    let mut f = CMat::zeros(cfg.n_tx, cfg.n_streams);
    let per_stream = (cfg.power_budget / cfg.n_streams as f64).sqrt();
    for k in 0..cfg.n_streams {
        f.set_column(k, &eig.vectors.column(k).scale(per_stream));
    }
    f
}

/// Solve with default options.
pub fn solve(cfg: &SystemConfig, ch: &ChannelPair) -> Result<SolveReport> {
    solve_with_options(cfg, ch, &SolveOptions::default())
}

/// Solve after replacing the configured stream weights per `mode`.
pub fn solve_with_weights(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    mode: WeightMode,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let cfg = cfg.with_weights(weights_for(mode, cfg, &ch.h));
    solve_with_options(&cfg, ch, opts)
}

/// Multi-start alternating solve of the energy-constrained design problem.
///
/// With an active target the solver first solves the relaxed problem (no
/// energy constraint) under the same options. A converged relaxed optimum
/// that already meets the target is returned as-is with a zero energy
/// multiplier; otherwise it seeds the constrained multi-start as the leading
/// warm start, followed by a just-feasible blend of it toward the top energy
/// eigenvector.
///
/// Targets at the attainable maximum (within [`EPS_FEAS`] relative margin)
/// also skip the alternation: the only feasible precoder direction is the
/// top energy eigenvector, so the closed-form max-energy beamformer with its
/// Wiener receiver is returned directly. Targets beyond the maximum error
/// with [`SolverError::TargetUnattainable`].
pub fn solve_with_options(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let (gain, v_top) = model::energy_gain(&ch.g);
    let e_max = cfg.power_budget * gain;
    if cfg.target_energy > e_max {
        return Err(SolverError::TargetUnattainable {
            target: cfg.target_energy,
            e_max,
        });
    }
    if e_max > 0.0 && cfg.target_energy >= e_max * (1.0 - EPS_FEAS) {
        return max_energy_solution(cfg, ch, &v_top);
    }

    let mut inits: Vec<CMat> = Vec::new();
    if cfg.target_energy > 0.0 {
        let relaxed = cfg.with_target_energy(0.0);
        // The relaxed phase decides constraint activity, so it runs with at
        // least the default iteration budget even when the caller caps the
        // constrained alternation tighter.
        let inner = SolveOptions {
            max_iters: opts.max_iters.max(SolveOptions::default().max_iters),
            extra_inits: Vec::new(),
            ..opts.clone()
        };
        match solve_with_options(&relaxed, ch, &inner) {
            Ok(rep) => {
                // Active-set shortcut: a relaxed optimum that already meets
                // the target solves the constrained problem outright, with a
                // zero energy multiplier. Deciding activity on the whole
                // solve keeps the multiplier exactly zero at targets the
                // unconstrained design can serve; a per-subproblem test
                // cannot, because near the unconstrained optimum the
                // achieved energy wanders at first order while the
                // objective is flat.
                if rep.converged && rep.energy >= cfg.target_energy * (1.0 - EPS_FEAS) {
                    return recertify_inactive(cfg, ch, rep);
                }
                let f_u = rep.transceiver.precoder;
                let e_u = rep.energy;
                inits.push(f_u.clone());
                if e_u < cfg.target_energy && e_max > e_u {
                    // Second deterministic start: blend the relaxed
                    // covariance toward the top energy eigenvector just far
                    // enough to meet the target. Lands much closer to the
                    // constrained optimum than any random draw.
                    let beta = ((cfg.target_energy - e_u) / (e_max - e_u)).min(1.0);
                    let q = linalg::hermitize(
                        &((&f_u * f_u.adjoint()).scale(1.0 - beta)
                            + (&v_top * v_top.adjoint()).scale(beta * cfg.power_budget)),
                    );
                    let eig = HermEig::new(&q);
                    inits.push(CMat::from_fn(cfg.n_tx, cfg.n_streams, |i, k| {
                        eig.vectors[(i, k)] * linalg::c(eig.values[k].max(0.0).sqrt())
                    }));
                }
            }
            Err(_) => inits.push(eigen_init(cfg, &ch.h)),
        }
    } else {
        inits.push(eigen_init(cfg, &ch.h));
    }
    let warm_count = inits.len();
    for extra in &opts.extra_inits {
        inits.push(extra.clone());
    }
    let n_random = opts.starts.max(1).saturating_sub(warm_count);
    for j in 0..n_random {
        let mut r = rng::stream(rng::substream(opts.seed, &[j as u64]));
        inits.push(rng::standard_complex_matrix(
            &mut r,
            cfg.n_tx,
            cfg.n_streams,
        ));
    }

    let outcomes: Vec<(usize, Result<StartOutcome>)> = inits
        .into_par_iter()
        .enumerate()
        .map(|(idx, init)| (idx, run_start(cfg, ch, init, opts)))
        .collect();

    let total = outcomes.len();
    let mut runs = Vec::with_capacity(total);
    let mut best: Option<(usize, StartOutcome)> = None;
    for (idx, outcome) in outcomes {
        match outcome {
            Ok(out) => {
                runs.push(StartRun {
                    index: idx,
                    records: out.trace.clone(),
                    converged: out.converged,
                    error: None,
                });
                let replace = match &best {
                    None => true,
                    Some((_, cur)) => better(&out, cur),
                };
                if replace {
                    best = Some((idx, out));
                }
            }
            Err(SolverError::TargetUnattainable { target, e_max }) => {
                return Err(SolverError::TargetUnattainable { target, e_max })
            }
            Err(err) => {
                runs.push(StartRun {
                    index: idx,
                    records: Vec::new(),
                    converged: false,
                    error: Some(err.to_string()),
                });
            }
        }
    }
    let (start_index, out) = best.ok_or(SolverError::AllStartsDegenerate { starts: total })?;
    Ok(SolveReport {
        transceiver: out.transceiver,
        mse: out.mse,
        energy: out.energy,
        mmse: out.mmse,
        rate_bits: out.rate_bits,
        dual: Some(out.dual),
        start_index,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        starts: runs,
    })
}

/// Restate a relaxed solve's certificate under the configured target: the
/// multiplier stays zero, the slack terms are rebuilt against the shifted
/// energy form.
fn recertify_inactive(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    mut rep: SolveReport,
) -> Result<SolveReport> {
    let aux = kkt::build_aux(cfg, &ch.h, &ch.g, &rep.transceiver.receiver)?;
    rep.dual = Some(DualState {
        lambda_bar: 0.0,
        mu_bar: aux.mu_bar(0.0),
        kappa: kkt::feasibility_bound(&aux)?,
        j_at_zero: kkt::dual_function(&aux, 0.0)?,
    });
    Ok(rep)
}

struct StartOutcome {
    transceiver: Transceiver,
    mse: f64,
    energy: f64,
    mmse: f64,
    rate_bits: f64,
    dual: DualState,
    iterations: usize,
    converged: bool,
    trace: Vec<IterRecord>,
}

fn better(a: &StartOutcome, b: &StartOutcome) -> bool {
    let mse_scale = a.mse.abs().max(b.mse.abs()).max(1.0);
    if (a.mse - b.mse).abs() > 1e-12 * mse_scale {
        return a.mse < b.mse;
    }
    let en_scale = a.energy.abs().max(b.energy.abs()).max(1.0);
    if (a.energy - b.energy).abs() > 1e-12 * en_scale {
        return a.energy > b.energy;
    }
    false
}

fn run_start(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    init: CMat,
    opts: &SolveOptions,
) -> Result<StartOutcome> {
    let norm2 = linalg::frob2(&init);
    if !(norm2 > 0.0) || !norm2.is_finite() {
        return Err(SolverError::NoPositiveScale);
    }
    let mut f = init.scale((cfg.power_budget / norm2).sqrt());
    let mut gamma = 1.0;
    let mut receiver: Option<CMat> = None;
    let mut dual_last = None;
    let mut trace = Vec::new();
    let mut prev_mse = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iters.max(1) {
        let l = wiener::wiener_receiver(cfg, &ch.h, &f, gamma)?;
        let (f_new, dual, gamma_new) = kkt::solve_precoder(cfg, &ch.h, &ch.g, &l)?;
        let trx = Transceiver {
            precoder: f_new.clone(),
            receiver: l.clone(),
            scale: gamma_new,
        };
        let mse = model::weighted_mse(cfg, &ch.h, &trx)?;
        let energy = model::received_energy(&ch.g, &f_new);
        let (mmse, rate_bits) = model::mmse_and_rate(cfg, &ch.h, &f_new)?;
        trace.push(IterRecord {
            mse,
            energy,
            mmse,
            rate_bits,
        });
        iterations += 1;

        let f_step = (&f_new - &f).norm() / f.norm();
        let rel = if prev_mse.is_finite() {
            (prev_mse - mse).abs() / prev_mse.max(f64::MIN_POSITIVE)
        } else {
            f64::INFINITY
        };
        receiver = Some(l);
        f = f_new;
        gamma = gamma_new;
        dual_last = Some(dual);
        if rel <= opts.tol && opts.precoder_tol.map_or(true, |pt| f_step <= pt) {
            converged = true;
            break;
        }
        prev_mse = mse;
    }

    let last = *trace.last().expect("at least one iteration ran");
    Ok(StartOutcome {
        transceiver: Transceiver {
            precoder: f,
            receiver: receiver.expect("at least one receiver update ran"),
            scale: gamma,
        },
        mse: last.mse,
        energy: last.energy,
        mmse: last.mmse,
        rate_bits: last.rate_bits,
        dual: dual_last.expect("at least one precoder solve ran"),
        iterations,
        converged,
        trace,
    })
}

/// Closed-form solution when the energy target admits only the max-energy
/// beamformer: all power on the top energy eigenvector, Wiener receiver.
pub(crate) fn max_energy_solution(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    v_top: &crate::linalg::CVec,
) -> Result<SolveReport> {
    let mut f = CMat::zeros(cfg.n_tx, cfg.n_streams);
    f.set_column(0, &v_top.scale(cfg.power_budget.sqrt()));
    let gamma = 1.0;
    let receiver = wiener::wiener_receiver(cfg, &ch.h, &f, gamma)?;
    let trx = Transceiver {
        precoder: f.clone(),
        receiver,
        scale: gamma,
    };
    let mse = model::weighted_mse(cfg, &ch.h, &trx)?;
    let energy = model::received_energy(&ch.g, &f);
    let (mmse, rate_bits) = model::mmse_and_rate(cfg, &ch.h, &f)?;
    let record = IterRecord {
        mse,
        energy,
        mmse,
        rate_bits,
    };
    Ok(SolveReport {
        transceiver: trx,
        mse,
        energy,
        mmse,
        rate_bits,
        dual: None,
        start_index: 0,
        iterations: 0,
        converged: true,
        trace: vec![record],
        starts: vec![StartRun {
            index: 0,
            records: vec![record],
            converged: true,
            error: None,
        }],
    })
}
