//! Reference designs the joint solver is measured against: the max-energy
//! beamformer, the unconstrained MMSE design, and a covariance-level
//! rate-optimal oracle with a duality-gap certificate.

use crate::alternating::{self, SolveOptions, SolveReport};
use crate::error::{Result, SolverError};
use crate::kkt::EPS_FEAS;
use crate::linalg::{self, c, CMat, HermEig};
use crate::model::{self, ChannelPair, SystemConfig};

/// Energy extremes of the tradeoff region for one channel draw.
#[derive(Debug, Clone)]
pub struct RegionEndpoints {
    /// Energy delivered by the unconstrained MMSE design; targets below this
    /// leave the energy constraint inactive.
    pub e_id: f64,
    /// Largest attainable received energy, `P_T` times the top eigenvalue of
    /// `G^H G`.
    pub e_max: f64,
    pub unconstrained: SolveReport,
    pub max_energy: SolveReport,
}

/// All transmit power on the top energy eigenvector, Wiener receiver.
pub fn energy_beamformer(cfg: &SystemConfig, ch: &ChannelPair) -> Result<SolveReport> {
    let (_, v_top) = model::energy_gain(&ch.g);
    alternating::max_energy_solution(cfg, ch, &v_top)
}

/// Alternating solve with the energy constraint removed.
pub fn unconstrained_wmmse(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let relaxed = cfg.with_target_energy(0.0);
    alternating::solve_with_options(&relaxed, ch, opts)
}

/// Solve both extremes of the region.
pub fn region_endpoints(
    cfg: &SystemConfig,
    ch: &ChannelPair,
    opts: &SolveOptions,
) -> Result<RegionEndpoints> {
    let unconstrained = unconstrained_wmmse(cfg, ch, opts)?;
    let max_energy = energy_beamformer(cfg, ch)?;
    let (gain, _) = model::energy_gain(&ch.g);
    Ok(RegionEndpoints {
        e_id: unconstrained.energy,
        e_max: cfg.power_budget * gain,
        unconstrained,
        max_energy,
    })
}

/// Rate-optimal transmit design under the same power and energy constraints,
/// solved at the covariance level where the problem is convex.
#[derive(Debug, Clone)]
pub struct RateSolution {
    /// Top stream directions of the optimal covariance, scaled by the mode
    /// powers and zero-padded to `n_streams` columns. Lossless whenever the
    /// covariance rank fits the stream count.
    pub precoder: CMat,
    /// Optimal transmit covariance.
    pub q: CMat,
    /// Achievable rate of `q` in bits.
    pub rate_bits: f64,
    /// Received energy of `q` (harvester efficiency not applied).
    pub energy: f64,
    /// Energy multiplier; infinite when the target admits only the
    /// max-energy covariance.
    pub lambda: f64,
    /// Power multiplier.
    pub mu: f64,
    /// Certified optimality gap in nats (dual value minus achieved rate).
    pub gap_nats: f64,
}

struct ModeSolution {
    q: CMat,
    tr: f64,
    dual_sum: f64,
}

/// Water-filling solution of the inner problem at fixed multipliers.
/// `None` when `mu I - lambda G^H G` is not positive definite.
fn modes_at(h: &CMat, gg_eig: &HermEig, lambda: f64, mu: f64) -> Option<ModeSolution> {
    let w: Vec<f64> = gg_eig
        .values
        .iter()
        .map(|&gi| mu - lambda * gi.max(0.0))
        .collect();
    if w.iter().any(|&x| !(x > 0.0)) {
        return None;
    }
    let n = w.len();
    let mut om_inv_sqrt = gg_eig.vectors.clone();
    for (k, mut col) in om_inv_sqrt.column_iter_mut().enumerate() {
        col *= c(1.0 / w[k].sqrt());
    }
    let om_inv_sqrt = &om_inv_sqrt * gg_eig.vectors.adjoint();
    let ht = h * &om_inv_sqrt;
    let he = HermEig::new(&linalg::hermitize(&(ht.adjoint() * &ht)));
    let mut qt = CMat::zeros(n, n);
    let mut dual_sum = 0.0;
    for k in 0..n {
        let s2 = he.values[k];
        if s2 > 1.0 {
            let fill = 1.0 - 1.0 / s2;
            let u = he.vectors.column(k);
            qt += (u * u.adjoint()).scale(fill);
            dual_sum += s2.ln() - 1.0 + 1.0 / s2;
        }
    }
    let q = linalg::hermitize(&(&om_inv_sqrt * qt * &om_inv_sqrt));
    let tr = linalg::trace_re(&q);
    Some(ModeSolution { q, tr, dual_sum })
}

/// Rate of a covariance in nats, evaluated directly from the log-det.
fn rate_nats_of(h: &CMat, q: &CMat) -> f64 {
    let hqh = linalg::hermitize(&(h * q * h.adjoint()));
    HermEig::new(&hqh)
        .values
        .iter()
        .map(|&d| (1.0 + d.max(0.0)).ln())
        .sum()
}

/// Inner solve for a fixed energy multiplier: water-fill the power
/// multiplier to spend the budget, completing along the top energy
/// eigenvector when the active modes cannot absorb it.
fn solve_at_lambda(
    h: &CMat,
    gg_eig: &HermEig,
    lambda: f64,
    p_t: f64,
) -> Result<(CMat, f64, f64)> {
    let floor = lambda * gg_eig.values[0].max(0.0);
    let scale = floor.max(1.0);
    let t_lo = 1e-12 * scale;

    let lo_sol = modes_at(h, gg_eig, lambda, floor + t_lo).ok_or_else(|| {
        SolverError::ToleranceNotMet {
            what: "inner water-filling lost positive definiteness".into(),
            achieved: floor + t_lo,
            required: floor,
        }
    })?;
    if lo_sol.tr < p_t {
        // Power-deficient branch: the remaining budget rides the flat ray
        // along the top energy eigenvector.
        let v = gg_eig.vectors.column(0);
        let q = lo_sol.q + (v * v.adjoint()).scale(p_t - lo_sol.tr);
        let mu = floor + t_lo;
        let dual = lo_sol.dual_sum + mu * p_t;
        return Ok((q, mu, dual));
    }

    let mut t_hi = scale;
    let mut grow = 0;
    while modes_at(h, gg_eig, lambda, floor + t_hi)
        .map(|s| s.tr > p_t)
        .unwrap_or(true)
    {
        t_hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(SolverError::BisectionFailure {
                residual: f64::INFINITY,
                tolerance: p_t,
                iterations: grow,
            });
        }
    }
    let mut lo = t_lo;
    let mut hi = t_hi;
    for _ in 0..200 {
        // Stop once halving can no longer move mu = floor + hi at f64 scale.
        if hi - lo <= 1e-13 * (floor + hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match modes_at(h, gg_eig, lambda, floor + mid) {
            Some(s) if s.tr > p_t => lo = mid,
            Some(_) => hi = mid,
            None => lo = mid,
        }
    }
    let mu = floor + hi;
    let sol = modes_at(h, gg_eig, lambda, mu).expect("mu above the floor");
    let dual = sol.dual_sum + mu * p_t;
    Ok((sol.q, mu, dual))
}

/// Maximize the information rate subject to the transmit power budget and
/// the received-energy target. Convex in the covariance, so the returned
/// duality gap certifies (near-)optimality.
pub fn rate_optimal_oracle(cfg: &SystemConfig, h: &CMat, g: &CMat) -> Result<RateSolution> {
    let p_t = cfg.power_budget;
    let e_bar = cfg.target_energy;
    let gg = linalg::hermitize(&(g.adjoint() * g));
    let gg_eig = HermEig::new(&gg);
    let g1 = gg_eig.values[0].max(0.0);
    let e_max = p_t * g1;
    if e_bar > e_max {
        return Err(SolverError::TargetUnattainable {
            target: e_bar,
            e_max,
        });
    }
    let energy_of = |q: &CMat| linalg::trace_re(&(&gg * q));
    if e_max > 0.0 && e_bar >= e_max * (1.0 - EPS_FEAS) {
        // Only the rank-one max-energy covariance is feasible.
        let v = gg_eig.vectors.column(0);
        let q = (v * v.adjoint()).scale(p_t);
        let rate_nats = rate_nats_of(h, &q);
        let energy = energy_of(&q);
        return finish_rate(cfg, q, rate_nats, energy, f64::INFINITY, f64::INFINITY, 0.0);
    }

    let (q0, mu0, dual0) = solve_at_lambda(h, &gg_eig, 0.0, p_t)?;
    let (q_raw, lambda, mu, dual_raw) = if energy_of(&q0) >= e_bar {
        (q0, 0.0, mu0, dual0)
    } else {
        let mut lam_hi = 1.0;
        let mut lam_lo = 0.0;
        let mut grow = 0;
        loop {
            let (q, _, _) = solve_at_lambda(h, &gg_eig, lam_hi, p_t)?;
            if energy_of(&q) >= e_bar {
                break;
            }
            lam_lo = lam_hi;
            lam_hi *= 2.0;
            grow += 1;
            if grow > 100 {
                return Err(SolverError::BisectionFailure {
                    residual: e_bar - energy_of(&q),
                    tolerance: 1e-9 * e_bar,
                    iterations: grow,
                });
            }
        }
        for _ in 0..200 {
            if lam_hi - lam_lo <= 1e-13 * lam_hi {
                break;
            }
            let mid = 0.5 * (lam_lo + lam_hi);
            let (q, _, _) = solve_at_lambda(h, &gg_eig, mid, p_t)?;
            if energy_of(&q) >= e_bar {
                lam_hi = mid;
            } else {
                lam_lo = mid;
            }
        }
        let (q, mu, dual) = solve_at_lambda(h, &gg_eig, lam_hi, p_t)?;
        (q, lam_hi, mu, dual)
    };

    // Exact feasibility: blend minimally toward the max-energy covariance.
    let mut q = q_raw;
    let e_now = energy_of(&q);
    if e_now < e_bar && e_max > e_now {
        let beta = ((e_bar - e_now) / (e_max - e_now)).min(1.0);
        let v = gg_eig.vectors.column(0);
        q = linalg::hermitize(&(q.scale(1.0 - beta) + (v * v.adjoint()).scale(beta * p_t)));
    }
    let rate_nats = rate_nats_of(h, &q);
    let gap = (dual_raw - lambda * e_bar) - rate_nats;
    let gap_limit = 1e-6 * rate_nats.max(1.0);
    if gap > gap_limit {
        return Err(SolverError::ToleranceNotMet {
            what: "rate oracle duality gap".into(),
            achieved: gap,
            required: gap_limit,
        });
    }
    let energy = energy_of(&q);
    finish_rate(cfg, q, rate_nats, energy, lambda, mu, gap)
}

fn finish_rate(
    cfg: &SystemConfig,
    q: CMat,
    rate_nats: f64,
    energy: f64,
    lambda: f64,
    mu: f64,
    gap_nats: f64,
) -> Result<RateSolution> {
    let qe = HermEig::new(&q);
    let mut f = CMat::zeros(cfg.n_tx, cfg.n_streams);
    for k in 0..cfg.n_streams.min(cfg.n_tx) {
        let p = qe.values[k].max(0.0);
        f.set_column(k, &qe.vectors.column(k).scale(p.sqrt()));
    }
    Ok(RateSolution {
        precoder: f,
        q,
        rate_bits: rate_nats / std::f64::consts::LN_2,
        energy,
        lambda,
        mu,
        gap_nats,
    })
}
