//! Optimal precoder for a fixed receive filter under a transmit power budget
//! and a minimum-harvested-energy constraint.
//!
//! For a fixed receive pair (L, gamma-parametrized), the stationarity system
//! reduces to a shifted Hermitian solve
//!
//! ```text
//!   (Y - x Z) Fbar = H^H L^H W,   x >= 0,
//!   Y = H^H L^H W L H + (trace(W L L^H) / P_T) I,
//!   Z = G^H G - (E_target / P_T) I,
//! ```
//!
//! followed by power normalization `F = gamma_hat * Fbar` with
//! `gamma_hat = sqrt(P_T / ||Fbar||_F^2)`. The energy-constraint multiplier
//! `x` is the root of `J(x) = trace(Fbar^H Z Fbar)`: `J >= 0` means the
//! power-normalized precoder meets the energy target. `J` is nondecreasing
//! on `[0, 1/kappa)`, where `kappa` is the largest eigenvalue of the pencil
//! `Z u = d Y u`, so a guarded bisection finds the root.
//!
//! On structured channels the blow-up direction of the shifted system can be
//! exactly orthogonal to the right-hand side; `J` then stays negative on the
//! whole interval and the multiplier sits at `1/kappa`, where the system is
//! singular. [`solve_precoder`] completes the solution there by adding the
//! null-space component that meets the energy target with the least power,
//! which keeps every stationarity condition satisfied.

use crate::error::{Result, SolverError};
use crate::linalg::{self, c, CMat, CVec, HermEig, RVec};
use crate::model::{self, SystemConfig};

/// Targets closer to the attainable maximum than this relative margin are
/// rejected by [`solve_precoder`]; callers substitute the closed-form
/// max-energy beamformer there.
pub const EPS_FEAS: f64 = 1e-9;

/// Iteration budget of the dual bisection.
pub const BISECT_MAX_ITER: usize = 200;

/// Relative threshold below which an eigenvalue of the shifted system counts
/// as singular.
const EIG_FLOOR: f64 = 1e-12;

/// Degeneracy threshold on trace(W L L^H).
const RECEIVER_FLOOR: f64 = 1e-12;

/// Dual variables certifying a precoder solution.
#[derive(Debug, Clone, Copy)]
pub struct DualState {
    /// Multiplier of the harvested-energy constraint.
    pub lambda_bar: f64,
    /// Multiplier of the power constraint, `(lambda_bar * E_target + trace(W L L^H)) / P_T`.
    pub mu_bar: f64,
    /// Top generalized eigenvalue of (Z, Y); `1/kappa` bounds the dual interval.
    pub kappa: f64,
    /// Energy-slack value `J(0)` of the unconstrained stationary precoder.
    pub j_at_zero: f64,
}

/// Quadratic forms of the fixed-receiver subproblem.
#[derive(Debug, Clone)]
pub struct PrecoderAux {
    /// Signal-plus-noise form `H^H L^H W L H + (trace(W L L^H)/P_T) I`.
    pub y: CMat,
    /// Energy-slack form `G^H G - (E_target/P_T) I`.
    pub z: CMat,
    rhs: CMat,
    tr_wll: f64,
    p_t: f64,
    e_target: f64,
    y_norm: f64,
    z_norm: f64,
}

impl PrecoderAux {
    /// Shifted system matrix at dual value `x` with the budget-consistent
    /// power multiplier folded in: `K(x) = Y - x Z`.
    pub fn k_matrix(&self, lambda_bar: f64) -> CMat {
        &self.y - self.z.scale(lambda_bar)
    }

    /// trace(W L L^H) captured at construction.
    pub fn receiver_weight(&self) -> f64 {
        self.tr_wll
    }

    /// Right-hand side `H^H L^H W` of the stationarity system.
    pub fn rhs(&self) -> &CMat {
        &self.rhs
    }

    /// Bisection stop tolerance on `|J|`, scaled to the instance.
    pub fn j_tolerance(&self) -> f64 {
        1e-10 * self.p_t * self.z_norm
    }

    /// Window around `J(0) = 0` inside which the constraint counts as
    /// inactive. Wider than the bisection tolerance: targets fed back from a
    /// converged alternation carry its 1e-8-scale error, and a multiplier
    /// fitted to that noise would be spurious.
    pub fn zero_snap(&self) -> f64 {
        1e-8 * self.p_t * self.z_norm
    }

    /// Power multiplier implied by the energy multiplier.
    pub fn mu_bar(&self, lambda_bar: f64) -> f64 {
        (lambda_bar * self.e_target + self.tr_wll) / self.p_t
    }
}

/// Assemble the quadratic forms for a fixed receive filter.
pub fn build_aux(cfg: &SystemConfig, h: &CMat, g: &CMat, l: &CMat) -> Result<PrecoderAux> {
    if h.nrows() != cfg.n_id
        || h.ncols() != cfg.n_tx
        || g.nrows() != cfg.n_eh
        || g.ncols() != cfg.n_tx
        || l.nrows() != cfg.n_streams
        || l.ncols() != cfg.n_id
    {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "H {}x{}, G {}x{}, L {}x{} against config (n_tx={}, n_streams={}, n_id={}, n_eh={})",
                h.nrows(),
                h.ncols(),
                g.nrows(),
                g.ncols(),
                l.nrows(),
                l.ncols(),
                cfg.n_tx,
                cfg.n_streams,
                cfg.n_id,
                cfg.n_eh
            ),
        });
    }
    let tr_wll: f64 = l
        .row_iter()
        .enumerate()
        .map(|(k, row)| cfg.weights[k] * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    if tr_wll <= RECEIVER_FLOOR {
        return Err(SolverError::DegenerateReceiver {
            trace: tr_wll,
            threshold: RECEIVER_FLOOR,
        });
    }
    let p_t = cfg.power_budget;
    let wl = linalg::diag_mul_left(&cfg.weights, l);
    let lh = l * h;
    let wlh = linalg::diag_mul_left(&cfg.weights, &lh);
    let y = linalg::hermitize(&(lh.adjoint() * &wlh))
        + CMat::identity(cfg.n_tx, cfg.n_tx).scale(tr_wll / p_t);
    let z = linalg::hermitize(&(g.adjoint() * g))
        - CMat::identity(cfg.n_tx, cfg.n_tx).scale(cfg.target_energy / p_t);
    let rhs = h.adjoint() * wl.adjoint();
    let y_norm = HermEig::new(&y).values[0].abs();
    let z_eig = HermEig::new(&z);
    let z_norm = z_eig.values[0].abs().max(z_eig.min().abs());
    Ok(PrecoderAux {
        y,
        z,
        rhs,
        tr_wll,
        p_t,
        e_target: cfg.target_energy,
        y_norm,
        z_norm,
    })
}

/// Largest generalized eigenvalue `kappa` of `Z u = d Y u`, computed through
/// the symmetric similarity `Y^{-1/2} Z Y^{-1/2}`. Dual values are feasible
/// on `[0, 1/kappa)` when `kappa > 0` and on all of `[0, inf)` otherwise.
pub fn feasibility_bound(aux: &PrecoderAux) -> Result<f64> {
    Ok(Spectral::new(aux)?.d[0])
}

/// Unscaled stationary precoder `(Y - x Z)^{-1} H^H L^H W` at dual value `x`.
pub fn precoder_unscaled(aux: &PrecoderAux, lambda_bar: f64) -> Result<CMat> {
    if !lambda_bar.is_finite() || lambda_bar < 0.0 {
        return Err(SolverError::InfeasibleDual {
            lambda_bar,
            upper: f64::INFINITY,
        });
    }
    let m = aux.k_matrix(lambda_bar);
    let eig = HermEig::new(&m);
    if eig.min() < EIG_FLOOR * aux.y_norm {
        let upper = match Spectral::new(aux) {
            Ok(sp) if sp.d[0] > 0.0 => 1.0 / sp.d[0],
            _ => f64::INFINITY,
        };
        return Err(SolverError::InfeasibleDual { lambda_bar, upper });
    }
    Ok(eig.solve(&aux.rhs))
}

/// Energy-slack function `J(x) = trace(Fbar(x)^H Z Fbar(x))`.
///
/// Sign semantics: `J(x) >= 0` exactly when the power-normalized precoder
/// built from `Fbar(x)` delivers at least the target energy.
pub fn dual_function(aux: &PrecoderAux, lambda_bar: f64) -> Result<f64> {
    let fbar = precoder_unscaled(aux, lambda_bar)?;
    Ok(linalg::trace_re(&(fbar.adjoint() * &aux.z * &fbar)))
}

/// Simultaneous diagonalization of (Y, Z): columns of `u` satisfy
/// `u^H Y u = I`, `u^H Z u = diag(d)` with `d` descending.
struct Spectral {
    u: CMat,
    d: RVec,
    /// `u^H * rhs`; row norms expose how strongly each pencil direction is
    /// excited by the stationarity right-hand side.
    b: CMat,
    r: Vec<f64>,
}

impl Spectral {
    fn new(aux: &PrecoderAux) -> Result<Self> {
        let eig_y = HermEig::new(&aux.y);
        if !(eig_y.min() > 0.0) || eig_y.cond() > linalg::COND_LIMIT {
            return Err(SolverError::SingularY {
                cond: eig_y.cond(),
                limit: linalg::COND_LIMIT,
            });
        }
        let n = aux.y.nrows();
        let y_inv_sqrt = eig_y.inv_sqrt_apply(&CMat::identity(n, n));
        let t = linalg::hermitize(&(&y_inv_sqrt * &aux.z * &y_inv_sqrt));
        let eig_t = HermEig::new(&t);
        let u = &y_inv_sqrt * &eig_t.vectors;
        let b = u.adjoint() * &aux.rhs;
        let r = b
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        Ok(Spectral {
            u,
            d: eig_t.values,
            b,
            r,
        })
    }

    /// Closed-form `J(x)` in the pencil basis.
    fn j(&self, x: f64) -> f64 {
        self.d
            .iter()
            .zip(&self.r)
            .map(|(&d, &r)| d * r / ((1.0 - x * d) * (1.0 - x * d)))
            .sum()
    }

    /// Unscaled precoder at dual value `x` (requires `1 - x d_i > 0` for all i).
    fn fbar(&self, x: f64) -> CMat {
        let mut scaled = self.b.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= c(1.0 / (1.0 - x * self.d[i]));
        }
        &self.u * scaled
    }

    /// Unscaled precoder at the singular endpoint `x = 1/kappa`, with the
    /// blow-up rows projected out (pseudo-inverse solve).
    fn fbar_endpoint(&self, null_set: &[usize]) -> CMat {
        let kappa = self.d[0];
        let mut scaled = self.b.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            if null_set.contains(&i) {
                row *= c(0.0);
            } else {
                row *= c(1.0 / (1.0 - self.d[i] / kappa));
            }
        }
        &self.u * scaled
    }
}

/// Solve the fixed-receiver precoder problem: returns the power-normalized
/// precoder `F`, the dual certificate, and the receive gain `gamma_hat`.
pub fn solve_precoder(
    cfg: &SystemConfig,
    h: &CMat,
    g: &CMat,
    l: &CMat,
) -> Result<(CMat, DualState, f64)> {
    let (gain, _) = model::energy_gain(g);
    let e_max = cfg.power_budget * gain;
    if cfg.target_energy > e_max * (1.0 - EPS_FEAS) {
        return Err(SolverError::TargetUnattainable {
            target: cfg.target_energy,
            e_max,
        });
    }
    let aux = build_aux(cfg, h, g, l)?;
    let sp = Spectral::new(&aux)?;
    let tol_j = aux.j_tolerance();
    let kappa = sp.d[0];
    let j0 = sp.j(0.0);

    // Unconstrained stationary point already meets the target.
    if j0 >= -aux.zero_snap() {
        return finish(&aux, &sp, 0.0, kappa, j0);
    }
    if kappa <= 0.0 {
        // Z has no positive direction, so no dual value can raise the
        // energy; with the target vetted against e_max this is unreachable,
        // but keep the honest guard.
        return Err(SolverError::TargetUnattainable {
            target: cfg.target_energy,
            e_max,
        });
    }

    // Bracket the root of J. The upper end creeps toward 1/kappa when J is
    // still negative at the nominal bracket; if J never turns positive the
    // optimum sits at the singular endpoint.
    let mut lo = 0.0f64;
    let mut j_hi = f64::NAN;
    let mut hi = f64::NAN;
    for margin in [1e-6, 1e-8, 1e-10, 1e-12] {
        let cand = (1.0 - margin) / kappa;
        let jc = sp.j(cand);
        if jc > 0.0 {
            hi = cand;
            j_hi = jc;
            break;
        }
        lo = cand;
    }
    if !hi.is_finite() {
        return endpoint_completion(&aux, &sp, j0);
    }
    if j_hi <= tol_j {
        return finish(&aux, &sp, hi, kappa, j0);
    }
    let mut iterations = 0;
    let mut residual = sp.j(lo);
    while iterations < BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let jm = sp.j(mid);
        iterations += 1;
        residual = jm;
        if jm.abs() <= tol_j {
            return finish(&aux, &sp, mid, kappa, j0);
        }
        if jm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(SolverError::BisectionFailure {
        residual: residual.abs(),
        tolerance: tol_j,
        iterations: BISECT_MAX_ITER,
    })
}

fn finish(
    aux: &PrecoderAux,
    sp: &Spectral,
    lambda_bar: f64,
    kappa: f64,
    j0: f64,
) -> Result<(CMat, DualState, f64)> {
    let fbar = sp.fbar(lambda_bar);
    scale_and_certify(aux, fbar, lambda_bar, kappa, j0)
}

/// Optimal completion at the singular endpoint `x = 1/kappa`.
///
/// All pencil directions attaining `kappa` are orthogonal to the right-hand
/// side here (otherwise J would have blown up past zero), so the stationarity
/// system is consistent and its solution set is `Fbar* + n m^H` over null
/// directions `n`. The energy target picks `||m||`; minimizing the wasted
/// power picks the direction.
fn endpoint_completion(
    aux: &PrecoderAux,
    sp: &Spectral,
    j0: f64,
) -> Result<(CMat, DualState, f64)> {
    let kappa = sp.d[0];
    let n_dim = sp.d.len();
    let null_set: Vec<usize> = (0..n_dim)
        .filter(|&i| sp.d[i] >= kappa * (1.0 - 1e-9))
        .collect();
    let fbar_star = sp.fbar_endpoint(&null_set);
    let j_star: f64 = sp
        .d
        .iter()
        .zip(&sp.r)
        .enumerate()
        .filter(|(i, _)| !null_set.contains(i))
        .map(|(_, (&d, &r))| {
            let s = 1.0 - d / kappa;
            d * r / (s * s)
        })
        .sum();

    // Among the null directions pick the one with the largest energy slack
    // per unit transmit power.
    let pick = null_set
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let qa = sp.d[a] / sp.u.column(a).norm_squared();
            let qb = sp.d[b] / sp.u.column(b).norm_squared();
            qa.total_cmp(&qb)
        })
        .expect("kappa attains its own threshold");
    let n_raw = sp.u.column(pick).into_owned();
    let n_vec = &n_raw / c(n_raw.norm());
    let zn = (n_vec.adjoint() * &aux.z * &n_vec)[(0, 0)].re;
    if !(zn > 0.0) {
        // The top pencil direction has nonpositive energy slack: the target
        // cannot be reached along the null space either.
        return Err(SolverError::TargetUnattainable {
            target: aux.e_target,
            e_max: aux.e_target + zn,
        });
    }

    // J along the completion: j_star + 2 t Re(row_z m_hat) + t^2 zn = 0.
    // row_z vanishes analytically (the null direction is Y-orthogonal to the
    // particular solution); carrying it keeps the arithmetic honest.
    let row_z = n_vec.adjoint() * &aux.z * &fbar_star;
    let cross = row_z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let t = if j_star >= 0.0 {
        0.0
    } else {
        (-cross + (cross * cross - j_star * zn).sqrt()) / zn
    };
    let m_hat: CVec = if cross > 0.0 {
        row_z.adjoint() / c(cross)
    } else {
        let mut e = CVec::zeros(fbar_star.ncols());
        e[0] = c(1.0);
        e
    };
    let fbar = &fbar_star + (&n_vec * c(t)) * m_hat.adjoint();
    scale_and_certify(aux, fbar, 1.0 / kappa, kappa, j0)
}

fn scale_and_certify(
    aux: &PrecoderAux,
    fbar: CMat,
    lambda_bar: f64,
    kappa: f64,
    j0: f64,
) -> Result<(CMat, DualState, f64)> {
    let power = linalg::frob2(&fbar);
    if !(power > 0.0) || !power.is_finite() {
        return Err(SolverError::NoPositiveScale);
    }
    let gamma_hat = (aux.p_t / power).sqrt();
    let f = fbar.scale(gamma_hat);
    let dual = DualState {
        lambda_bar,
        mu_bar: aux.mu_bar(lambda_bar),
        kappa,
        j_at_zero: j0,
    };
    Ok((f, dual, gamma_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_channels, SystemConfig};
    use crate::rng;
    use crate::wiener;

    fn unit_cfg(n: usize, power: f64, target: f64) -> SystemConfig {
        SystemConfig::new(
            n,
            n,
            n,
            n,
            power,
            1.0,
            RVec::from_element(n, 1.0),
            target,
        )
        .unwrap()
    }

    fn row2(a: f64, b: f64) -> CMat {
        CMat::from_fn(1, 2, |_, j| if j == 0 { c(a) } else { c(b) })
    }

    /// 2-antenna instance whose dual function never crosses zero: the info
    /// channel sees only antenna 1 and the energy channel only antenna 2.
    fn split_instance(target: f64) -> (SystemConfig, CMat, CMat, CMat) {
        let cfg = SystemConfig::new(
            2,
            1,
            1,
            1,
            1.0,
            1.0,
            RVec::from_element(1, 1.0),
            target,
        )
        .unwrap();
        let h = row2(1.0, 0.0);
        let g = row2(0.0, 1.0);
        let l = CMat::identity(1, 1);
        (cfg, h, g, l)
    }

    #[test]
    fn unconstrained_identity_precoder() {
        for p_t in [1.0, 10.0, 100.0] {
            let cfg = unit_cfg(4, p_t, 0.0);
            let h = CMat::identity(4, 4);
            let g = CMat::identity(4, 4);
            let l = CMat::identity(4, 4);
            let aux = build_aux(&cfg, &h, &g, &l).unwrap();
            let fbar = precoder_unscaled(&aux, 0.0).unwrap();
            let expect = CMat::identity(4, 4).scale(p_t / (p_t + 4.0));
            assert!(
                (fbar - expect).norm() < 1e-12,
                "identity channel stationary precoder wrong at P_T = {p_t}"
            );
        }
    }

    #[test]
    fn y_has_noise_floor_eigenvalue() {
        let cfg = unit_cfg(4, 7.0, 0.5);
        let ch = generate_channels(&cfg, 1.0, 1.0, 5).unwrap();
        let mut r = rng::stream(6);
        let l = rng::standard_complex_matrix(&mut r, 4, 4);
        let aux = build_aux(&cfg, &ch.h, &ch.g, &l).unwrap();
        let floor = aux.receiver_weight() / cfg.power_budget;
        let min_eig = HermEig::new(&aux.y).min();
        assert!(
            min_eig >= floor - 1e-12,
            "min eig {min_eig} below noise floor {floor}"
        );
    }

    #[test]
    fn degenerate_receiver_is_rejected() {
        let cfg = unit_cfg(4, 1.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 1).unwrap();
        let l = CMat::zeros(4, 4);
        assert!(matches!(
            build_aux(&cfg, &ch.h, &ch.g, &l),
            Err(SolverError::DegenerateReceiver { .. })
        ));
    }

    #[test]
    fn feasibility_bound_sign_tracks_target() {
        let cfg = unit_cfg(4, 2.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 8).unwrap();
        let l = CMat::identity(4, 4);
        let (gain, _) = model::energy_gain(&ch.g);
        let e_max = cfg.power_budget * gain;

        let below = cfg.with_target_energy(0.5 * e_max);
        let aux = build_aux(&below, &ch.h, &ch.g, &l).unwrap();
        assert!(feasibility_bound(&aux).unwrap() > 0.0);

        let above = cfg.with_target_energy(1.5 * e_max);
        let aux = build_aux(&above, &ch.h, &ch.g, &l).unwrap();
        assert!(feasibility_bound(&aux).unwrap() < 0.0);
    }

    #[test]
    fn dual_function_is_increasing_with_matching_derivative() {
        let cfg = unit_cfg(4, 3.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 12).unwrap();
        let (gain, _) = model::energy_gain(&ch.g);
        let cfg = cfg.with_target_energy(0.8 * cfg.power_budget * gain);
        let mut r = rng::stream(13);
        let f0 = rng::standard_complex_matrix(&mut r, 4, 4);
        let l = wiener::wiener_receiver(&cfg, &ch.h, &f0, 1.0).unwrap();
        let aux = build_aux(&cfg, &ch.h, &ch.g, &l).unwrap();
        let kappa = feasibility_bound(&aux).unwrap();
        assert!(kappa > 0.0);
        let j0 = dual_function(&aux, 0.0).unwrap();
        assert!(j0 < 0.0, "test wants an active energy constraint");

        let upper = 0.999 / kappa;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..40 {
            let x = upper * k as f64 / 39.0;
            let j = dual_function(&aux, x).unwrap();
            assert!(j >= prev - 1e-12, "J not monotone at x = {x}");
            prev = j;
        }

        // Forward difference against the analytic derivative
        // dJ/dx = 2 trace((Z Fbar)^H K^{-1} (Z Fbar)).
        for &x in &[0.0, 0.3 * upper, 0.7 * upper] {
            let fbar = precoder_unscaled(&aux, x).unwrap();
            let zf = &aux.z * &fbar;
            let kinv_zf = linalg::solve_hpd(&aux.k_matrix(x), &zf).unwrap();
            let analytic = 2.0 * linalg::trace_re(&(zf.adjoint() * kinv_zf));
            let hstep = 1e-7 / kappa;
            let fd = (dual_function(&aux, x + hstep).unwrap()
                - dual_function(&aux, x).unwrap())
                / hstep;
            assert!(analytic > 0.0);
            assert!(
                (fd - analytic).abs() <= 0.05 * analytic.abs(),
                "derivative mismatch at {x}: fd {fd} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn infeasible_dual_rejected_beyond_bound() {
        let cfg = unit_cfg(4, 2.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 20).unwrap();
        let l = CMat::identity(4, 4);
        let (gain, _) = model::energy_gain(&ch.g);
        let cfg = cfg.with_target_energy(0.7 * cfg.power_budget * gain);
        let aux = build_aux(&cfg, &ch.h, &ch.g, &l).unwrap();
        let kappa = feasibility_bound(&aux).unwrap();
        let err = precoder_unscaled(&aux, 1.5 / kappa);
        assert!(matches!(err, Err(SolverError::InfeasibleDual { .. })));
    }

    #[test]
    fn split_channel_puts_exact_energy_on_second_antenna() {
        let (cfg, h, g, l) = split_instance(0.9);
        let (f, dual, gamma) = solve_precoder(&cfg, &h, &g, &l).unwrap();
        let f2 = f[(1, 0)].norm_sqr();
        let f1 = f[(0, 0)].norm_sqr();
        assert!(
            (0.9 - 1e-8..=0.9 + 1e-6).contains(&f2),
            "energy antenna carries {f2}"
        );
        assert!((f1 - 0.1).abs() < 1e-8, "info antenna carries {f1}");
        assert!((f1 + f2 - 1.0).abs() < 1e-9, "power must be exhausted");
        // Frozen duals from the closed-form solution of this instance.
        assert!((dual.kappa - 0.1).abs() < 1e-10);
        assert!((dual.lambda_bar - 10.0).abs() < 1e-6);
        assert!((dual.mu_bar - 10.0).abs() < 1e-6);
        assert!(gamma > 0.0);
    }

    // Brute-force oracle for the same instance: for a fixed scalar receive
    // filter the minimal MSE over the gain is 1/(1 + |f_1|^2), so the best
    // feasible precoder maximizes |f_1|^2 subject to |f_2|^2 >= target and
    // unit power. Scan the power split directly.
    #[test]
    fn split_channel_matches_power_split_scan() {
        let (cfg, h, g, l) = split_instance(0.6);
        let (f, _, gamma) = solve_precoder(&cfg, &h, &g, &l).unwrap();
        let mut best = f64::INFINITY;
        let grid = 200_001;
        for k in 0..grid {
            let e2 = k as f64 / (grid - 1) as f64;
            if e2 < 0.6 {
                continue;
            }
            let mse = 1.0 / (1.0 + (1.0 - e2));
            if mse < best {
                best = mse;
            }
        }
        let trx = crate::model::Transceiver {
            precoder: f,
            receiver: l,
            scale: gamma,
        };
        let mse = crate::model::weighted_mse(&cfg, &h, &trx).unwrap();
        assert!(
            (mse - best).abs() <= 1e-6 * best,
            "solver MSE {mse} vs scan {best}"
        );
    }

    #[test]
    fn random_instances_satisfy_stationarity_and_constraints() {
        for seed in 0..12u64 {
            let p_t = 10.0;
            let cfg = unit_cfg(4, p_t, 0.0);
            let ch = generate_channels(&cfg, 1.0, 2.0, 100 + seed).unwrap();
            let (gain, _) = model::energy_gain(&ch.g);
            let e_max = p_t * gain;
            let cfg = cfg.with_target_energy(0.75 * e_max);
            let mut r = rng::stream(200 + seed);
            let f0 = rng::standard_complex_matrix(&mut r, 4, 4);
            let l = wiener::wiener_receiver(&cfg, &ch.h, &f0, 1.0).unwrap();

            let (f, dual, gamma) = solve_precoder(&cfg, &ch.h, &ch.g, &l).unwrap();
            let power = linalg::frob2(&f);
            assert!(
                (power - p_t).abs() <= 1e-9 * p_t,
                "power {power} off budget at seed {seed}"
            );
            let energy = model::received_energy(&ch.g, &f);
            assert!(
                energy >= cfg.target_energy * (1.0 - 1e-8),
                "energy {energy} misses target {} at seed {seed}",
                cfg.target_energy
            );

            // Dual-route residual check through the per-value solve path.
            let aux = build_aux(&cfg, &ch.h, &ch.g, &l).unwrap();
            let j_res = dual_function(&aux, dual.lambda_bar).unwrap();
            assert!(
                j_res.abs() <= aux.j_tolerance(),
                "J residual {j_res} at seed {seed}"
            );

            // Stationarity: K(lambda) F = gamma * rhs.
            let lhs = aux.k_matrix(dual.lambda_bar) * &f;
            let rhs = aux.rhs().scale(gamma);
            let rel = (&lhs - &rhs).norm() / rhs.norm();
            assert!(rel <= 1e-8, "stationarity residual {rel} at seed {seed}");

            // Power multiplier recovered from the projected stationarity
            // identity mu ||F||^2 = gamma Re tr(R^H F) - tr(F^H S F)
            // + lambda tr(F^H G^H G F), with S the signal quadratic form.
            let s_quad = linalg::trace_re(&(f.adjoint() * &aux.y * &f))
                - aux.receiver_weight() / p_t * power;
            let g_quad = linalg::trace_re(&(f.adjoint() * &aux.z * &f))
                + cfg.target_energy / p_t * power;
            let mu_implied = (gamma * linalg::trace_re(&(aux.rhs().adjoint() * &f)) - s_quad
                + dual.lambda_bar * g_quad)
                / power;
            assert!(
                (mu_implied - dual.mu_bar).abs() <= 1e-9 * dual.mu_bar.max(1.0),
                "trace-implied mu {mu_implied} vs {}",
                dual.mu_bar
            );

            assert!(dual.lambda_bar >= 0.0);
            if dual.kappa > 0.0 {
                assert!(dual.lambda_bar <= 1.0 / dual.kappa + 1e-12);
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let cfg = unit_cfg(4, 5.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 77).unwrap();
        let (gain, _) = model::energy_gain(&ch.g);
        let cfg = cfg.with_target_energy(0.6 * cfg.power_budget * gain);
        let mut r = rng::stream(78);
        let f0 = rng::standard_complex_matrix(&mut r, 4, 4);
        let l = wiener::wiener_receiver(&cfg, &ch.h, &f0, 1.0).unwrap();
        let (fa, _, ga) = solve_precoder(&cfg, &ch.h, &ch.g, &l).unwrap();
        let (fb, _, gb) = solve_precoder(&cfg, &ch.h, &ch.g, &l).unwrap();
        assert_eq!(fa.as_slice(), fb.as_slice());
        assert_eq!(ga.to_bits(), gb.to_bits());
    }

    #[test]
    fn unattainable_targets_error() {
        let cfg = unit_cfg(4, 2.0, 0.0);
        let ch = generate_channels(&cfg, 1.0, 1.0, 50).unwrap();
        let l = CMat::identity(4, 4);
        let (gain, _) = model::energy_gain(&ch.g);
        let e_max = cfg.power_budget * gain;
        for factor in [1.0 - 1e-10, 1.0, 1.2] {
            let cfg = cfg.with_target_energy(factor * e_max);
            assert!(
                matches!(
                    solve_precoder(&cfg, &ch.h, &ch.g, &l),
                    Err(SolverError::TargetUnattainable { .. })
                ),
                "target factor {factor} should be rejected"
            );
        }
    }
}
