//! Transmit beamforming for a single-antenna information receiver.
//!
//! With one stream and one receive antenna the receive filter is a scalar
//! and cancels out of the design: every nonzero filter yields the same
//! power-normalized beamformer up to phase. One dual-certified precoder
//! solve with the filter pinned to 1 therefore gives the full solution, no
//! alternation required.

use crate::alternating::{self, SolveOptions, SolveReport};
use crate::error::{Result, SolverError};
use crate::kkt::{self, DualState, EPS_FEAS};
use crate::linalg::{self, CMat, CVec, RVec};
use crate::model::{self, ChannelPair, SystemConfig};

/// Energy-constrained MISO beamformer with its performance numbers.
#[derive(Debug, Clone)]
pub struct MisoSolution {
    /// Unit phase convention: the largest-magnitude entry is real nonnegative.
    pub beamformer: CVec,
    /// Receiver-optimized MSE, `1 / (1 + |h f|^2)`.
    pub mse: f64,
    /// Received energy (harvester efficiency not applied).
    pub energy: f64,
    pub rate_bits: f64,
    /// Dual certificate; `None` when the target pinned the beamformer to the
    /// top energy eigenvector.
    pub dual: Option<DualState>,
}

/// Solve the single-stream, single-receive-antenna design problem.
pub fn solve_miso(cfg: &SystemConfig, h: &CMat, g: &CMat) -> Result<MisoSolution> {
    if cfg.n_streams != 1 || cfg.n_id != 1 {
        return Err(SolverError::DimensionMismatch {
            context: format!(
                "single-stream single-antenna solver got n_streams={}, n_id={}",
                cfg.n_streams, cfg.n_id
            ),
        });
    }
    let cfg = cfg.with_weights(RVec::from_element(1, 1.0));
    let (gain, v_top) = model::energy_gain(g);
    let e_max = cfg.power_budget * gain;
    if cfg.target_energy > e_max {
        return Err(SolverError::TargetUnattainable {
            target: cfg.target_energy,
            e_max,
        });
    }
    if e_max > 0.0 && cfg.target_energy >= e_max * (1.0 - EPS_FEAS) {
        let f = v_top.scale(cfg.power_budget.sqrt());
        return finish(&cfg, h, g, f, None);
    }
    let l = CMat::identity(1, 1);
    let (f_mat, dual, _) = kkt::solve_precoder(&cfg, h, g, &l)?;
    finish(&cfg, h, g, f_mat.column(0).into_owned(), Some(dual))
}

fn finish(
    cfg: &SystemConfig,
    h: &CMat,
    g: &CMat,
    f: CVec,
    dual: Option<DualState>,
) -> Result<MisoSolution> {
    let f = linalg::normalize_phase(&f);
    let f_mat = CMat::from_columns(&[f.clone()]);
    let (mse, rate_bits) = model::mmse_and_rate(cfg, h, &f_mat)?;
    let energy = model::received_energy(g, &f_mat);
    Ok(MisoSolution {
        beamformer: f,
        mse,
        energy,
        rate_bits,
        dual,
    })
}

/// Run the general alternating solver on the same instance; the two paths
/// must agree on the receiver-optimized MSE.
pub fn crosscheck_general(
    cfg: &SystemConfig,
    h: &CMat,
    g: &CMat,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let ch = ChannelPair {
        h: h.clone(),
        g: g.clone(),
        dist_id: 1.0,
        dist_eh: 1.0,
        seed: 0,
    };
    alternating::solve_with_options(cfg, &ch, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::rng;

    fn miso_cfg(n_tx: usize, n_eh: usize, power: f64, target: f64) -> SystemConfig {
        SystemConfig::new(
            n_tx,
            1,
            1,
            n_eh,
            power,
            1.0,
            RVec::from_element(1, 1.0),
            target,
        )
        .unwrap()
    }

    fn random_instance(n_tx: usize, seed: u64) -> (CMat, CMat) {
        let mut r = rng::stream(seed);
        let h = rng::standard_complex_matrix(&mut r, 1, n_tx);
        let g = rng::standard_complex_matrix(&mut r, 2, n_tx);
        (h, g)
    }

    #[test]
    fn split_channel_halves_the_power() {
        let cfg = miso_cfg(2, 1, 1.0, 0.5);
        let h = CMat::from_fn(1, 2, |_, j| if j == 0 { c(1.0) } else { c(0.0) });
        let g = CMat::from_fn(1, 2, |_, j| if j == 1 { c(1.0) } else { c(0.0) });
        let sol = solve_miso(&cfg, &h, &g).unwrap();
        let f1 = sol.beamformer[0].norm_sqr();
        let f2 = sol.beamformer[1].norm_sqr();
        assert!((f2 - 0.5).abs() <= 1e-6, "energy antenna carries {f2}");
        assert!((f1 - 0.5).abs() <= 1e-6, "info antenna carries {f1}");
        assert!((sol.mse - 2.0 / 3.0).abs() <= 1e-9);
        assert!(sol.dual.is_some());
    }

    #[test]
    fn unconstrained_beamformer_is_matched_filter() {
        let cfg = miso_cfg(4, 2, 3.0, 0.0);
        let (h, g) = random_instance(4, 42);
        let sol = solve_miso(&cfg, &h, &g).unwrap();
        let mrt = h.adjoint().column(0).into_owned();
        assert!(linalg::sin_angle(&sol.beamformer, &mrt) <= 1e-9);
        let expect = 1.0 / (1.0 + cfg.power_budget * mrt.norm_squared());
        assert!((sol.mse - expect).abs() <= 1e-10);
    }

    #[test]
    fn scalar_receive_filter_does_not_change_the_beamformer() {
        let cfg0 = miso_cfg(4, 2, 2.0, 0.0);
        let (h, g) = random_instance(4, 77);
        let (gain, _) = model::energy_gain(&g);
        let cfg = cfg0.with_target_energy(0.55 * cfg0.power_budget * gain);
        let reference = solve_miso(&cfg, &h, &g).unwrap();
        for l_val in [c(1.0), c(2.0), num_complex::Complex64::new(0.0, 1.0)] {
            let mut l = CMat::identity(1, 1);
            l[(0, 0)] = l_val;
            let (f, _, _) = kkt::solve_precoder(&cfg, &h, &g, &l).unwrap();
            let fixed = linalg::normalize_phase(&f.column(0).into_owned());
            let delta = (&fixed - &reference.beamformer).norm();
            assert!(
                delta <= 1e-9 * cfg.power_budget.sqrt(),
                "filter {l_val} moved the beamformer by {delta}"
            );
        }
    }

    #[test]
    fn near_maximum_target_aligns_with_energy_eigenvector() {
        let cfg0 = miso_cfg(4, 2, 5.0, 0.0);
        let (h, g) = random_instance(4, 90);
        let (gain, v) = model::energy_gain(&g);
        let e_max = cfg0.power_budget * gain;
        let cfg = cfg0.with_target_energy(e_max * (1.0 - 1e-12));
        let sol = solve_miso(&cfg, &h, &g).unwrap();
        assert!(sol.dual.is_none());
        assert!(linalg::sin_angle(&sol.beamformer, &v) <= 1e-9);
        assert!((sol.energy - e_max).abs() <= 1e-9 * e_max);
    }

    #[test]
    fn agrees_with_the_general_solver() {
        for seed in [11u64, 12, 13] {
            let cfg0 = miso_cfg(4, 2, 4.0, 0.0);
            let (h, g) = random_instance(4, 1000 + seed);
            let (gain, _) = model::energy_gain(&g);
            let cfg = cfg0.with_target_energy(0.6 * cfg0.power_budget * gain);
            let sol = solve_miso(&cfg, &h, &g).unwrap();
            let report = crosscheck_general(
                &cfg,
                &h,
                &g,
                &SolveOptions {
                    starts: 4,
                    tol: 1e-12,
                    max_iters: 400,
                    ..SolveOptions::default()
                },
            )
            .unwrap();
            assert!(
                (sol.mse - report.mmse).abs() <= 1e-6,
                "seed {seed}: direct {} vs alternating {}",
                sol.mse,
                report.mmse
            );
        }
    }

    #[test]
    fn tighter_targets_cost_mse() {
        let cfg0 = miso_cfg(4, 2, 2.0, 0.0);
        let (h, g) = random_instance(4, 321);
        let (gain, _) = model::energy_gain(&g);
        let e_max = cfg0.power_budget * gain;
        let loose = solve_miso(&cfg0.with_target_energy(0.2 * e_max), &h, &g).unwrap();
        let tight = solve_miso(&cfg0.with_target_energy(0.8 * e_max), &h, &g).unwrap();
        assert!(tight.mse >= loose.mse - 1e-10);
        assert!(tight.energy >= 0.8 * e_max * (1.0 - 1e-8));
    }
}
