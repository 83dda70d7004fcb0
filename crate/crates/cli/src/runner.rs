//! Experiment dispatch and file emission.
//!
//! Every numeric result comes from a library call; this module only resolves
//! units, forwards options, and renders CSV rows. Output files land in the
//! chosen directory next to `manifest.txt`, which records the fully resolved
//! configuration and parses back into an identical run.

use crate::config::{ConfigError, Experiment, RunConfig};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use swipt_core::alternating::{self, SolveOptions, SolveReport};
use swipt_core::experiments::{self, BerSetup, MetricKind, RegionCurve, ALL_SCHEMES};
use swipt_core::model::{self, ChannelPair};
use swipt_core::{SolverError, SystemConfig};

/// Application failure, split by exit class: configuration and IO problems
/// are the caller's to fix (exit 1), solver failures describe the problem
/// instance (exit 2).
#[derive(Debug)]
pub enum AppError {
    Config(ConfigError),
    Io(String),
    /// Message starts with the stable solver error class name.
    Solver(String),
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<SolverError> for AppError {
    fn from(e: SolverError) -> Self {
        AppError::Solver(format!("{}: {e}", e.name()))
    }
}

/// Run the configured experiment, writing `manifest.txt` plus one CSV per
/// output table into `out_dir`. Returns the files written.
pub fn execute(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| AppError::Io(format!("cannot create '{}': {e}", out_dir.display())))?;
    match cfg.experiment {
        Experiment::Solve => run_solve(cfg, out_dir),
        Experiment::Converge => run_converge(cfg, out_dir),
        Experiment::RegionMse => run_region(cfg, out_dir, MetricKind::Mse),
        Experiment::RegionRate => run_region(cfg, out_dir, MetricKind::Rate),
        Experiment::Ber => run_ber(cfg, out_dir),
    }
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, AppError> {
    let path = out_dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| AppError::Io(format!("cannot write '{}': {e}", path.display())))?;
    Ok(path)
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        starts: cfg.starts,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        precoder_tol: None,
        seed: cfg.run_seed,
        extra_inits: Vec::new(),
    }
}

fn draw_channel(cfg: &RunConfig, sys: &SystemConfig) -> Result<ChannelPair, AppError> {
    Ok(model::generate_channels(
        sys,
        cfg.dist_id_m,
        cfg.dist_eh_m,
        cfg.channel_seed,
    )?)
}

/// Resolve the harvested-energy target in uW: the configured value, or half
/// the attainable maximum of this channel. Resolution happens in physical
/// units so a manifest round-trip reproduces the normalized target bitwise.
fn resolve_target_uw(cfg: &RunConfig, sys: &SystemConfig, ch: &ChannelPair) -> f64 {
    cfg.target_energy_uw.unwrap_or_else(|| {
        let (gain, _) = model::energy_gain(&ch.g);
        0.5 * cfg.to_harvested_uw(sys.power_budget * gain)
    })
}

fn run_solve(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let sys = cfg.system_config(0.0)?;
    let ch = draw_channel(cfg, &sys)?;
    let target_uw = resolve_target_uw(cfg, &sys, &ch);
    let sys = sys.with_target_energy(cfg.to_received_norm(target_uw));

    let mut resolved = cfg.clone();
    resolved.target_energy_uw = Some(target_uw);
    let manifest = write_file(out_dir, "manifest.txt", &resolved.manifest(&[]))?;

    let report = alternating::solve_with_weights(&sys, &ch, cfg.weight_mode, &solve_options(cfg))?;
    let mut csv = String::from(
        "mse,mmse,rate_bits,target_energy_uW,achieved_energy_uW,lambda_bar,iterations,converged\n",
    );
    let lambda = report
        .dual
        .map(|d| d.lambda_bar.to_string())
        .unwrap_or_default();
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        report.mse,
        report.mmse,
        report.rate_bits,
        target_uw,
        cfg.to_harvested_uw(report.energy),
        lambda,
        report.iterations,
        report.converged
    );
    let solution = write_file(out_dir, "solve.csv", &csv)?;
    Ok(vec![manifest, solution])
}

fn convergence_csv(report: &SolveReport) -> String {
    let mut csv = String::from("start,iter,mse,rate_bits\n");
    for run in &report.starts {
        for (i, rec) in run.records.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{},{}", run.index, i + 1, rec.mse, rec.rate_bits);
        }
    }
    csv
}

fn run_converge(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let sys = cfg.system_config(0.0)?;
    let ch = draw_channel(cfg, &sys)?;
    let target_uw = resolve_target_uw(cfg, &sys, &ch);
    let sys = sys.with_target_energy(cfg.to_received_norm(target_uw));

    let mut resolved = cfg.clone();
    resolved.target_energy_uw = Some(target_uw);

    let report =
        experiments::convergence_trace(&sys, &ch, cfg.weight_mode, &solve_options(cfg))?;
    let manifest = write_file(
        out_dir,
        "manifest.txt",
        &resolved.manifest(&[("best_start".into(), report.start_index.to_string())]),
    )?;
    let trace = write_file(out_dir, "convergence.csv", &convergence_csv(&report))?;
    Ok(vec![manifest, trace])
}

fn region_csv(cfg: &RunConfig, curve: &RegionCurve) -> String {
    let mut csv = String::from("target_energy_uW,achieved_energy_uW,metric\n");
    for p in &curve.points {
        let _ = writeln!(
            csv,
            "{},{},{}",
            cfg.to_harvested_uw(p.target),
            cfg.to_harvested_uw(p.energy),
            curve.kind.value(p)
        );
    }
    csv
}

fn run_region(cfg: &RunConfig, out_dir: &Path, kind: MetricKind) -> Result<Vec<PathBuf>, AppError> {
    let sys = cfg.system_config(0.0)?;
    let ch = draw_channel(cfg, &sys)?;
    let manifest = write_file(out_dir, "manifest.txt", &cfg.manifest(&[]))?;

    let curve = experiments::sweep_region(&sys, &ch, kind, cfg.grid_size, &solve_options(cfg))?;
    let name = match kind {
        MetricKind::Mse => "region_mse.csv",
        MetricKind::Rate => "region_rate.csv",
    };
    let table = write_file(out_dir, name, &region_csv(cfg, &curve))?;
    if let Some(reason) = &curve.aborted {
        return Err(AppError::Solver(format!(
            "{reason} (partial curve of {} points written)",
            curve.points.len()
        )));
    }
    Ok(vec![manifest, table])
}

fn run_ber(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let sys = cfg.system_config(0.0)?;
    let manifest = write_file(out_dir, "manifest.txt", &cfg.manifest(&[]))?;

    let setup = BerSetup {
        dist_id: cfg.dist_id_m,
        dist_eh: cfg.dist_eh_m,
        snrs_db: cfg.ber_snrs_db.clone(),
        schemes: ALL_SCHEMES.to_vec(),
        channels: cfg.ber_channels,
        symbols_per_channel: cfg.ber_symbols,
        seed: cfg.run_seed,
        starts: cfg.ber_starts,
    };
    let results = experiments::ber_montecarlo(&sys, &setup)?;
    let mut csv = String::from("snr_dB,scheme,bit_errors,bits_total,ber\n");
    for r in &results {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.snr_db,
            r.scheme,
            r.bit_errors,
            r.bits_total,
            r.ber()
        );
    }
    let table = write_file(out_dir, "ber.csv", &csv)?;
    Ok(vec![manifest, table])
}
