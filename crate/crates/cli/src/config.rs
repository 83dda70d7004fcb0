//! Flat key-value run configuration in physical units, plus the conversions
//! to the normalized units the solver library works in.
//!
//! The normalization divides every power by the receive noise power, so one
//! normalized energy unit equals the noise power. Under the default link
//! budget (-100 dBm/Hz over 10 MHz) the noise power is exactly 1 uW, which
//! is why emitted energies are labelled in uW.

use std::fmt::Write as _;
use std::path::Path;
use swipt_core::alternating::WeightMode;
use swipt_core::linalg::RVec;
use swipt_core::SystemConfig;

/// Configuration problem. The message always names the offending key (or
/// file) so the caller can fix the input without reading source code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Experiment selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Solve,
    RegionMse,
    RegionRate,
    Converge,
    Ber,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Solve => "solve",
            Experiment::RegionMse => "region-mse",
            Experiment::RegionRate => "region-rate",
            Experiment::Converge => "converge",
            Experiment::Ber => "ber",
        }
    }

    fn parse(value: &str) -> Result<Self, String> {
        match value {
            "solve" => Ok(Experiment::Solve),
            "region-mse" => Ok(Experiment::RegionMse),
            "region-rate" => Ok(Experiment::RegionRate),
            "converge" => Ok(Experiment::Converge),
            "ber" => Ok(Experiment::Ber),
            other => Err(format!(
                "unknown experiment '{other}' (expected solve, region-mse, region-rate, converge, or ber)"
            )),
        }
    }
}

/// Full run configuration. Distances are meters, powers dBm, the noise floor
/// a dBm/Hz spectral density, energies harvested microwatts.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub n_tx: usize,
    pub n_streams: usize,
    pub n_id: usize,
    pub n_eh: usize,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    /// Harvesting efficiency applied between received and harvested energy.
    pub efficiency: f64,
    /// Received power falls off as distance to this power. The channel
    /// generator scales amplitudes by d^(-3/2), so only 3 is supported.
    pub pathloss_exponent: f64,
    pub dist_id_m: f64,
    pub dist_eh_m: f64,
    /// Harvested-energy target in uW. `None` lets solve and converge default
    /// to half the attainable maximum; region sweeps and BER runs build
    /// their own targets and ignore this key.
    pub target_energy_uw: Option<f64>,
    pub weight_mode: WeightMode,
    pub grid_size: usize,
    pub starts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub channel_seed: u64,
    pub run_seed: u64,
    pub ber_channels: usize,
    pub ber_symbols: usize,
    pub ber_snrs_db: Vec<f64>,
    /// Multi-start count of the per-cell joint solves inside the BER run.
    pub ber_starts: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Solve,
            n_tx: 4,
            n_streams: 4,
            n_id: 4,
            n_eh: 4,
            tx_power_dbm: 20.0,
            noise_psd_dbm_hz: -100.0,
            bandwidth_hz: 1.0e7,
            efficiency: 0.5,
            pathloss_exponent: 3.0,
            dist_id_m: 10.0,
            dist_eh_m: 10.0,
            target_energy_uw: None,
            weight_mode: WeightMode::Identity,
            grid_size: 20,
            starts: 20,
            max_iters: 200,
            tol: 1e-8,
            channel_seed: 11,
            run_seed: 0,
            ber_channels: 1000,
            ber_symbols: 500,
            ber_snrs_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            ber_starts: 4,
        }
    }
}

/// `10^x`, exact for integral `x` so that round link budgets stay round.
fn pow10(x: f64) -> f64 {
    if x.fract() == 0.0 && x.abs() <= 300.0 {
        10f64.powi(x as i32)
    } else {
        10f64.powf(x)
    }
}

/// Normalized-unit view of the physical link budget.
#[derive(Debug, Clone, Copy)]
pub struct LinkBudget {
    /// Receive noise power in uW; the normalization divides by this.
    pub noise_power_uw: f64,
    /// Transmit power budget over noise power.
    pub power_budget_norm: f64,
    /// Per-antenna receive SNR at the information user in dB.
    pub snr_per_antenna_db: f64,
}

impl RunConfig {
    /// Derive the normalized link budget. Kept in the dB domain until the
    /// final exponentiation so that round decibel inputs produce exact
    /// powers of ten.
    pub fn link_budget(&self) -> LinkBudget {
        let noise_dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10();
        let noise_power_uw = pow10((noise_dbm + 30.0) / 10.0);
        let power_budget_norm = pow10((self.tx_power_dbm - noise_dbm) / 10.0);
        let snr_per_antenna_db = 10.0
            * (power_budget_norm.log10() - self.pathloss_exponent * self.dist_id_m.log10());
        LinkBudget {
            noise_power_uw,
            power_budget_norm,
            snr_per_antenna_db,
        }
    }

    /// Harvested uW represented by one normalized received-energy unit.
    pub fn harvested_uw_per_norm(&self) -> f64 {
        self.efficiency * self.link_budget().noise_power_uw
    }

    /// Convert a normalized received energy to harvested uW.
    pub fn to_harvested_uw(&self, received_norm: f64) -> f64 {
        received_norm * self.harvested_uw_per_norm()
    }

    /// Convert a harvested-uW target to the normalized received energy the
    /// solvers constrain.
    pub fn to_received_norm(&self, harvested_uw: f64) -> f64 {
        harvested_uw / self.harvested_uw_per_norm()
    }

    /// Normalized solver configuration at the given received-energy target.
    pub fn system_config(&self, target_received_norm: f64) -> Result<SystemConfig, ConfigError> {
        SystemConfig::new(
            self.n_tx,
            self.n_streams,
            self.n_id,
            self.n_eh,
            self.link_budget().power_budget_norm,
            self.efficiency,
            RVec::from_element(self.n_streams, 1.0),
            target_received_norm,
        )
        .map_err(|e| ConfigError(format!("inconsistent system dimensions: {e}")))
    }

    /// Apply one `key = value` assignment. Keys under `derived.` are
    /// accepted and ignored so manifests can be fed back in unchanged.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn bad<T>(key: &str, value: &str, detail: &str) -> Result<T, ConfigError> {
            Err(ConfigError(format!(
                "invalid value '{value}' for key '{key}': {detail}"
            )))
        }
        fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
            match value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => bad(key, value, "expected a finite number"),
            }
        }
        fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
            value
                .parse::<usize>()
                .or_else(|_| bad(key, value, "expected a nonnegative integer"))
        }
        fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
            value
                .parse::<u64>()
                .or_else(|_| bad(key, value, "expected a nonnegative integer"))
        }

        if key.starts_with("derived.") {
            return Ok(());
        }
        match key {
            "experiment" => {
                self.experiment =
                    Experiment::parse(value).map_err(|d| ConfigError(format!("key 'experiment': {d}")))?
            }
            "n_tx" => self.n_tx = parse_usize(key, value)?,
            "n_streams" => self.n_streams = parse_usize(key, value)?,
            "n_id" => self.n_id = parse_usize(key, value)?,
            "n_eh" => self.n_eh = parse_usize(key, value)?,
            "tx_power_dbm" => self.tx_power_dbm = parse_f64(key, value)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = parse_f64(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_f64(key, value)?,
            "efficiency" => self.efficiency = parse_f64(key, value)?,
            "pathloss_exponent" => self.pathloss_exponent = parse_f64(key, value)?,
            "dist_id_m" => self.dist_id_m = parse_f64(key, value)?,
            "dist_eh_m" => self.dist_eh_m = parse_f64(key, value)?,
            "target_energy_uw" => {
                self.target_energy_uw = if value == "none" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "weight_mode" => {
                self.weight_mode = match value {
                    "identity" => WeightMode::Identity,
                    "channel-eigenvalues" => WeightMode::ChannelEigenvalues,
                    _ => {
                        return bad(
                            key,
                            value,
                            "expected identity or channel-eigenvalues",
                        )
                    }
                }
            }
            "grid_size" => self.grid_size = parse_usize(key, value)?,
            "starts" => self.starts = parse_usize(key, value)?,
            "max_iters" => self.max_iters = parse_usize(key, value)?,
            "tol" => self.tol = parse_f64(key, value)?,
            "channel_seed" => self.channel_seed = parse_u64(key, value)?,
            "run_seed" => self.run_seed = parse_u64(key, value)?,
            "ber_channels" => self.ber_channels = parse_usize(key, value)?,
            "ber_symbols" => self.ber_symbols = parse_usize(key, value)?,
            "ber_snrs_db" => {
                let mut snrs = Vec::new();
                for part in value.split(',') {
                    snrs.push(parse_f64(key, part.trim())?);
                }
                self.ber_snrs_db = snrs;
            }
            "ber_starts" => self.ber_starts = parse_usize(key, value)?,
            other => return Err(ConfigError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Apply a `key=value` override flag.
    pub fn apply_set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        match assignment.split_once('=') {
            Some((key, value)) => self.apply(key.trim(), value.trim()),
            None => Err(ConfigError(format!(
                "override '{assignment}' is not of the form key=value"
            ))),
        }
    }

    /// Layer a config file over `self`. Lines are `key = value`; blank lines
    /// and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError(format!("cannot read config file '{}': {e}", path.display()))
        })?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "line {} of '{}' is not of the form key = value",
                    lineno + 1,
                    path.display()
                ))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Range checks; every message names the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn check(ok: bool, key: &str, detail: &str) -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(ConfigError(format!("key '{key}': {detail}")))
            }
        }
        check(self.n_tx >= 1, "n_tx", "need at least one transmit antenna")?;
        check(self.n_id >= 1, "n_id", "need at least one receive antenna")?;
        check(self.n_eh >= 1, "n_eh", "need at least one harvest antenna")?;
        check(
            self.n_streams >= 1 && self.n_streams <= self.n_tx.min(self.n_id),
            "n_streams",
            "stream count must lie in 1..=min(n_tx, n_id)",
        )?;
        check(self.bandwidth_hz > 0.0, "bandwidth_hz", "must be positive")?;
        check(
            self.efficiency > 0.0 && self.efficiency <= 1.0,
            "efficiency",
            "must lie in (0, 1]",
        )?;
        check(
            self.pathloss_exponent == 3.0,
            "pathloss_exponent",
            "only the cubic pathloss model is supported",
        )?;
        check(self.dist_id_m > 0.0, "dist_id_m", "must be positive")?;
        check(self.dist_eh_m > 0.0, "dist_eh_m", "must be positive")?;
        if let Some(t) = self.target_energy_uw {
            check(t >= 0.0, "target_energy_uw", "must be nonnegative")?;
        }
        check(self.grid_size >= 2, "grid_size", "need at least 2 grid points")?;
        check(self.starts >= 1, "starts", "need at least one start")?;
        check(self.max_iters >= 1, "max_iters", "need at least one iteration")?;
        check(self.tol > 0.0, "tol", "must be positive")?;
        check(self.ber_channels >= 1, "ber_channels", "need at least one channel")?;
        check(self.ber_symbols >= 1, "ber_symbols", "need at least one symbol")?;
        check(
            !self.ber_snrs_db.is_empty(),
            "ber_snrs_db",
            "need at least one SNR point",
        )?;
        check(self.ber_starts >= 1, "ber_starts", "need at least one start")?;
        Ok(())
    }

    fn weight_mode_name(&self) -> &'static str {
        match self.weight_mode {
            WeightMode::Identity => "identity",
            WeightMode::ChannelEigenvalues => "channel-eigenvalues",
        }
    }

    /// Render the resolved configuration as a manifest that parses back into
    /// the identical `RunConfig`. `derived.` lines are informational and
    /// ignored on ingestion. `extra_derived` carries experiment-specific
    /// report lines.
    pub fn manifest(&self, extra_derived: &[(String, String)]) -> String {
        let budget = self.link_budget();
        let mut s = String::new();
        let _ = writeln!(s, "# run manifest; reusable as a --config input");
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let _ = writeln!(s, "n_tx = {}", self.n_tx);
        let _ = writeln!(s, "n_streams = {}", self.n_streams);
        let _ = writeln!(s, "n_id = {}", self.n_id);
        let _ = writeln!(s, "n_eh = {}", self.n_eh);
        let _ = writeln!(s, "tx_power_dbm = {}", self.tx_power_dbm);
        let _ = writeln!(s, "noise_psd_dbm_hz = {}", self.noise_psd_dbm_hz);
        let _ = writeln!(s, "bandwidth_hz = {}", self.bandwidth_hz);
        let _ = writeln!(s, "efficiency = {}", self.efficiency);
        let _ = writeln!(s, "pathloss_exponent = {}", self.pathloss_exponent);
        let _ = writeln!(s, "dist_id_m = {}", self.dist_id_m);
        let _ = writeln!(s, "dist_eh_m = {}", self.dist_eh_m);
        match self.target_energy_uw {
            Some(t) => {
                let _ = writeln!(s, "target_energy_uw = {t}");
            }
            None => {
                let _ = writeln!(s, "target_energy_uw = none");
            }
        }
        let _ = writeln!(s, "weight_mode = {}", self.weight_mode_name());
        let _ = writeln!(s, "grid_size = {}", self.grid_size);
        let _ = writeln!(s, "starts = {}", self.starts);
        let _ = writeln!(s, "max_iters = {}", self.max_iters);
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "channel_seed = {}", self.channel_seed);
        let _ = writeln!(s, "run_seed = {}", self.run_seed);
        let _ = writeln!(s, "ber_channels = {}", self.ber_channels);
        let _ = writeln!(s, "ber_symbols = {}", self.ber_symbols);
        let snrs: Vec<String> = self.ber_snrs_db.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "ber_snrs_db = {}", snrs.join(","));
        let _ = writeln!(s, "ber_starts = {}", self.ber_starts);
        let _ = writeln!(s, "derived.noise_power_uw = {}", budget.noise_power_uw);
        let _ = writeln!(s, "derived.power_budget_norm = {}", budget.power_budget_norm);
        let _ = writeln!(
            s,
            "derived.snr_per_antenna_db = {}",
            budget.snr_per_antenna_db
        );
        let _ = writeln!(
            s,
            "derived.harvested_uw_per_energy_unit = {}",
            self.harvested_uw_per_norm()
        );
        for (key, value) in extra_derived {
            let _ = writeln!(s, "derived.{key} = {value}");
        }
        s
    }
}
