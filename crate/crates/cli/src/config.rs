//! Experiment configuration files.
//!
//! Files are TOML. Every table rejects unknown keys and every key is
//! optional; see the README for the full schema.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use uplink_core::phy::max_device_rate;
use uplink_core::sim::{CaptureModel, Fading};
use uplink_core::{allocation, Error as CoreError, PhyConfig, RateMode, Scheme};

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    /// TOML syntax or type error; the message carries line and column.
    Parse(String),
    /// A value is out of range. `key` is the dotted path of the offending key.
    Invalid { key: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ConfigError::Parse(msg) => write!(f, "config parse error: {msg}"),
            ConfigError::Invalid { key, reason } => write!(f, "invalid `{key}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Analytic,
    Simulate,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Engine::Simulate | Engine::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Device count `N` at fixed per-device rate.
    #[default]
    Devices,
    /// Aggregate rate `lambda` in frames/s.
    Rate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Devices => "devices",
            SweepAxis::Rate => "rate",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "devices" | "n" => Ok(SweepAxis::Devices),
            "rate" | "lambda" => Ok(SweepAxis::Rate),
            other => Err(format!("unknown sweep axis `{other}` (expected devices or rate)")),
        }
    }
}

/// Either an explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Points {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Points {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Points::List(v) => v.clone(),
            Points::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }

    fn check(&self, key: &str) -> Result<(), ConfigError> {
        if let Points::Range { start, stop, step } = self {
            if !(step.is_finite() && *step > 0.0) {
                return Err(invalid(format!("{key}.step"), "must be positive"));
            }
            if stop < start {
                return Err(invalid(format!("{key}.stop"), "must not be below start"));
            }
        }
        let values = self.values();
        if values.is_empty() {
            return Err(invalid(key, "needs at least one point"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid(key, "points must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub sweep: SweepAxis,
    /// `lambda_d`, frames/s per device.
    pub device_rate: f64,
    pub rate_mode: RateMode,
    /// Points for the device axis.
    pub devices: Points,
    /// Points for the rate axis, frames/s over all channels.
    pub rates: Points,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            sweep: SweepAxis::Devices,
            device_rate: 1.0 / 600.0,
            rate_mode: RateMode::Total,
            devices: Points::Range {
                start: 250.0,
                stop: 4000.0,
                step: 250.0,
            },
            rates: Points::Range {
                start: 0.5,
                stop: 8.0,
                step: 0.5,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Simulated seconds per replication.
    pub duration: f64,
    pub replications: usize,
    pub seed: u64,
    pub fading: Fading,
    pub capture: CaptureModel,
    /// Write the frame trace of the first replication of every point.
    pub trace: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            duration: 1e4,
            replications: 20,
            seed: 1,
            fading: Fading::Rayleigh,
            capture: CaptureModel::FrameCase,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Print the summary table after a run.
    pub summary: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
            summary: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub engine: Engine,
    pub phy: PhyConfig,
    pub traffic: TrafficConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schemes: vec![Scheme::Distance],
            engine: Engine::Analytic,
            phy: PhyConfig::default(),
            traffic: TrafficConfig::default(),
            simulation: SimulationConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn points(&self) -> Vec<f64> {
        match self.traffic.sweep {
            SweepAxis::Devices => self.traffic.devices.values(),
            SweepAxis::Rate => self.traffic.rates.values(),
        }
    }

    /// Frames/s each simulated device sends, after `rate_mode`.
    pub fn total_device_rate(&self) -> f64 {
        match self.traffic.rate_mode {
            RateMode::Total => self.traffic.device_rate,
            RateMode::PerChannel => self.traffic.device_rate * f64::from(self.phy.channel_count),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.phy.validate().map_err(|e| core_error("phy", e))?;
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "list at least one scheme"));
        }
        if self.schemes.contains(&Scheme::Custom) {
            return Err(invalid("schemes", "custom allocations are only available through the library"));
        }
        let rate = self.traffic.device_rate;
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid("traffic.device_rate", "must be positive"));
        }
        match self.traffic.sweep {
            SweepAxis::Devices => {
                self.traffic.devices.check("traffic.devices")?;
                if self.traffic.devices.values().iter().any(|v| v.fract() != 0.0 || *v > f64::from(u32::MAX)) {
                    return Err(invalid("traffic.devices", "device counts must be whole numbers"));
                }
            }
            SweepAxis::Rate => self.traffic.rates.check("traffic.rates")?,
        }
        let sim = &self.simulation;
        if !(sim.duration.is_finite() && sim.duration > 0.0) {
            return Err(invalid("simulation.duration", "must be positive"));
        }
        if sim.replications == 0 {
            return Err(invalid("simulation.replications", "must be at least 1"));
        }
        // the whole population shares one device rate, so every populated
        // SF must sustain it
        let device_rate = self.total_device_rate();
        for &scheme in &self.schemes {
            let alloc = allocation(scheme, &self.phy).map_err(|e| core_error("phy", e))?;
            for sf in alloc.populated() {
                let limit = max_device_rate(self.phy.timing(sf).airtime, self.phy.duty_cycle);
                if device_rate >= limit {
                    return Err(invalid(
                        "traffic.device_rate",
                        format!(
                            "{device_rate} frames/s breaks the {} duty cycle on {sf} (limit {limit:.6} frames/s)",
                            self.phy.duty_cycle
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn core_error(table: &str, e: CoreError) -> ConfigError {
    match e {
        CoreError::InvalidParameter { name, reason } => invalid(format!("{table}.{name}"), reason),
        other => invalid(table, other.to_string()),
    }
}

/// Parses and validates a config held in memory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
