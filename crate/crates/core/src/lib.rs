//! LoRaWAN single-gateway uplink models.
//!
//! Two engines share one set of PHY and deployment types:
//!
//! * [`analytic`] evaluates coverage, frame capture under Poisson co-SF and
//!   inter-SF interference, the demodulator drop probability and cell
//!   throughput by numerical integration;
//! * [`sim`] replays the same cell symbol by symbol, including preamble
//!   lock and a gateway with a fixed pool of demodulation paths.

pub mod analytic;
pub mod deployment;
pub mod error;
pub mod phy;
pub mod quadrature;
pub mod sim;
pub mod stats;
pub mod traffic;
pub mod units;

pub use analytic::{AnalyticEngine, AnalyticReport, EngineSettings};
pub use deployment::{allocation, AllocationSet, DevicePlacement, Scheme, Support};
pub use error::{Error, Result};
pub use phy::{CaptureThresholds, FrameTiming, PhyConfig, SpreadingFactor};
pub use sim::{run_simulation, SimConfig, SimStats};
pub use traffic::{RateMode, Traffic};
