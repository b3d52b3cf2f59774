//! PHY-layer arithmetic: LoRa symbol and frame timing, the per-SF capture
//! thresholds and the link-budget constant `c`.
//!
//! Distances are expressed in whatever unit falls out of the path-loss
//! constant `A(fc) = fc^2 * 10^-2.8` with `fc` in GHz. Every reported
//! probability depends only on ratios of `r^alpha` to `c`, so the absolute
//! length unit never matters as long as borders and `c` come from the same
//! [`PhyConfig`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_mw};

/// LoRa spreading factor, always in `7..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SpreadingFactor(u8);

impl SpreadingFactor {
    pub const MIN: u8 = 7;
    pub const MAX: u8 = 12;
    pub const COUNT: usize = 6;

    pub const ALL: [SpreadingFactor; 6] = [
        SpreadingFactor(7),
        SpreadingFactor(8),
        SpreadingFactor(9),
        SpreadingFactor(10),
        SpreadingFactor(11),
        SpreadingFactor(12),
    ];

    pub fn new(m: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&m) {
            Ok(SpreadingFactor(m))
        } else {
            Err(Error::InvalidSpreadingFactor(m))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Position in [`SpreadingFactor::ALL`]; used to index per-SF arrays.
    pub fn index(self) -> usize {
        usize::from(self.0 - Self::MIN)
    }

    /// Low data rate optimization is mandatory for SF11 and SF12.
    pub fn low_data_rate_optimize(self) -> bool {
        self.0 >= 11
    }
}

impl TryFrom<u8> for SpreadingFactor {
    type Error = Error;

    fn try_from(m: u8) -> Result<Self> {
        SpreadingFactor::new(m)
    }
}

impl From<SpreadingFactor> for u8 {
    fn from(sf: SpreadingFactor) -> u8 {
        sf.0
    }
}

impl std::fmt::Display for SpreadingFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SF{}", self.0)
    }
}

/// Radio, gateway and deployment constants shared by both engines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyConfig {
    pub bandwidth_hz: f64,
    /// `CR = i` selects coding rate `4/(4+i)`.
    pub coding_rate: u8,
    pub preamble_symbols: u32,
    pub payload_bytes: u32,
    pub tx_power_dbm: f64,
    pub carrier_freq_ghz: f64,
    pub path_loss_exponent: f64,
    /// Cell radius. `None` places the edge at the raw SF12 sensitivity border.
    pub cell_radius: Option<f64>,
    pub channel_count: u32,
    pub duty_cycle: f64,
    /// Parallel demodulation paths shared by all channels (8 on an SX1301).
    pub demodulation_paths: u32,
}

impl Default for PhyConfig {
    fn default() -> Self {
        PhyConfig {
            bandwidth_hz: 125_000.0,
            coding_rate: 1,
            preamble_symbols: 12,
            payload_bytes: 50,
            tx_power_dbm: 14.0,
            carrier_freq_ghz: 0.868,
            path_loss_exponent: 4.0,
            cell_radius: None,
            channel_count: 8,
            duty_cycle: 0.01,
            demodulation_paths: 8,
        }
    }
}

impl PhyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::param("bandwidth_hz", "must be positive"));
        }
        if !(1..=4).contains(&self.coding_rate) {
            return Err(Error::param("coding_rate", "must be in 1..=4"));
        }
        if self.preamble_symbols < 10 {
            return Err(Error::param("preamble_symbols", "must be at least 10"));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::param("tx_power_dbm", "must be finite"));
        }
        if !(self.carrier_freq_ghz.is_finite() && self.carrier_freq_ghz > 0.0) {
            return Err(Error::param("carrier_freq_ghz", "must be positive"));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent > 2.0) {
            return Err(Error::param("path_loss_exponent", "must be greater than 2"));
        }
        if let Some(r) = self.cell_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::param("cell_radius", "must be positive"));
            }
        }
        if !(1..=8).contains(&self.channel_count) {
            return Err(Error::param("channel_count", "must be in 1..=8"));
        }
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return Err(Error::param("duty_cycle", "must be in (0, 1]"));
        }
        if self.demodulation_paths == 0 {
            return Err(Error::param("demodulation_paths", "must be at least 1"));
        }
        Ok(())
    }

    /// Thermal noise with a 0 dB noise figure: `-174 + 10 log10(BW)` dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        -174.0 + 10.0 * self.bandwidth_hz.log10()
    }

    /// Deterministic path-loss gain `A(fc) = fc^2 * 10^-2.8`, `fc` in GHz.
    pub fn path_gain(&self) -> f64 {
        self.carrier_freq_ghz * self.carrier_freq_ghz * 10f64.powf(-2.8)
    }

    pub fn snr_constant(&self) -> f64 {
        snr_constant(self.tx_power_dbm, self.path_gain(), self.noise_power_dbm())
    }

    /// Raw sensitivity border `(P0 * A / theta_RX)^(1/alpha)` for `sf`.
    pub fn sensitivity_range(&self, sf: SpreadingFactor) -> f64 {
        let theta = dbm_to_mw(CaptureThresholds::table().sensitivity_dbm(sf));
        (dbm_to_mw(self.tx_power_dbm) * self.path_gain() / theta).powf(1.0 / self.path_loss_exponent)
    }

    /// Cell radius `R`; defaults to the SF12 sensitivity border.
    pub fn radius(&self) -> f64 {
        self.cell_radius
            .unwrap_or_else(|| self.sensitivity_range(SpreadingFactor(12)))
    }

    pub fn timing(&self, sf: SpreadingFactor) -> FrameTiming {
        frame_airtime(
            self.payload_bytes,
            sf,
            self.coding_rate,
            self.preamble_symbols,
            self.bandwidth_hz,
        )
    }

    pub fn timings(&self) -> [FrameTiming; 6] {
        SpreadingFactor::ALL.map(|sf| self.timing(sf))
    }
}

/// Receiver sensitivity and capture thresholds per SF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptureThresholds {
    sensitivity_dbm: [f64; 6],
    snr_db: [f64; 6],
    inter_sf_db: [f64; 6],
    co_sf_db: f64,
}

impl CaptureThresholds {
    /// Semtech SX1301 figures as used by the model.
    pub const fn table() -> Self {
        CaptureThresholds {
            sensitivity_dbm: [-123.0, -126.0, -129.0, -132.0, -134.5, -137.0],
            snr_db: [-6.0, -9.0, -12.0, -15.0, -17.5, -20.0],
            inter_sf_db: [-7.5, -9.0, -13.5, -15.0, -18.0, -22.5],
            co_sf_db: 6.0,
        }
    }

    pub fn sensitivity_dbm(&self, sf: SpreadingFactor) -> f64 {
        self.sensitivity_dbm[sf.index()]
    }

    /// `Gamma_m`, the noise-only threshold.
    pub fn snr_db(&self, sf: SpreadingFactor) -> f64 {
        self.snr_db[sf.index()]
    }

    /// `Gamma_int,m`, the inter-SF threshold.
    pub fn inter_sf_db(&self, sf: SpreadingFactor) -> f64 {
        self.inter_sf_db[sf.index()]
    }

    /// `Gamma_co`, common to all SFs.
    pub fn co_sf_db(&self) -> f64 {
        self.co_sf_db
    }

    pub fn snr(&self, sf: SpreadingFactor) -> f64 {
        db_to_linear(self.snr_db(sf))
    }

    pub fn inter_sf(&self, sf: SpreadingFactor) -> f64 {
        db_to_linear(self.inter_sf_db(sf))
    }

    pub fn co_sf(&self) -> f64 {
        db_to_linear(self.co_sf_db)
    }
}

/// Symbol counts and durations of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameTiming {
    pub preamble_symbols: u32,
    pub payload_symbols: u32,
    pub frame_symbols: u32,
    pub symbol_period: f64,
    pub airtime: f64,
}

/// `2^m / BW` seconds.
pub fn symbol_period(sf: SpreadingFactor, bandwidth_hz: f64) -> f64 {
    f64::from(1u32 << sf.value()) / bandwidth_hz
}

/// Header plus payload symbol count (SX127x datasheet formula, explicit
/// header with CRC folded into the `+44` constant).
pub fn payload_symbols(payload_bytes: u32, sf: SpreadingFactor, coding_rate: u8) -> u32 {
    let m = i64::from(sf.value());
    let de = i64::from(sf.low_data_rate_optimize());
    let numerator = 8 * i64::from(payload_bytes) - 4 * m + 44;
    let denominator = 4 * m - 2 * de;
    let blocks = div_ceil(numerator, denominator);
    let coded = (blocks * (i64::from(coding_rate) + 4)).max(0);
    8 + coded as u32
}

fn div_ceil(n: i64, d: i64) -> i64 {
    let q = n.div_euclid(d);
    if n.rem_euclid(d) == 0 {
        q
    } else {
        q + 1
    }
}

pub fn frame_airtime(
    payload_bytes: u32,
    sf: SpreadingFactor,
    coding_rate: u8,
    preamble_symbols: u32,
    bandwidth_hz: f64,
) -> FrameTiming {
    let payload = payload_symbols(payload_bytes, sf, coding_rate);
    let frame_symbols = preamble_symbols + payload;
    let ts = symbol_period(sf, bandwidth_hz);
    FrameTiming {
        preamble_symbols,
        payload_symbols: payload,
        frame_symbols,
        symbol_period: ts,
        airtime: ts * f64::from(frame_symbols),
    }
}

/// Highest per-device frame rate the duty cycle allows, `DC / T_f`.
pub fn max_device_rate(airtime: f64, duty_cycle: f64) -> f64 {
    duty_cycle / airtime
}

/// `c = P0 * A / noise`, all in linear units.
pub fn snr_constant(tx_power_dbm: f64, path_gain: f64, noise_dbm: f64) -> f64 {
    dbm_to_mw(tx_power_dbm) * path_gain / dbm_to_mw(noise_dbm)
}
