use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a per-device rate is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMode {
    /// Device rate is the device's total, spread evenly over the channels.
    #[default]
    Total,
    /// Device rate applies to every channel separately.
    PerChannel,
}

/// Offered traffic at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Traffic {
    /// `lambda`: frames/s over all channels.
    pub aggregate_rate: f64,
    pub channels: u32,
}

impl Traffic {
    pub fn new(aggregate_rate: f64, channels: u32) -> Result<Self> {
        if !(aggregate_rate.is_finite() && aggregate_rate >= 0.0) {
            return Err(Error::param("aggregate_rate", "must be finite and non-negative"));
        }
        if channels == 0 {
            return Err(Error::param("channels", "must be at least 1"));
        }
        Ok(Traffic {
            aggregate_rate,
            channels,
        })
    }

    pub fn from_devices(devices: u32, device_rate: f64, mode: RateMode, channels: u32) -> Result<Self> {
        let per_device = match mode {
            RateMode::Total => device_rate,
            RateMode::PerChannel => device_rate * f64::from(channels),
        };
        Self::new(f64::from(devices) * per_device, channels)
    }

    /// Rate seen by one channel.
    pub fn channel_rate(&self) -> f64 {
        self.aggregate_rate / f64::from(self.channels)
    }
}
