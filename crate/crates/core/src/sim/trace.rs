use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1};
use serde::Serialize;

use super::{Fading, SimConfig};
use crate::deployment::sample_device;
use crate::error::{Error, Result};
use crate::phy::{max_device_rate, FrameTiming, SpreadingFactor};

/// One uplink transmission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameEvent {
    pub id: u32,
    pub device: u32,
    pub sf: SpreadingFactor,
    pub channel: u8,
    pub start: f64,
    pub timing: FrameTiming,
    /// `|h|^2`, constant over the frame.
    pub gain: f64,
    pub distance: f64,
}

impl FrameEvent {
    pub fn end(&self) -> f64 {
        self.start + self.timing.airtime
    }
}

/// Rejects device rates the duty cycle cannot sustain on any populated SF.
pub fn check_duty_cycle(config: &SimConfig) -> Result<()> {
    for sf in config.alloc.populated() {
        let limit = max_device_rate(config.phy.timing(sf).airtime, config.phy.duty_cycle);
        if config.device_rate >= limit {
            return Err(Error::DutyCycle {
                sf: sf.value(),
                rate: config.device_rate,
                limit,
            });
        }
    }
    Ok(())
}

/// Places the devices and draws every frame they send in `[0, duration)`.
///
/// Devices keep their position for the whole run. Each frame picks a
/// channel uniformly and an independent unit-mean exponential power gain.
/// The result is sorted by start time and frame ids follow that order.
pub fn generate_trace(config: &SimConfig, seed: u64) -> Result<Vec<FrameEvent>> {
    config.validate()?;
    check_duty_cycle(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let timings = config.phy.timings();
    let channels = config.phy.channel_count;
    let devices: Vec<_> = (0..config.devices)
        .map(|id| sample_device(&config.alloc, id, config.device_rate, &mut rng))
        .collect();

    let mut frames = Vec::new();
    if config.device_rate > 0.0 && config.duration > 0.0 {
        let gap = Exp::new(config.device_rate).map_err(|e| Error::param("device_rate", e.to_string()))?;
        for dev in &devices {
            let mut t = gap.sample(&mut rng);
            while t < config.duration {
                let channel = rng.gen_range(0..channels) as u8;
                let gain = match config.fading {
                    Fading::Rayleigh => Exp1.sample(&mut rng),
                    Fading::None => 1.0,
                };
                frames.push(FrameEvent {
                    id: 0,
                    device: dev.id,
                    sf: dev.sf,
                    channel,
                    start: t,
                    timing: timings[dev.sf.index()],
                    gain,
                    distance: dev.distance,
                });
                t += gap.sample(&mut rng);
            }
        }
    }
    frames.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.device.cmp(&b.device)));
    for (i, f) in frames.iter_mut().enumerate() {
        f.id = i as u32;
    }
    Ok(frames)
}

/// Outcome chain of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Verdict {
    /// SNR clears `Gamma_m` ignoring interference.
    pub covered: bool,
    /// Every symbol passes its capture condition.
    pub captured: bool,
    /// Four consecutive preamble symbols passed.
    pub detected: bool,
    /// A demodulation path was free at detection.
    pub path: bool,
    pub succeeded: bool,
}

/// Column order of the trace export.
pub const TRACE_COLUMNS: [&str; 13] = [
    "frame", "device", "sf", "channel", "start_s", "airtime_s", "gain", "distance", "covered",
    "captured", "detected", "path", "succeeded",
];

/// Writes one CSV record per frame in [`TRACE_COLUMNS`] order.
pub fn write_trace_csv<W: Write>(mut out: W, frames: &[FrameEvent], verdicts: &[Verdict]) -> io::Result<()> {
    writeln!(out, "{}", TRACE_COLUMNS.join(","))?;
    let flag = |b: bool| u8::from(b);
    for (f, v) in frames.iter().zip(verdicts) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.id,
            f.device,
            f.sf.value(),
            f.channel,
            f.start,
            f.timing.airtime,
            f.gain,
            f.distance,
            flag(v.covered),
            flag(v.captured),
            flag(v.detected),
            flag(v.path),
            flag(v.succeeded),
        )?;
    }
    Ok(())
}
