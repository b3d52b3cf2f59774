//! Symbol-level Monte-Carlo simulation of the uplink.
//!
//! Each replication places the devices, draws a Poisson frame trace,
//! checks every symbol of every frame against noise and the frames it
//! overlaps on its channel, then feeds the preamble locks through the
//! shared demodulation paths.

mod capture;
mod demod;
mod trace;

pub use capture::{evaluate_capture, CaptureContext, SymbolVerdict, LOCK_SYMBOLS};
pub use demod::{demodulator_step, DemodulatorState, Detection, PathDecision};
pub use trace::{check_duty_cycle, generate_trace, write_trace_csv, FrameEvent, Verdict, TRACE_COLUMNS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deployment::AllocationSet;
use crate::error::{Error, Result};
use crate::phy::{CaptureThresholds, PhyConfig, SpreadingFactor};
use crate::stats::{MeanEstimate, Proportion};
use crate::traffic::Traffic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fading {
    /// One unit-mean exponential power gain per frame.
    #[default]
    Rayleigh,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaptureModel {
    /// The frame's interference case (none, co-SF, inter-SF, both) selects
    /// the threshold; the SINR of each symbol counts only the interferers
    /// active on that symbol.
    #[default]
    FrameCase,
    /// Each symbol picks its threshold from the interferers active on it,
    /// so interference-free symbols always face `Gamma_m`.
    SymbolCase,
    /// No capture: any overlap destroys the symbol, noise is ignored.
    CollisionOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub phy: PhyConfig,
    pub alloc: AllocationSet,
    pub devices: u32,
    /// Frames/s per device, over all channels.
    pub device_rate: f64,
    /// Simulated seconds per replication.
    pub duration: f64,
    pub fading: Fading,
    pub capture: CaptureModel,
    /// Demodulation paths; `None` disables the limit.
    pub paths: Option<u32>,
    /// Frames starting within this margin of either end of the run are
    /// simulated but not counted. Defaults to the longest airtime.
    pub edge_guard: Option<f64>,
}

impl SimConfig {
    pub fn new(phy: PhyConfig, alloc: AllocationSet, devices: u32, device_rate: f64, duration: f64) -> Self {
        let paths = Some(phy.demodulation_paths);
        SimConfig {
            phy,
            alloc,
            devices,
            device_rate,
            duration,
            fading: Fading::Rayleigh,
            capture: CaptureModel::FrameCase,
            paths,
            edge_guard: None,
        }
    }

    pub fn traffic(&self) -> Traffic {
        Traffic {
            aggregate_rate: f64::from(self.devices) * self.device_rate,
            channels: self.phy.channel_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phy.validate()?;
        if !(self.device_rate.is_finite() && self.device_rate >= 0.0) {
            return Err(Error::param("device_rate", "must be finite and non-negative"));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::param("duration", "must be finite and non-negative"));
        }
        if self.paths == Some(0) {
            return Err(Error::param("paths", "must be at least 1"));
        }
        Ok(())
    }

    pub fn edge_guard(&self) -> f64 {
        self.edge_guard.unwrap_or_else(|| {
            self.alloc
                .populated()
                .map(|sf| self.phy.timing(sf).airtime)
                .fold(0.0, f64::max)
        })
    }

    fn context(&self) -> CaptureContext {
        CaptureContext::new(
            self.capture,
            &CaptureThresholds::table(),
            self.phy.snr_constant(),
            self.phy.path_loss_exponent,
            self.alloc.radius(),
        )
    }
}

/// Per-SF event counts of one replication, over counted frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub generated: u64,
    pub covered: u64,
    pub captured: u64,
    pub detected: u64,
    /// Detected frames that found every path busy.
    pub dropped: u64,
    /// Captured frames that got no path, either from a missed lock or
    /// because every path was busy.
    pub captured_dropped: u64,
    pub succeeded: u64,
}

impl Counts {
    fn add(&mut self, v: &Verdict) {
        self.generated += 1;
        self.covered += u64::from(v.covered);
        self.captured += u64::from(v.captured);
        self.detected += u64::from(v.detected);
        self.dropped += u64::from(v.detected && !v.path);
        self.captured_dropped += u64::from(v.captured && !v.path);
        self.succeeded += u64::from(v.succeeded);
    }

    fn merge(&mut self, o: &Counts) {
        self.generated += o.generated;
        self.covered += o.covered;
        self.captured += o.captured;
        self.detected += o.detected;
        self.dropped += o.dropped;
        self.captured_dropped += o.captured_dropped;
        self.succeeded += o.succeeded;
    }
}

/// Output of a single replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub counts: [Counts; 6],
    /// Length of the counting window in seconds.
    pub window: f64,
    pub max_busy_paths: usize,
    pub frames: Vec<FrameEvent>,
    pub verdicts: Vec<Verdict>,
}

/// Evaluates capture and demodulation for an already generated trace.
pub fn evaluate_trace(config: &SimConfig, frames: &[FrameEvent]) -> Result<(Vec<Verdict>, usize)> {
    config.validate()?;
    let ctx = config.context();
    let channels = config.phy.channel_count as usize;
    let longest = frames.iter().map(|f| f.timing.airtime).fold(0.0, f64::max);

    let mut by_channel: Vec<Vec<usize>> = vec![Vec::new(); channels];
    for (i, f) in frames.iter().enumerate() {
        by_channel[usize::from(f.channel)].push(i);
    }

    let mut verdicts = vec![Verdict::default(); frames.len()];
    let mut detections = Vec::new();
    let mut detected_index = Vec::new();
    let mut overlapping: Vec<&FrameEvent> = Vec::new();
    for members in &by_channel {
        for (pos, &i) in members.iter().enumerate() {
            let frame = &frames[i];
            overlapping.clear();
            for &j in members[..pos].iter().rev() {
                let other = &frames[j];
                if other.start <= frame.start - longest {
                    break;
                }
                if other.end() > frame.start {
                    overlapping.push(other);
                }
            }
            for &j in &members[pos + 1..] {
                let other = &frames[j];
                if other.start >= frame.end() {
                    break;
                }
                overlapping.push(other);
            }
            let sym = evaluate_capture(&ctx, frame, &overlapping);
            let v = &mut verdicts[i];
            v.covered = ctx.covered(frame);
            v.captured = sym.captured;
            if let Some(offset) = sym.lock_offset {
                v.detected = true;
                detections.push(Detection {
                    time: frame.start + offset,
                    frame: frame.id,
                    release: frame.end(),
                });
                detected_index.push(i);
            }
        }
    }

    let mut demod = DemodulatorState::new(config.paths);
    let decisions = demodulator_step(&detections, &mut demod);
    for (&i, decision) in detected_index.iter().zip(decisions) {
        let v = &mut verdicts[i];
        v.path = decision == PathDecision::Assigned;
        v.succeeded = v.captured && v.path;
    }
    Ok((verdicts, demod.max_busy()))
}

/// One independent replication driven by `seed`.
pub fn run_replication(config: &SimConfig, seed: u64, keep_trace: bool) -> Result<Replication> {
    let frames = generate_trace(config, seed)?;
    let (verdicts, max_busy_paths) = evaluate_trace(config, &frames)?;
    let guard = config.edge_guard();
    let (from, to) = (guard, config.duration - guard);
    let mut counts = [Counts::default(); 6];
    for (f, v) in frames.iter().zip(&verdicts) {
        if f.start >= from && f.start < to {
            counts[f.sf.index()].add(v);
        }
    }
    let (frames, verdicts) = if keep_trace {
        (frames, verdicts)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(Replication {
        counts,
        window: (to - from).max(0.0),
        max_busy_paths,
        frames,
        verdicts,
    })
}

/// Empirical counterparts of the analytic per-SF quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfStats {
    pub sf: SpreadingFactor,
    pub counts: Counts,
    pub coverage: Proportion,
    pub capture: Proportion,
    /// Drops among detected frames.
    pub drop: Proportion,
    pub success: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub traffic: Traffic,
    pub replications: usize,
    /// Populated SFs only.
    pub per_sf: Vec<SfStats>,
    /// Population-wide coverage.
    pub coverage: Proportion,
    /// Drops among all detected frames.
    pub frame_drop: Proportion,
    /// Payload bytes per second.
    pub throughput: MeanEstimate,
    pub max_busy_paths: usize,
}

impl SimStats {
    pub fn sf(&self, sf: SpreadingFactor) -> Option<&SfStats> {
        self.per_sf.iter().find(|s| s.sf == sf)
    }
}

fn proportion<F: Fn(&Counts) -> (u64, u64)>(reps: &[Replication], pick: F) -> Proportion {
    let parts: Vec<(u64, u64)> = reps
        .iter()
        .map(|r| {
            let mut total = Counts::default();
            r.counts.iter().for_each(|c| total.merge(c));
            pick(&total)
        })
        .collect();
    Proportion::from_replications(&parts)
}

/// Aggregates replications into means and confidence intervals.
pub fn summarize(config: &SimConfig, reps: &[Replication]) -> SimStats {
    let mut per_sf = Vec::new();
    for sf in config.alloc.populated() {
        let i = sf.index();
        let parts = |f: &dyn Fn(&Counts) -> (u64, u64)| -> Proportion {
            let v: Vec<_> = reps.iter().map(|r| f(&r.counts[i])).collect();
            Proportion::from_replications(&v)
        };
        let mut counts = Counts::default();
        reps.iter().for_each(|r| counts.merge(&r.counts[i]));
        per_sf.push(SfStats {
            sf,
            counts,
            coverage: parts(&|c| (c.covered, c.generated)),
            capture: parts(&|c| (c.captured, c.generated)),
            drop: parts(&|c| (c.dropped, c.detected)),
            success: parts(&|c| (c.succeeded, c.generated)),
        });
    }
    let payload = f64::from(config.phy.payload_bytes);
    let throughput: Vec<f64> = reps
        .iter()
        .filter(|r| r.window > 0.0)
        .map(|r| r.counts.iter().map(|c| c.succeeded).sum::<u64>() as f64 * payload / r.window)
        .collect();
    SimStats {
        traffic: config.traffic(),
        replications: reps.len(),
        per_sf,
        coverage: proportion(reps, |c| (c.covered, c.generated)),
        frame_drop: proportion(reps, |c| (c.dropped, c.detected)),
        throughput: MeanEstimate::from_samples(&throughput),
        max_busy_paths: reps.iter().map(|r| r.max_busy_paths).max().unwrap_or(0),
    }
}

/// Runs one replication per seed, in parallel, and aggregates them in seed
/// order.
pub fn run_simulation(config: &SimConfig, seeds: &[u64]) -> Result<SimStats> {
    if seeds.is_empty() {
        return Err(Error::param("replications", "need at least one seed"));
    }
    let reps = seeds
        .par_iter()
        .map(|&seed| run_replication(config, seed, false))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(config, &reps))
}

/// `count` seeds derived from `base`.
pub fn seed_sequence(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| base.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
        .collect()
}
