//! Runs the configured engines over every sweep point and scheme.

use rayon::prelude::*;
use uplink_core::sim::{run_replication, seed_sequence, FrameEvent, Verdict};
use uplink_core::stats::Proportion;
use uplink_core::{allocation, run_simulation, AnalyticEngine, Scheme, SimConfig, SpreadingFactor, Traffic};

use crate::config::{ExperimentConfig, SweepAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineTag {
    Analytic,
    Simulate,
}

impl EngineTag {
    pub fn name(self) -> &'static str {
        match self {
            EngineTag::Analytic => "analytic",
            EngineTag::Simulate => "simulate",
        }
    }
}

/// One operating point of one engine. Per-SF arrays are indexed SF7..SF12;
/// `None` marks a quantity that does not exist for this row (standard
/// errors of analytic rows, SFs without frames, failed points).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub scheme: Scheme,
    pub engine: EngineTag,
    /// Simulated population, or `N` on the device axis.
    pub devices: Option<u32>,
    pub aggregate_rate: f64,
    pub coverage: Option<f64>,
    pub fdp: Option<f64>,
    pub fdp_se: Option<f64>,
    /// Payload bytes per second.
    pub throughput: Option<f64>,
    pub throughput_se: Option<f64>,
    pub cp: [Option<f64>; 6],
    pub fcp: [Option<f64>; 6],
    pub fcp_se: [Option<f64>; 6],
    pub fsp: [Option<f64>; 6],
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

impl ResultRow {
    fn empty(axis: SweepAxis, value: f64, scheme: Scheme, engine: EngineTag) -> Self {
        ResultRow {
            axis,
            value,
            scheme,
            engine,
            devices: None,
            aggregate_rate: 0.0,
            coverage: None,
            fdp: None,
            fdp_se: None,
            throughput: None,
            throughput_se: None,
            cp: [None; 6],
            fcp: [None; 6],
            fcp_se: [None; 6],
            fsp: [None; 6],
            status: "ok".into(),
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Frame trace of the first replication at one simulated point.
#[derive(Debug, Clone)]
pub struct PointTrace {
    pub scheme: Scheme,
    pub value: f64,
    pub frames: Vec<FrameEvent>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    /// Ordered by scheme, then sweep value, then engine.
    pub rows: Vec<ResultRow>,
    pub traces: Vec<PointTrace>,
}

/// Population and per-device rate simulated at one sweep value.
fn population(config: &ExperimentConfig, value: f64) -> (u32, f64) {
    let rate = config.total_device_rate();
    match config.traffic.sweep {
        SweepAxis::Devices => (value as u32, rate),
        SweepAxis::Rate => {
            // enough devices to carry lambda without exceeding the device rate
            let n = (value / rate).ceil() as u32;
            if n == 0 {
                (0, rate)
            } else {
                (n, value / f64::from(n))
            }
        }
    }
}

fn traffic(config: &ExperimentConfig, value: f64) -> uplink_core::Result<Traffic> {
    let (n, rate) = population(config, value);
    match config.traffic.sweep {
        SweepAxis::Devices => Traffic::new(f64::from(n) * rate, config.phy.channel_count),
        SweepAxis::Rate => Traffic::new(value, config.phy.channel_count),
    }
}

fn analytic_row(config: &ExperimentConfig, engine: &AnalyticEngine, scheme: Scheme, value: f64) -> ResultRow {
    let mut row = ResultRow::empty(config.traffic.sweep, value, scheme, EngineTag::Analytic);
    if config.traffic.sweep == SweepAxis::Devices {
        row.devices = Some(value as u32);
    }
    let report = traffic(config, value).and_then(|t| engine.evaluate(t));
    match report {
        Ok(report) => {
            row.aggregate_rate = report.traffic.aggregate_rate;
            row.coverage = Some(report.coverage);
            row.fdp = Some(report.frame_drop);
            row.throughput = Some(report.throughput);
            for sf in &report.per_sf {
                let i = sf.sf.index();
                row.cp[i] = Some(sf.coverage);
                row.fcp[i] = Some(sf.capture);
                row.fsp[i] = Some(sf.success);
            }
        }
        Err(e) => row.status = format!("failed: {e}"),
    }
    row
}

fn share(p: &Proportion) -> Option<f64> {
    (p.trials > 0).then_some(p.value)
}

fn spread(p: &Proportion) -> Option<f64> {
    (p.trials > 0).then_some(p.std_error)
}

/// Seeds for the replications at sweep point `index`. Schemes share them.
pub fn point_seeds(config: &ExperimentConfig, index: usize) -> Vec<u64> {
    let base = config
        .simulation
        .seed
        .wrapping_add((index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    seed_sequence(base, config.simulation.replications)
}

fn sim_config(config: &ExperimentConfig, scheme: Scheme, value: f64) -> uplink_core::Result<SimConfig> {
    let alloc = allocation(scheme, &config.phy)?;
    let (n, rate) = population(config, value);
    let mut sim = SimConfig::new(config.phy.clone(), alloc, n, rate, config.simulation.duration);
    sim.fading = config.simulation.fading;
    sim.capture = config.simulation.capture;
    Ok(sim)
}

fn simulated_row(
    config: &ExperimentConfig,
    scheme: Scheme,
    value: f64,
    index: usize,
) -> (ResultRow, Option<PointTrace>) {
    let mut row = ResultRow::empty(config.traffic.sweep, value, scheme, EngineTag::Simulate);
    let seeds = point_seeds(config, index);
    let run = sim_config(config, scheme, value).and_then(|sim| {
        let stats = run_simulation(&sim, &seeds)?;
        let trace = if config.simulation.trace {
            let rep = run_replication(&sim, seeds[0], true)?;
            Some(PointTrace {
                scheme,
                value,
                frames: rep.frames,
                verdicts: rep.verdicts,
            })
        } else {
            None
        };
        Ok((sim.devices, stats, trace))
    });
    match run {
        Ok((devices, stats, trace)) => {
            row.devices = Some(devices);
            row.aggregate_rate = stats.traffic.aggregate_rate;
            row.coverage = share(&stats.coverage);
            row.fdp = share(&stats.frame_drop);
            row.fdp_se = spread(&stats.frame_drop);
            row.throughput = Some(stats.throughput.mean);
            row.throughput_se = Some(stats.throughput.std_error).filter(|s| s.is_finite());
            for sf in &stats.per_sf {
                let i = sf.sf.index();
                row.cp[i] = share(&sf.coverage);
                row.fcp[i] = share(&sf.capture);
                row.fcp_se[i] = spread(&sf.capture);
                row.fsp[i] = share(&sf.success);
            }
            (row, trace)
        }
        Err(e) => {
            row.status = format!("failed: {e}");
            (row, None)
        }
    }
}

/// Runs every (scheme, point) pair concurrently. A failing point becomes a
/// flagged row; the rest of the sweep carries on.
pub fn run_sweep(config: &ExperimentConfig) -> SweepOutput {
    let points = config.points();
    let engines: Vec<(Scheme, Result<AnalyticEngine, String>)> = if config.engine.analytic() {
        config
            .schemes
            .par_iter()
            .map(|&s| {
                let engine = allocation(s, &config.phy)
                    .and_then(|a| AnalyticEngine::new(&config.phy, &a))
                    .map_err(|e| e.to_string());
                (s, engine)
            })
            .collect()
    } else {
        Vec::new()
    };

    let tasks: Vec<(usize, Scheme, usize, f64)> = config
        .schemes
        .iter()
        .enumerate()
        .flat_map(|(si, &s)| points.iter().enumerate().map(move |(pi, &v)| (si, s, pi, v)))
        .collect();

    let results: Vec<(Vec<ResultRow>, Option<PointTrace>)> = tasks
        .par_iter()
        .map(|&(si, scheme, pi, value)| {
            let mut rows = Vec::new();
            let mut trace = None;
            if config.engine.analytic() {
                let row = match &engines[si].1 {
                    Ok(engine) => analytic_row(config, engine, scheme, value),
                    Err(e) => {
                        let mut row = ResultRow::empty(config.traffic.sweep, value, scheme, EngineTag::Analytic);
                        row.status = format!("failed: {e}");
                        row
                    }
                };
                rows.push(row);
            }
            if config.engine.simulate() {
                let (row, t) = simulated_row(config, scheme, value, pi);
                rows.push(row);
                trace = t;
            }
            (rows, trace)
        })
        .collect();

    let mut out = SweepOutput::default();
    for (rows, trace) in results {
        out.rows.extend(rows);
        out.traces.extend(trace);
    }
    out
}

/// One per-SF check of the lower-bound property at a point where both
/// engines ran.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub value: f64,
    pub scheme: Scheme,
    pub sf: SpreadingFactor,
    pub analytic_fcp: f64,
    pub simulated_fcp: f64,
    pub simulated_se: f64,
    /// `simulated_fcp + 3 * simulated_se`.
    pub upper: f64,
    pub holds: bool,
}

/// Pairs analytic and simulated rows and checks analytic FCP against the
/// simulated upper bound for every SF that has frames in both.
pub fn compare(rows: &[ResultRow]) -> Vec<ComparisonRow> {
    let mut out = Vec::new();
    for a in rows.iter().filter(|r| r.engine == EngineTag::Analytic && r.ok()) {
        let Some(s) = rows.iter().find(|r| {
            r.engine == EngineTag::Simulate && r.ok() && r.scheme == a.scheme && r.value == a.value
        }) else {
            continue;
        };
        for sf in SpreadingFactor::ALL {
            let i = sf.index();
            if let (Some(af), Some(sfcp), Some(se)) = (a.fcp[i], s.fcp[i], s.fcp_se[i]) {
                let upper = sfcp + 3.0 * se;
                out.push(ComparisonRow {
                    value: a.value,
                    scheme: a.scheme,
                    sf,
                    analytic_fcp: af,
                    simulated_fcp: sfcp,
                    simulated_se: se,
                    upper,
                    holds: af <= upper,
                });
            }
        }
    }
    out
}
