//! Numerical evaluation of the uplink model: coverage, capture under
//! Poisson co-SF and inter-SF interference, the demodulator-drop fixed
//! point, frame success and cell throughput.

mod drop;
mod kernel;
mod poisson;

pub use drop::{drop_probability_for_load, solve_frame_drop, DropSolution, FixedPointSettings};
pub use kernel::{kernel_direct, survival, Component, KernelTable};
pub use poisson::{poisson_cdf, poisson_count_pmf, poisson_pmfs, truncation_order, Truncation};

use serde::Serialize;

use crate::deployment::{AllocationSet, Scheme, Support};
use crate::error::{Error, Result};
use crate::phy::{CaptureThresholds, FrameTiming, PhyConfig, SpreadingFactor};
use crate::quadrature::{integrate, Estimate, Tolerance};
use crate::traffic::Traffic;

#[derive(Debug, Clone, Copy)]
pub struct EngineSettings {
    /// Poisson mass the truncated capture sums may discard.
    pub tail_mass: f64,
    pub max_truncation: usize,
    pub kernel_points: usize,
    pub quadrature: Tolerance,
    pub fixed_point: FixedPointSettings,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            tail_mass: 1e-9,
            max_truncation: 200,
            kernel_points: 2048,
            quadrature: Tolerance::default(),
            fixed_point: FixedPointSettings::default(),
        }
    }
}

/// Expected interferer counts over the vulnerability window of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferenceLoads {
    pub co_sf: f64,
    pub inter_sf: f64,
}

/// `exp(-sum_p (T_f_m + T_f_p) delta_p lambda)`.
pub fn p_no_collision(
    sf: SpreadingFactor,
    alloc: &AllocationSet,
    timings: &[FrameTiming; 6],
    rate: f64,
) -> f64 {
    let own = timings[sf.index()].airtime;
    let exponent: f64 = SpreadingFactor::ALL
        .iter()
        .map(|&p| (own + timings[p.index()].airtime) * alloc.fraction(p) * rate)
        .sum();
    (-exponent).exp()
}

/// `FCP * (1 - FDP)`.
pub fn frame_success_probability(capture: f64, drop: f64) -> f64 {
    capture * (1.0 - drop)
}

/// Received payload bytes per second, `sum_m FSP_m delta_m lambda B`.
pub fn cell_throughput(
    alloc: &AllocationSet,
    success: &[(SpreadingFactor, f64)],
    aggregate_rate: f64,
    payload_bytes: u32,
) -> f64 {
    success
        .iter()
        .map(|&(sf, fsp)| fsp * alloc.fraction(sf) * aggregate_rate * f64::from(payload_bytes))
        .sum()
}

/// Frame capture probability together with its truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameCapture {
    pub probability: f64,
    pub loads: InterferenceLoads,
    pub no_collision: f64,
    pub co_order: usize,
    pub inter_order: usize,
    /// Poisson mass outside the truncated double sum.
    pub discarded_mass: f64,
    pub quadrature_error: f64,
}

struct SfKernels {
    /// `I`: co-SF interferers, threshold `Gamma_co`.
    co: KernelTable,
    /// `I~`: inter-SF mixture, threshold `Gamma_int,m`.
    inter: Option<KernelTable>,
    /// `I'`: inter-SF mixture, threshold `Gamma_co`.
    inter_co: Option<KernelTable>,
    law: Vec<Component>,
}

/// Evaluator bound to one PHY configuration and allocation. Kernels and
/// coverage probabilities do not depend on traffic, so they are computed
/// once here and reused across load points.
pub struct AnalyticEngine {
    phy: PhyConfig,
    alloc: AllocationSet,
    thresholds: CaptureThresholds,
    timings: [FrameTiming; 6],
    snr_constant: f64,
    settings: EngineSettings,
    coverage: [Option<Estimate>; 6],
    kernels: [Option<SfKernels>; 6],
}

impl AnalyticEngine {
    pub fn new(phy: &PhyConfig, alloc: &AllocationSet) -> Result<Self> {
        Self::with_settings(phy, alloc, EngineSettings::default())
    }

    pub fn with_settings(phy: &PhyConfig, alloc: &AllocationSet, settings: EngineSettings) -> Result<Self> {
        phy.validate()?;
        let mut engine = AnalyticEngine {
            phy: phy.clone(),
            alloc: alloc.clone(),
            thresholds: CaptureThresholds::table(),
            timings: phy.timings(),
            snr_constant: phy.snr_constant(),
            settings,
            coverage: Default::default(),
            kernels: Default::default(),
        };
        for sf in alloc.populated() {
            let i = sf.index();
            engine.coverage[i] = Some(engine.capture_integral(sf, engine.thresholds.snr(sf), |_| 1.0)?);
            engine.kernels[i] = Some(engine.build_kernels(sf)?);
        }
        Ok(engine)
    }

    pub fn phy(&self) -> &PhyConfig {
        &self.phy
    }

    pub fn allocation(&self) -> &AllocationSet {
        &self.alloc
    }

    pub fn timings(&self) -> &[FrameTiming; 6] {
        &self.timings
    }

    pub fn snr_constant(&self) -> f64 {
        self.snr_constant
    }

    fn alpha(&self) -> f64 {
        self.phy.path_loss_exponent
    }

    /// Distance law of an inter-SF interferer seen by `sf`: SF `p` is picked
    /// with probability proportional to `(T_f_p + T_f_m) delta_p`.
    pub fn inter_sf_law(&self, sf: SpreadingFactor) -> Vec<Component> {
        let own = self.timings[sf.index()].airtime;
        let raw: Vec<(f64, Support)> = self
            .alloc
            .populated()
            .filter(|&p| p != sf)
            .map(|p| {
                let w = (self.timings[p.index()].airtime + own) * self.alloc.fraction(p);
                (w, self.alloc.support(p))
            })
            .collect();
        let total: f64 = raw.iter().map(|(w, _)| w).sum();
        raw.into_iter()
            .map(|(w, support)| Component {
                weight: w / total,
                support,
            })
            .collect()
    }

    fn build_kernels(&self, sf: SpreadingFactor) -> Result<SfKernels> {
        let support = self.alloc.support(sf);
        let own = [Component {
            weight: 1.0,
            support,
        }];
        let (points, tol, alpha) = (self.settings.kernel_points, self.settings.quadrature, self.alpha());
        let co_gamma = self.thresholds.co_sf();
        let co = KernelTable::build(support, points, co_gamma, alpha, &own, tol)?;
        let law = self.inter_sf_law(sf);
        let (inter, inter_co) = if law.is_empty() {
            (None, None)
        } else {
            let gamma = self.thresholds.inter_sf(sf);
            (
                Some(KernelTable::build(support, points, gamma, alpha, &law, tol)?),
                Some(KernelTable::build(support, points, co_gamma, alpha, &law, tol)?),
            )
        };
        Ok(SfKernels {
            co,
            inter,
            inter_co,
            law,
        })
    }

    fn kernels(&self, sf: SpreadingFactor) -> Result<&SfKernels> {
        self.kernels[sf.index()]
            .as_ref()
            .ok_or_else(|| Error::param("sf", format!("{sf} carries no devices in this allocation")))
    }

    /// `int exp(-gamma r^alpha / c) g_m(r) weight(r) dr` over the SF's support.
    fn capture_integral<F: Fn(f64) -> f64>(&self, sf: SpreadingFactor, gamma: f64, weight: F) -> Result<Estimate> {
        let support = self.alloc.support(sf);
        let (alpha, c) = (self.alpha(), self.snr_constant);
        integrate(
            |r| (-gamma * r.powf(alpha) / c).exp() * self.alloc.density(sf, r) * weight(r),
            support.inner,
            support.outer,
            self.settings.quadrature,
        )
    }

    /// `CP_m`: probability the SNR clears `Gamma_m` with no interference.
    pub fn coverage_probability(&self, sf: SpreadingFactor) -> Result<f64> {
        self.coverage[sf.index()]
            .map(|e| e.value)
            .ok_or_else(|| Error::param("sf", format!("{sf} carries no devices in this allocation")))
    }

    /// Population-weighted coverage `sum_m delta_m CP_m`.
    pub fn cell_coverage(&self) -> f64 {
        self.alloc
            .populated()
            .map(|sf| self.alloc.fraction(sf) * self.coverage[sf.index()].map_or(0.0, |e| e.value))
            .sum()
    }

    /// Capture against exactly `k` co-SF interferers.
    pub fn capture_co(&self, sf: SpreadingFactor, k: u32) -> Result<f64> {
        let kern = self.kernels(sf)?;
        let k = k as i32;
        Ok(self
            .capture_integral(sf, self.thresholds.co_sf(), |r| kern.co.eval(r).powi(k))?
            .value)
    }

    /// Capture against exactly `k` inter-SF interferers.
    pub fn capture_int(&self, sf: SpreadingFactor, k: u32) -> Result<f64> {
        let kern = self.kernels(sf)?;
        let k = k as i32;
        match &kern.inter {
            Some(table) => Ok(self
                .capture_integral(sf, self.thresholds.inter_sf(sf), |r| table.eval(r).powi(k))?
                .value),
            None if k == 0 => Ok(self
                .capture_integral(sf, self.thresholds.inter_sf(sf), |_| 1.0)?
                .value),
            None => Ok(0.0),
        }
    }

    /// Capture against `k_co` co-SF plus `k_int` inter-SF interferers, all
    /// at threshold `Gamma_co`.
    pub fn capture_co_int(&self, sf: SpreadingFactor, k_co: u32, k_int: u32) -> Result<f64> {
        let kern = self.kernels(sf)?;
        let (k_co, k_int) = (k_co as i32, k_int as i32);
        let value = match &kern.inter_co {
            Some(table) => {
                self.capture_integral(sf, self.thresholds.co_sf(), |r| {
                    kern.co.eval(r).powi(k_co) * table.eval(r).powi(k_int)
                })?
                .value
            }
            None if k_int == 0 => self
                .capture_integral(sf, self.thresholds.co_sf(), |r| kern.co.eval(r).powi(k_co))?
                .value,
            None => 0.0,
        };
        Ok(value)
    }

    /// Interferer loads over `tau = T_f_m` at per-channel rate `rate`.
    pub fn interference_loads(&self, sf: SpreadingFactor, rate: f64) -> InterferenceLoads {
        let own = self.timings[sf.index()].airtime;
        let mut loads = InterferenceLoads {
            co_sf: 0.0,
            inter_sf: 0.0,
        };
        for p in SpreadingFactor::ALL {
            let l = (self.timings[p.index()].airtime + own) * rate * self.alloc.fraction(p);
            if p == sf {
                loads.co_sf += l;
            } else {
                loads.inter_sf += l;
            }
        }
        loads
    }

    pub fn p_no_collision(&self, sf: SpreadingFactor, rate: f64) -> f64 {
        p_no_collision(sf, &self.alloc, &self.timings, rate)
    }

    /// `FCP_m` at per-channel rate `rate`: the four interference cases
    /// weighted by their Poisson probabilities, with the interferer sums
    /// truncated so the discarded mass stays below the configured tail.
    pub fn frame_capture_probability(&self, sf: SpreadingFactor, rate: f64) -> Result<FrameCapture> {
        let kern = self.kernels(sf)?;
        let loads = self.interference_loads(sf, rate);
        let tail = 0.5 * self.settings.tail_mass;
        let cap = self.settings.max_truncation;
        let co_trunc = truncation_order(loads.co_sf, tail, cap);
        let int_trunc = if kern.law.is_empty() {
            Truncation { order: 0, tail: 0.0 }
        } else {
            truncation_order(loads.inter_sf, tail, cap)
        };
        let p_co = poisson_pmfs(loads.co_sf, co_trunc.order);
        let p_int = poisson_pmfs(loads.inter_sf, int_trunc.order);
        let discarded = 1.0 - (1.0 - co_trunc.tail) * (1.0 - int_trunc.tail);

        // sum_{k>=1} p_k x^k
        let series = |p: &[f64], x: f64| p.iter().skip(1).rev().fold(0.0, |acc, &pk| (acc + pk) * x);

        let no_collision = self.p_no_collision(sf, rate);
        let coverage = self.coverage[sf.index()].expect("populated SF has coverage");
        let mut value = no_collision * coverage.value;
        let mut error = no_collision * coverage.error;

        // co-SF only, and co-SF with inter-SF, share threshold Gamma_co
        let co_part = self.capture_integral(sf, self.thresholds.co_sf(), |r| {
            let co = series(&p_co, kern.co.eval(r));
            let both = match &kern.inter_co {
                Some(t) => series(&p_int, t.eval(r)),
                None => 0.0,
            };
            co * (p_int[0] + both)
        })?;
        value += co_part.value;
        error += co_part.error;

        if let Some(table) = &kern.inter {
            let int_part = self.capture_integral(sf, self.thresholds.inter_sf(sf), |r| series(&p_int, table.eval(r)))?;
            value += p_co[0] * int_part.value;
            error += p_co[0] * int_part.error;
        }

        Ok(FrameCapture {
            probability: value.clamp(0.0, 1.0),
            loads,
            no_collision,
            co_order: co_trunc.order,
            inter_order: int_trunc.order,
            discarded_mass: discarded,
            quadrature_error: error,
        })
    }

    /// Per-SF demodulator loads `lambda delta_m T_f_m CP_m` before the
    /// `(1 - FDP)` thinning.
    pub fn offered_demodulator_loads(&self, aggregate_rate: f64) -> [f64; 6] {
        SpreadingFactor::ALL.map(|sf| {
            let cp = self.coverage[sf.index()].map_or(0.0, |e| e.value);
            aggregate_rate * self.alloc.fraction(sf) * self.timings[sf.index()].airtime * cp
        })
    }

    /// `L_m / L_M`; independent of the drop probability.
    pub fn demodulator_load_shares(&self) -> [f64; 6] {
        let loads = self.offered_demodulator_loads(1.0);
        let total: f64 = loads.iter().sum();
        loads.map(|l| l / total)
    }

    /// FDP for all-channel rate `aggregate_rate`.
    pub fn frame_drop_probability(&self, aggregate_rate: f64) -> Result<DropSolution> {
        let offered: f64 = self.offered_demodulator_loads(aggregate_rate).iter().sum();
        solve_frame_drop(offered, self.phy.demodulation_paths, self.settings.fixed_point)
    }

    pub fn evaluate(&self, traffic: Traffic) -> Result<AnalyticReport> {
        let drop = self.frame_drop_probability(traffic.aggregate_rate)?;
        let shares = self.demodulator_load_shares();
        let mut per_sf = Vec::new();
        for sf in self.alloc.populated() {
            let capture = self.frame_capture_probability(sf, traffic.channel_rate())?;
            per_sf.push(SfReport {
                sf,
                fraction: self.alloc.fraction(sf),
                airtime: self.timings[sf.index()].airtime,
                coverage: self.coverage_probability(sf)?,
                capture: capture.probability,
                success: frame_success_probability(capture.probability, drop.probability),
                load_share: shares[sf.index()],
                details: capture,
            });
        }
        let success: Vec<_> = per_sf.iter().map(|r| (r.sf, r.success)).collect();
        let throughput = cell_throughput(&self.alloc, &success, traffic.aggregate_rate, self.phy.payload_bytes);
        let quadrature_error = per_sf
            .iter()
            .map(|r| r.details.quadrature_error)
            .fold(0.0, f64::max);
        Ok(AnalyticReport {
            scheme: self.alloc.scheme(),
            traffic,
            coverage: self.cell_coverage(),
            frame_drop: drop.probability,
            throughput,
            per_sf,
            diagnostics: Diagnostics {
                demodulator_load: drop.load,
                fixed_point_iterations: drop.iterations,
                fixed_point_step: drop.last_step,
                max_quadrature_error: quadrature_error,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfReport {
    pub sf: SpreadingFactor,
    pub fraction: f64,
    pub airtime: f64,
    pub coverage: f64,
    pub capture: f64,
    pub success: f64,
    pub load_share: f64,
    pub details: FrameCapture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub demodulator_load: f64,
    pub fixed_point_iterations: usize,
    pub fixed_point_step: f64,
    pub max_quadrature_error: f64,
}

/// Analytic results at one load point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub scheme: Scheme,
    pub traffic: Traffic,
    pub coverage: f64,
    pub frame_drop: f64,
    /// Payload bytes per second.
    pub throughput: f64,
    /// Populated SFs only.
    pub per_sf: Vec<SfReport>,
    pub diagnostics: Diagnostics,
}

impl AnalyticReport {
    pub fn sf(&self, sf: SpreadingFactor) -> Option<&SfReport> {
        self.per_sf.iter().find(|r| r.sf == sf)
    }
}
