//! Frame drop probability at the demodulator.
//!
//! Frames holding a demodulation path are modelled as Poisson with mean
//! `L_M`. A new frame is dropped when at least `paths` are already busy.
//! `L_M` itself scales with `1 - FDP` (dropped frames hold no path), so the
//! drop probability is the fixed point of
//! `x = 1 - P(Poisson(L0 (1 - x)) <= paths - 1)`.

use serde::Serialize;

use super::poisson::poisson_cdf;
use crate::error::{Error, Result};

/// Drop probability for a fixed demodulator load.
pub fn drop_probability_for_load(load: f64, paths: u32) -> f64 {
    (1.0 - poisson_cdf(paths - 1, load)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropSolution {
    pub probability: f64,
    /// `L_M` at the fixed point.
    pub load: f64,
    pub iterations: usize,
    pub last_step: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct FixedPointSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        FixedPointSettings {
            tolerance: 1e-12,
            max_iterations: 10_000,
        }
    }
}

/// Solves for FDP given the load `offered` that would reach the demodulator
/// with no drops.
///
/// Plain iteration from 0; the damping factor halves whenever the residual
/// changes sign without shrinking. The map is decreasing, so the root stays
/// bracketed and any step leaving the bracket is replaced by bisection.
pub fn solve_frame_drop(offered: f64, paths: u32, settings: FixedPointSettings) -> Result<DropSolution> {
    if offered <= 0.0 {
        return Ok(DropSolution {
            probability: 0.0,
            load: 0.0,
            iterations: 0,
            last_step: 0.0,
        });
    }
    let map = |x: f64| drop_probability_for_load(offered * (1.0 - x), paths);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = 0.0;
    let mut damping = 1.0;
    let mut previous_residual = f64::NAN;
    for iteration in 1..=settings.max_iterations {
        let residual = map(x) - x;
        if residual > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        if previous_residual.is_finite()
            && residual.signum() != previous_residual.signum()
            && residual.abs() >= 0.5 * previous_residual.abs()
        {
            damping *= 0.5;
        }
        previous_residual = residual;
        let mut next = x + damping * residual;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step < settings.tolerance {
            return Ok(DropSolution {
                probability: x,
                load: offered * (1.0 - x),
                iterations: iteration,
                last_step: step,
            });
        }
    }
    Err(Error::FixedPoint {
        iterations: settings.max_iterations,
        step: hi - lo,
    })
}
