//! Interference kernels.
//!
//! With Rayleigh fading, one interferer at distance `r` lets a frame from
//! `r_i` survive threshold `gamma` with probability
//! `1 / (1 + gamma (r_i / r)^alpha)`. Averaging that over the interferer's
//! distance law gives the kernel; `k` independent interferers contribute
//! its `k`-th power.

use crate::deployment::Support;
use crate::error::Result;
use crate::quadrature::{integrate, Tolerance};

/// One component of an interferer distance law: weight and a support with
/// area-uniform density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub support: Support,
}

/// Survival probability against a single interferer at distance `r`.
#[inline]
pub fn survival(r_i: f64, r: f64, gamma: f64, alpha: f64) -> f64 {
    // r^a / (r^a + gamma r_i^a) stays finite as r -> 0
    let ra = r.powf(alpha);
    let denom = ra + gamma * r_i.powf(alpha);
    if denom == 0.0 {
        1.0
    } else {
        ra / denom
    }
}

/// Kernel value at `r_i`, evaluated by direct quadrature.
pub fn kernel_direct(
    r_i: f64,
    gamma: f64,
    alpha: f64,
    law: &[Component],
    tol: Tolerance,
) -> Result<f64> {
    let mut total = 0.0;
    for c in law {
        let Support { inner, outer } = c.support;
        let area = outer * outer - inner * inner;
        let est = integrate(
            |r| 2.0 * r / area * survival(r_i, r, gamma, alpha),
            inner,
            outer,
            tol,
        )?;
        total += c.weight * est.value;
    }
    Ok(total)
}

/// Kernel sampled on a uniform grid and read back by 4-point cubic
/// interpolation.
#[derive(Debug, Clone)]
pub struct KernelTable {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl KernelTable {
    pub fn build(
        range: Support,
        points: usize,
        gamma: f64,
        alpha: f64,
        law: &[Component],
        tol: Tolerance,
    ) -> Result<Self> {
        let points = points.max(4);
        let step = range.width() / (points - 1) as f64;
        let values = (0..points)
            .map(|i| kernel_direct(range.inner + step * i as f64, gamma, alpha, law, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelTable {
            lo: range.inner,
            step,
            values,
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.step <= 0.0 {
            return self.values[0];
        }
        let n = self.values.len();
        let t = ((r - self.lo) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).clamp(1, n - 3);
        let x = t - i as f64;
        let [p0, p1, p2, p3] = [
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        ];
        // Lagrange basis on nodes -1, 0, 1, 2
        let l0 = -x * (x - 1.0) * (x - 2.0) / 6.0;
        let l1 = (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0;
        let l2 = -(x + 1.0) * x * (x - 2.0) / 2.0;
        let l3 = (x + 1.0) * x * (x - 1.0) / 6.0;
        (p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3).clamp(0.0, 1.0)
    }
}
