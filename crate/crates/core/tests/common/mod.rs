//! Independent oracles shared by the integration tests. Nothing here calls
//! into the engine's quadrature, kernel tables or Poisson truncation.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use uplink_core::deployment::Support;

/// Romberg integration: trapezoid refinement with Richardson extrapolation.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    const LEVELS: usize = 22;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut h = b - a;
    let mut trap = 0.5 * h * (f(a) + f(b));
    rows.push(vec![trap]);
    for level in 1..LEVELS {
        let n = 1usize << (level - 1);
        h *= 0.5;
        let mid: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        trap = 0.5 * trap + h * mid;
        let mut row = vec![trap];
        for j in 1..=level {
            let factor = 4f64.powi(j as i32);
            let prev = &rows[level - 1];
            row.push(row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        let best = row[level];
        let before = rows[level - 1][level - 1];
        rows.push(row);
        if level > 4 && (best - before).abs() <= rel_tol * best.abs().max(1e-300) {
            return best;
        }
    }
    rows.last().unwrap().last().copied().unwrap()
}

/// Closed-form single-interferer kernel for alpha = 4 on an area-uniform
/// support: with u = r^2, int 2r r^4/(r^4 + a) dr = u - sqrt(a) atan(u/sqrt(a)).
pub fn kernel_alpha4(r_i: f64, gamma: f64, s: Support) -> f64 {
    let a = gamma * r_i.powi(4);
    let sa = a.sqrt();
    let prim = |r: f64| {
        let u = r * r;
        if sa == 0.0 {
            u
        } else {
            u - sa * (u / sa).atan()
        }
    };
    (prim(s.outer) - prim(s.inner)) / (s.outer * s.outer - s.inner * s.inner)
}

/// Kernel for any alpha by nested Romberg.
pub fn kernel_romberg(r_i: f64, gamma: f64, alpha: f64, s: Support) -> f64 {
    let area = s.outer * s.outer - s.inner * s.inner;
    romberg(
        |r| {
            let ra = r.powf(alpha);
            let d = ra + gamma * r_i.powf(alpha);
            if d == 0.0 {
                2.0 * r / area
            } else {
                2.0 * r / area * ra / d
            }
        },
        s.inner,
        s.outer,
        1e-11,
    )
}

pub fn sample_area_uniform<R: Rng>(rng: &mut R, s: Support) -> f64 {
    let u: f64 = rng.gen();
    (s.inner * s.inner + u * (s.outer * s.outer - s.inner * s.inner)).sqrt()
}

pub fn exp1<R: Rng>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Sample proportion with its binomial standard deviation.
pub fn proportion(hits: u64, n: u64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}
