//! Poisson interferer counts and their truncation.

/// `L^k e^-L / k!`.
pub fn poisson_count_pmf(k: u32, load: f64) -> f64 {
    if load == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_fact: f64 = (2..=k).map(|i| f64::from(i).ln()).sum();
    (f64::from(k) * load.ln() - load - ln_fact).exp()
}

/// `P(K <= k)`.
pub fn poisson_cdf(k: u32, load: f64) -> f64 {
    let mut term = (-load).exp();
    let mut sum = term;
    for i in 1..=k {
        term *= load / f64::from(i);
        sum += term;
    }
    sum.min(1.0)
}

/// Probability masses `p_0..=p_order` by the forward recurrence.
pub fn poisson_pmfs(load: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut term = (-load).exp();
    out.push(term);
    for i in 1..=order {
        term *= load / i as f64;
        out.push(term);
    }
    out
}

/// Truncation point of a Poisson sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub order: usize,
    /// Probability mass above `order` that the sum leaves out.
    pub tail: f64,
}

/// Smallest `K` with `P(k <= K) >= 1 - tail_mass`, capped at `cap`.
pub fn truncation_order(load: f64, tail_mass: f64, cap: usize) -> Truncation {
    let mut term = (-load).exp();
    let mut cdf = term;
    let mut k = 0;
    while 1.0 - cdf >= tail_mass && k < cap {
        k += 1;
        term *= load / k as f64;
        cdf += term;
    }
    Truncation {
        order: k,
        tail: (1.0 - cdf).max(0.0),
    }
}
