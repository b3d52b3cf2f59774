mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uplink_core::analytic::{p_no_collision, poisson_count_pmf};
use uplink_core::deployment::{distance_allocation, eqload_allocation, uniform_allocation, Support};
use uplink_core::units::db_to_linear;
use uplink_core::*;

fn sf(m: u8) -> SpreadingFactor {
    SpreadingFactor::new(m).unwrap()
}

fn default_engine(scheme: Scheme) -> AnalyticEngine {
    let phy = PhyConfig::default();
    AnalyticEngine::new(&phy, &allocation(scheme, &phy).unwrap()).unwrap()
}

fn device_traffic(devices: u32) -> Traffic {
    Traffic::from_devices(devices, 1.0 / 600.0, RateMode::Total, 8).unwrap()
}

// Frozen from mpmath quadrature of exp(-Gamma_m r^4 / c) g_m(r), computed
// outside this crate.
const DIST_CP: [f64; 6] = [
    0.922_732_316_064_296,
    0.832_757_179_645_1,
    0.832_757_179_645_1,
    0.832_757_179_645_1,
    0.825_527_019_202_29,
    0.825_527_019_202_29,
];
const DIST_COVERAGE: f64 = 0.847_545_237_105_18;
const EQLOAD_COVERAGE: f64 = 0.874_272_938_801_118;
const DIST_LOAD_SHARES: [f64; 6] = [
    0.023_475_374_832_3,
    0.015_640_260_624_3,
    0.041_585_798_286,
    0.110_140_315_129,
    0.232_748_162_563,
    0.576_410_088_566,
];

#[test]
fn coverage_matches_frozen_values() {
    let engine = default_engine(Scheme::Distance);
    for m in SpreadingFactor::ALL {
        let cp = engine.coverage_probability(m).unwrap();
        assert!((cp - DIST_CP[m.index()]).abs() < 1e-10, "{m}: {cp}");
    }
    assert!((engine.cell_coverage() - DIST_COVERAGE).abs() < 1e-10);
    let eq = default_engine(Scheme::EqLoad);
    assert!((eq.cell_coverage() - EQLOAD_COVERAGE).abs() < 1e-10);
}

#[test]
fn coverage_noise_free_limit() {
    let phy = PhyConfig {
        cell_radius: Some(PhyConfig::default().radius() * 1e-4),
        ..PhyConfig::default()
    };
    let engine = AnalyticEngine::new(&phy, &distance_allocation(&phy).unwrap()).unwrap();
    for m in SpreadingFactor::ALL {
        assert!(engine.coverage_probability(m).unwrap() > 1.0 - 1e-12);
    }
}

#[test]
fn coverage_sifts_point_mass() {
    let phy = PhyConfig::default();
    let r0 = 0.7 * phy.radius();
    let narrow = Support {
        inner: r0,
        outer: r0 * (1.0 + 1e-7),
    };
    let alloc = AllocationSet::custom(phy.radius(), [0.0, 0.0, 0.0, 1.0, 0.0, 0.0], [narrow; 6]).unwrap();
    let engine = AnalyticEngine::new(&phy, &alloc).unwrap();
    let expected = (-CaptureThresholds::table().snr(sf(10)) * r0.powi(4) / phy.snr_constant()).exp();
    let cp = engine.coverage_probability(sf(10)).unwrap();
    assert!((cp - expected).abs() < 1e-6, "{cp} vs {expected}");
}

/// Pr(SINR > gamma) by direct sampling of fading and positions.
fn sampled_capture(
    engine: &AnalyticEngine,
    m: SpreadingFactor,
    co: u32,
    inter: u32,
    gamma: f64,
    draws: u64,
    seed: u64,
) -> (f64, f64) {
    let alloc = engine.allocation();
    let phy = engine.phy();
    let alpha = phy.path_loss_exponent;
    let c = phy.snr_constant();
    // inter-SF law: SF p with probability proportional to (T_p + T_m) delta_p
    let timings = phy.timings();
    let own = timings[m.index()].airtime;
    let weights: Vec<(SpreadingFactor, f64)> = SpreadingFactor::ALL
        .into_iter()
        .filter(|&p| p != m && alloc.fraction(p) > 0.0)
        .map(|p| (p, (timings[p.index()].airtime + own) * alloc.fraction(p)))
        .collect();
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..draws {
        let r_i = sample_area_uniform(&mut rng, alloc.support(m));
        let signal = exp1(&mut rng) * r_i.powf(-alpha);
        let mut interference = 1.0 / c;
        for _ in 0..co {
            let r = sample_area_uniform(&mut rng, alloc.support(m));
            interference += exp1(&mut rng) * r.powf(-alpha);
        }
        for _ in 0..inter {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = weights[0].0;
            for &(p, w) in &weights {
                pick = p;
                if u < w {
                    break;
                }
                u -= w;
            }
            let r = sample_area_uniform(&mut rng, alloc.support(pick));
            interference += exp1(&mut rng) * r.powf(-alpha);
        }
        if signal / interference >= gamma {
            hits += 1;
        }
    }
    proportion(hits, draws)
}

fn assert_binomial(value: f64, sampled: (f64, f64), draws: u64) {
    // sigma from the hypothesised value, so rare events are still tested
    let sd = (value * (1.0 - value) / draws as f64).sqrt().max(sampled.1);
    assert!((value - sampled.0).abs() <= 3.0 * sd + 1e-12, "analytic {value}, sampled {} ± {sd}", sampled.0);
}

#[test]
fn capture_co_agrees_with_sampling() {
    let engine = default_engine(Scheme::Distance);
    let t = CaptureThresholds::table();
    let sampled = sampled_capture(&engine, sf(7), 1, 0, t.co_sf(), 1_000_000, 11);
    assert_binomial(engine.capture_co(sf(7), 1).unwrap(), sampled, 1_000_000);
}

#[test]
fn capture_int_agrees_with_sampling() {
    let engine = default_engine(Scheme::Distance);
    let t = CaptureThresholds::table();
    let sampled = sampled_capture(&engine, sf(12), 0, 1, t.inter_sf(sf(12)), 1_000_000, 12);
    assert_binomial(engine.capture_int(sf(12), 1).unwrap(), sampled, 1_000_000);
}

#[test]
fn capture_co_int_agrees_with_sampling() {
    // uniform supports make the co+inter event common enough to sample
    let engine = default_engine(Scheme::Uniform);
    let t = CaptureThresholds::table();
    let sampled = sampled_capture(&engine, sf(10), 1, 1, t.co_sf(), 1_000_000, 13);
    assert_binomial(engine.capture_co_int(sf(10), 1, 1).unwrap(), sampled, 1_000_000);
}

#[test]
fn capture_limits_and_monotonicity() {
    let engine = default_engine(Scheme::Distance);
    for m in SpreadingFactor::ALL {
        let mut last_co = f64::INFINITY;
        let mut last_int = f64::INFINITY;
        for k in 1..12 {
            let co = engine.capture_co(m, k).unwrap();
            let int = engine.capture_int(m, k).unwrap();
            assert!(co <= last_co + 1e-12 && int <= last_int + 1e-12);
            last_co = co;
            last_int = int;
            // structural reduction to the co-SF-only case
            assert!((engine.capture_co_int(m, k, 0).unwrap() - co).abs() < 1e-12);
            assert!(engine.capture_co_int(m, k, 2).unwrap() <= engine.capture_co_int(m, k, 1).unwrap() + 1e-12);
            assert!(engine.capture_co_int(m, k + 1, 1).unwrap() <= engine.capture_co_int(m, k, 1).unwrap() + 1e-12);
        }
        // near-origin receivers decay like k^-1/2, so only the trend is checked
        assert!(engine.capture_co(m, 100_000).unwrap() < 0.2 * engine.capture_co(m, 100).unwrap());
        assert!(engine.capture_int(m, 100_000).unwrap() < 0.2 * engine.capture_int(m, 100).unwrap());
    }
}

#[test]
fn zero_threshold_kernel_is_one() {
    let s = Support {
        inner: 0.2,
        outer: 0.9,
    };
    let law = [uplink_core::analytic::Component {
        weight: 1.0,
        support: s,
    }];
    let k = uplink_core::analytic::kernel_direct(0.5, 0.0, 4.0, &law, Default::default()).unwrap();
    assert!((k - 1.0).abs() < 1e-12);
}

#[test]
fn inter_sf_law_collapses_to_single_annulus() {
    let phy = PhyConfig::default();
    let dist = distance_allocation(&phy).unwrap();
    let supports = SpreadingFactor::ALL.map(|m| dist.support(m));
    let alloc = AllocationSet::custom(phy.radius(), [0.5, 0.0, 0.0, 0.0, 0.0, 0.5], supports).unwrap();
    let engine = AnalyticEngine::new(&phy, &alloc).unwrap();
    let law = engine.inter_sf_law(sf(7));
    assert_eq!(law.len(), 1);
    assert_eq!(law[0].weight, 1.0);
    assert_eq!(law[0].support, dist.support(sf(12)));
    // capture against one SF12 interferer equals the single-annulus integral
    let gamma = CaptureThresholds::table().inter_sf(sf(7));
    let (c, alpha) = (phy.snr_constant(), 4.0);
    let s7 = dist.support(sf(7));
    let expected = romberg(
        |r| {
            (-gamma * r.powf(alpha) / c).exp()
                * alloc.density(sf(7), r)
                * kernel_alpha4(r, gamma, dist.support(sf(12)))
        },
        s7.inner,
        s7.outer,
        1e-12,
    );
    assert!((engine.capture_int(sf(7), 1).unwrap() - expected).abs() < 1e-9);
}

#[test]
fn no_collision_probability() {
    let phy = PhyConfig::default();
    let timings = phy.timings();
    let dist = distance_allocation(&phy).unwrap();
    for m in SpreadingFactor::ALL {
        assert_eq!(p_no_collision(m, &dist, &timings, 0.0), 1.0);
    }
    let single = AllocationSet::single_sf(phy.radius(), sf(9)).unwrap();
    let t9 = timings[sf(9).index()].airtime;
    for rate in [0.1, 1.0, 3.0] {
        let p = p_no_collision(sf(9), &single, &timings, rate);
        assert!((p - (-2.0 * t9 * rate).exp()).abs() < 1e-15);
    }
}

#[test]
fn frame_capture_at_zero_load_is_coverage() {
    for scheme in [Scheme::Uniform, Scheme::Distance, Scheme::EqLoad] {
        let engine = default_engine(scheme);
        for m in SpreadingFactor::ALL {
            let fcp = engine.frame_capture_probability(m, 0.0).unwrap();
            assert!((fcp.probability - engine.coverage_probability(m).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn frame_capture_ordering_and_truncation() {
    for scheme in [Scheme::Uniform, Scheme::Distance, Scheme::EqLoad] {
        let engine = default_engine(scheme);
        for m in SpreadingFactor::ALL {
            let cp = engine.coverage_probability(m).unwrap();
            let mut last = cp;
            for i in 1..=12 {
                let rate = 0.25 * i as f64;
                let fcp = engine.frame_capture_probability(m, rate).unwrap();
                assert!(fcp.probability <= cp + 1e-12);
                assert!(fcp.probability <= last + 1e-12, "{scheme} {m} not monotone at {rate}");
                assert!(fcp.discarded_mass < 1e-9, "{scheme} {m}: {}", fcp.discarded_mass);
                last = fcp.probability;
            }
        }
    }
}

/// Second algebraic route for FCP at alpha = 4: closed-form kernels and the
/// Poisson generating function sum_{k>=1} p_k x^k = e^-L (e^{L x} - 1),
/// integrated by Romberg.
#[test]
fn frame_capture_matches_closed_form_route() {
    let phy = PhyConfig::default();
    let alloc = distance_allocation(&phy).unwrap();
    let engine = AnalyticEngine::new(&phy, &alloc).unwrap();
    let t = CaptureThresholds::table();
    let timings = phy.timings();
    let (alpha, c) = (4.0, phy.snr_constant());
    let rate = 2000.0 / 600.0 / 8.0;
    for m in [sf(7), sf(10), sf(12)] {
        let own = timings[m.index()].airtime;
        let mut l_co = 0.0;
        let mut l_int = 0.0;
        let mut law = Vec::new();
        for p in SpreadingFactor::ALL {
            let w = (timings[p.index()].airtime + own) * alloc.fraction(p);
            if p == m {
                l_co += w * rate;
            } else {
                l_int += w * rate;
                law.push((w, alloc.support(p)));
            }
        }
        let wsum: f64 = law.iter().map(|x| x.0).sum();
        let mix = |r: f64, gamma: f64| law.iter().map(|&(w, s)| w / wsum * kernel_alpha4(r, gamma, s)).sum::<f64>();
        let gen = |l: f64, x: f64| (-l).exp() * ((l * x).exp() - 1.0);
        let s = alloc.support(m);
        let g = |r: f64| alloc.density(m, r);
        let cp = romberg(|r| (-t.snr(m) * r.powf(alpha) / c).exp() * g(r), s.inner, s.outer, 1e-13);
        let co_part = romberg(
            |r| {
                let i = kernel_alpha4(r, t.co_sf(), s);
                (-t.co_sf() * r.powf(alpha) / c).exp() * g(r) * gen(l_co, i) * ((-l_int).exp() + gen(l_int, mix(r, t.co_sf())))
            },
            s.inner,
            s.outer,
            1e-13,
        );
        let int_part = romberg(
            |r| (-t.inter_sf(m) * r.powf(alpha) / c).exp() * g(r) * gen(l_int, mix(r, t.inter_sf(m))),
            s.inner,
            s.outer,
            1e-13,
        );
        let expected = (-(l_co + l_int)).exp() * cp + co_part + (-l_co).exp() * int_part;
        let fcp = engine.frame_capture_probability(m, rate).unwrap().probability;
        assert!((fcp - expected).abs() < 1e-8, "{m}: {fcp} vs {expected}");
    }
}

#[test]
fn quadrature_matches_refinement_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = CaptureThresholds::table();
    for draw in 0..10 {
        let scheme = [Scheme::Uniform, Scheme::Distance, Scheme::EqLoad][rng.gen_range(0..3)];
        let alpha = rng.gen_range(2.5..5.0);
        let phy = PhyConfig {
            path_loss_exponent: alpha,
            tx_power_dbm: rng.gen_range(8.0..20.0),
            ..PhyConfig::default()
        };
        let alloc = allocation(scheme, &phy).unwrap();
        let engine = AnalyticEngine::new(&phy, &alloc).unwrap();
        let m = SpreadingFactor::ALL[rng.gen_range(0..6)];
        let k = rng.gen_range(1..4u32);
        let c = phy.snr_constant();
        let s = alloc.support(m);
        let g = |r: f64| alloc.density(m, r);
        let kind = draw % 4;
        let (value, expected) = match kind {
            0 => (
                engine.coverage_probability(m).unwrap(),
                romberg(|r| (-t.snr(m) * r.powf(alpha) / c).exp() * g(r), s.inner, s.outer, 1e-12),
            ),
            1 => (
                engine.capture_co(m, k).unwrap(),
                romberg(
                    |r| (-t.co_sf() * r.powf(alpha) / c).exp() * g(r) * kernel_romberg(r, t.co_sf(), alpha, s).powi(k as i32),
                    s.inner,
                    s.outer,
                    1e-10,
                ),
            ),
            _ => {
                let timings = phy.timings();
                let own = timings[m.index()].airtime;
                let law: Vec<(f64, Support)> = SpreadingFactor::ALL
                    .into_iter()
                    .filter(|&p| p != m)
                    .map(|p| ((timings[p.index()].airtime + own) * alloc.fraction(p), alloc.support(p)))
                    .collect();
                let wsum: f64 = law.iter().map(|x| x.0).sum();
                let mix = |r: f64, gamma: f64| {
                    law.iter()
                        .map(|&(w, sp)| w / wsum * kernel_romberg(r, gamma, alpha, sp))
                        .sum::<f64>()
                };
                if kind == 2 {
                    let gamma = t.inter_sf(m);
                    (
                        engine.capture_int(m, k).unwrap(),
                        romberg(
                            |r| (-gamma * r.powf(alpha) / c).exp() * g(r) * mix(r, gamma).powi(k as i32),
                            s.inner,
                            s.outer,
                            1e-10,
                        ),
                    )
                } else {
                    let gamma = t.co_sf();
                    (
                        engine.capture_co_int(m, 1, k).unwrap(),
                        romberg(
                            |r| {
                                (-gamma * r.powf(alpha) / c).exp()
                                    * g(r)
                                    * kernel_romberg(r, gamma, alpha, s)
                                    * mix(r, gamma).powi(k as i32)
                            },
                            s.inner,
                            s.outer,
                            1e-10,
                        ),
                    )
                }
            }
        };
        let rel = ((value - expected) / expected).abs();
        assert!(rel < 1e-6, "draw {draw} ({scheme} {m} kind {kind} k {k} alpha {alpha:.3}): {value} vs {expected}");
    }
}

#[test]
fn drop_probability_and_load_shares() {
    let engine = default_engine(Scheme::Distance);
    assert_eq!(engine.frame_drop_probability(0.0).unwrap().probability, 0.0);
    let shares = engine.demodulator_load_shares();
    for (s, e) in shares.iter().zip(DIST_LOAD_SHARES) {
        assert!((s - e).abs() < 1e-9, "{s} vs {e}");
    }
    let mut last = 0.0;
    for n in (0..=12_000).step_by(500) {
        let fdp = engine.frame_drop_probability(f64::from(n) / 600.0).unwrap();
        assert!(fdp.probability >= last - 1e-12);
        assert!(fdp.last_step < 1e-12);
        last = fdp.probability;
    }
}

#[test]
fn fixed_load_drop_value() {
    // independent of the fixed point: plain Poisson tail at L_M = 8
    let tail: f64 = 1.0 - (0..8).map(|k| poisson_count_pmf(k, 8.0)).sum::<f64>();
    assert!((tail - 0.547_039_190_513_005).abs() < 1e-12);
    assert!((uplink_core::analytic::drop_probability_for_load(8.0, 8) - tail).abs() < 1e-14);
}

#[test]
fn report_invariants() {
    for scheme in [Scheme::Uniform, Scheme::Distance, Scheme::EqLoad] {
        let engine = default_engine(scheme);
        for n in [0, 250, 1000, 4000, 16_000] {
            let report = engine.evaluate(device_traffic(n)).unwrap();
            assert!((0.0..=1.0).contains(&report.frame_drop));
            for row in &report.per_sf {
                assert_eq!(row.success, row.capture * (1.0 - report.frame_drop));
                assert!(row.success <= row.capture && row.capture <= row.coverage + 1e-12);
                assert!((0.0..=1.0).contains(&row.success));
            }
            if n == 0 {
                assert_eq!(report.throughput, 0.0);
            }
        }
    }
}

#[test]
fn throughput_limits() {
    let engine = default_engine(Scheme::Distance);
    let payload = 50.0;
    let tiny = 1e-7;
    let report = engine.evaluate(Traffic::new(tiny, 8).unwrap()).unwrap();
    let linear = tiny * payload * engine.cell_coverage();
    assert!((report.throughput - linear).abs() / linear < 1e-5);

    let peak = (1..40)
        .map(|i| engine.evaluate(Traffic::new(i as f64, 8).unwrap()).unwrap().throughput)
        .fold(0.0, f64::max);
    let heavy = engine.evaluate(Traffic::new(2000.0, 8).unwrap()).unwrap().throughput;
    assert!(heavy < 1e-3 * peak, "heavy {heavy}, peak {peak}");
}

#[test]
fn scheme_throughput_ordering_at_high_load() {
    let traffic = device_traffic(4000);
    let thr = |s| default_engine(s).evaluate(traffic).unwrap().throughput;
    let (uni, dist, eq) = (thr(Scheme::Uniform), thr(Scheme::Distance), thr(Scheme::EqLoad));
    assert!(eq > dist && dist > uni, "eq {eq}, dist {dist}, uni {uni}");
}

#[test]
fn single_sf_cell_reduces_to_aloha_with_capture() {
    let phy = PhyConfig::default();
    let alloc = AllocationSet::single_sf(phy.radius(), sf(8)).unwrap();
    let engine = AnalyticEngine::new(&phy, &alloc).unwrap();
    let traffic = Traffic::new(2.0, 1).unwrap();
    let report = engine.evaluate(traffic).unwrap();
    let row = report.sf(sf(8)).unwrap();
    assert_eq!(row.details.loads.inter_sf, 0.0);
    assert_eq!(row.details.inter_order, 0);
    let t8 = phy.timing(sf(8)).airtime;
    // the no-collision term alone is the pure-Aloha share
    assert!((row.details.no_collision - (-2.0 * t8 * 2.0f64).exp()).abs() < 1e-15);
    assert!(row.capture >= row.details.no_collision * row.coverage);
    assert!((report.throughput - 2.0 * 50.0 * row.success).abs() < 1e-12);
}

#[test]
fn eqload_annulus_density_is_area_uniform() {
    let phy = PhyConfig::default();
    let eq = eqload_allocation(&phy).unwrap();
    let dist = distance_allocation(&phy).unwrap();
    for m in SpreadingFactor::ALL {
        let s = eq.support(m);
        let r = 0.5 * (s.inner + s.outer);
        assert!((eq.density(m, r) - 2.0 * r / (s.outer * s.outer - s.inner * s.inner)).abs() < 1e-15);
        assert_eq!(eq.density(m, r), dist.density(m, r));
    }
    let _ = uniform_allocation(1.0).unwrap();
    assert!(db_to_linear(6.0) > 3.98);
}
