//! Closed forms checked against oracles built only from first principles:
//! plain quadrature, bisection and sampling written out here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mecmob::controller::{
    drift_b1, drift_b2, e_and_hmin, max_slot_energy, z_closed_form, z_frame_closed_form, FrameParams, FrameThreshold,
};
use mecmob::numerics::exp_integral_e1;
use mecmob::offloading::PhyModel;
use mecmob::scenario::ScenarioConfig;

/// `E1(x) = ∫_0^1 e^{-x/u} / u du` by composite Simpson on a fine grid,
/// after the change of variable `t = x/u` that makes the range finite.
fn e1_simpson(x: f64) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let g = |u: f64| if u <= 0.0 { 0.0 } else { (-x / u).exp() / u };
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    s * h / 3.0
}

fn defaults() -> PhyModel {
    PhyModel::from_config(&ScenarioConfig::default())
}

#[test]
fn e1_reference_points() {
    for (x, want) in [(1.0, 0.219_383_934_4), (0.5, 0.559_773_594_8)] {
        let got = exp_integral_e1(x).unwrap();
        assert!((got - want).abs() < 1e-9, "E1({x}) = {got}");
        assert!((got - e1_simpson(x)).abs() < 1e-9);
    }
}

#[test]
fn e1_against_simpson_over_a_range() {
    for &x in &[0.05, 0.2, 0.9, 1.1, 3.0, 7.5, 20.0] {
        let a = exp_integral_e1(x).unwrap();
        let b = e1_simpson(x);
        assert!((a - b).abs() <= 1e-8 * b.max(1e-12), "x={x}: {a} vs {b}");
    }
}

/// Smallest power meeting the deadline, by bisection on the latency itself.
fn p_min_bisection(phy: &PhyModel, h: f64, f: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phy.latency(h, f, mid) > phy.deadline {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn minimum_power_matches_bisection() {
    let phy = defaults();
    let p = phy.p_min(1e-10, 2e10).unwrap();
    assert!((p - 1.505e-5).abs() < 5e-9, "{p}");
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let h = (rng.random_range(-30.0f64..-22.0)).exp();
        let f = rng.random_range(2e9..2e10);
        let want = p_min_bisection(&phy, h, f);
        let got = phy.p_min(h, f).unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
        let e = phy.offload_below(h, f, f64::INFINITY).energy;
        assert!((e - phy.energy(h, got)).abs() <= 1e-9 * e);
    }
}

#[test]
fn threshold_identity() {
    // V·e/h_min = min{Q, V·P̄·b}
    let phy = defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..500 {
        let f = rng.random_range(2e9..2e10);
        let q = rng.random_range(1e-3..1e3);
        let v = rng.random_range(1.0..1e4);
        let th = e_and_hmin(&phy, f, q, v).unwrap();
        let b = phy.time_budget(f);
        let want = q.min(v * phy.peak_power * b);
        assert!((v * th.e / th.h_min - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn closed_form_against_sampling() {
    // V·e/H = 1 and h_min/H = 1, so Z = E1(1) + Q(1 - 1/e)
    let (v, q, h_mean) = (100.0, 3.0, 1.0);
    let th = FrameThreshold { e: 1.0 / v, h_min: 1.0 };
    let z = z_closed_form(&th, h_mean, q, v);
    assert!((z - (0.219_383_934_4 + q * 0.632_120_558_8)).abs() < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let h = -h_mean * (1.0 - rng.random::<f64>()).ln();
        let cost = if h >= th.h_min { v * th.e / h } else { q };
        s += cost;
        s2 += cost * cost;
    }
    let m = s / n as f64;
    let se = ((s2 / n as f64 - m * m) / (n as f64 - 1.0)).sqrt();
    assert!((m - z).abs() <= 3.0 * se, "mc {m} ± {se}, closed {z}");
}

#[test]
fn drift_constants() {
    assert!((drift_b1(0.5, 1e-3) - 0.250_000_5).abs() < 1e-15);
    // B2 = B1 + (T-1)((1-ε)ρ + ε²)/2, written out for the defaults
    let b2 = 0.250_000_5 + 499.0 * (0.999 * 0.5 + 1e-6) / 2.0;
    assert!((drift_b2(0.5, 1e-3, 500) - b2).abs() < 1e-9);
    assert!((b2 - 124.875).abs() < 0.01);
    let e_max = max_slot_energy(&defaults(), 2e10);
    assert!((e_max - 9.34e-3).abs() < 1e-9);
}

/// Replays whole frames slot by slot and compares the realised cost
/// `Σ V·E + Q·X` with the expected frame cost, for staying and for moving.
#[test]
fn frame_cost_replays() {
    let cfg = ScenarioConfig::default();
    let phy = defaults();
    let frame = FrameParams::from_config(&cfg);
    let (h_mean, f, q, v) = (3e-13, 1.4e10, 40.0, 5000.0);
    let z = z_frame_closed_form(&phy, h_mean, f, q, v);
    let cap = phy.p_max(f, q, v);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for migrated in [false, true] {
        let outage = if migrated { frame.migration_delay } else { 0 };
        let reps = 1000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..reps {
            let mut cost = 0.0;
            for t in 0..frame.frame_size {
                if !rng.random_bool(frame.arrival_prob) {
                    continue;
                }
                if t < outage {
                    cost += q;
                    continue;
                }
                let g = -(1.0 - rng.random::<f64>()).ln();
                let o = phy.offload_below(h_mean * g, f, cap);
                cost += v * o.energy + q * o.failed as u8 as f64;
            }
            s += cost;
            s2 += cost * cost;
        }
        let m = s / reps as f64;
        let se = ((s2 / reps as f64 - m * m) / (reps as f64 - 1.0)).sqrt();
        let want = frame.z_sum(z, q, !migrated);
        assert!((m - want).abs() <= 3.0 * se, "migrated={migrated}: {m} ± {se} vs {want}");
    }
}
