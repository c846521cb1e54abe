//! Closed forms against the generic propagate-and-maximize pipeline.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinnet_core::analytic::*;
use spinnet_core::transport::{max_over_window, transfer_probability, ThermalEnsemble, TimeWindow};
use spinnet_core::{fully_connected, EnergyUnit, HermitianMatrix};

fn window_max(h: &HermitianMatrix, i: usize, f: usize, t_max: f64, per_unit: f64) -> (f64, f64) {
    let w = TimeWindow::with_points(t_max, (t_max * per_unit).ceil() as usize + 1);
    let best = ThermalEnsemble::bare(h).max_transfer(i, f, &w).unwrap();
    (best.probability, best.time)
}

#[test]
fn dimer_formula_matches_pipeline() {
    for (e1, e2, j, s1, s2) in [(0.0, 3.0, 2.0, 0.0, 0.0), (1.0, -1.0, 0.7, 0.5, -0.2), (0.0, 4.0, 2.0, 1.0, -3.0)] {
        let h = HermitianMatrix::from_real_symmetric(2, &[e1 + s1, j, j, e2 + s2], EnergyUnit::RadPerPs).unwrap();
        let closed = dimer_max_probability(e1, e2, j, s1, s2).unwrap();
        let (p, _) = window_max(&h, 0, 1, 2.0 * PI / j, 20_000.0);
        assert!((p - closed).abs() < 1e-6, "{p} vs {closed}");
    }
}

#[test]
fn symmetric_network_matches_pipeline() {
    for n in 2..=12 {
        let h = fully_connected(n, 0.0, 1.0).unwrap();
        let best = max_over_window(
            |t| transfer_probability(&h, 0, 1, t).unwrap(),
            &TimeWindow::with_points(2.0 * PI / n as f64, 20_001),
        )
        .unwrap();
        assert!((best.probability - 4.0 / (n * n) as f64).abs() < 1e-6);
        assert!((best.time - PI / n as f64).abs() < 1e-6);
        for t in [0.1, 0.77, 3.0] {
            let direct = transfer_probability(&h, 0, n - 1, t).unwrap();
            assert!((direct - symmetric_transfer(n, 1.0, t).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn one_bath_resonance_matches_pipeline() {
    for n in [4usize, 6, 10] {
        let (e1, pmax) = one_bath_resonant_max(n, 0.0, 1.0).unwrap();
        // the bath sits on the final site
        let h = shifted_tail_network(n, 0.0, 1.0, &[e1]).unwrap();
        let (p, t) = window_max(&h, 0, n - 1, 2.0 * PI, 20_000.0);
        assert!((p - pmax).abs() < 1e-6, "N={n}: {p} vs {pmax}");
        assert!((t - one_bath_peak_time(n, 1.0)).abs() < 1e-3, "N={n}: t={t}");
    }
}

#[test]
fn two_bath_coefficients_match_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(4..=8);
        let (e1, e2) = (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let c = two_bath_coefficients(n, 0.0, 1.0, e1, e2).unwrap();
        let h = shifted_tail_network(n, 0.0, 1.0, &[e1, e2]).unwrap();
        for t in [0.3, 1.1, 7.9] {
            let direct = transfer_probability(&h, n - 2, n - 1, t).unwrap();
            assert!((c.probability(t) - direct).abs() < 1e-10);
        }
        let (p, _) = window_max(&h, n - 2, n - 1, 30.0, 2_000.0);
        assert!(p <= c.bound() + 1e-9);
    }
}

/// λ = ε₁ − J is an eigenvalue of the two-bath network only when ε₁ = ε₂.
#[test]
fn two_bath_degenerate_eigenvalue_needs_equal_shifts() {
    let has = |e1: f64, e2: f64| {
        let h = shifted_tail_network(6, 0.0, 1.0, &[e1, e2]).unwrap();
        h.eigh().eigenvalues().iter().any(|&l| (l - (e1 - 1.0)).abs() < 1e-9)
    };
    assert!(has(3.0, 3.0));
    assert!(has(-2.5, -2.5));
    assert!(!has(3.0, 4.0));
    assert!(!has(-2.5, 1.0));
}

#[test]
fn intermediate_formula_matches_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let n = rng.gen_range(3..=8);
        let k = rng.gen_range(2..n);
        let tail: Vec<f64> = (0..n - k).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let h = shifted_tail_network(n, 0.0, 1.0, &tail).unwrap();
        for t in [0.2, 2.5, 11.0] {
            let closed = intermediate_bath_probability(k, &h, 0, 1, t).unwrap();
            let direct = transfer_probability(&h, 0, 1, t).unwrap();
            assert!((closed - direct).abs() < 1e-10);
        }
    }
}

#[test]
fn three_level_and_counterexample_forms() {
    for (j1, j2) in [(1.0, 1.0), (0.3, 2.0), (2.0, 0.5)] {
        let h = three_level_chain(j1, j2);
        let s = h.eigh();
        let mut lowest = f64::INFINITY;
        for k in 0..4000 {
            let t = k as f64 * 0.01;
            let closed = three_level_return_amplitude(j1, j2, t).unwrap();
            assert!((s.propagator_element(0, 0, t).re - closed).abs() < 1e-12);
            lowest = lowest.min(closed);
        }
        assert!(lowest > -1.0 + 1e-6);
    }
    let net = counterexample_network();
    for k in 0..200 {
        let t = k as f64 * 0.037;
        let direct = transfer_probability(&net, 0, 1, t).unwrap();
        assert!((direct - counterexample_probability(t)).abs() < 1e-9);
    }
    // 10π is a period as well, the fundamental one is 10π/21
    for t in [0.3, 1.9] {
        assert!((counterexample_probability(t + 10.0 * PI) - counterexample_probability(t)).abs() < 1e-12);
        assert!((counterexample_probability(t + COUNTEREXAMPLE_PERIOD) - counterexample_probability(t)).abs() < 1e-12);
    }
}

/// Generic shifted networks come close to 4/k² over a long window; the
/// constructed counterexample does not reach it.
#[test]
fn bound_saturation_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let t_max = 500.0;
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.gen_range(3..=6);
        let k = rng.gen_range(2..n);
        // irrational-looking shifts well away from the block energy
        let tail: Vec<f64> = (0..n - k)
            .map(|_| {
                let mag = rng.gen_range(3.0..12.0) * std::f64::consts::SQRT_2;
                if rng.gen_bool(0.5) { mag } else { -mag }
            })
            .collect();
        let h = shifted_tail_network(n, 0.0, 1.0, &tail).unwrap();
        let (p, _) = window_max(&h, 0, 1, t_max, 40.0);
        let bound = 4.0 / (k * k) as f64;
        assert!(p <= bound + 1e-9);
        worst = worst.min(p / bound);
    }
    assert!(worst >= 0.95, "worst ratio {worst}");

    let (p, _) = window_max(&counterexample_network(), 0, 1, t_max, 40.0);
    assert!(p < 4.0 / 441.0, "{p}");
}
