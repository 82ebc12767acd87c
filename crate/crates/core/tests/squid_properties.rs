use std::f64::consts::PI;

use proptest::prelude::*;
use squidkit_core::squid::{
    critical_point, squid_critical_current, squid_current, squid_current_expanded, FluxPoint,
    JunctionCpr, SquidModel, DEFAULT_PHASE_GRID,
};

const NA: f64 = 1e-9;

fn model(w: [f64; 4]) -> SquidModel {
    SquidModel::new(
        JunctionCpr::new(w[0], w[1]).unwrap(),
        JunctionCpr::new(w[2], w[3]).unwrap(),
        1.551e-12,
        1500.0,
    )
    .unwrap()
}

fn weights() -> impl Strategy<Value = [f64; 4]> {
    (0.1..30.0f64, 0.0..30.0f64, 0.1..30.0f64, 0.0..30.0f64)
        .prop_map(|(a, b, c, d)| [a * NA, b * NA, c * NA, d * NA])
}

fn any_weights() -> impl Strategy<Value = [f64; 4]> {
    (0.0..30.0f64, 0.1..30.0f64, 0.0..30.0f64, 0.1..30.0f64)
        .prop_map(|(a, b, c, d)| [a * NA, b * NA, c * NA, d * NA])
}

fn brute_force(m: &SquidModel, flux: FluxPoint, n: usize) -> f64 {
    (0..n)
        .map(|k| squid_current(m, 4.0 * PI * k as f64 / n as f64, flux).abs())
        .fold(0.0, f64::max)
}

#[test]
fn zero_flux_matches_dense_grid() {
    let m = model([3.0 * NA, 7.0 * NA, 1.5 * NA, 2.0 * NA]);
    let f0 = FluxPoint::from_ratio(0.0);
    let ic = squid_critical_current(&m, f0);
    assert!((ic - brute_force(&m, f0, 1_000_000)).abs() < 1e-12);
}

#[test]
fn mixed_weights_unequal_peak_spacing() {
    let m = model([NA, NA, NA, NA]);
    let xs: Vec<f64> = (0..=1200).map(|i| -3.0 + 0.005 * i as f64).collect();
    let ic: Vec<f64> = xs
        .iter()
        .map(|&r| squid_critical_current(&m, FluxPoint::from_ratio(r)))
        .collect();
    let peaks = squidkit_core::analysis::peaks::local_maxima(&xs, &ic);
    let spacing: Vec<f64> = peaks.windows(2).map(|w| w[1] - w[0]).collect();
    assert!(spacing.len() >= 3, "{peaks:?}");
    let alternation = spacing
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    // spacing differences measured against the 2Φ₀ period
    assert!(alternation > 0.01 * 2.0, "{spacing:?}");
}

#[test]
fn single_4pi_junction_stays_flux_quantum_periodic() {
    for w in [
        [0.0, 1.0, 1.0, 1.0],
        [1.0, 1.0, 0.0, 1.0],
        [0.0, 0.5, 2.0, 0.3],
    ] {
        let m = model(w.map(|v| v * NA));
        for k in 0..100 {
            let r = -1.0 + 0.02 * k as f64;
            let a = squid_critical_current(&m, FluxPoint::from_ratio(r));
            let b = squid_critical_current(&m, FluxPoint::from_ratio(r + 1.0));
            assert!(
                (a - b).abs() < 1e-12 * NA.max(a),
                "{w:?} at {r}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn pure_2pi_asymmetric_is_flux_quantum_periodic() {
    let m = model([0.0, 3.0 * NA, 0.0, 1.2 * NA]);
    for k in 0..200 {
        let r = -2.0 + 0.02 * k as f64;
        let a = squid_critical_current(&m, FluxPoint::from_ratio(r));
        let b = squid_critical_current(&m, FluxPoint::from_ratio(r + 1.0));
        assert!((a - b).abs() < 1e-12, "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expanded_form_agrees(w in any_weights(), phi in -20.0..20.0f64, r in -3.0..3.0f64) {
        let m = model(w);
        let f = FluxPoint::from_ratio(r);
        let a = squid_current(&m, phi, f);
        let b = squid_current_expanded(&m, phi, f);
        prop_assert!((a - b).abs() <= 1e-14 * m.weight_sum());
    }

    #[test]
    fn even_in_flux(w in any_weights(), r in 0.0..2.0f64) {
        let m = model(w);
        let a = squid_critical_current(&m, FluxPoint::from_ratio(r));
        let b = squid_critical_current(&m, FluxPoint::from_ratio(-r));
        prop_assert!((a - b).abs() < 1e-12 * m.weight_sum() + 1e-24);
    }

    #[test]
    fn bounded_by_weight_sum(w in any_weights(), r in -2.0..2.0f64) {
        let m = model(w);
        let ic = squid_critical_current(&m, FluxPoint::from_ratio(r));
        prop_assert!(ic >= 0.0);
        prop_assert!(ic <= m.weight_sum() * (1.0 + 1e-15));
    }

    #[test]
    fn scaling_is_linear(w in any_weights(), r in -1.0..1.0f64, lambda in 0.01..100.0f64) {
        let m = model(w);
        let f = FluxPoint::from_ratio(r);
        let a = critical_point(&m, f, DEFAULT_PHASE_GRID);
        let b = critical_point(&m.scaled(lambda), f, DEFAULT_PHASE_GRID);
        prop_assert!((b.i_c - lambda * a.i_c).abs() <= 1e-12 * lambda * a.i_c.max(1e-3 * m.weight_sum()));
        // the maximizer may jump between equal maxima; compare currents there
        let at = squid_current(&m, b.phi1, f).abs();
        prop_assert!((at - a.i_c).abs() <= 1e-12 * m.weight_sum());
    }

    #[test]
    fn two_flux_quantum_periodic(w in weights(), r in -1.0..1.0f64) {
        let m = model(w);
        let a = squid_critical_current(&m, FluxPoint::from_ratio(r));
        let b = squid_critical_current(&m, FluxPoint::from_ratio(r + 2.0));
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn both_4pi_breaks_flux_quantum_periodicity(w in weights()) {
        let m = model(w);
        let i0 = squid_critical_current(&m, FluxPoint::from_ratio(0.0));
        let worst = (0..200)
            .map(|k| {
                let r = k as f64 / 200.0;
                let a = squid_critical_current(&m, FluxPoint::from_ratio(r));
                let b = squid_critical_current(&m, FluxPoint::from_ratio(r + 1.0));
                (a - b).abs()
            })
            .fold(0.0, f64::max);
        prop_assert!(worst > 1e-3 * i0, "{worst} vs {i0}");
    }
}

#[test]
fn brute_force_on_random_models() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..30.0) * NA);
        let m = model(w);
        let f = FluxPoint::from_ratio(rng.random_range(-2.0..2.0));
        let ic = squid_critical_current(&m, f);
        let bf = brute_force(&m, f, 1_000_000);
        assert!((ic - bf).abs() < 1e-12, "{w:?}: {ic} vs {bf}");
        assert!(ic >= bf);
    }
}
