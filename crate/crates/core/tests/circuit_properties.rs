use proptest::prelude::*;
use squidkit_core::circuit::*;

#[test]
fn low_power_chain() {
    let t = TransmonParams::from_dispersive_shift(-10e6, 116e6, 4.945e9, 87e-15).unwrap();
    assert!((t.f_t - 6.2906e9).abs() < 1e3);
    assert!((t.e_c_over_h - 222.646e6).abs() < 1e3);
    assert!((t.e_j_over_h / 22.2166536e9 - 1.0).abs() < 1e-8);
    assert!((t.i_c / 44.7300004e-9 - 1.0).abs() < 1e-8);
    let t1 = purcell_t1(t.f_t - 4.945e9, 20e6, 116e6).unwrap();
    assert!((t1 / 1.07079446e-6 - 1.0).abs() < 1e-7);
}

proptest! {
    #[test]
    fn josephson_round_trip(f_t in 1e6..5e10f64, e_c in 1e6..1e9f64) {
        let ej = invert_josephson_energy(f_t, e_c).unwrap();
        let back = transmon_frequency(ej, e_c).unwrap();
        prop_assert!((back - f_t).abs() <= 1e-12 * f_t);
    }

    #[test]
    fn shift_round_trip(g in 1e6..5e8f64, f_ref in 1e9..1e10f64, off in 0.1e9..5e9f64, above in any::<bool>()) {
        let f_t = if above { f_ref + off } else { f_ref - off };
        prop_assume!(f_t > 0.0);
        let chi = dispersive_shift(g, f_ref, f_t).unwrap();
        prop_assert_eq!(chi < 0.0, above);
        let back = infer_ft_from_shift(chi, g, f_ref).unwrap();
        prop_assert!((back - f_t).abs() <= 1e-9 * f_t);
    }

    #[test]
    fn current_energy_inverse(i_c in 1e-12..1e-3f64) {
        prop_assert!((critical_current(josephson_energy(i_c)) - i_c).abs() <= 1e-14 * i_c);
    }

    #[test]
    fn charging_energy_inverse_in_capacitance(c in 1e-16..1e-12f64, k in 1.1..10.0f64) {
        let r = charging_energy(c).unwrap() / charging_energy(k * c).unwrap();
        prop_assert!((r - k).abs() <= 1e-12 * k);
    }
}
