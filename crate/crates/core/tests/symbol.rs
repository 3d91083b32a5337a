use nlscatter::symbol::{certify_classes, cone_threshold, ConeMode, Monotonicity, SymbolSpec, Tabulated};
use proptest::prelude::*;

fn smooth_symbols() -> impl Strategy<Value = SymbolSpec<f64>> {
    prop_oneof![
        (0.05f64..1.5).prop_map(|rho| SymbolSpec::fractional(rho).unwrap()),
        (0.0f64..3.0).prop_map(|m| SymbolSpec::relativistic(m).unwrap()),
        Just(SymbolSpec::Logarithmic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_matches_centered_difference(spec in smooth_symbols(), sigma in 0.01f64..100.0) {
        let h = 1e-5 * sigma;
        let fd = (spec.eval_psi(sigma + h).unwrap() - spec.eval_psi(sigma - h).unwrap()) / (2.0 * h);
        let d = spec.eval_psi_prime(sigma).unwrap();
        prop_assert!((fd - d).abs() <= 1e-6 * (1.0 + d.abs()), "fd {fd} vs {d}");
    }

    #[test]
    fn envelope_is_derivative_times_momentum(spec in smooth_symbols(), s in 0.01f64..10.0) {
        prop_assert_eq!(spec.group_speed_envelope(s).unwrap(), spec.eval_psi_prime(s * s).unwrap() * s);
    }

    #[test]
    fn fractional_monotonicity_rule(rho in 0.05f64..2.0) {
        prop_assume!((rho - 0.5).abs() > 1e-3);
        let r = certify_classes(&SymbolSpec::fractional(rho).unwrap(), (0.1, 10.0), 128, 1).unwrap();
        prop_assert!(!r.envelope_constant);
        prop_assert_eq!(r.envelope_increasing(), rho > 0.5);
        prop_assert_eq!(r.envelope_decreasing(), rho < 0.5);
    }

    #[test]
    fn inf_threshold_is_smallest(rho in 0.05f64..1.5, eps in 0.2f64..2.0, width in 0.1f64..3.0) {
        let spec = SymbolSpec::fractional(rho).unwrap();
        let r = eps + width;
        let inf = cone_threshold(&spec, eps, r, ConeMode::Inf).unwrap().speed;
        for mode in [ConeMode::Increasing, ConeMode::Decreasing] {
            if let Ok(t) = cone_threshold(&spec, eps, r, mode) {
                prop_assert!(inf <= t.speed * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn square_root_envelope_is_both_directions() {
    let r = certify_classes(&SymbolSpec::fractional(0.5).unwrap(), (0.1, 10.0), 256, 4).unwrap();
    assert!(r.envelope_constant);
    assert!(r.envelope_increasing() && r.envelope_decreasing());
    assert_eq!(r.psi_prime_sigma_monotone, Monotonicity::Increasing);
}

#[test]
fn tabulated_symbols_round_trip_through_json() {
    let t = Tabulated::new(vec![(0.0, 0.0), (1.0, 1.0), (4.0, 2.0)], None).unwrap();
    let spec = SymbolSpec::Tabulated(t);
    let text = serde_json::to_string(&spec).unwrap();
    let back: SymbolSpec<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    assert!(serde_json::from_str::<SymbolSpec<f64>>(r#"{"kind":"fractional","rho":0.5,"extra":1}"#).is_err());
}

#[test]
fn single_precision_symbols() {
    let s = SymbolSpec::fractional(0.5f32).unwrap();
    assert!((s.eval_psi(4.0).unwrap() - 2.0).abs() < 1e-6);
}
