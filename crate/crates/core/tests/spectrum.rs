use nlscatter::spectrum::{detect_zero_set, spectral_interval, ZeroSetKind};
use nlscatter::symbol::{SymbolSpec, Tabulated};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interval_invariant_under_rescaling(c in 0.1f64..10.0) {
        let knots = vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.8), (5.0, 1.0)];
        let scaled: Vec<(f64, f64)> = knots.iter().map(|&(s, v)| (s * c, v)).collect();
        let a = spectral_interval(&SymbolSpec::Tabulated(Tabulated::new(knots, None).unwrap())).unwrap();
        let b = spectral_interval(&SymbolSpec::Tabulated(Tabulated::new(scaled, None).unwrap())).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn flat_band_edges_converge() {
    let s = SymbolSpec::flat_band(1.3f64, 2.7, 0.5).unwrap();
    match detect_zero_set(&s, (0.5, 4.0), 256).unwrap() {
        ZeroSetKind::ContainsInterval(lo, hi) => {
            assert!((lo - 1.3).abs() < 1e-9, "{lo}");
            assert!((hi - 2.7).abs() < 1e-9, "{hi}");
        }
        other => panic!("expected an interval, got {other:?}"),
    }
}
