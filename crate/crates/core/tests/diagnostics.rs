use nlscatter::diagnostics::{fit_exponent, Quantity, TimeSeries};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_power_laws_are_recovered(exponent in -6.0f64..3.0, prefactor in 1e-3f64..1e3, n in 8usize..60) {
        let samples = (0..n)
            .map(|i| {
                let t = 10f64.powf(2.0 * i as f64 / (n - 1) as f64);
                (t, prefactor * t.powf(exponent))
            })
            .collect();
        let s = TimeSeries::new(Quantity::CookIntegrand, samples).unwrap();
        let f = fit_exponent(&s, (1.0, 100.0)).unwrap().unwrap();
        prop_assert!((f.exponent - exponent).abs() < 1e-9);
        prop_assert!((f.prefactor / prefactor - 1.0).abs() < 1e-8);
    }

    #[test]
    fn csv_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..50), hash in "[0-9a-f]{16}") {
        let samples: Vec<(f64, f64)> = values.iter().enumerate().map(|(i, &v)| (0.1 + i as f64 * 0.37, v)).collect();
        let s = TimeSeries::new(Quantity::Pairing, samples).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&hash, &mut buf).unwrap();
        let (back, h) = TimeSeries::<f64>::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(h, hash);
        prop_assert_eq!(back, s);
    }
}

#[test]
fn quantity_names_round_trip() {
    for q in Quantity::ALL {
        assert_eq!(q.as_str().parse::<Quantity>().unwrap(), q);
    }
    assert!("bogus".parse::<Quantity>().is_err());
}
