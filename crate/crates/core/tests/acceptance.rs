//! One test per acceptance criterion; each prints a PASS/FAIL line with the
//! measured numbers before asserting.

use std::sync::Arc;

use nlscatter::diagnostics::{
    cauchy_gap_series, cone_mass_series_at_speed, cook_integrand_series, divergence_witness, fit_exponent,
    pairing_lower_check, log_bound_check, outside_mass_check, pairing_series, propagation_estimate_series,
    witness_drift, BoundConstants, Direction, TimeSeries,
};
use nlscatter::evolution::{heisenberg_position, heisenberg_quadratic_bound, EvolutionParams, FreeEvolver, SplitStepper};
use nlscatter::experiment::{replay, run, ExperimentConfig};
use nlscatter::lattice::{make_annulus_packet, AnnulusSpec, GridSpec, Lattice, WavePacket, TAIL_MASS_LIMIT};
use nlscatter::potential::PotentialSpec;
use nlscatter::spectrum::{flat_band_eigen_demo, shell_stationarity_defect, spectral_interval};
use nlscatter::symbol::{certify_classes, max_group_speed, ConeMode, SymbolSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    println!("{} criterion {n} ({name}): {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn packet(m: usize, l: f64, eps: f64, r: f64, c: f64) -> WavePacket<f64> {
    let lat = Lattice::new(GridSpec::new(1, m, l).unwrap()).unwrap();
    make_annulus_packet(&lat, &AnnulusSpec::new(eps, r, vec![c], 0.5)).unwrap()
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn fitted(series: &TimeSeries<f64>, window: (f64, f64)) -> Option<(f64, f64)> {
    fit_exponent(series, window).ok().flatten().map(|f| (f.exponent, f.r_squared))
}

fn potential_for(gamma: f64, amplitude: f64) -> PotentialSpec<f64> {
    if gamma > 1.0 {
        PotentialSpec::short_range(amplitude, gamma).unwrap()
    } else {
        PotentialSpec::long_range(amplitude, gamma).unwrap()
    }
}

#[test]
fn criterion_1_unitarity_and_group_law() {
    let phi = packet(4096, 200.0, 0.5, 2.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_norm: f64 = 0.0;
    let mut worst_group: f64 = 0.0;
    for rho in [0.25, 0.5, 1.0] {
        let free = FreeEvolver::new(phi.lattice(), &SymbolSpec::fractional(rho).unwrap()).unwrap();
        for _ in 0..20 {
            let t: f64 = rng.random_range(0.0..100.0);
            let s: f64 = rng.random_range(0.0..100.0);
            let a = free.evolve(&phi, t).unwrap();
            worst_norm = worst_norm.max((a.norm() / phi.norm() - 1.0).abs());
            let ab = free.evolve(&a, s).unwrap();
            let direct = free.evolve(&phi, t + s).unwrap();
            worst_group = worst_group.max(ab.sub(&direct).unwrap().norm() / phi.norm());
        }
    }
    verdict(
        1,
        "unitarity and group law",
        worst_norm <= 1e-10 && worst_group <= 1e-10,
        &format!("max |norm ratio - 1| = {worst_norm:.2e}, max additivity defect = {worst_group:.2e}"),
    );
}

#[test]
fn criterion_2_heisenberg_identity() {
    let mut worst_rel: f64 = 0.0;
    let mut checked = 0;
    let mut bound_ok = true;
    for rho in [0.5, 1.0] {
        let phi = packet(8192, 400.0, 1.0, 2.0, 1.5);
        let symbol = SymbolSpec::fractional(rho).unwrap();
        let free = FreeEvolver::new(phi.lattice(), &symbol).unwrap();
        let env = symbol.group_speed_envelope(2.0).unwrap();
        let (norm, x_norm) = (phi.norm(), phi.x_norm());
        for t in linspace(0.0, 60.0, 13) {
            let h = heisenberg_position(&phi, &symbol, t).unwrap().norm;
            bound_ok &= h * h <= heisenberg_quadratic_bound(x_norm, norm, 1, t, env) * (1.0 + 1e-12);
            let evolved = free.evolve(&phi, t).unwrap();
            if evolved.tail_fraction() <= TAIL_MASS_LIMIT {
                checked += 1;
                worst_rel = worst_rel.max((evolved.x_norm() - h).abs() / h);
            }
        }
    }
    verdict(
        2,
        "Heisenberg identity",
        worst_rel <= 1e-6 && bound_ok && checked >= 10,
        &format!("worst relative mismatch {worst_rel:.2e} over {checked} central-box times, quadratic bound holds: {bound_ok}"),
    );
}

#[test]
fn criterion_3_cone_decay() {
    let times = geomspace(10.0, 60.0, 16);
    let window = (10.0, 60.0);
    let cases = [
        ("rho=1 increasing", 1.0, 8192, 1024.0, (1.0, 2.0, 1.5), ConeMode::Increasing),
        ("rho=1/4 decreasing", 0.25, 8192, 25.0, (32.0, 64.0, 48.0), ConeMode::Decreasing),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, rho, m, l, (eps, r, c), mode) in cases {
        let symbol = SymbolSpec::fractional(rho).unwrap();
        let phi = packet(m, l, eps, r, c);
        let s = propagation_estimate_series(&phi, &symbol, mode, eps, r, &times).unwrap();
        let fit = fitted(&s, window);
        let ok = fit.is_some_and(|(e, r2)| e <= -4.0 && r2 >= 0.9);
        pass &= ok;
        detail.push(match fit {
            Some((e, r2)) => format!("{name}: exponent {e:.3} r2 {r2:.4}"),
            None => format!("{name}: fit refused"),
        });
        let speed = 1.25 * max_group_speed(&symbol, eps, r).unwrap();
        let control = cone_mass_series_at_speed(&phi, &symbol, speed, &times).unwrap();
        let retained = control.values().fold(f64::INFINITY, f64::min).powi(2) / phi.norm_sq();
        pass &= retained >= 0.99;
        detail.push(format!("{name} control retains {retained:.6}"));
    }
    verdict(3, "cone decay", pass, &detail.join("; "));
}

#[test]
fn criterion_4_cook_dichotomy() {
    let phi = packet(16384, 2048.0, 2.0, 4.0, 3.0);
    let symbol = SymbolSpec::fractional(1.0).unwrap();
    let times = geomspace(10.0, 100.0, 16);
    let mut pass = true;
    let mut detail = Vec::new();
    for gamma in [0.5, 0.8, 1.0, 1.5, 2.0] {
        let v = potential_for(gamma, 1.0);
        let s = cook_integrand_series(&phi, &symbol, Some(&v), &times).unwrap();
        match fitted(&s, (10.0, 100.0)) {
            Some((e, _)) => {
                let convergent = e < -1.1;
                let ok = (e + gamma).abs() <= 0.1 && convergent == (gamma > 1.0);
                pass &= ok;
                detail.push(format!(
                    "gamma {gamma}: {e:.4} {}",
                    if convergent { "convergent" } else { "divergent" }
                ));
            }
            None => {
                pass = false;
                detail.push(format!("gamma {gamma}: fit refused"));
            }
        }
    }
    verdict(4, "Cook dichotomy", pass, &detail.join(", "));
}

#[test]
fn criterion_5_pairing_lower_bound() {
    let times = geomspace(1.0, 100.0, 32);
    let cases = [
        ("rho=1", 1.0, 8192, 1024.0, Direction::Increasing),
        ("rho=1/4", 0.25, 8192, 256.0, Direction::Decreasing),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, rho, m, l, direction) in cases {
        let symbol = SymbolSpec::fractional(rho).unwrap();
        let phi = packet(m, l, 1.0, 2.0, 1.5);
        for gamma in [0.5, 1.0] {
            let v = PotentialSpec::long_range(1.0, gamma).unwrap();
            let b = BoundConstants::compute(&symbol, 1.0, 2.0, 1, direction, 1.0, gamma, 2).unwrap();
            let p = pairing_series(&phi, &symbol, &v, &times).unwrap();
            let lower = pairing_lower_check(&p, &b, phi.norm(), phi.x_norm());
            let outside = outside_mass_check(&phi, &symbol, &b, &times).unwrap();
            pass &= lower.holds && outside.holds;
            detail.push(format!(
                "{name} gammaL {gamma} Gamma {}: pairing margin {:.2e}, outside-mass margin {:.2e}",
                b.gamma_cap, lower.worst_margin, outside.worst_margin
            ));
        }
    }
    verdict(5, "pairing lower bound", pass, &detail.join("; "));
}

#[test]
fn criterion_6_cauchy_divergence_dichotomy() {
    let phi = packet(8192, 2048.0, 2.0, 4.0, 3.0);
    let symbol = SymbolSpec::fractional(1.0).unwrap();
    let norm_sq = phi.norm_sq();
    let params = |v: PotentialSpec<f64>| EvolutionParams::new(symbol.clone(), Some(v), 0.1).unwrap();
    let mut detail = Vec::new();

    let short = params(PotentialSpec::short_range(0.5, 1.5).unwrap());
    let starts: Vec<f64> = geomspace(10.0, 50.0, 9).iter().map(|t| (t * 10.0).round() / 10.0).collect();
    let pairs: Vec<(f64, f64)> = starts.iter().map(|&t| (t, 2.0 * t)).collect();
    let gaps = cauchy_gap_series(&phi, &short, &pairs).unwrap();
    let slope = fitted(&gaps, (10.0, 50.0));
    let slope_ok = slope.is_some_and(|(e, _)| (e + 0.5).abs() <= 0.15);
    detail.push(format!("gap slope {:?}", slope.map(|s| s.0)));

    let mut grid = vec![1.0];
    grid.extend(linspace(5.0, 80.0, 16));
    let w_short = divergence_witness(&phi, &short, &grid).unwrap();
    let drift = witness_drift(&w_short, (20.0, 80.0)).unwrap();
    let drift_ok = drift <= 0.05 * norm_sq;
    detail.push(format!("short-range drift {drift:.4}"));

    let half = divergence_witness(&phi, &params(PotentialSpec::long_range(0.05, 0.5).unwrap()), &grid).unwrap();
    let window = half.default_window().unwrap();
    let growth = fitted(&half, window);
    let growth_ok = growth.is_some_and(|(e, _)| (e - 0.5).abs() <= 0.15);
    detail.push(format!("gammaL 0.5 growth {:?}", growth.map(|g| g.0)));

    let one = divergence_witness(&phi, &params(PotentialSpec::long_range(0.05, 1.0).unwrap()), &grid).unwrap();
    let b = BoundConstants::compute(&symbol, 2.0, 4.0, 1, Direction::Increasing, 0.05, 1.0, 2).unwrap();
    let log = log_bound_check(&one, &b, phi.norm(), one.default_window().unwrap()).unwrap();
    detail.push(format!("gammaL 1 increment ratio {:.3}", log.min_ratio));

    verdict(
        6,
        "Cauchy/divergence dichotomy",
        slope_ok && drift_ok && growth_ok && log.holds,
        &detail.join(", "),
    );
}

#[test]
fn criterion_7_spectrum_and_flat_band() {
    let mut pass = true;
    let mut detail = Vec::new();
    for rho in [0.25, 0.5, 1.0, 1.5] {
        let (lo, hi) = spectral_interval(&SymbolSpec::fractional(rho).unwrap()).unwrap();
        pass &= lo == 0.0 && hi == f64::INFINITY;
    }
    detail.push(format!("fractional intervals exact: {pass}"));
    let lattice: Arc<Lattice<f64>> = Lattice::new(GridSpec::new(1, 4096, 200.0).unwrap()).unwrap();
    let flat = SymbolSpec::flat_band(1.0, 2.0, 1.0).unwrap();
    let demo = flat_band_eigen_demo(&flat, &lattice).unwrap();
    pass &= demo.defect <= 1e-10 && demo.mode_count >= 10;
    detail.push(format!("flat-band defect {:.2e} with {} modes", demo.defect, demo.mode_count));
    let control =
        shell_stationarity_defect(&SymbolSpec::fractional(1.0).unwrap(), &lattice, (1.0, 2.0), 1.5, &[10.0]).unwrap();
    pass &= control.defect >= 0.1;
    detail.push(format!("dispersive control defect {:.3}", control.defect));
    verdict(7, "spectrum and flat band", pass, &detail.join(", "));
}

#[test]
fn criterion_8_class_certification() {
    let mut pass = true;
    let mut detail = Vec::new();
    for rho in [0.25, 0.5, 1.0, 1.5] {
        let r = certify_classes(&SymbolSpec::fractional(rho).unwrap(), (0.1, 10.0), 256, 4).unwrap();
        let bernstein_ok = if rho <= 1.0 {
            r.in_b_up_to_order >= 4
        } else {
            r.bernstein_violation.is_some_and(|(k, _)| k == 2)
        };
        let monotone_ok = if rho < 0.5 {
            r.envelope_decreasing() && !r.envelope_constant
        } else if rho == 0.5 {
            r.envelope_constant
        } else {
            r.envelope_increasing() && !r.envelope_constant
        };
        pass &= bernstein_ok && monotone_ok && r.in_tilde_b;
        detail.push(format!(
            "rho {rho}: order {} violation {:?} envelope {}{}",
            r.in_b_up_to_order,
            r.bernstein_violation.map(|v| v.0),
            r.psi_prime_sigma_monotone.as_str(),
            if r.envelope_constant { " (constant)" } else { "" }
        ));
    }
    verdict(8, "class certification", pass, &detail.join("; "));
}

fn richardson_ratios() -> Vec<f64> {
    let phi = packet(4096, 100.0, 1.0, 2.0, 1.5);
    let symbol = SymbolSpec::fractional(1.0).unwrap();
    let v = PotentialSpec::short_range(1.0, 2.0).unwrap();
    let states: Vec<WavePacket<f64>> = [0.04, 0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let params = EvolutionParams::new(symbol.clone(), Some(v), dt).unwrap();
            SplitStepper::new(phi.lattice(), &params).unwrap().evolve(&phi, 4.0).unwrap()
        })
        .collect();
    let diffs: Vec<f64> = states.windows(2).map(|w| w[0].sub(&w[1]).unwrap().norm()).collect();
    diffs.windows(2).map(|d| d[0] / d[1]).collect()
}

fn doubling_exponents(m: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let symbol = SymbolSpec::fractional(1.0).unwrap();
    let cook_phi = packet(m, 2048.0, 2.0, 4.0, 3.0);
    let times = geomspace(10.0, 100.0, 16);
    for gamma in [0.5, 2.0] {
        let s = cook_integrand_series(&cook_phi, &symbol, Some(&potential_for(gamma, 1.0)), &times).unwrap();
        out.push(fitted(&s, (10.0, 100.0)).map_or(f64::NAN, |f| f.0));
    }
    let cone_phi = packet(m, 1024.0, 1.0, 2.0, 1.5);
    let cone_times = geomspace(10.0, 60.0, 16);
    let s = propagation_estimate_series(&cone_phi, &symbol, ConeMode::Increasing, 1.0, 2.0, &cone_times).unwrap();
    out.push(fitted(&s, (10.0, 60.0)).map_or(f64::NAN, |f| f.0));
    let v = PotentialSpec::long_range(1.0, 0.5).unwrap();
    let p = pairing_series(&cone_phi, &symbol, &v, &geomspace(1.0, 100.0, 32)).unwrap();
    out.push(fitted(&p, (10.0, 100.0)).map_or(f64::NAN, |f| f.0));
    out
}

const DETERMINISM_CONFIG: &str = r#"{
  "version": 1,
  "symbol": { "kind": "fractional", "rho": 1.0 },
  "grid": { "dim": 1, "points_per_dim": 4096, "half_length": 400.0 },
  "packet": { "eps": 1.0, "r": 2.0, "center": [1.5], "smoothness": 0.5 },
  "potential": { "family": "long_range", "kappa": 0.5, "gamma": 0.5 },
  "times": { "spacing": "linear", "start": 1.0, "stop": 40.0, "count": 40 },
  "time_pairs": { "doubling": { "spacing": "linear", "start": 1.0, "stop": 20.0, "count": 20 } },
  "diagnostics": ["cook_integrand", "cauchy_gap", "pairing", "divergence_witness"],
  "seed": 11
}"#;

#[test]
fn criterion_9_numerical_robustness() {
    let ratios = richardson_ratios();
    let ratios_ok = ratios.iter().all(|r| (3.5..=4.5).contains(r));

    let coarse = doubling_exponents(8192);
    let fine = doubling_exponents(16384);
    let shifts: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).collect();
    let doubling_ok = shifts.iter().all(|s| *s <= 0.02);

    let cfg = ExperimentConfig::from_json(DETERMINISM_CONFIG).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(&cfg, a.path()).unwrap();
    let rb = run(&cfg, b.path()).unwrap();
    let identical = ra.csv_files.len() == rb.csv_files.len()
        && ra
            .csv_files
            .iter()
            .zip(&rb.csv_files)
            .all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());
    let replayed = replay(a.path()).unwrap();
    let replay_ok = replayed.iter().all(|e| e.identical()) && replayed.iter().any(|e| e.original.is_some());

    verdict(
        9,
        "numerical robustness",
        ratios_ok && doubling_ok && identical && replay_ok,
        &format!(
            "Richardson ratios {ratios:.3?}, exponent shifts under grid doubling {shifts:.4?}, byte-identical reruns {identical}, replay bit-stable {replay_ok}"
        ),
    );
}
