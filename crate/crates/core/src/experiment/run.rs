use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::config::{Diagnostic, ExperimentConfig};
use crate::diagnostics::{
    cauchy_gap_series, cone_mass_series_at_speed, cook_integrand_series, divergence_witness,
    heisenberg_norm_series, pairing_lower_check, lemma2_upper_check, log_bound_check, outside_mass_check,
    pairing_series, propagation_estimate_series, witness_drift, BoundConstants, TimeSeries,
};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionParams, FreeEvolver};
use crate::lattice::{make_annulus_packet, Lattice, WavePacket, TAIL_MASS_LIMIT};
use crate::potential::PotentialSpec;
use crate::spectrum::{flat_band_eigen_demo, spectrum_report};
use crate::symbol::certify_classes;

const SPECTRUM_SAMPLES: usize = 4096;
const DEFAULT_SPECTRUM_RANGE: (f64, f64) = (1e-4, 1e4);

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub out_dir: PathBuf,
    pub csv_files: Vec<PathBuf>,
    pub report: PathBuf,
    pub verdicts: Vec<Verdict>,
}

impl ReportBundle {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }
}

/// 2 for errors raised by validation, 3 for everything else.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_validation() {
        2
    } else {
        3
    }
}

/// Shared state for one configured experiment.
pub(crate) struct Setup {
    pub lattice: Arc<Lattice<f64>>,
    pub phi: WavePacket<f64>,
    pub constants: BoundConstants<f64>,
    pub hash: String,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let lattice = Lattice::new(cfg.grid)?;
        let phi = make_annulus_packet(&lattice, &cfg.packet)?;
        let direction = cfg.resolved_direction()?;
        let (kappa, gamma_l) = match cfg.potential {
            Some(PotentialSpec::LongRange { kappa, gamma }) => (kappa, gamma),
            Some(ref v) => (v.amplitude(), 1.0),
            None => (0.0, 1.0),
        };
        let constants = BoundConstants::compute(
            &cfg.symbol,
            cfg.packet.eps,
            cfg.packet.r,
            cfg.grid.dim,
            direction,
            kappa,
            gamma_l,
            cfg.n,
        )?;
        Ok(Setup {
            lattice,
            phi,
            constants,
            hash: cfg.params_hash(),
        })
    }
}

/// Fit window from the config, else the series default.
pub(crate) fn fit_series(series: &mut TimeSeries<f64>, window: Option<(f64, f64)>) -> String {
    let Some(w) = window.or_else(|| series.default_window()) else {
        return "fit skipped: no window".into();
    };
    match series.fit_window(w) {
        Ok(Some(f)) => format!(
            "fit exponent = {:.6} prefactor = {:.6e} r2 = {:.6} window = [{}, {}]",
            f.exponent, f.prefactor, f.r_squared, w.0, w.1
        ),
        Ok(None) => format!("fit refused on [{}, {}]", w.0, w.1),
        Err(e) => format!("fit refused: {e}"),
    }
}

pub(crate) fn write_series(series: &TimeSeries<f64>, hash: &str, path: &Path) -> Result<()> {
    let file = BufWriter::new(fs::File::create(path)?);
    series.write_csv(hash, file)
}

fn exponent(series: &TimeSeries<f64>) -> Option<f64> {
    series.fit().map(|f| f.exponent)
}

struct Outcome {
    series: Option<TimeSeries<f64>>,
    lines: Vec<String>,
    verdict: Verdict,
}

fn verdict(d: Diagnostic, passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        name: d.as_str().into(),
        passed,
        detail: detail.into(),
    }
}

fn run_one(cfg: &ExperimentConfig, setup: &Setup, d: Diagnostic) -> Result<Outcome> {
    let tol = &cfg.tolerances;
    let times = cfg.times();
    let phi = &setup.phi;
    let norm = phi.norm();
    let mut lines = Vec::new();
    let params = || EvolutionParams::new(cfg.symbol.clone(), cfg.potential, cfg.dt);
    let (series, verdict) = match d {
        Diagnostic::CookIntegrand => {
            let mut s = cook_integrand_series(phi, &cfg.symbol, cfg.potential.as_ref(), &times)?;
            let v = match &cfg.potential {
                None => {
                    let max = s.values().fold(0.0, f64::max);
                    verdict(d, max <= tol.trivial, format!("V = 0, max value {max:e}"))
                }
                Some(pot) => {
                    lines.push(fit_series(&mut s, cfg.fit_window));
                    let gamma = pot.gamma();
                    match exponent(&s) {
                        Some(e) => {
                            let convergent = e < -1.0 - tol.exponent;
                            let expected = gamma > 1.0;
                            let ok = (e + gamma).abs() <= tol.exponent && convergent == expected;
                            verdict(
                                d,
                                ok,
                                format!(
                                    "exponent {e:.4} vs -{gamma}, classified {}",
                                    if convergent { "convergent" } else { "divergent" }
                                ),
                            )
                        }
                        None => verdict(d, false, "no exponent fit"),
                    }
                }
            };
            (Some(s), v)
        }
        Diagnostic::ConeMassInside => {
            let (mut s, speed) = match cfg.cone_speed {
                Some(v) => (cone_mass_series_at_speed(phi, &cfg.symbol, v, &times)?, v),
                None => (
                    propagation_estimate_series(
                        phi,
                        &cfg.symbol,
                        setup.constants.direction.cone_mode(),
                        cfg.packet.eps,
                        cfg.packet.r,
                        &times,
                    )?,
                    setup.constants.threshold,
                ),
            };
            lines.push(format!("cone speed = {speed}"));
            let v = if cfg.cone_speed.is_some() {
                let retained = s.values().fold(f64::INFINITY, f64::min).powi(2) / (norm * norm);
                verdict(d, retained >= tol.cone_retained, format!("min retained mass fraction {retained:.6}"))
            } else {
                lines.push(fit_series(&mut s, cfg.fit_window));
                let power = cfg.n.min(tol.max_cone_power) as f64;
                match exponent(&s) {
                    Some(e) => verdict(d, e <= -power, format!("exponent {e:.4} vs <= -{power}")),
                    None => verdict(d, false, "no exponent fit"),
                }
            };
            (Some(s), v)
        }
        Diagnostic::CauchyGap => {
            let mut s = cauchy_gap_series(phi, &params()?, &cfg.pairs())?;
            let v = match &cfg.potential {
                None => {
                    let max = s.values().fold(0.0, f64::max);
                    verdict(d, max <= tol.trivial, format!("V = 0, max gap {max:e}"))
                }
                Some(pot) if !pot.is_long_range() => {
                    lines.push(fit_series(&mut s, cfg.fit_window));
                    let expected = 1.0 - pot.gamma();
                    match exponent(&s) {
                        Some(e) => verdict(d, (e - expected).abs() <= tol.gap_slope, format!("slope {e:.4} vs {expected}")),
                        None => verdict(d, false, "no slope fit"),
                    }
                }
                Some(_) => {
                    lines.push(fit_series(&mut s, cfg.fit_window));
                    let w = cfg.fit_window.or_else(|| s.default_window()).unwrap_or((0.0, f64::INFINITY));
                    let inside: Vec<f64> = s
                        .samples()
                        .iter()
                        .filter(|p| p.0 >= w.0 && p.0 <= w.1)
                        .map(|p| p.1)
                        .collect();
                    let ok = inside.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-6));
                    verdict(d, ok, format!("gap non-decreasing on [{}, {}]: {ok}", w.0, w.1))
                }
            };
            (Some(s), v)
        }
        Diagnostic::Pairing => {
            let pot = cfg.potential.as_ref().expect("validated");
            let mut s = pairing_series(phi, &cfg.symbol, pot, &times)?;
            lines.push(fit_series(&mut s, cfg.fit_window));
            let check = pairing_lower_check(&s, &setup.constants, norm, phi.x_norm());
            let v = verdict(
                d,
                check.holds,
                format!("lower bound worst margin {:e} at t = {}", check.worst_margin, check.worst_t),
            );
            (Some(s), v)
        }
        Diagnostic::OutsideMass => {
            let check = outside_mass_check(phi, &cfg.symbol, &setup.constants, &times)?;
            let v = verdict(
                d,
                check.holds,
                format!("worst margin {:e} at t = {}", check.worst_margin, check.worst_t),
            );
            (None, v)
        }
        Diagnostic::Lemma2 => {
            let pot = cfg.potential.as_ref().expect("validated");
            let calibration = cfg.calibration_window.unwrap_or((times[0], 3.0 * times[0]));
            let report = lemma2_upper_check(phi, &cfg.symbol, pot, &times, cfg.n, setup.constants.c3, calibration)?;
            lines.push(format!("c3 = {} c4 = {}", report.c3, report.c4));
            for (t, v, b) in &report.rows {
                lines.push(format!("t = {t} value = {v:.10e} bound = {b:.10e}"));
            }
            let v = verdict(
                d,
                report.holds,
                format!("worst margin {:e} at t = {}", report.worst_margin, report.worst_t),
            );
            (None, v)
        }
        Diagnostic::HeisenbergNorm => {
            let s = heisenberg_norm_series(phi, &cfg.symbol, &times)?;
            let free = FreeEvolver::new(&setup.lattice, &cfg.symbol)?;
            let x_norm = phi.x_norm();
            let mut bound_ok = true;
            let mut worst_rel: f64 = 0.0;
            for &(t, h) in s.samples() {
                bound_ok &= h * h <= setup.constants.heisenberg_bound(t, norm, x_norm) * (1.0 + 1e-12);
                let evolved = free.evolve(phi, t)?;
                if evolved.tail_fraction() <= TAIL_MASS_LIMIT {
                    worst_rel = worst_rel.max((evolved.x_norm() - h).abs() / h);
                }
            }
            let ok = bound_ok && worst_rel <= tol.heisenberg_relative;
            let v = verdict(d, ok, format!("quadratic bound {bound_ok}, identity worst relative {worst_rel:e}"));
            (Some(s), v)
        }
        Diagnostic::DivergenceWitness => {
            let pot = cfg.potential.as_ref().expect("validated");
            let mut s = divergence_witness(phi, &params()?, &times)?;
            let t_max = times[times.len() - 1];
            let v = if !pot.is_long_range() {
                let w = cfg
                    .drift_window
                    .unwrap_or(if t_max > 20.0 { (20.0, t_max) } else { (times[0], t_max) });
                let drift = witness_drift(&s, w)?;
                let limit = tol.witness_drift * norm * norm;
                verdict(d, drift <= limit, format!("drift {drift:e} on [{}, {}] vs {limit}", w.0, w.1))
            } else if pot.gamma() < 1.0 {
                lines.push(fit_series(&mut s, cfg.fit_window));
                let expected = 1.0 - pot.gamma();
                match exponent(&s) {
                    Some(e) => verdict(
                        d,
                        (e - expected).abs() <= tol.witness_growth,
                        format!("growth {e:.4} vs {expected}"),
                    ),
                    None => verdict(d, false, "no growth fit"),
                }
            } else {
                let w = cfg.fit_window.or_else(|| s.default_window()).unwrap_or((times[0], t_max));
                let r = log_bound_check(&s, &setup.constants, norm, w)?;
                lines.push(format!("log slope = {} scale = {}", r.log_slope, r.scale));
                verdict(d, r.holds, format!("min increment ratio {:.4} vs 1", r.min_ratio))
            };
            (Some(s), v)
        }
        Diagnostic::FlatBandDemo => {
            let demo = flat_band_eigen_demo(&cfg.symbol, &setup.lattice)?;
            for (t, e) in &demo.defects {
                lines.push(format!("t = {t} defect = {e:e}"));
            }
            let ok = demo.defect <= tol.trivial && demo.mode_count >= crate::spectrum::MIN_SHELL_MODES;
            let v = verdict(d, ok, format!("defect {:e} with {} modes", demo.defect, demo.mode_count));
            (None, v)
        }
    };
    Ok(Outcome {
        series,
        lines,
        verdict,
    })
}

pub(crate) fn header_blocks(cfg: &ExperimentConfig, setup: &Setup) -> Result<String> {
    let mut text = String::new();
    let _ = writeln!(text, "params_hash = {}", setup.hash);
    if let Some(name) = &cfg.name {
        let _ = writeln!(text, "name = {name}");
    }
    let classes = certify_classes(&cfg.symbol, (cfg.packet.eps, cfg.packet.r), 256, 4)?;
    let _ = writeln!(text, "\n[class_report]\n{}", classes.to_text_block().trim_end());
    let range = cfg.spectrum_range.unwrap_or(DEFAULT_SPECTRUM_RANGE);
    let spectrum = spectrum_report(&cfg.symbol, range, SPECTRUM_SAMPLES)?;
    let _ = writeln!(text, "\n[spectrum]\n{}", spectrum.to_text_block().trim_end());
    let _ = writeln!(text, "\n[bound_constants]\n{}", setup.constants.to_text_block().trim_end());
    let _ = writeln!(text, "\n[packet]\nnorm = {}\nx_norm = {}", setup.phi.norm(), setup.phi.x_norm());
    Ok(text)
}

/// Runs every configured diagnostic and writes CSVs and `report.txt` to `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ReportBundle> {
    let setup = Setup::new(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut text = header_blocks(cfg, &setup)?;
    let mut csv_files = Vec::new();
    let mut verdicts = Vec::new();
    for &d in &cfg.diagnostics {
        log::info!("running {}", d.as_str());
        let outcome = run_one(cfg, &setup, d)?;
        let _ = writeln!(text, "\n[{}]", d.as_str());
        for l in &outcome.lines {
            let _ = writeln!(text, "{l}");
        }
        let v = &outcome.verdict;
        let _ = writeln!(text, "verdict = {} ({})", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        if let Some(s) = &outcome.series {
            let path = out_dir.join(format!("{}.csv", d.as_str()));
            write_series(s, &setup.hash, &path)?;
            csv_files.push(path);
        }
        verdicts.push(outcome.verdict);
    }
    let passed = verdicts.iter().filter(|v| v.passed).count();
    let _ = writeln!(text, "\n[summary]\npassed = {passed}/{}", verdicts.len());
    let report = out_dir.join("report.txt");
    fs::write(&report, text)?;
    Ok(ReportBundle {
        out_dir: out_dir.to_path_buf(),
        csv_files,
        report,
        verdicts,
    })
}
