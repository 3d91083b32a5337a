use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::run::{fit_series, header_blocks, write_series, ReportBundle, Setup, Verdict};
use crate::diagnostics::{cauchy_gap_series, cook_integrand_series, TimeSeries};
use crate::error::{Error, Result};
use crate::evolution::EvolutionParams;
use crate::potential::PotentialSpec;

/// One row of the short/long-range phase table.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub gamma: f64,
    pub family: &'static str,
    pub cook_exponent: Option<f64>,
    pub convergent: bool,
    pub gap_slope: Option<f64>,
    pub gaps_shrinking: bool,
    pub expected_convergent: bool,
    pub passed: bool,
}

struct PointResult {
    row: PhaseRow,
    cook: TimeSeries<f64>,
    gaps: TimeSeries<f64>,
    notes: Vec<String>,
}

fn sweep_potential(gamma: f64, amplitude: f64) -> Result<PotentialSpec<f64>> {
    if gamma > 1.0 {
        PotentialSpec::short_range(amplitude.abs(), gamma)
    } else {
        PotentialSpec::long_range(amplitude, gamma)
    }
}

fn run_point(cfg: &ExperimentConfig, setup: &Setup, gamma: f64, amplitude: f64) -> Result<PointResult> {
    let tol = &cfg.tolerances;
    let potential = sweep_potential(gamma, amplitude)?;
    let mut cook = cook_integrand_series(&setup.phi, &cfg.symbol, Some(&potential), &cfg.times())?;
    let params = EvolutionParams::new(cfg.symbol.clone(), Some(potential), cfg.dt)?;
    let mut gaps = cauchy_gap_series(&setup.phi, &params, &cfg.pairs())?;
    let notes = vec![fit_series(&mut cook, cfg.fit_window), fit_series(&mut gaps, cfg.fit_window)];
    let cook_exponent = cook.fit().map(|f| f.exponent);
    let gap_slope = gaps.fit().map(|f| f.exponent);
    let convergent = cook_exponent.is_some_and(|e| e < -1.0 - tol.exponent);
    let gaps_shrinking = gap_slope.is_some_and(|s| s < -tol.gap_shrink_slope);
    let expected_convergent = gamma > 1.0;
    let passed = cook_exponent.is_some_and(|e| (e + gamma).abs() <= tol.exponent)
        && convergent == expected_convergent
        && gaps_shrinking == expected_convergent;
    Ok(PointResult {
        row: PhaseRow {
            gamma,
            family: potential.family_name(),
            cook_exponent,
            convergent,
            gap_slope,
            gaps_shrinking,
            expected_convergent,
            passed,
        },
        cook,
        gaps,
        notes,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"))
}

/// Sweeps the decay exponent over `cfg.sweep.gammas` on a pool of `workers` threads.
pub fn threshold_sweep(cfg: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<(ReportBundle, Vec<PhaseRow>)> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "threshold-sweep needs a `sweep` block"))?;
    let setup = Setup::new(cfg)?;
    fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let results: Vec<PointResult> = pool.install(|| {
        sweep
            .gammas
            .par_iter()
            .map(|&g| run_point(cfg, &setup, g, sweep.amplitude))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut text = header_blocks(cfg, &setup)?;
    let mut csv_files = Vec::new();
    let mut verdicts = Vec::new();
    let mut table = String::from(
        "gamma,family,cook_exponent,classified,gap_slope,gaps_shrinking,expected,verdict\n",
    );
    let _ = writeln!(text, "\n[phase_table]");
    let _ = writeln!(
        text,
        "{:>6} {:>11} {:>10} {:>11} {:>10} {:>10} {:>11} {:>7}",
        "gamma", "family", "cook_exp", "classified", "gap_slope", "shrinking", "expected", "verdict"
    );
    for r in &results {
        let p = &r.row;
        let class = |c: bool| if c { "convergent" } else { "divergent" };
        let status = if p.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            table,
            "{},{},{},{},{},{},{},{}",
            p.gamma,
            p.family,
            fmt_opt(p.cook_exponent),
            class(p.convergent),
            fmt_opt(p.gap_slope),
            p.gaps_shrinking,
            class(p.expected_convergent),
            status
        );
        let _ = writeln!(
            text,
            "{:>6} {:>11} {:>10} {:>11} {:>10} {:>10} {:>11} {:>7}",
            p.gamma,
            p.family,
            p.cook_exponent.map_or("-".into(), |e| format!("{e:.4}")),
            class(p.convergent),
            p.gap_slope.map_or("-".into(), |e| format!("{e:.4}")),
            p.gaps_shrinking,
            class(p.expected_convergent),
            status
        );
        for n in &r.notes {
            log::debug!("gamma {}: {n}", p.gamma);
        }
        for (series, stem) in [(&r.cook, "cook_integrand"), (&r.gaps, "cauchy_gap")] {
            let path = out_dir.join(format!("sweep_gamma_{}_{stem}.csv", p.gamma));
            write_series(series, &setup.hash, &path)?;
            csv_files.push(path);
        }
        verdicts.push(Verdict {
            name: format!("gamma={}", p.gamma),
            passed: p.passed,
            detail: format!(
                "cook {} gap {}",
                fmt_opt(p.cook_exponent),
                fmt_opt(p.gap_slope)
            ),
        });
    }
    let table_path = out_dir.join("phase_table.csv");
    fs::write(&table_path, table)?;
    let passed = verdicts.iter().filter(|v| v.passed).count();
    let _ = writeln!(text, "\n[summary]\npassed = {passed}/{}", verdicts.len());
    let report = out_dir.join("report.txt");
    fs::write(&report, text)?;
    let rows = results.into_iter().map(|r| r.row).collect();
    Ok((
        ReportBundle {
            out_dir: out_dir.to_path_buf(),
            csv_files,
            report,
            verdicts,
        },
        rows,
    ))
}
