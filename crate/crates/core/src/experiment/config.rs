use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::Direction;
use crate::error::{Error, Result};
use crate::lattice::{AnnulusSpec, GridSpec, Lattice};
use crate::potential::PotentialSpec;
use crate::symbol::{certify_classes, max_group_speed, SymbolSpec};

pub const CONFIG_VERSION: u32 = 1;

/// Diagnostics a config may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    CookIntegrand,
    ConeMassInside,
    CauchyGap,
    Pairing,
    OutsideMass,
    Lemma2,
    HeisenbergNorm,
    DivergenceWitness,
    FlatBandDemo,
}

impl Diagnostic {
    pub fn as_str(self) -> &'static str {
        match self {
            Diagnostic::CookIntegrand => "cook_integrand",
            Diagnostic::ConeMassInside => "cone_mass_inside",
            Diagnostic::CauchyGap => "cauchy_gap",
            Diagnostic::Pairing => "pairing",
            Diagnostic::OutsideMass => "outside_mass",
            Diagnostic::Lemma2 => "lemma2",
            Diagnostic::HeisenbergNorm => "heisenberg_norm",
            Diagnostic::DivergenceWitness => "divergence_witness",
            Diagnostic::FlatBandDemo => "flat_band_demo",
        }
    }

    fn needs_long_range(self) -> bool {
        matches!(self, Diagnostic::Pairing | Diagnostic::Lemma2)
    }

    fn needs_times(self) -> bool {
        !matches!(self, Diagnostic::FlatBandDemo | Diagnostic::CauchyGap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeRange {
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Sample times as an explicit list, a range, or a concatenation of both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Explicit(Vec<f64>),
    Range(TimeRange),
    Concat(Vec<TimeSpec>),
}

impl TimeSpec {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            TimeSpec::Explicit(v) => v.clone(),
            TimeSpec::Range(r) => match (r.count, r.spacing) {
                (0, _) => Vec::new(),
                (1, _) => vec![r.start],
                (n, Spacing::Linear) => (0..n)
                    .map(|i| r.start + (r.stop - r.start) * i as f64 / (n - 1) as f64)
                    .collect(),
                (n, Spacing::Geometric) => (0..n)
                    .map(|i| r.start * (r.stop / r.start).powf(i as f64 / (n - 1) as f64))
                    .collect(),
            },
            TimeSpec::Concat(parts) => parts.iter().flat_map(TimeSpec::expand).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Doubling {
    pub doubling: TimeSpec,
}

/// Cauchy-gap pairs, explicit or as (t, 2t).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairSpec {
    Explicit(Vec<(f64, f64)>),
    Doubling(Doubling),
}

impl PairSpec {
    pub fn expand(&self) -> Vec<(f64, f64)> {
        match self {
            PairSpec::Explicit(v) => v.clone(),
            PairSpec::Doubling(d) => d.doubling.expand().into_iter().map(|t| (t, 2.0 * t)).collect(),
        }
    }
}

/// Verdict tolerances; defaults are the acceptance values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub exponent: f64,
    pub gap_slope: f64,
    pub gap_shrink_slope: f64,
    pub witness_growth: f64,
    pub witness_drift: f64,
    pub cone_retained: f64,
    pub max_cone_power: u32,
    pub trivial: f64,
    pub heisenberg_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exponent: 0.1,
            gap_slope: 0.15,
            gap_shrink_slope: 0.05,
            witness_growth: 0.15,
            witness_drift: 0.05,
            cone_retained: 0.99,
            max_cone_power: 4,
            trivial: 1e-10,
            heisenberg_relative: 1e-6,
        }
    }
}

/// Decay exponents swept by `threshold-sweep`; γ > 1 is short-range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub gammas: Vec<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    0.1
}

fn default_n() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub symbol: SymbolSpec<f64>,
    pub grid: GridSpec<f64>,
    pub packet: AnnulusSpec<f64>,
    #[serde(default)]
    pub potential: Option<PotentialSpec<f64>>,
    #[serde(default)]
    pub times: Option<TimeSpec>,
    #[serde(default)]
    pub time_pairs: Option<PairSpec>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub direction: Option<Direction>,
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default)]
    pub calibration_window: Option<(f64, f64)>,
    #[serde(default)]
    pub drift_window: Option<(f64, f64)>,
    /// Replaces the cone threshold; used for falsification controls.
    #[serde(default)]
    pub cone_speed: Option<f64>,
    #[serde(default)]
    pub spectrum_range: Option<(f64, f64)>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::config(
                "version",
                format!("unsupported schema version {}, expected {CONFIG_VERSION}", cfg.version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.as_ref().map(TimeSpec::expand).unwrap_or_default()
    }

    /// Explicit pairs, else (t, 2t) over `times`.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        match &self.time_pairs {
            Some(p) => p.expand(),
            None => self.times().into_iter().map(|t| (t, 2.0 * t)).collect(),
        }
    }

    /// SHA-256 of the canonical JSON form without the output directory.
    pub fn params_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let text = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Direction from the config, else inferred from the envelope on the annulus.
    pub fn resolved_direction(&self) -> Result<Direction> {
        let report = certify_classes(&self.symbol, (self.packet.eps, self.packet.r), 256, 1)
            .map_err(|e| Error::config("symbol", e.to_string()))?;
        if !report.in_tilde_b {
            return Err(Error::config(
                "symbol",
                "symbol is not nonnegative and nondecreasing on the packet annulus",
            ));
        }
        let inferred = if report.envelope_increasing() {
            Direction::Increasing
        } else if report.envelope_decreasing() {
            Direction::Decreasing
        } else {
            return Err(Error::config(
                "symbol",
                "group-speed envelope is not monotone on the packet annulus",
            ));
        };
        match self.direction {
            None => Ok(inferred),
            Some(d) if d == inferred || report.envelope_constant => Ok(d),
            Some(d) => Err(Error::config(
                "direction",
                format!("declared {} but the envelope is {} on the annulus", d.as_str(), inferred.as_str()),
            )),
        }
    }

    /// Field-level checks run before any simulation.
    pub fn validate(&self) -> Result<()> {
        let field = |name: &'static str| move |e: Error| Error::config(name, e.to_string());
        self.symbol.validate().map_err(field("symbol"))?;
        self.grid.validate().map_err(field("grid"))?;
        if let Some(v) = &self.potential {
            v.validate().map_err(field("potential"))?;
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        let lattice = Lattice::new(self.grid).map_err(field("grid"))?;
        self.packet.validate(&lattice).map_err(field("packet"))?;
        if self.diagnostics.is_empty() && self.sweep.is_none() {
            return Err(Error::config("diagnostics", "no diagnostics requested"));
        }
        for d in &self.diagnostics {
            if d.needs_long_range() && !self.potential.as_ref().is_some_and(|v| v.is_long_range()) {
                return Err(Error::config(
                    "potential",
                    format!("diagnostic {} needs a long_range potential", d.as_str()),
                ));
            }
            if *d == Diagnostic::DivergenceWitness && self.potential.is_none() {
                return Err(Error::config("potential", "divergence_witness needs a potential"));
            }
            if *d == Diagnostic::FlatBandDemo && !matches!(self.symbol, SymbolSpec::FlatBand { .. }) {
                return Err(Error::config("symbol", "flat_band_demo needs a flat_band symbol"));
            }
        }
        if self.n < 2 && self.diagnostics.contains(&Diagnostic::Lemma2) {
            return Err(Error::config("n", "lemma2 needs N >= 2"));
        }
        let times = self.times();
        let needs_times = self.diagnostics.iter().any(|d| d.needs_times()) || self.sweep.is_some();
        if needs_times {
            check_schedule("times", &times)?;
        }
        let long_only = self.diagnostics.iter().any(|d| d.needs_long_range());
        if long_only && times.first().is_some_and(|&t| t < 1.0) {
            return Err(Error::config("times", "pairing and lemma2 need every t >= 1"));
        }
        let mut t_max = times.last().copied().unwrap_or(0.0);
        if self.diagnostics.contains(&Diagnostic::CauchyGap) || self.sweep.is_some() {
            let pairs = self.pairs();
            if pairs.is_empty() {
                return Err(Error::config("time_pairs", "no Cauchy-gap pairs"));
            }
            if let Some(p) = pairs.iter().find(|p| !(p.0 >= 0.0 && p.1 > p.0 && p.1.is_finite())) {
                return Err(Error::config("time_pairs", format!("need 0 <= t1 < t2, got ({}, {})", p.0, p.1)));
            }
            t_max = pairs.iter().fold(t_max, |m, p| m.max(p.1));
        }
        if let Some(s) = &self.sweep {
            if s.gammas.is_empty() || s.gammas.iter().any(|&g| !(g > 0.0)) {
                return Err(Error::config("sweep.gammas", "need a nonempty list of positive exponents"));
            }
            if !(s.amplitude != 0.0 && s.amplitude.is_finite()) {
                return Err(Error::config("sweep.amplitude", "must be finite and nonzero"));
            }
        }
        if needs_times || self.sweep.is_some() {
            self.resolved_direction()?;
            let speed = max_group_speed(&self.symbol, self.packet.eps, self.packet.r).map_err(field("symbol"))?;
            let half = self.grid.half_length / 2.0;
            if speed * t_max >= half {
                return Err(Error::config(
                    "times",
                    format!("packet outruns the box: max group speed {speed} times t = {t_max} reaches L/2 = {half}"),
                ));
            }
        }
        self.check_steps(&times)?;
        for (name, w) in [
            ("fit_window", self.fit_window),
            ("calibration_window", self.calibration_window),
            ("drift_window", self.drift_window),
        ] {
            if let Some((lo, hi)) = w {
                if !(lo > 0.0 && hi > lo) {
                    return Err(Error::config(name, format!("need 0 < lo < hi, got ({lo}, {hi})")));
                }
            }
        }
        if let Some(v) = self.cone_speed {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config("cone_speed", "must be positive"));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    fn check_steps(&self, times: &[f64]) -> Result<()> {
        let mut sup = self.potential.as_ref().map(|v| v.sup_norm());
        if let Some(sweep) = &self.sweep {
            sup = Some(sup.unwrap_or(0.0).max(sweep.amplitude.abs()));
        }
        let Some(sup) = sup else {
            return Ok(());
        };
        let phase = self.dt * sup;
        if phase >= crate::evolution::MAX_PHASE_PER_STEP {
            return Err(Error::config(
                "dt",
                format!("dt * sup|V| = {phase} must stay below {}", crate::evolution::MAX_PHASE_PER_STEP),
            ));
        }
        let uses_omega = self.sweep.is_some()
            || self
                .diagnostics
                .iter()
                .any(|d| matches!(d, Diagnostic::CauchyGap | Diagnostic::DivergenceWitness));
        if !uses_omega {
            return Ok(());
        }
        let mut all: Vec<f64> = self.pairs().into_iter().flat_map(|(a, b)| [a, b]).collect();
        if self.diagnostics.contains(&Diagnostic::DivergenceWitness) {
            all.extend_from_slice(times);
        }
        for t in all {
            let ratio = t / self.dt;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.round().max(1.0) {
                return Err(Error::config("dt", format!("dt = {} does not divide t = {t}", self.dt)));
            }
        }
        Ok(())
    }
}

fn check_schedule(name: &'static str, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::config(name, "no sample times"));
    }
    if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::config(name, "sample times must be positive and finite"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::config(name, "sample times must increase strictly"));
    }
    Ok(())
}
