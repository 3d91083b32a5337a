//! Time-series diagnostics of the wave-operator problem and exponent fits.

mod constants;
mod fit;
mod series;

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub use constants::{BoundConstants, Direction};
pub use fit::{fit_exponent, fit_log_model, LogFit, PowerFit, MIN_FIT_SAMPLES, MIN_R_SQUARED};
pub use series::{
    cauchy_gap_series, cone_mass_series_at_speed, cook_integrand_series, divergence_witness,
    heisenberg_norm_series, pairing_lower_check, lemma2_upper_check, log_bound_check, outside_mass_check,
    pairing_series, propagation_estimate_series, witness_drift, BoundCheck, UpperBoundReport, LogBoundReport,
    OmegaEvaluator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    CookIntegrand,
    ConeMassInside,
    CauchyGap,
    Pairing,
    HeisenbergNorm,
    DivergenceIntegral,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::CookIntegrand,
        Quantity::ConeMassInside,
        Quantity::CauchyGap,
        Quantity::Pairing,
        Quantity::HeisenbergNorm,
        Quantity::DivergenceIntegral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::CookIntegrand => "cook_integrand",
            Quantity::ConeMassInside => "cone_mass_inside",
            Quantity::CauchyGap => "cauchy_gap",
            Quantity::Pairing => "pairing",
            Quantity::HeisenbergNorm => "heisenberg_norm",
            Quantity::DivergenceIntegral => "divergence_integral",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::Format(format!("unknown quantity `{s}`")))
    }
}

/// Samples (t, value) with strictly increasing times and finite values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TimeSeries<T> {
    quantity: Quantity,
    samples: Vec<(T, T)>,
    fit: Option<PowerFit<T>>,
}

impl<T: Real> TimeSeries<T> {
    pub fn new(quantity: Quantity, samples: Vec<(T, T)>) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidSeries("sample times must increase strictly".into()));
        }
        if samples.iter().any(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::InvalidSeries("samples must be finite".into()));
        }
        Ok(TimeSeries {
            quantity,
            samples,
            fit: None,
        })
    }

    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn value_at(&self, t: T) -> Option<T> {
        self.samples.iter().find(|s| s.0 == t).map(|s| s.1)
    }

    pub fn fit(&self) -> Option<&PowerFit<T>> {
        self.fit.as_ref()
    }

    /// Fits the window and stores the result; a refused fit clears it.
    pub fn fit_window(&mut self, window: (T, T)) -> Result<Option<PowerFit<T>>> {
        self.fit = fit_exponent(self, window)?;
        Ok(self.fit)
    }

    pub fn with_fit(mut self, fit: Option<PowerFit<T>>) -> Self {
        self.fit = fit;
        self
    }

    /// Fit window skipping t < 10 and the last tenth of the sampled span.
    pub fn default_window(&self) -> Option<(T, T)> {
        let first = self.samples.first()?.0;
        let last = self.samples.last()?.0;
        let lo = first.max(T::lit(10.0));
        let hi = last - T::lit(0.1) * (last - first);
        (hi > lo).then_some((lo, hi))
    }

    /// CSV: `quantity,params_hash` header, then `t,value` rows, then `#fit` lines.
    pub fn write_csv<W: Write>(&self, params_hash: &str, mut out: W) -> Result<()> {
        writeln!(out, "quantity,params_hash")?;
        writeln!(out, "{},{}", self.quantity.as_str(), params_hash)?;
        writeln!(out, "t,value")?;
        for (t, v) in &self.samples {
            writeln!(out, "{:.16e},{:.16e}", t.as_f64(), v.as_f64())?;
        }
        if let Some(f) = &self.fit {
            writeln!(
                out,
                "#fit exponent={:.16e} prefactor={:.16e} r2={:.16e} window={:.16e}:{:.16e}",
                f.exponent.as_f64(),
                f.prefactor.as_f64(),
                f.r_squared.as_f64(),
                f.window.0.as_f64(),
                f.window.1.as_f64()
            )?;
        }
        Ok(())
    }

    /// Parses [`TimeSeries::write_csv`] output; returns the series and params hash.
    pub fn read_csv<R: BufRead>(input: R) -> Result<(Self, String)> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Format(format!("missing {what}")))
        };
        if next("header")? != "quantity,params_hash" {
            return Err(Error::Format("expected `quantity,params_hash` header".into()));
        }
        let meta = next("quantity row")?;
        let (q, hash) = meta
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("bad quantity row `{meta}`")))?;
        let quantity: Quantity = q.parse()?;
        if next("column header")? != "t,value" {
            return Err(Error::Format("expected `t,value` column header".into()));
        }
        let mut samples = Vec::new();
        let mut fit = None;
        while let Ok(line) = next("row") {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("#fit") {
                fit = Some(parse_fit_line(rest)?);
                continue;
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("bad row `{line}`")))?;
            samples.push((parse_num(t)?, parse_num(v)?));
        }
        Ok((TimeSeries::new(quantity, samples)?.with_fit(fit), hash.to_string()))
    }
}

fn parse_num<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Format(format!("bad number `{s}`")))?;
    T::from_f64(v).ok_or_else(|| Error::Format(format!("number `{s}` out of range")))
}

fn parse_fit_line<T: Real>(rest: &str) -> Result<PowerFit<T>> {
    let mut fields = std::collections::HashMap::new();
    for item in rest.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad fit field `{item}`")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(|| Error::Format(format!("fit line lacks `{k}`")));
    let (lo, hi) = get("window")?
        .split_once(':')
        .ok_or_else(|| Error::Format("bad fit window".into()))?;
    Ok(PowerFit {
        exponent: parse_num(get("exponent")?)?,
        prefactor: parse_num(get("prefactor")?)?,
        r_squared: parse_num(get("r2")?)?,
        window: (parse_num(lo)?, parse_num(hi)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_or_nonfinite() {
        assert!(TimeSeries::new(Quantity::Pairing, vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(TimeSeries::new(Quantity::Pairing, vec![(1.0, f64::NAN)]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let samples: Vec<(f64, f64)> = (1..=20).map(|i| (i as f64 * 0.7, (i as f64).powf(-1.3) / 3.0)).collect();
        let mut s = TimeSeries::new(Quantity::CookIntegrand, samples).unwrap();
        s.fit_window((1.0, 14.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv("abc123", &mut buf).unwrap();
        let (back, hash) = TimeSeries::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(hash, "abc123");
        assert_eq!(back, s);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().starts_with("#fit exponent="));
    }

    #[test]
    fn default_window_skips_early_and_late() {
        let samples: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64, 1.0)).collect();
        let s = TimeSeries::new(Quantity::Pairing, samples).unwrap();
        let (lo, hi) = s.default_window().unwrap();
        assert_eq!(lo, 10.0);
        assert!((hi - 90.1).abs() < 1e-12);
    }
}
