use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};
use crate::real::Real;

pub const MIN_FIT_SAMPLES: usize = 8;
pub const MIN_R_SQUARED: f64 = 0.9;

/// value ≈ prefactor·t^exponent over `window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PowerFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
    pub window: (T, T),
}

/// value ≈ a + b·ln t over `window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LogFit<T> {
    pub intercept: T,
    pub slope: T,
    pub r_squared: T,
    pub window: (T, T),
}

struct Line<T> {
    intercept: T,
    slope: T,
    r_squared: T,
}

fn least_squares<T: Real>(x: &[T], y: &[T]) -> Line<T> {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxx = sxx + (a - mx) * (a - mx);
        sxy = sxy + (a - mx) * (b - my);
        syy = syy + (b - my) * (b - my);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let intercept = my - slope * mx;
    let ss_res = x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| {
        let r = b - intercept - slope * a;
        acc + r * r
    });
    let scale = my.abs().max(T::one());
    let floor = T::epsilon() * scale * n;
    let r_squared = if syy <= floor * floor * n {
        T::one()
    } else {
        T::one() - ss_res / syy
    };
    Line {
        intercept,
        slope,
        r_squared,
    }
}

fn in_window<T: Real>(series: &TimeSeries<T>, window: (T, T)) -> Result<Vec<(T, T)>> {
    if !(window.0 > T::zero() && window.1 > window.0) {
        return Err(Error::InvalidArgument(format!(
            "fit window must satisfy 0 < lo < hi, got ({}, {})",
            window.0, window.1
        )));
    }
    Ok(series
        .samples()
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect())
}

/// Least-squares line through (ln t, ln value) on the window.
///
/// Errors with fewer than eight positive samples in the window; returns
/// `None` when a sample is non-positive or r² falls below 0.9.
pub fn fit_exponent<T: Real>(series: &TimeSeries<T>, window: (T, T)) -> Result<Option<PowerFit<T>>> {
    let pts = in_window(series, window)?;
    let positive = pts.iter().filter(|&&(_, v)| v > T::zero()).count();
    if positive < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: positive,
        });
    }
    if positive < pts.len() {
        return Ok(None);
    }
    let x: Vec<T> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<T> = pts.iter().map(|p| p.1.ln()).collect();
    let line = least_squares(&x, &y);
    if line.r_squared < T::lit(MIN_R_SQUARED) {
        return Ok(None);
    }
    Ok(Some(PowerFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        r_squared: line.r_squared,
        window,
    }))
}

/// Least-squares fit of value = a + b·ln t; used where a power fit would read
/// logarithmic growth as exponent ≈ 0.
pub fn fit_log_model<T: Real>(series: &TimeSeries<T>, window: (T, T)) -> Result<LogFit<T>> {
    let pts = in_window(series, window)?;
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: pts.len(),
        });
    }
    let x: Vec<T> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<T> = pts.iter().map(|p| p.1).collect();
    let line = least_squares(&x, &y);
    Ok(LogFit {
        intercept: line.intercept,
        slope: line.slope,
        r_squared: line.r_squared,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Quantity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(f: impl Fn(f64) -> f64) -> TimeSeries<f64> {
        let samples = (0..40).map(|i| {
            let t = 10f64.powf(i as f64 / 39.0 * 2.0);
            (t, f(t))
        });
        TimeSeries::new(Quantity::CookIntegrand, samples.collect()).unwrap()
    }

    #[test]
    fn exact_power() {
        let s = series(|t| 3.0 * t.powi(-2));
        let fit = fit_exponent(&s, (1.0, 100.0)).unwrap().unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-6);
        assert!((fit.prefactor - 3.0).abs() < 1e-6);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let s = series(|_| 0.7);
        let fit = fit_exponent(&s, (1.0, 100.0)).unwrap().unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn noisy_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noise: Vec<f64> = (0..40).map(|_| 1.0 + 0.05 * (2.0 * rng.random::<f64>() - 1.0)).collect();
        let samples = (0..40)
            .map(|i| {
                let t = 10f64.powf(i as f64 / 39.0 * 2.0);
                (t, 2.0 * t.powf(-1.5) * noise[i])
            })
            .collect();
        let s = TimeSeries::new(Quantity::CookIntegrand, samples).unwrap();
        let fit = fit_exponent(&s, (1.0, 100.0)).unwrap().unwrap();
        assert!((fit.exponent + 1.5).abs() < 0.05);
    }

    #[test]
    fn refusals() {
        let s = series(|t| t);
        assert!(matches!(fit_exponent(&s, (1.0, 1.5)), Err(Error::InsufficientSamples { .. })));
        let s = series(|t| if t > 50.0 { 0.0 } else { t });
        assert_eq!(fit_exponent(&s, (1.0, 100.0)).unwrap(), None);
        // a power law cannot describe sin: r² drops below 0.9
        let s = series(|t| 2.0 + (3.0 * t.ln()).sin());
        assert_eq!(fit_exponent(&s, (1.0, 100.0)).unwrap(), None);
    }

    #[test]
    fn log_model() {
        let s = series(|t| 0.3 + 1.7 * t.ln());
        let fit = fit_log_model(&s, (1.0, 100.0)).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-12);
        assert!((fit.intercept - 0.3).abs() < 1e-12);
    }
}
