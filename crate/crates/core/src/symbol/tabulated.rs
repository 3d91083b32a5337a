//! Monotone piecewise-cubic Hermite interpolation of tabulated symbols.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Knot data for a tabulated symbol. Outside the knot range the interpolant is
/// extended by the boundary values, so its derivative vanishes there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedRaw<T>", into = "TabulatedRaw<T>")]
#[serde(bound = "T: Real")]
pub struct Tabulated<T: Real> {
    sigma: Vec<T>,
    value: Vec<T>,
    slope: Vec<T>,
    slopes_given: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct TabulatedRaw<T: Real> {
    knots: Vec<(T, T)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slopes: Option<Vec<T>>,
}

impl<T: Real> TryFrom<TabulatedRaw<T>> for Tabulated<T> {
    type Error = Error;

    fn try_from(raw: TabulatedRaw<T>) -> Result<Self> {
        Tabulated::new(raw.knots, raw.slopes)
    }
}

impl<T: Real> From<Tabulated<T>> for TabulatedRaw<T> {
    fn from(t: Tabulated<T>) -> Self {
        TabulatedRaw {
            knots: t.sigma.iter().copied().zip(t.value.iter().copied()).collect(),
            slopes: t.slopes_given.then_some(t.slope),
        }
    }
}

impl<T: Real> Tabulated<T> {
    /// Builds the interpolant. Without `slopes`, knot derivatives follow the
    /// Fritsch–Carlson rule, which keeps monotone data monotone.
    pub fn new(knots: Vec<(T, T)>, slopes: Option<Vec<T>>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidSymbol("tabulated symbol needs at least two knots".into()));
        }
        let (sigma, value): (Vec<T>, Vec<T>) = knots.into_iter().unzip();
        if sigma.iter().chain(value.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSymbol("tabulated knots must be finite".into()));
        }
        if sigma[0] < T::zero() {
            return Err(Error::InvalidSymbol("tabulated knots must have sigma >= 0".into()));
        }
        if sigma.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSymbol("tabulated sigma values must increase strictly".into()));
        }
        if value[0] < T::zero() || value.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSymbol(
                "tabulated values must be nonnegative and nondecreasing".into(),
            ));
        }
        let secants: Vec<T> = (0..sigma.len() - 1)
            .map(|k| (value[k + 1] - value[k]) / (sigma[k + 1] - sigma[k]))
            .collect();

        let slopes_given = slopes.is_some();
        let slope = match slopes {
            Some(s) => {
                if s.len() != sigma.len() {
                    return Err(Error::InvalidSymbol(format!(
                        "{} slopes given for {} knots",
                        s.len(),
                        sigma.len()
                    )));
                }
                check_monotone_slopes(&secants, &s)?;
                s
            }
            None => fritsch_carlson(&sigma, &secants),
        };
        Ok(Tabulated {
            sigma,
            value,
            slope,
            slopes_given,
        })
    }

    pub fn knots(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.sigma.iter().copied().zip(self.value.iter().copied())
    }

    pub fn first_value(&self) -> T {
        self.value[0]
    }

    pub fn last_value(&self) -> T {
        self.value[self.value.len() - 1]
    }

    fn segment(&self, s: T) -> Option<usize> {
        let n = self.sigma.len();
        if s < self.sigma[0] || s > self.sigma[n - 1] {
            return None;
        }
        // partition_point gives the first knot strictly above s
        let idx = self.sigma.partition_point(|&k| k <= s);
        Some(idx.saturating_sub(1).min(n - 2))
    }

    pub fn eval(&self, s: T) -> T {
        let Some(k) = self.segment(s) else {
            return if s < self.sigma[0] {
                self.first_value()
            } else {
                self.last_value()
            };
        };
        let h = self.sigma[k + 1] - self.sigma[k];
        let u = (s - self.sigma[k]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * u3 - three * u2 + T::one();
        let h10 = u3 - two * u2 + u;
        let h01 = -two * u3 + three * u2;
        let h11 = u3 - u2;
        h00 * self.value[k]
            + h10 * h * self.slope[k]
            + h01 * self.value[k + 1]
            + h11 * h * self.slope[k + 1]
    }

    pub fn eval_prime(&self, s: T) -> T {
        let Some(k) = self.segment(s) else {
            return T::zero();
        };
        let h = self.sigma[k + 1] - self.sigma[k];
        let u = (s - self.sigma[k]) / h;
        let u2 = u * u;
        let six = T::lit(6.0);
        let d00 = six * u2 - six * u;
        let d10 = T::lit(3.0) * u2 - T::lit(4.0) * u + T::one();
        let d01 = -d00;
        let d11 = T::lit(3.0) * u2 - T::lit(2.0) * u;
        (d00 * self.value[k] + d01 * self.value[k + 1]) / h
            + d10 * self.slope[k]
            + d11 * self.slope[k + 1]
    }
}

fn fritsch_carlson<T: Real>(sigma: &[T], secants: &[T]) -> Vec<T> {
    let n = sigma.len();
    if n == 2 {
        return vec![secants[0]; 2];
    }
    let h: Vec<T> = sigma.windows(2).map(|w| w[1] - w[0]).collect();
    let mut d = vec![T::zero(); n];
    for k in 1..n - 1 {
        let (a, b) = (secants[k - 1], secants[k]);
        if a <= T::zero() || b <= T::zero() {
            continue;
        }
        let w1 = T::lit(2.0) * h[k] + h[k - 1];
        let w2 = h[k] + T::lit(2.0) * h[k - 1];
        d[k] = (w1 + w2) / (w1 / a + w2 / b);
    }
    d[0] = edge_slope(h[0], h[1], secants[0], secants[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], secants[n - 2], secants[n - 3]);
    d
}

/// Shape-preserving one-sided three-point slope at a boundary knot.
fn edge_slope<T: Real>(h0: T, h1: T, m0: T, m1: T) -> T {
    let d = ((T::lit(2.0) * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == T::zero() {
        T::zero()
    } else if m0.signum() != m1.signum() && d.abs() > T::lit(3.0) * m0.abs() {
        T::lit(3.0) * m0
    } else {
        d
    }
}

fn check_monotone_slopes<T: Real>(secants: &[T], slopes: &[T]) -> Result<()> {
    if slopes.iter().any(|s| !s.is_finite() || *s < T::zero()) {
        return Err(Error::InvalidSymbol("tabulated slopes must be finite and >= 0".into()));
    }
    let slack = T::lit(1e-12);
    for (k, &m) in secants.iter().enumerate() {
        let (a, b) = (slopes[k], slopes[k + 1]);
        let ok = if m == T::zero() {
            a == T::zero() && b == T::zero()
        } else {
            let (alpha, beta) = (a / m, b / m);
            alpha + beta <= T::lit(3.0) + slack
                || alpha * alpha + beta * beta <= T::lit(9.0) + slack
        };
        if !ok {
            return Err(Error::InvalidSymbol(format!(
                "slopes on segment {k} would make the interpolant non-monotone"
            )));
        }
    }
    Ok(())
}
