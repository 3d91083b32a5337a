//! Sampled membership certificates and propagation-cone thresholds.
//!
//! Certification is by sampling: a violation is a genuine certificate of
//! non-membership, a pass only says no violation was seen on the samples.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SymbolSpec;
use crate::error::{Error, Result};
use crate::real::Real;

/// Absolute tolerance on the sign of k-th finite differences.
pub const FINITE_DIFFERENCE_TOL: f64 = 1e-8;
/// Finite-difference step as a fraction of the sample point.
const RELATIVE_STEP: f64 = 0.05;
/// Relative tolerance when comparing consecutive envelope samples.
const ENVELOPE_TOL: f64 = 1e-10;
const THRESHOLD_SAMPLES: usize = 1025;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Neither,
}

impl Monotonicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Monotonicity::Increasing => "increasing",
            Monotonicity::Decreasing => "decreasing",
            Monotonicity::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct ClassReport<T: Real> {
    pub in_tilde_b: bool,
    /// Largest k ≤ k_max such that orders 1..=k all show the Bernstein sign pattern.
    pub in_b_up_to_order: u32,
    /// First (order, σ) where the sign pattern broke, if any.
    pub bernstein_violation: Option<(u32, T)>,
    /// Monotonicity of Ψ′(σ²)σ; a constant envelope is reported as increasing.
    pub psi_prime_sigma_monotone: Monotonicity,
    pub envelope_constant: bool,
    /// Recorded for completeness; no diagnostic is gated on it.
    pub unbounded_at_infinity: bool,
    pub samples_used: usize,
    pub sigma_range: (T, T),
}

impl<T: Real> ClassReport<T> {
    pub fn envelope_increasing(&self) -> bool {
        self.psi_prime_sigma_monotone == Monotonicity::Increasing
    }

    pub fn envelope_decreasing(&self) -> bool {
        self.envelope_constant || self.psi_prime_sigma_monotone == Monotonicity::Decreasing
    }

    pub fn to_text_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "in_tilde_b = {}", self.in_tilde_b);
        let _ = writeln!(s, "in_b_up_to_order = {}", self.in_b_up_to_order);
        match self.bernstein_violation {
            Some((k, at)) => {
                let _ = writeln!(s, "bernstein_violation = order {k} at sigma {at}");
            }
            None => {
                let _ = writeln!(s, "bernstein_violation = none");
            }
        }
        let _ = writeln!(s, "psi_prime_sigma_monotone = {}", self.psi_prime_sigma_monotone.as_str());
        let _ = writeln!(s, "envelope_constant = {}", self.envelope_constant);
        let _ = writeln!(s, "unbounded_at_infinity = {}", self.unbounded_at_infinity);
        let _ = writeln!(s, "samples_used = {}", self.samples_used);
        let _ = writeln!(s, "sigma_range = [{}, {}]", self.sigma_range.0, self.sigma_range.1);
        s
    }
}

/// Geometric sample of [lo, hi] with both endpoints exact.
pub(crate) fn geometric_samples<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let ratio = (hi / lo).ln();
    let last = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => lo * (ratio * T::from_usize_lossy(i) / last).exp(),
        })
        .collect()
}

pub(crate) fn linear_samples<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let last = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => lo + (hi - lo) * T::from_usize_lossy(i) / last,
        })
        .collect()
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * f64::from(k - i) / f64::from(i + 1))
}

/// k-th forward difference of Ψ with step h starting at σ.
fn forward_difference<T: Real>(spec: &SymbolSpec<T>, sigma: T, h: T, k: u32) -> Result<T> {
    let mut acc = T::zero();
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let w = T::lit(sign * binomial(k, j));
        acc = acc + w * spec.eval_psi(sigma + h * T::from_usize_lossy(j as usize))?;
    }
    Ok(acc)
}

fn envelope_monotonicity<T: Real>(env: &[T]) -> (Monotonicity, bool) {
    let scale = env.iter().fold(T::zero(), |m, e| m.max(e.abs()));
    let tol = T::lit(ENVELOPE_TOL) * scale;
    let increasing = env.windows(2).all(|w| w[1] - w[0] >= -tol);
    let decreasing = env.windows(2).all(|w| w[1] - w[0] <= tol);
    let m = match (increasing, decreasing) {
        (true, _) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        _ => Monotonicity::Neither,
    };
    (m, increasing && decreasing)
}

/// Samples Ψ on a geometric grid over `sigma_range` and reports class membership.
///
/// The Bernstein test requires the k-th forward difference of Ψ to carry sign
/// (−1)^{k+1} up to [`FINITE_DIFFERENCE_TOL`]. The envelope Ψ′(σ²)σ is sampled
/// on the same points, read as momentum magnitudes.
pub fn certify_classes<T: Real>(
    spec: &SymbolSpec<T>,
    sigma_range: (T, T),
    n_samples: usize,
    k_max: u32,
) -> Result<ClassReport<T>> {
    let (lo, hi) = sigma_range;
    if n_samples < 16 {
        return Err(Error::InvalidArgument(format!("n_samples must be >= 16, got {n_samples}")));
    }
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    if !(lo > T::zero() && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 < sigma_lo < sigma_hi, got ({lo}, {hi})")));
    }
    spec.validate()?;
    let sigmas = geometric_samples(lo, hi, n_samples);
    let tol = T::lit(FINITE_DIFFERENCE_TOL);

    let in_tilde_b = sigmas.iter().all(|&s| {
        matches!(spec.eval_psi(s), Ok(v) if v >= -tol)
            && matches!(spec.eval_psi_prime(s), Ok(d) if d >= -tol)
    });

    let mut order = 0;
    let mut violation = None;
    if in_tilde_b {
        'orders: for k in 1..=k_max {
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            for &s in &sigmas {
                let h = T::lit(RELATIVE_STEP) * s;
                let ok = matches!(forward_difference(spec, s, h, k), Ok(d) if sign * d >= -tol);
                if !ok {
                    violation = Some((k, s));
                    break 'orders;
                }
            }
            order = k;
        }
    }

    let env: Vec<T> = sigmas
        .iter()
        .map(|&s| spec.group_speed_envelope(s))
        .collect::<Result<_>>()?;
    let (monotone, constant) = envelope_monotonicity(&env);

    Ok(ClassReport {
        in_tilde_b,
        in_b_up_to_order: order,
        bernstein_violation: violation,
        psi_prime_sigma_monotone: monotone,
        envelope_constant: constant,
        unbounded_at_infinity: spec.limit_at_infinity().is_infinite(),
        samples_used: n_samples,
        sigma_range,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeMode {
    /// Ψ′(ε²)ε, valid for increasing envelopes.
    Increasing,
    /// Ψ′(R²)R, valid for decreasing envelopes.
    Decreasing,
    /// inf over [ε, R] of Ψ′(σ²)σ, no monotonicity needed.
    Inf,
}

impl ConeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConeMode::Increasing => "increasing",
            ConeMode::Decreasing => "decreasing",
            ConeMode::Inf => "inf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeThreshold<T> {
    pub speed: T,
    pub mode: ConeMode,
    /// Set when the threshold vanishes (a flat region inside the annulus).
    pub degenerate: bool,
}

fn check_annulus<T: Real>(eps: T, r: T) -> Result<()> {
    if eps > T::zero() && r > eps && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("need 0 < eps < R, got eps = {eps}, R = {r}")))
    }
}

fn envelope_extremes<T: Real>(spec: &SymbolSpec<T>, eps: T, r: T) -> Result<(T, T)> {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for s in linear_samples(eps, r, THRESHOLD_SAMPLES) {
        let e = spec.group_speed_envelope(s)?;
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok((lo, hi))
}

/// Speed of the slow cone |x| ≤ v·t outside which a free annulus packet lives.
pub fn cone_threshold<T: Real>(
    spec: &SymbolSpec<T>,
    eps: T,
    r: T,
    mode: ConeMode,
) -> Result<ConeThreshold<T>> {
    check_annulus(eps, r)?;
    let speed = match mode {
        ConeMode::Increasing | ConeMode::Decreasing => {
            let report = certify_classes(spec, (eps, r), 256, 1)?;
            let (ok, at) = if mode == ConeMode::Increasing {
                (report.envelope_increasing(), eps)
            } else {
                (report.envelope_decreasing(), r)
            };
            if !ok {
                return Err(Error::MonotonicityMismatch {
                    mode: mode.as_str(),
                    found: report.psi_prime_sigma_monotone.as_str(),
                    eps: eps.as_f64(),
                    r: r.as_f64(),
                });
            }
            spec.group_speed_envelope(at)?
        }
        ConeMode::Inf => envelope_extremes(spec, eps, r)?.0,
    };
    let degenerate = speed <= T::zero();
    if degenerate {
        log::warn!(
            "degenerate cone threshold: envelope of {} symbol vanishes inside [{eps}, {r}]",
            spec.kind_name()
        );
    }
    Ok(ConeThreshold {
        speed,
        mode,
        degenerate,
    })
}

/// Slowest true group speed 2·inf Ψ′(|ξ|²)|ξ| over the annulus.
pub fn min_group_speed<T: Real>(spec: &SymbolSpec<T>, eps: T, r: T) -> Result<T> {
    check_annulus(eps, r)?;
    Ok(T::lit(2.0) * envelope_extremes(spec, eps, r)?.0)
}

/// Fastest true group speed 2·sup Ψ′(|ξ|²)|ξ| over the annulus.
pub fn max_group_speed<T: Real>(spec: &SymbolSpec<T>, eps: T, r: T) -> Result<T> {
    check_annulus(eps, r)?;
    Ok(T::lit(2.0) * envelope_extremes(spec, eps, r)?.1)
}
