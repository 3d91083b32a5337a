//! Dispersion symbols Ψ, their derivatives, and the envelope Ψ′(σ²)σ.
//!
//! A symbol defines the free Hamiltonian Ψ(|D|²) as a Fourier multiplier.
//! The argument `sigma` of [`SymbolSpec::eval_psi`] is the squared momentum
//! |ξ|², while [`SymbolSpec::group_speed_envelope`] takes the momentum
//! magnitude itself.

mod classes;
mod tabulated;

pub use classes::{
    certify_classes, cone_threshold, max_group_speed, min_group_speed, ClassReport, ConeMode,
    ConeThreshold, Monotonicity,
};
pub use tabulated::{Tabulated, TabulatedRaw};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "T: Real")]
pub enum SymbolSpec<T: Real> {
    /// Ψ(σ) = σ^ρ.
    Fractional { rho: T },
    /// Ψ(σ) = √(σ + m²) − m.
    Relativistic { m: T },
    /// Ψ(σ) = log(1 + σ).
    Logarithmic,
    /// Flat at `level` on [σ_lo, σ_hi], quadratic C¹ joins on either side.
    FlatBand { sigma_lo: T, sigma_hi: T, level: T },
    Tabulated(Tabulated<T>),
}

impl<T: Real> SymbolSpec<T> {
    pub fn fractional(rho: T) -> Result<Self> {
        let s = SymbolSpec::Fractional { rho };
        s.validate()?;
        Ok(s)
    }

    pub fn relativistic(m: T) -> Result<Self> {
        let s = SymbolSpec::Relativistic { m };
        s.validate()?;
        Ok(s)
    }

    pub fn flat_band(sigma_lo: T, sigma_hi: T, level: T) -> Result<Self> {
        let s = SymbolSpec::FlatBand {
            sigma_lo,
            sigma_hi,
            level,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SymbolSpec::Fractional { .. } => "fractional",
            SymbolSpec::Relativistic { .. } => "relativistic",
            SymbolSpec::Logarithmic => "logarithmic",
            SymbolSpec::FlatBand { .. } => "flat_band",
            SymbolSpec::Tabulated(_) => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSymbol(msg));
        match *self {
            SymbolSpec::Fractional { rho } if !(rho > T::zero() && rho.is_finite()) => {
                bad(format!("fractional exponent must be positive and finite, got {rho}"))
            }
            SymbolSpec::Relativistic { m } if !(m >= T::zero() && m.is_finite()) => {
                bad(format!("relativistic mass must be >= 0, got {m}"))
            }
            SymbolSpec::FlatBand {
                sigma_lo,
                sigma_hi,
                level,
            } if !(sigma_lo > T::zero()
                && sigma_hi > sigma_lo
                && sigma_hi.is_finite()
                && level > T::zero()
                && level.is_finite()) =>
            {
                bad(format!(
                    "flat band needs 0 < sigma_lo < sigma_hi and level > 0, got [{sigma_lo}, {sigma_hi}] at {level}"
                ))
            }
            // tabulated data is validated when the table is built
            _ => Ok(()),
        }
    }

    fn domain(&self, sigma: T) -> Error {
        Error::Domain {
            kind: self.kind_name(),
            sigma: sigma.as_f64(),
        }
    }

    /// Ψ(σ). Negative σ is always a domain error; σ = 0 is accepted when the
    /// kind has a finite value there.
    pub fn eval_psi(&self, sigma: T) -> Result<T> {
        if sigma.is_nan() || sigma < T::zero() {
            return Err(self.domain(sigma));
        }
        let v = match self {
            SymbolSpec::Fractional { rho } => {
                if sigma == T::zero() {
                    T::zero()
                } else {
                    sigma.powf(*rho)
                }
            }
            SymbolSpec::Relativistic { m } => {
                let root = (sigma + *m * *m).sqrt();
                if root + *m == T::zero() {
                    T::zero()
                } else {
                    // σ / (√(σ+m²) + m) avoids cancellation for small σ
                    sigma / (root + *m)
                }
            }
            SymbolSpec::Logarithmic => {
                if sigma == T::zero() {
                    return Err(self.domain(sigma));
                }
                sigma.ln_1p()
            }
            SymbolSpec::FlatBand {
                sigma_lo,
                sigma_hi,
                level,
            } => {
                if sigma < *sigma_lo {
                    let u = sigma / *sigma_lo;
                    *level * u * (T::lit(2.0) - u)
                } else if sigma <= *sigma_hi {
                    *level
                } else {
                    let d = sigma - *sigma_hi;
                    *level + d * d
                }
            }
            SymbolSpec::Tabulated(t) => t.eval(sigma),
        };
        Ok(v)
    }

    /// dΨ/dσ at σ. Kinds whose derivative blows up at 0 reject σ = 0.
    pub fn eval_psi_prime(&self, sigma: T) -> Result<T> {
        if sigma.is_nan() || sigma < T::zero() {
            return Err(self.domain(sigma));
        }
        let v = match self {
            SymbolSpec::Fractional { rho } => {
                if sigma == T::zero() {
                    if *rho < T::one() {
                        return Err(self.domain(sigma));
                    }
                    if *rho == T::one() {
                        T::one()
                    } else {
                        T::zero()
                    }
                } else {
                    *rho * sigma.powf(*rho - T::one())
                }
            }
            SymbolSpec::Relativistic { m } => {
                let root = (sigma + *m * *m).sqrt();
                if root == T::zero() {
                    return Err(self.domain(sigma));
                }
                T::lit(0.5) / root
            }
            SymbolSpec::Logarithmic => {
                if sigma == T::zero() {
                    return Err(self.domain(sigma));
                }
                (T::one() + sigma).recip()
            }
            SymbolSpec::FlatBand {
                sigma_lo,
                sigma_hi,
                level,
            } => {
                if sigma < *sigma_lo {
                    T::lit(2.0) * *level / *sigma_lo * (T::one() - sigma / *sigma_lo)
                } else if sigma <= *sigma_hi {
                    T::zero()
                } else {
                    T::lit(2.0) * (sigma - *sigma_hi)
                }
            }
            SymbolSpec::Tabulated(t) => t.eval_prime(sigma),
        };
        Ok(v)
    }

    /// Ψ′(σ²)·σ for a momentum magnitude σ.
    pub fn group_speed_envelope(&self, sigma: T) -> Result<T> {
        Ok(self.eval_psi_prime(sigma * sigma)? * sigma)
    }

    /// lim_{σ→0+} Ψ(σ); exact for every kind.
    pub fn limit_at_zero(&self) -> T {
        match self {
            SymbolSpec::Fractional { .. }
            | SymbolSpec::Relativistic { .. }
            | SymbolSpec::Logarithmic
            | SymbolSpec::FlatBand { .. } => T::zero(),
            SymbolSpec::Tabulated(t) => t.eval(T::zero()),
        }
    }

    /// lim_{σ→∞} Ψ(σ); `+∞` for the unbounded kinds.
    pub fn limit_at_infinity(&self) -> T {
        match self {
            SymbolSpec::Tabulated(t) => t.last_value(),
            _ => T::infinity(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn eval_examples() {
        let id = SymbolSpec::fractional(1.0).unwrap();
        assert_eq!(id.eval_psi(4.0).unwrap(), 4.0);
        let half = SymbolSpec::fractional(0.5).unwrap();
        assert_eq!(half.eval_psi(4.0).unwrap(), 2.0);
        let massless = SymbolSpec::relativistic(0.0).unwrap();
        assert_eq!(massless.eval_psi(9.0).unwrap(), 3.0);
        let rel = SymbolSpec::relativistic(1.0).unwrap();
        assert!(close(rel.eval_psi(3.0).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn derivative_examples() {
        let half = SymbolSpec::fractional(0.5).unwrap();
        for s in [0.1, 1.0, 7.3, 1e3] {
            assert!(close(half.eval_psi_prime(s).unwrap(), 0.5 / f64::sqrt(s), 1e-15));
            assert!(close(half.group_speed_envelope(s).unwrap(), 0.5, 1e-15));
        }
        let flat = SymbolSpec::flat_band(1.0, 2.0, 3.0).unwrap();
        assert_eq!(flat.eval_psi_prime(1.5).unwrap(), 0.0);
        let id = SymbolSpec::fractional(1.0).unwrap();
        assert_eq!(id.eval_psi_prime(123.0).unwrap(), 1.0);
    }

    #[test]
    fn envelope_examples() {
        let id = SymbolSpec::fractional(1.0).unwrap();
        assert_eq!(id.group_speed_envelope(3.0).unwrap(), 3.0);
        // ρσ^{2ρ-1} at ρ = 1/4
        let quarter = SymbolSpec::fractional(0.25).unwrap();
        assert!(close(quarter.group_speed_envelope(1.0).unwrap(), 0.25, 1e-15));
        assert!(close(quarter.group_speed_envelope(4.0).unwrap(), 0.125, 1e-15));
        // finite-difference cross-check of the same values
        for s in [1.0f64, 4.0] {
            let sq = s * s;
            let h = 1e-5 * sq;
            let fd = (quarter.eval_psi(sq + h).unwrap() - quarter.eval_psi(sq - h).unwrap())
                / (2.0 * h);
            assert!(close(fd * s, 0.25 * s.powf(-0.5), 1e-8));
        }
    }

    #[test]
    fn domain_errors() {
        let log = SymbolSpec::<f64>::Logarithmic;
        assert!(matches!(log.eval_psi(0.0), Err(Error::Domain { .. })));
        assert!(matches!(log.eval_psi(-1.0), Err(Error::Domain { .. })));
        let half = SymbolSpec::fractional(0.5).unwrap();
        assert_eq!(half.eval_psi(0.0).unwrap(), 0.0);
        assert!(half.eval_psi_prime(0.0).is_err());
        assert!(SymbolSpec::fractional(1.0).unwrap().eval_psi_prime(0.0).is_ok());
        assert!(SymbolSpec::relativistic(0.0).unwrap().eval_psi_prime(0.0).is_err());
        assert!(SymbolSpec::relativistic(2.0).unwrap().eval_psi_prime(0.0).is_ok());
        assert!(half.eval_psi(f64::NAN).is_err());
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(SymbolSpec::fractional(0.0).is_err());
        assert!(SymbolSpec::fractional(f64::INFINITY).is_err());
        assert!(SymbolSpec::relativistic(-1.0).is_err());
        assert!(SymbolSpec::flat_band(2.0, 1.0, 1.0).is_err());
        assert!(SymbolSpec::flat_band(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn flat_band_is_c1_and_nondecreasing() {
        let fb = SymbolSpec::flat_band(1.0f64, 2.0, 3.0).unwrap();
        for (s, expect) in [(1.0f64, 3.0f64), (2.0, 3.0)] {
            let l = fb.eval_psi(s - 1e-9).unwrap();
            let r = fb.eval_psi(s + 1e-9).unwrap();
            assert!((l - expect).abs() < 1e-8 && (r - expect).abs() < 1e-8);
            assert!(fb.eval_psi_prime(s - 1e-9).unwrap().abs() < 1e-7);
            assert!(fb.eval_psi_prime(s + 1e-9).unwrap().abs() < 1e-7);
        }
        assert_eq!(fb.eval_psi(0.0).unwrap(), 0.0);
    }

    #[test]
    fn limits() {
        assert_eq!(SymbolSpec::fractional(0.3).unwrap().limit_at_zero(), 0.0);
        assert!(SymbolSpec::fractional(0.3f64).unwrap().limit_at_infinity().is_infinite());
        let t = Tabulated::new(vec![(0.0, 1.0), (2.0, 5.0)], None).unwrap();
        let tab = SymbolSpec::Tabulated(t);
        assert_eq!(tab.limit_at_zero(), 1.0);
        assert_eq!(tab.limit_at_infinity(), 5.0);
    }

    #[test]
    fn config_syntax() {
        let s: SymbolSpec<f64> = serde_json::from_str(r#"{ "kind": "fractional", "rho": 0.5 }"#).unwrap();
        assert_eq!(s, SymbolSpec::Fractional { rho: 0.5 });
        let t: SymbolSpec<f64> =
            serde_json::from_str(r#"{ "kind": "tabulated", "knots": [[0, 0], [1, 2], [3, 5]] }"#)
                .unwrap();
        assert_eq!(t.eval_psi(3.0).unwrap(), 5.0);
        assert!(serde_json::from_str::<SymbolSpec<f64>>(r#"{ "kind": "fractional", "rho": 0.5, "x": 1 }"#).is_err());
        assert!(serde_json::from_str::<SymbolSpec<f64>>(r#"{ "kind": "tabulated", "knots": [[0, 1]] }"#).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let s = SymbolSpec::<f32>::fractional(0.5).unwrap();
        assert!((s.group_speed_envelope(3.0f32).unwrap() - 0.5).abs() < 1e-6);
    }
}
