//! Radial decaying potentials: short-range C⟨x⟩^{−γ} (γ > 1) and the
//! long-range family κ⟨x⟩^{−γ} (0 < γ ≤ 1).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::real::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields, bound = "T: Real")]
pub enum ShortRangeProfile<T> {
    #[default]
    ExactPower,
    /// C⟨x⟩^{−γ} times a smooth bump vanishing for |x| ≥ cutoff.
    CompactBump { cutoff: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields, bound = "T: Real")]
pub enum PotentialSpec<T> {
    ShortRange {
        c: T,
        gamma: T,
        #[serde(default)]
        profile: ShortRangeProfile<T>,
    },
    LongRange {
        kappa: T,
        gamma: T,
    },
}

impl<T: Real> PotentialSpec<T> {
    pub fn short_range(c: T, gamma: T) -> Result<Self> {
        let p = PotentialSpec::ShortRange {
            c,
            gamma,
            profile: ShortRangeProfile::ExactPower,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn compact_bump(c: T, gamma: T, cutoff: T) -> Result<Self> {
        let p = PotentialSpec::ShortRange {
            c,
            gamma,
            profile: ShortRangeProfile::CompactBump { cutoff },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn long_range(kappa: T, gamma: T) -> Result<Self> {
        let p = PotentialSpec::LongRange { kappa, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::ShortRange { c, gamma, profile } => {
                if !(c > T::zero() && c.is_finite()) {
                    return Err(Error::InvalidPotential(format!("short_range constant c must be positive, got {c}")));
                }
                if !(gamma > T::one() && gamma.is_finite()) {
                    return Err(Error::InvalidPotential(format!(
                        "short-range decay assumption needs gamma > 1 strictly, got {gamma}; \
                         exponents in (0, 1] belong to the long_range family"
                    )));
                }
                if let ShortRangeProfile::CompactBump { cutoff } = profile {
                    if !(cutoff > T::zero() && cutoff.is_finite()) {
                        return Err(Error::InvalidPotential(format!("bump cutoff must be positive, got {cutoff}")));
                    }
                }
            }
            PotentialSpec::LongRange { kappa, gamma } => {
                if kappa == T::zero() || !kappa.is_finite() {
                    return Err(Error::InvalidPotential(format!("long_range kappa must be finite and nonzero, got {kappa}")));
                }
                if !(gamma > T::zero() && gamma <= T::one()) {
                    return Err(Error::InvalidPotential(format!(
                        "long-range family needs 0 < gamma <= 1, got {gamma}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            PotentialSpec::ShortRange { .. } => "short_range",
            PotentialSpec::LongRange { .. } => "long_range",
        }
    }

    pub fn is_long_range(&self) -> bool {
        matches!(self, PotentialSpec::LongRange { .. })
    }

    pub fn gamma(&self) -> T {
        match *self {
            PotentialSpec::ShortRange { gamma, .. } | PotentialSpec::LongRange { gamma, .. } => gamma,
        }
    }

    /// Signed amplitude at the origin: C or κ.
    pub fn amplitude(&self) -> T {
        match *self {
            PotentialSpec::ShortRange { c, .. } => c,
            PotentialSpec::LongRange { kappa, .. } => kappa,
        }
    }

    /// ‖V‖_∞, attained at x = 0.
    pub fn sup_norm(&self) -> T {
        self.amplitude().abs()
    }

    /// V at a point with |x|² = r_sq.
    pub fn value_at(&self, r_sq: T) -> T {
        let power = (T::one() + r_sq).powf(-self.gamma() / T::lit(2.0));
        match *self {
            PotentialSpec::ShortRange { c, profile, .. } => match profile {
                ShortRangeProfile::ExactPower => c * power,
                ShortRangeProfile::CompactBump { cutoff } => {
                    let u2 = r_sq / (cutoff * cutoff);
                    if u2 >= T::one() {
                        T::zero()
                    } else {
                        c * power * (T::one() - T::one() / (T::one() - u2)).exp()
                    }
                }
            },
            PotentialSpec::LongRange { kappa, .. } => kappa * power,
        }
    }

    pub fn sample(&self, lattice: &Lattice<T>) -> Result<Vec<T>> {
        self.validate()?;
        Ok(lattice.r_sq().iter().map(|&r| self.value_at(r)).collect())
    }

    /// Checks the declared bound |V(x)| ≤ |amplitude|·⟨x⟩^{−γ} on a fresh sample.
    pub fn decay_bound_check(&self, lattice: &Lattice<T>) -> Result<DecayReport<T>> {
        let field = self.sample(lattice)?;
        Ok(check_decay_bound(&field, lattice, self.sup_norm(), self.gamma()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayReport<T> {
    pub holds: bool,
    /// Flat index and |V(x)| / (bound at x) of the worst point.
    pub worst_index: usize,
    pub worst_ratio: T,
    pub worst_radius: T,
}

/// |field(x)| ≤ constant·⟨x⟩^{−γ} at every grid point, with 1e-12 relative slack.
pub fn check_decay_bound<T: Real>(field: &[T], lattice: &Lattice<T>, constant: T, gamma: T) -> DecayReport<T> {
    let mut worst = (0, T::neg_infinity());
    for (i, (&v, &r)) in field.iter().zip(lattice.r_sq()).enumerate() {
        let bound = constant * (T::one() + r).powf(-gamma / T::lit(2.0));
        let ratio = v.abs() / bound;
        if ratio > worst.1 {
            worst = (i, ratio);
        }
    }
    DecayReport {
        holds: worst.1 <= T::one() + T::lit(1e-12),
        worst_index: worst.0,
        worst_ratio: worst.1,
        worst_radius: lattice.r_sq()[worst.0].sqrt(),
    }
}

/// CSV with the position coordinates and the sampled value.
pub fn write_potential_csv<T: Real, W: Write>(field: &[T], lattice: &Lattice<T>, mut out: W) -> Result<()> {
    let dim = lattice.dim();
    if field.len() != lattice.len() {
        return Err(Error::GridMismatch);
    }
    let header: Vec<String> = match dim {
        1 => vec!["x".into()],
        _ => (0..dim).map(|a| format!("x{a}")).collect(),
    };
    writeln!(out, "{},v", header.join(","))?;
    for (idx, v) in field.iter().enumerate() {
        for axis in 0..dim {
            write!(out, "{:.16e},", lattice.position(idx, axis).as_f64())?;
        }
        writeln!(out, "{:.16e}", v.as_f64())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::GridSpec;
    use std::sync::Arc;

    fn lattice() -> Arc<Lattice<f64>> {
        Lattice::new(GridSpec::new(1, 256, 20.0).unwrap()).unwrap()
    }

    #[test]
    fn long_range_values() {
        let v = PotentialSpec::long_range(1.0f64, 1.0).unwrap();
        assert_eq!(v.value_at(0.0), 1.0);
        assert!((v.value_at(3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponent_ranges() {
        assert!(PotentialSpec::short_range(1.0, 1.0).is_err());
        assert!(PotentialSpec::short_range(1.0, 1.0 + 1e-9).is_ok());
        assert!(PotentialSpec::short_range(0.0, 2.0).is_err());
        assert!(PotentialSpec::long_range(1.0, 1.0).is_ok());
        assert!(PotentialSpec::long_range(1.0, 1.2).is_err());
        assert!(PotentialSpec::long_range(1.0, 0.0).is_err());
        assert!(PotentialSpec::long_range(0.0, 0.5).is_err());
        assert!(PotentialSpec::long_range(-2.0, 0.5).is_ok());
        let msg = PotentialSpec::short_range(1.0, 0.9).unwrap_err().to_string();
        assert!(msg.contains("short-range decay assumption"));
    }

    #[test]
    fn sampled_sup_is_attained_at_origin() {
        let lat = lattice();
        for p in [
            PotentialSpec::short_range(2.0, 1.5).unwrap(),
            PotentialSpec::compact_bump(2.0, 3.0, 5.0).unwrap(),
            PotentialSpec::long_range(-0.7, 0.5).unwrap(),
        ] {
            let field = p.sample(&lat).unwrap();
            let max = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert_eq!(max, p.sup_norm());
            assert_eq!(field[128], p.amplitude());
        }
    }

    #[test]
    fn decay_checks() {
        let lat = lattice();
        for p in [
            PotentialSpec::short_range(1.0, 2.0).unwrap(),
            PotentialSpec::compact_bump(1.0, 3.0, 4.0).unwrap(),
            PotentialSpec::long_range(1.0, 0.5).unwrap(),
        ] {
            assert!(p.decay_bound_check(&lat).unwrap().holds);
        }
        let p = PotentialSpec::short_range(1.0, 2.0).unwrap();
        let mut field = p.sample(&lat).unwrap();
        field[200] *= 2.0;
        let report = check_decay_bound(&field, &lat, 1.0, 2.0);
        assert!(!report.holds);
        assert_eq!(report.worst_index, 200);
        assert!((report.worst_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn radial_and_monotone() {
        let lat = lattice();
        let p = PotentialSpec::long_range(1.0, 0.8).unwrap();
        let field = p.sample(&lat).unwrap();
        for k in 1..128 {
            assert!((field[128 + k] - field[128 - k]).abs() <= 1e-15);
            assert!(field[128 + k] <= field[128 + k - 1]);
        }
    }

    #[test]
    fn config_syntax() {
        let p: PotentialSpec<f64> =
            serde_json::from_str(r#"{ "family": "long_range", "kappa": 1.0, "gamma": 0.5 }"#).unwrap();
        assert_eq!(p, PotentialSpec::long_range(1.0, 0.5).unwrap());
        let p: PotentialSpec<f64> = serde_json::from_str(
            r#"{ "family": "short_range", "c": 1.0, "gamma": 3.0, "profile": { "compact_bump": { "cutoff": 8.0 } } }"#,
        )
        .unwrap();
        assert!(matches!(p, PotentialSpec::ShortRange { profile: ShortRangeProfile::CompactBump { .. }, .. }));
        assert!(serde_json::from_str::<PotentialSpec<f64>>(
            r#"{ "family": "long_range", "kappa": { "re": 1.0, "im": 0.5 }, "gamma": 0.5 }"#
        )
        .is_err());
        assert!(serde_json::from_str::<PotentialSpec<f64>>(r#"{ "family": "long_range", "kappa": 1.0, "gamma": 0.5, "x": 1 }"#).is_err());
    }

    #[test]
    fn csv_export() {
        let lat = lattice();
        let p = PotentialSpec::long_range(1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_potential_csv(&p.sample(&lat).unwrap(), &lat, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,v\n"));
        assert_eq!(text.lines().count(), 257);
    }
}
