use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Domain, Lattice, WavePacket};
use crate::error::{Error, Result};
use crate::real::Real;

/// Largest fraction of ‖φ‖² allowed at |x| ≥ L/2 for a freshly built packet.
pub const TAIL_MASS_LIMIT: f64 = 1e-8;

/// Edge ramp of the Fourier bump, rising from 0 at u = 0 to 1 at u = 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionProfile {
    /// sin²(πu/2), C¹.
    SquaredCosine,
    /// u⁴(35 − 84u + 70u² − 20u³), C³.
    #[default]
    Septic,
    /// e^{−1/u} / (e^{−1/u} + e^{−1/(1−u)}), C∞.
    Smooth,
}

impl TransitionProfile {
    pub fn ramp<T: Real>(self, u: T) -> T {
        if u <= T::zero() {
            return T::zero();
        }
        if u >= T::one() {
            return T::one();
        }
        match self {
            TransitionProfile::SquaredCosine => (T::FRAC_PI_2() * u).sin().powi(2),
            TransitionProfile::Septic => {
                let u4 = u.powi(4);
                u4 * (T::lit(35.0) + u * (T::lit(-84.0) + u * (T::lit(70.0) - T::lit(20.0) * u)))
            }
            TransitionProfile::Smooth => {
                let a = (-T::one() / u).exp();
                let b = (-T::one() / (T::one() - u)).exp();
                a / (a + b)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct AnnulusSpec<T> {
    pub eps: T,
    pub r: T,
    pub center: Vec<T>,
    pub smoothness: T,
    #[serde(default)]
    pub profile: TransitionProfile,
}

impl<T: Real> AnnulusSpec<T> {
    pub fn new(eps: T, r: T, center: Vec<T>, smoothness: T) -> Self {
        AnnulusSpec {
            eps,
            r,
            center,
            smoothness,
            profile: TransitionProfile::default(),
        }
    }

    pub fn with_profile(mut self, profile: TransitionProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn validate(&self, lattice: &Lattice<T>) -> Result<()> {
        let (eps, r) = (self.eps, self.r);
        if !(eps > T::zero() && r > eps && r.is_finite()) {
            return Err(Error::InvalidPacket(format!("need 0 < eps < R, got eps = {eps}, R = {r}")));
        }
        let xi_max = lattice.spec().xi_max();
        if r >= xi_max {
            return Err(Error::AnnulusOutsideGrid {
                r: r.as_f64(),
                xi_max: xi_max.as_f64(),
            });
        }
        if self.center.len() != lattice.dim() {
            return Err(Error::InvalidPacket(format!(
                "center momentum has {} components on a {}-dimensional grid",
                self.center.len(),
                lattice.dim()
            )));
        }
        let c = self.center.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        if !(c > eps && c < r) {
            return Err(Error::InvalidPacket(format!(
                "|center momentum| = {c} must lie strictly inside ({eps}, {r})"
            )));
        }
        if !(self.smoothness > T::zero() && self.smoothness <= T::one()) {
            return Err(Error::InvalidPacket(format!(
                "smoothness must lie in (0, 1], got {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    /// Unnormalised Fourier profile at frequency ξ.
    fn profile_at(&self, xi: &[T]) -> T {
        let rho = xi.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        if rho < self.eps || rho > self.r {
            return T::zero();
        }
        let width = self.smoothness * (self.r - self.eps);
        let edge = self.profile.ramp((rho - self.eps) / width) * self.profile.ramp((self.r - rho) / width);
        let s = (self.r - self.eps) / T::lit(4.0);
        let d2 = xi.iter().zip(&self.center).fold(T::zero(), |a, (&x, &c)| a + (x - c) * (x - c));
        edge * (-d2 / (T::lit(2.0) * s * s)).exp()
    }
}

/// Unit-norm packet whose Fourier transform is a smooth bump inside
/// ε ≤ |ξ| ≤ R centred at the given momentum, concentrated near x = 0.
pub fn make_annulus_packet<T: Real>(lattice: &Arc<Lattice<T>>, spec: &AnnulusSpec<T>) -> Result<WavePacket<T>> {
    spec.validate(lattice)?;
    let dim = lattice.dim();
    let mut xi = vec![T::zero(); dim];
    let values: Vec<Complex<T>> = (0..lattice.len())
        .map(|idx| {
            for (axis, x) in xi.iter_mut().enumerate() {
                *x = lattice.frequency(idx, axis);
            }
            Complex::new(spec.profile_at(&xi), T::zero())
        })
        .collect();
    let f = WavePacket::from_raw(lattice.clone(), values, Domain::Fourier);
    let norm = f.norm();
    if !(norm > T::zero()) {
        return Err(Error::InvalidPacket("annulus holds no grid frequencies".into()));
    }
    let packet = f.scaled(Complex::new(norm.recip(), T::zero())).into_position();
    let tail = packet.tail_fraction();
    if tail > T::lit(TAIL_MASS_LIMIT) {
        return Err(Error::TailsTooHeavy {
            fraction: tail.as_f64(),
            limit: TAIL_MASS_LIMIT,
        });
    }
    Ok(packet)
}

#[cfg(test)]
mod tests {
    use super::super::GridSpec;
    use super::*;

    fn example() -> (Arc<Lattice<f64>>, WavePacket<f64>) {
        let lat = Lattice::new(GridSpec::new(1, 4096, 200.0).unwrap()).unwrap();
        let spec = AnnulusSpec::new(0.5, 2.0, vec![1.0], 0.2);
        let p = make_annulus_packet(&lat, &spec).unwrap();
        (lat, p)
    }

    #[test]
    fn ramps_are_monotone_and_pinned() {
        for prof in [TransitionProfile::SquaredCosine, TransitionProfile::Septic, TransitionProfile::Smooth] {
            assert_eq!(prof.ramp(0.0), 0.0);
            assert_eq!(prof.ramp(1.0), 1.0);
            assert!((prof.ramp(0.5f64) - 0.5).abs() < 1e-15);
            let mut prev = 0.0;
            for i in 1..=100 {
                let v = prof.ramp(i as f64 / 100.0);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn example_packet() {
        let (lat, p) = example();
        assert!((p.norm() - 1.0).abs() < 1e-12);
        let f = p.to_fourier();
        let peak = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut outside = 0.0;
        for (k, v) in f.values().iter().enumerate() {
            let xi = lat.axis_frequencies()[k].abs();
            if !(0.5..=2.0).contains(&xi) {
                assert!(v.norm() <= 1e-12 * peak);
                outside += v.norm_sqr() * lat.frequency_measure();
            }
        }
        assert!(outside <= 1e-20);
        // regression baseline from an independent numpy construction: 2.91
        let xn = p.x_norm();
        assert!(xn < 50.0);
        assert!((xn - 2.91).abs() < 0.01, "‖xφ‖ = {xn}");
    }

    #[test]
    fn rejects_bad_annuli() {
        let lat = Lattice::new(GridSpec::new(1, 4096, 200.0).unwrap()).unwrap();
        let bad_center = AnnulusSpec::new(0.5, 2.0, vec![0.1], 0.2);
        assert!(matches!(make_annulus_packet(&lat, &bad_center), Err(Error::InvalidPacket(_))));
        let too_wide = AnnulusSpec::new(0.5, 40.0, vec![1.0], 0.2);
        assert!(matches!(make_annulus_packet(&lat, &too_wide), Err(Error::AnnulusOutsideGrid { .. })));
        let small = Lattice::new(GridSpec::new(1, 256, 8.0).unwrap()).unwrap();
        let heavy = AnnulusSpec::new(1.0, 2.0, vec![1.5], 0.5);
        assert!(matches!(make_annulus_packet(&small, &heavy), Err(Error::TailsTooHeavy { .. })));
    }

    #[test]
    fn two_dimensional_annulus() {
        let lat = Lattice::new(GridSpec::new(2, 512, 150.0f64).unwrap()).unwrap();
        let spec = AnnulusSpec::new(1.0, 2.0, vec![1.0, 0.8], 0.5);
        let p = make_annulus_packet(&lat, &spec).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }
}
