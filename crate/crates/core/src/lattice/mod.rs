//! Periodic grids, the continuum-normalised discrete Fourier transform and
//! wave packets living on them.
//!
//! Positions are x_j = −L + jΔx with Δx = 2L/M; frequencies are
//! ξ_k = (k − M/2)Δξ with Δξ = π/L. The transform approximates
//! (2π)^{−n/2} ∫ e^{−ix·ξ} φ(x) dx, so Parseval holds with weights Δxⁿ and Δξⁿ.

mod annulus;
mod io;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub use annulus::{make_annulus_packet, AnnulusSpec, TransitionProfile, TAIL_MASS_LIMIT};
pub use io::{load_binary, read_binary, write_binary, write_csv, BINARY_MAGIC};

/// Largest total number of grid points accepted.
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct GridSpec<T> {
    pub dim: usize,
    pub points_per_dim: usize,
    pub half_length: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, points_per_dim: usize, half_length: T) -> Result<Self> {
        let g = GridSpec {
            dim,
            points_per_dim,
            half_length,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidGrid(format!("dim must be 1, 2 or 3, got {}", self.dim)));
        }
        if self.points_per_dim < 4 || !self.points_per_dim.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_dim must be a power of two >= 4, got {}",
                self.points_per_dim
            )));
        }
        if !(self.half_length > T::zero() && self.half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half_length must be positive and finite, got {}",
                self.half_length
            )));
        }
        let total = self
            .points_per_dim
            .checked_pow(self.dim as u32)
            .filter(|&n| n <= MAX_POINTS);
        if total.is_none() {
            return Err(Error::InvalidGrid(format!(
                "{}^{} points exceed the memory cap of {MAX_POINTS}",
                self.points_per_dim, self.dim
            )));
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        self.points_per_dim.pow(self.dim as u32)
    }

    pub fn dx(&self) -> T {
        T::lit(2.0) * self.half_length / T::from_usize_lossy(self.points_per_dim)
    }

    pub fn dxi(&self) -> T {
        T::PI() / self.half_length
    }

    pub fn xi_max(&self) -> T {
        T::PI() * T::from_usize_lossy(self.points_per_dim) / (T::lit(2.0) * self.half_length)
    }
}

/// A validated grid with cached coordinates and FFT plans. Shared through `Arc`.
pub struct Lattice<T: Real> {
    spec: GridSpec<T>,
    axis_x: Vec<T>,
    axis_xi: Vec<T>,
    r_sq: Vec<T>,
    xi_sq: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Lattice<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice").field("spec", &self.spec).finish_non_exhaustive()
    }
}

impl<T: Real> Lattice<T> {
    pub fn new(spec: GridSpec<T>) -> Result<Arc<Self>> {
        spec.validate()?;
        let m = spec.points_per_dim;
        let (dx, dxi) = (spec.dx(), spec.dxi());
        let half = T::from_usize_lossy(m / 2);
        let axis_x: Vec<T> = (0..m)
            .map(|j| -spec.half_length + dx * T::from_usize_lossy(j))
            .collect();
        let axis_xi: Vec<T> = (0..m).map(|k| (T::from_usize_lossy(k) - half) * dxi).collect();
        let total = spec.total_points();
        let mut r_sq = vec![T::zero(); total];
        let mut xi_sq = vec![T::zero(); total];
        for idx in 0..total {
            let mut rest = idx;
            for _ in 0..spec.dim {
                let j = rest % m;
                rest /= m;
                r_sq[idx] = r_sq[idx] + axis_x[j] * axis_x[j];
                xi_sq[idx] = xi_sq[idx] + axis_xi[j] * axis_xi[j];
            }
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        Ok(Arc::new(Lattice {
            spec,
            axis_x,
            axis_xi,
            r_sq,
            xi_sq,
            forward,
            inverse,
        }))
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn len(&self) -> usize {
        self.r_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_sq.is_empty()
    }

    pub fn axis_positions(&self) -> &[T] {
        &self.axis_x
    }

    pub fn axis_frequencies(&self) -> &[T] {
        &self.axis_xi
    }

    /// |x|² at every flat index (row-major, last axis fastest).
    pub fn r_sq(&self) -> &[T] {
        &self.r_sq
    }

    /// |ξ|² at every flat index.
    pub fn xi_sq(&self) -> &[T] {
        &self.xi_sq
    }

    fn axis_index(&self, idx: usize, axis: usize) -> usize {
        let m = self.spec.points_per_dim;
        (idx / m.pow((self.spec.dim - 1 - axis) as u32)) % m
    }

    /// x_axis at a flat index.
    pub fn position(&self, idx: usize, axis: usize) -> T {
        self.axis_x[self.axis_index(idx, axis)]
    }

    /// ξ_axis at a flat index.
    pub fn frequency(&self, idx: usize, axis: usize) -> T {
        self.axis_xi[self.axis_index(idx, axis)]
    }

    /// Δxⁿ.
    pub fn position_measure(&self) -> T {
        self.spec.dx().powi(self.spec.dim as i32)
    }

    /// Δξⁿ.
    pub fn frequency_measure(&self) -> T {
        self.spec.dxi().powi(self.spec.dim as i32)
    }

    fn transform(&self, data: &mut [Complex<T>], forward: bool) {
        let m = self.spec.points_per_dim;
        let dim = self.spec.dim;
        let half = m / 2;
        let plan = if forward { &self.forward } else { &self.inverse };
        let step = if forward { self.spec.dx() } else { self.spec.dxi() };
        let scale = step / T::TAU().sqrt();
        let sign = |i: usize| if i.is_multiple_of(2) { T::one() } else { -T::one() };
        let mut line = vec![Complex::new(T::zero(), T::zero()); m];
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        for axis in 0..dim {
            let stride = m.pow((dim - 1 - axis) as u32);
            let block = stride * m;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, v) in line.iter_mut().enumerate() {
                        let s = if forward { sign(j) } else { sign(j + half) };
                        *v = data[base + j * stride] * s;
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        let s = if forward { sign(k + half) } else { sign(k) };
                        data[base + k * stride] = *v * (s * scale);
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Position,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeMassResult<T> {
    pub t: T,
    pub threshold_speed: T,
    pub inside_mass: T,
    pub outside_mass: T,
}

/// Complex field on a lattice, held in one representation at a time.
#[derive(Clone, Debug)]
pub struct WavePacket<T: Real> {
    lattice: Arc<Lattice<T>>,
    values: Vec<Complex<T>>,
    domain: Domain,
}

impl<T: Real> WavePacket<T> {
    pub fn from_values(lattice: Arc<Lattice<T>>, values: Vec<Complex<T>>, domain: Domain) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::InvalidPacket(format!(
                "{} values for a grid of {} points",
                values.len(),
                lattice.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidPacket("values must be finite".into()));
        }
        Ok(WavePacket {
            lattice,
            values,
            domain,
        })
    }

    pub(crate) fn from_raw(lattice: Arc<Lattice<T>>, values: Vec<Complex<T>>, domain: Domain) -> Self {
        debug_assert_eq!(values.len(), lattice.len());
        WavePacket {
            lattice,
            values,
            domain,
        }
    }

    /// Samples `f` at every grid position; `f` receives the coordinate vector.
    pub fn from_fn(lattice: &Arc<Lattice<T>>, mut f: impl FnMut(&[T]) -> Complex<T>) -> Self {
        let dim = lattice.dim();
        let mut x = vec![T::zero(); dim];
        let values = (0..lattice.len())
            .map(|idx| {
                for (axis, xa) in x.iter_mut().enumerate() {
                    *xa = lattice.position(idx, axis);
                }
                f(&x)
            })
            .collect();
        Self::from_raw(lattice.clone(), values, Domain::Position)
    }

    /// e^{iξ·x} at the grid frequency with per-axis index `k` (ξ_k = (k − M/2)Δξ).
    pub fn plane_wave(lattice: &Arc<Lattice<T>>, k: &[usize]) -> Result<Self> {
        let m = lattice.spec().points_per_dim;
        if k.len() != lattice.dim() || k.iter().any(|&ki| ki >= m) {
            return Err(Error::InvalidPacket(format!("frequency index {k:?} not on the grid")));
        }
        let xi: Vec<T> = k.iter().map(|&ki| lattice.axis_frequencies()[ki]).collect();
        Ok(Self::from_fn(lattice, |x| {
            let phase = x.iter().zip(&xi).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            Complex::from_polar(T::one(), phase)
        }))
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn to_fourier(&self) -> Self {
        self.clone().into_fourier()
    }

    pub fn to_position(&self) -> Self {
        self.clone().into_position()
    }

    pub fn into_fourier(mut self) -> Self {
        if self.domain == Domain::Position {
            self.lattice.transform(&mut self.values, true);
            self.domain = Domain::Fourier;
        }
        self
    }

    pub fn into_position(mut self) -> Self {
        if self.domain == Domain::Fourier {
            self.lattice.transform(&mut self.values, false);
            self.domain = Domain::Position;
        }
        self
    }

    fn measure(&self) -> T {
        match self.domain {
            Domain::Position => self.lattice.position_measure(),
            Domain::Fourier => self.lattice.frequency_measure(),
        }
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()) * self.measure()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.lattice, &other.lattice) || self.lattice.spec == other.lattice.spec {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// ⟨self, other⟩, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex<T>> {
        self.same_grid(other)?;
        let sum = |a: &[Complex<T>], b: &[Complex<T>]| {
            a.iter()
                .zip(b)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
        };
        let s = if self.domain == other.domain {
            sum(&self.values, &other.values)
        } else {
            let o = other.clone().into_position();
            let me = self.to_position();
            sum(&me.values, &o.values)
        };
        let w = if self.domain == other.domain {
            self.measure()
        } else {
            self.lattice.position_measure()
        };
        Ok(s * w)
    }

    /// self − other in the representation of `self`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let o = match self.domain {
            Domain::Position => other.to_position(),
            Domain::Fourier => other.to_fourier(),
        };
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.lattice.clone(), values, self.domain))
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        Self::from_raw(self.lattice.clone(), values, self.domain)
    }

    /// Multiplies pointwise by a real position-space field.
    pub fn multiply_position(&self, field: &[T]) -> Result<Self> {
        if field.len() != self.lattice.len() {
            return Err(Error::GridMismatch);
        }
        let p = self.to_position();
        let values = p.values.iter().zip(field).map(|(v, &f)| v * f).collect();
        Ok(Self::from_raw(self.lattice.clone(), values, Domain::Position))
    }

    fn position_sum(&self, mut weight: impl FnMut(usize) -> T) -> T {
        let p = match self.domain {
            Domain::Position => std::borrow::Cow::Borrowed(self),
            Domain::Fourier => std::borrow::Cow::Owned(self.to_position()),
        };
        p.values
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, v)| acc + v.norm_sqr() * weight(i))
            * self.lattice.position_measure()
    }

    /// ‖⟨x⟩^N φ‖ with ⟨x⟩ = √(1 + |x|²).
    pub fn position_weighted_norm(&self, n: u32) -> Result<T> {
        let r_sq = self.lattice.r_sq();
        let v = self.position_sum(|i| (T::one() + r_sq[i]).powi(n as i32)).sqrt();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow)
        }
    }

    /// ‖|x|φ‖.
    pub fn x_norm(&self) -> T {
        let r_sq = self.lattice.r_sq();
        self.position_sum(|i| r_sq[i]).sqrt()
    }

    /// Mass inside and outside the ball |x| ≤ speed·t.
    pub fn cone_mass(&self, speed: T, t: T) -> Result<ConeMassResult<T>> {
        let radius = speed * t;
        if !(speed > T::zero() && t > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "cone mass needs speed > 0 and t > 0, got {speed}, {t}"
            )));
        }
        let limit = self.lattice.spec.half_length;
        if radius >= limit {
            return Err(Error::ConeExceedsBox {
                radius: radius.as_f64(),
                limit: limit.as_f64(),
            });
        }
        let (inside, outside) = self.ball_masses(radius);
        Ok(ConeMassResult {
            t,
            threshold_speed: speed,
            inside_mass: inside,
            outside_mass: outside,
        })
    }

    /// (mass in |x| ≤ radius, mass outside), no box check.
    pub fn ball_masses(&self, radius: T) -> (T, T) {
        let r_sq = self.lattice.r_sq();
        let cut = radius * radius;
        let inside = self.position_sum(|i| if r_sq[i] <= cut { T::one() } else { T::zero() });
        let outside = self.position_sum(|i| if r_sq[i] > cut { T::one() } else { T::zero() });
        (inside, outside)
    }

    /// Fraction of ‖φ‖² at |x| ≥ L/2.
    pub fn tail_fraction(&self) -> T {
        let half = self.lattice.spec.half_length / T::lit(2.0);
        let (_, outside) = self.ball_masses(half);
        outside / self.norm_sq()
    }
}
