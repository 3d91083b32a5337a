//! Free evolution e^{−itΨ(|D|²)} as an exact Fourier multiplier, interacting
//! evolution by Strang splitting, and the Heisenberg position operator.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Domain, Lattice, WavePacket};
use crate::potential::PotentialSpec;
use crate::real::Real;
use crate::symbol::SymbolSpec;

/// Largest fraction of Fourier mass allowed where the symbol is undefined.
pub const SINGULAR_MASS_LIMIT: f64 = 1e-10;
/// Largest admissible phase per step dt·‖V‖_∞.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

fn check_grid<T: Real>(lattice: &Arc<Lattice<T>>, packet: &WavePacket<T>) -> Result<()> {
    if Arc::ptr_eq(lattice, packet.lattice()) || lattice.spec() == packet.lattice().spec() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Ψ(|ξ|²) tabulated on a lattice; frequencies where Ψ is undefined hold NaN.
#[derive(Clone, Debug)]
pub struct FreeEvolver<T: Real> {
    lattice: Arc<Lattice<T>>,
    symbol: SymbolSpec<T>,
    psi: Vec<T>,
}

impl<T: Real> FreeEvolver<T> {
    pub fn new(lattice: &Arc<Lattice<T>>, symbol: &SymbolSpec<T>) -> Result<Self> {
        symbol.validate()?;
        let psi = lattice
            .xi_sq()
            .iter()
            .map(|&s| symbol.eval_psi(s).unwrap_or(T::nan()))
            .collect();
        Ok(FreeEvolver {
            lattice: lattice.clone(),
            symbol: symbol.clone(),
            psi,
        })
    }

    pub fn symbol(&self) -> &SymbolSpec<T> {
        &self.symbol
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    /// Ψ(|ξ|²) at each Fourier index.
    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    fn check_support(&self, f: &WavePacket<T>) -> Result<()> {
        let (mut bad, mut total) = (T::zero(), T::zero());
        for (v, p) in f.values().iter().zip(&self.psi) {
            let m = v.norm_sqr();
            total = total + m;
            if p.is_nan() {
                bad = bad + m;
            }
        }
        if total > T::zero() && bad / total > T::lit(SINGULAR_MASS_LIMIT) {
            return Err(Error::SingularSupport { mass: (bad / total).as_f64() });
        }
        Ok(())
    }

    /// e^{−itΨ(|D|²)}φ, returned in position representation.
    pub fn evolve(&self, phi: &WavePacket<T>, t: T) -> Result<WavePacket<T>> {
        check_grid(&self.lattice, phi)?;
        let mut f = phi.to_fourier();
        self.check_support(&f)?;
        for (v, &p) in f.values_mut().iter_mut().zip(&self.psi) {
            if p.is_nan() {
                *v = Complex::new(T::zero(), T::zero());
            } else {
                *v = *v * Complex::from_polar(T::one(), -t * p);
            }
        }
        Ok(f.into_position())
    }
}

pub fn free_evolve<T: Real>(phi: &WavePacket<T>, symbol: &SymbolSpec<T>, t: T) -> Result<WavePacket<T>> {
    FreeEvolver::new(phi.lattice(), symbol)?.evolve(phi, t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingOrder {
    #[default]
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct EvolutionParams<T: Real> {
    pub symbol: SymbolSpec<T>,
    pub potential: Option<PotentialSpec<T>>,
    pub dt: T,
    #[serde(default)]
    pub splitting_order: SplittingOrder,
}

impl<T: Real> EvolutionParams<T> {
    pub fn new(symbol: SymbolSpec<T>, potential: Option<PotentialSpec<T>>, dt: T) -> Result<Self> {
        let p = EvolutionParams {
            symbol,
            potential,
            dt,
            splitting_order: SplittingOrder::Strang,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.symbol.validate()?;
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(Error::StepSize(format!("dt must be positive, got {}", self.dt)));
        }
        if let Some(v) = &self.potential {
            v.validate()?;
            let phase = self.dt * v.sup_norm();
            if phase >= T::lit(MAX_PHASE_PER_STEP) {
                return Err(Error::StepSize(format!(
                    "dt * sup|V| = {phase} must stay below {MAX_PHASE_PER_STEP}"
                )));
            }
        }
        Ok(())
    }
}

/// Strang split-step propagator for Ψ(−Δ) + V with a fixed step.
#[derive(Clone, Debug)]
pub struct SplitStepper<T: Real> {
    free: FreeEvolver<T>,
    potential: Option<Vec<T>>,
    dt: T,
}

impl<T: Real> SplitStepper<T> {
    pub fn new(lattice: &Arc<Lattice<T>>, params: &EvolutionParams<T>) -> Result<Self> {
        params.validate()?;
        let potential = match &params.potential {
            Some(v) => Some(v.sample(lattice)?),
            None => None,
        };
        Ok(SplitStepper {
            free: FreeEvolver::new(lattice, &params.symbol)?,
            potential,
            dt: params.dt,
        })
    }

    pub fn free(&self) -> &FreeEvolver<T> {
        &self.free
    }

    pub fn potential(&self) -> Option<&[T]> {
        self.potential.as_deref()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Number of steps covering |t|, or a step-size error when dt does not divide t.
    pub fn step_count(&self, t: T) -> Result<usize> {
        let ratio = t.abs() / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-9) * n.max(T::one()) {
            return Err(Error::StepSize(format!("dt = {} does not divide t = {t}", self.dt)));
        }
        n.to_usize()
            .ok_or_else(|| Error::StepSize(format!("step count for t = {t} is not representable")))
    }

    /// e^{−itH}φ for either sign of t, returned in position representation.
    pub fn evolve(&self, phi: &WavePacket<T>, t: T) -> Result<WavePacket<T>> {
        let steps = self.step_count(t)?;
        let Some(v) = &self.potential else {
            return self.free.evolve(phi, t);
        };
        check_grid(&self.free.lattice, phi)?;
        if steps == 0 {
            return Ok(phi.to_position());
        }
        let h = if t < T::zero() { -self.dt } else { self.dt };
        let half_h = h / T::lit(2.0);
        let half: Vec<Complex<T>> = v.iter().map(|&x| Complex::from_polar(T::one(), -half_h * x)).collect();
        let full: Vec<Complex<T>> = v.iter().map(|&x| Complex::from_polar(T::one(), -h * x)).collect();
        let kinetic: Vec<Complex<T>> = self
            .free
            .psi
            .iter()
            .map(|&p| {
                if p.is_nan() {
                    Complex::new(T::zero(), T::zero())
                } else {
                    Complex::from_polar(T::one(), -h * p)
                }
            })
            .collect();
        self.free.check_support(&phi.to_fourier())?;

        let apply = |packet: &mut WavePacket<T>, phase: &[Complex<T>]| {
            for (x, p) in packet.values_mut().iter_mut().zip(phase) {
                *x = *x * p;
            }
        };
        let mut state = phi.to_position();
        apply(&mut state, &half);
        for step in 0..steps {
            let mut f = state.into_fourier();
            apply(&mut f, &kinetic);
            state = f.into_position();
            apply(&mut state, if step + 1 == steps { &half } else { &full });
        }
        Ok(state)
    }
}

pub fn full_evolve<T: Real>(phi: &WavePacket<T>, params: &EvolutionParams<T>, t: T) -> Result<WavePacket<T>> {
    SplitStepper::new(phi.lattice(), params)?.evolve(phi, t)
}

/// Components of (x + 2tΨ′(|D|²)D)φ and their aggregate norm.
#[derive(Clone, Debug)]
pub struct HeisenbergPosition<T: Real> {
    pub components: Vec<WavePacket<T>>,
    pub norm: T,
}

pub fn heisenberg_position<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    t: T,
) -> Result<HeisenbergPosition<T>> {
    symbol.validate()?;
    let lattice = phi.lattice().clone();
    let f = phi.to_fourier();
    let p = phi.to_position();
    let (mut bad, mut total) = (T::zero(), T::zero());
    let slope: Vec<T> = lattice
        .xi_sq()
        .iter()
        .zip(f.values())
        .map(|(&s, v)| {
            total = total + v.norm_sqr();
            symbol.eval_psi_prime(s).unwrap_or_else(|_| {
                bad = bad + v.norm_sqr();
                T::zero()
            })
        })
        .collect();
    if total > T::zero() && bad / total > T::lit(SINGULAR_MASS_LIMIT) {
        return Err(Error::SingularSupport { mass: (bad / total).as_f64() });
    }
    let two_t = T::lit(2.0) * t;
    let mut components = Vec::with_capacity(lattice.dim());
    let mut norm_sq = T::zero();
    for axis in 0..lattice.dim() {
        let momentum: Vec<Complex<T>> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| *v * (two_t * slope[i] * lattice.frequency(i, axis)))
            .collect();
        let momentum = WavePacket::from_raw(lattice.clone(), momentum, Domain::Fourier).into_position();
        let values: Vec<Complex<T>> = p
            .values()
            .iter()
            .zip(momentum.values())
            .enumerate()
            .map(|(i, (v, m))| *v * lattice.position(i, axis) + m)
            .collect();
        let c = WavePacket::from_raw(lattice.clone(), values, Domain::Position);
        norm_sq = norm_sq + c.norm_sq();
        components.push(c);
    }
    Ok(HeisenbergPosition {
        components,
        norm: norm_sq.sqrt(),
    })
}

/// 2‖xφ‖² + 8n t² v² ‖φ‖², with v the envelope at the band edge matching the direction.
pub fn heisenberg_quadratic_bound<T: Real>(x_norm: T, norm: T, dim: usize, t: T, edge_envelope: T) -> T {
    T::lit(2.0) * x_norm * x_norm
        + T::lit(8.0) * T::from_usize_lossy(dim) * t * t * edge_envelope * edge_envelope * norm * norm
}
