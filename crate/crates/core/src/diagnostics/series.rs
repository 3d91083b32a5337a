use std::sync::Arc;

use rayon::prelude::*;

use super::{fit_log_model, BoundConstants, Quantity, TimeSeries};
use crate::error::{Error, Result};
use crate::evolution::{heisenberg_position, EvolutionParams, FreeEvolver, SplitStepper};
use crate::lattice::{Lattice, WavePacket};
use crate::potential::PotentialSpec;
use crate::real::Real;
use crate::symbol::{cone_threshold, ConeMode, SymbolSpec};

/// Fraction of the box half length beyond which an evolved packet triggers a warning.
const BOX_WARNING_RADIUS: f64 = 0.9;
const BOX_WARNING_MASS: f64 = 1e-8;

fn check_times<T: Real>(times: &[T], min: T) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times given".into()));
    }
    if times.iter().any(|&t| !(t >= min && t.is_finite())) {
        return Err(Error::InvalidArgument(format!("sample times must be finite and >= {min}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample times must increase strictly".into()));
    }
    Ok(())
}

fn warn_near_boundary<T: Real>(packet: &WavePacket<T>, t: T) {
    let radius = T::lit(BOX_WARNING_RADIUS) * packet.lattice().spec().half_length;
    let (_, outside) = packet.ball_masses(radius);
    let fraction = outside / packet.norm_sq();
    if fraction > T::lit(BOX_WARNING_MASS) {
        log::warn!("at t = {t} a fraction {fraction} of the packet sits near the box boundary");
    }
}

fn sample_potential<T: Real>(lattice: &Lattice<T>, potential: Option<&PotentialSpec<T>>) -> Result<Vec<T>> {
    match potential {
        Some(v) => v.sample(lattice),
        None => Ok(vec![T::zero(); lattice.len()]),
    }
}

fn field_norm<T: Real>(packet: &WavePacket<T>, field: &[T]) -> T {
    let sum = packet
        .values()
        .iter()
        .zip(field)
        .fold(T::zero(), |acc, (v, &f)| acc + v.norm_sqr() * f * f);
    (sum * packet.lattice().position_measure()).sqrt()
}

/// ‖V e^{−itH₀}φ‖ at each time; `None` stands for V ≡ 0.
pub fn cook_integrand_series<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    potential: Option<&PotentialSpec<T>>,
    times: &[T],
) -> Result<TimeSeries<T>> {
    check_times(times, T::min_positive_value())?;
    let free = FreeEvolver::new(phi.lattice(), symbol)?;
    let field = sample_potential(phi.lattice(), potential)?;
    let samples = times
        .par_iter()
        .map(|&t| {
            let state = free.evolve(phi, t)?;
            warn_near_boundary(&state, t);
            Ok((t, field_norm(&state, &field)))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::CookIntegrand, samples)
}

/// Ω(t)φ = e^{itH}e^{−itH₀}φ with the interacting factor by time-reversed splitting.
#[derive(Clone, Debug)]
pub struct OmegaEvaluator<T: Real> {
    free: FreeEvolver<T>,
    stepper: SplitStepper<T>,
}

impl<T: Real> OmegaEvaluator<T> {
    pub fn new(lattice: &Arc<Lattice<T>>, params: &EvolutionParams<T>) -> Result<Self> {
        Ok(OmegaEvaluator {
            free: FreeEvolver::new(lattice, &params.symbol)?,
            stepper: SplitStepper::new(lattice, params)?,
        })
    }

    pub fn apply(&self, phi: &WavePacket<T>, t: T) -> Result<WavePacket<T>> {
        let state = self.free.evolve(phi, t)?;
        warn_near_boundary(&state, t);
        self.stepper.evolve(&state, -t)
    }

    /// Ω at each distinct time, evaluated in parallel, in input order.
    pub fn apply_many(&self, phi: &WavePacket<T>, times: &[T]) -> Result<Vec<WavePacket<T>>> {
        times.par_iter().map(|&t| self.apply(phi, t)).collect()
    }
}

/// ‖Ω(t2)φ − Ω(t1)φ‖ per pair, recorded at t1.
pub fn cauchy_gap_series<T: Real>(
    phi: &WavePacket<T>,
    params: &EvolutionParams<T>,
    pairs: &[(T, T)],
) -> Result<TimeSeries<T>> {
    if pairs.iter().any(|&(a, b)| !(a >= T::zero() && b > a)) {
        return Err(Error::InvalidArgument("each time pair needs 0 <= t1 < t2".into()));
    }
    let mut unique: Vec<T> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    unique.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    unique.dedup();
    let omega = OmegaEvaluator::new(phi.lattice(), params)?;
    let states = omega.apply_many(phi, &unique)?;
    let find = |t: T| &states[unique.iter().position(|&u| u == t).expect("time present")];
    let samples = pairs
        .iter()
        .map(|&(a, b)| Ok((a, find(b).sub(find(a))?.norm())))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::CauchyGap, samples)
}

fn require_long_range<T: Real>(potential: &PotentialSpec<T>, what: &str) -> Result<T> {
    match *potential {
        PotentialSpec::LongRange { kappa, .. } => Ok(kappa),
        _ => Err(Error::PotentialFamily(format!(
            "{what} needs a long_range potential, got {}",
            potential.family_name()
        ))),
    }
}

/// (1/κ) Re⟨V φ_t, φ_t⟩ with φ_t = e^{−itH₀}φ, for t ≥ 1.
pub fn pairing_series<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    potential: &PotentialSpec<T>,
    times: &[T],
) -> Result<TimeSeries<T>> {
    let kappa = require_long_range(potential, "pairing")?;
    check_times(times, T::one())?;
    let free = FreeEvolver::new(phi.lattice(), symbol)?;
    let field = potential.sample(phi.lattice())?;
    let samples = times
        .par_iter()
        .map(|&t| {
            let state = free.evolve(phi, t)?;
            let weighted = state
                .values()
                .iter()
                .zip(&field)
                .fold(T::zero(), |acc, (v, &f)| acc + v.norm_sqr() * f);
            Ok((t, weighted * phi.lattice().position_measure() / kappa))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::Pairing, samples)
}

/// Pointwise check of a sampled inequality; margin = slack of the worst sample.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck<T> {
    pub holds: bool,
    pub worst_margin: T,
    pub worst_t: T,
    pub samples: usize,
}

fn collect_check<T: Real>(margins: impl Iterator<Item = (T, T)>) -> BoundCheck<T> {
    let mut worst = (T::zero(), T::infinity());
    let mut count = 0;
    for (t, m) in margins {
        count += 1;
        if m < worst.1 {
            worst = (t, m);
        }
    }
    BoundCheck {
        holds: count > 0 && worst.1 >= T::zero(),
        worst_margin: worst.1,
        worst_t: worst.0,
        samples: count,
    }
}

/// pairing(t) ≥ c1 t^{−γ}‖φ‖² − c2 t^{−2−γ}‖xφ‖² at every sample.
pub fn pairing_lower_check<T: Real>(
    pairing: &TimeSeries<T>,
    constants: &BoundConstants<T>,
    norm: T,
    x_norm: T,
) -> BoundCheck<T> {
    collect_check(
        pairing
            .samples()
            .iter()
            .map(|&(t, v)| (t, v - constants.pairing_lower_bound(t, norm, x_norm))),
    )
}

/// Mass of e^{−itH₀}φ outside |x| ≤ Γt stays below (2/(Γ²t²))‖xφ‖² + ½‖φ‖².
pub fn outside_mass_check<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    constants: &BoundConstants<T>,
    times: &[T],
) -> Result<BoundCheck<T>> {
    check_times(times, T::min_positive_value())?;
    let free = FreeEvolver::new(phi.lattice(), symbol)?;
    let (norm, x_norm) = (phi.norm(), phi.x_norm());
    let margins = times
        .par_iter()
        .map(|&t| {
            let state = free.evolve(phi, t)?;
            let (_, outside) = state.ball_masses(constants.gamma_cap * t);
            Ok((t, constants.outside_mass_bound(t, norm, x_norm) - outside))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_check(margins.into_iter()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundReport<T> {
    pub holds: bool,
    pub c3: T,
    pub c4: T,
    pub worst_margin: T,
    pub worst_t: T,
    /// (t, ‖V e^{−itH₀}φ‖, bound).
    pub rows: Vec<(T, T, T)>,
}

/// ‖V e^{−itH₀}φ‖ ≤ c3 t^{−γ}‖φ‖ + c4 t^{−N}‖⟨x⟩^Nφ‖ with c4 calibrated on
/// the samples inside `calibration` as the smallest value consistent there.
pub fn lemma2_upper_check<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    potential: &PotentialSpec<T>,
    times: &[T],
    n: u32,
    c3: T,
    calibration: (T, T),
) -> Result<UpperBoundReport<T>> {
    require_long_range(potential, "upper-bound check")?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be >= 2, got {n}")));
    }
    check_times(times, T::one())?;
    let gamma = potential.gamma();
    let cook = cook_integrand_series(phi, symbol, Some(potential), times)?;
    let norm = phi.norm();
    let weighted = phi.position_weighted_norm(n)?;
    let n_t = T::from_u32(n).expect("small integer");
    let mut c4 = T::zero();
    let mut calibrated = 0;
    for &(t, v) in cook.samples() {
        if t < calibration.0 || t > calibration.1 {
            continue;
        }
        calibrated += 1;
        let excess = v - c3 * t.powf(-gamma) * norm;
        let need = excess / (t.powf(-n_t) * weighted);
        if !need.is_finite() {
            return Err(Error::Calibration(format!("non-finite c4 requirement at t = {t}")));
        }
        c4 = c4.max(need);
    }
    if calibrated == 0 {
        return Err(Error::Calibration(format!(
            "no sample times inside the calibration window [{}, {}]",
            calibration.0, calibration.1
        )));
    }
    let slack = T::lit(1e-12);
    let rows: Vec<(T, T, T)> = cook
        .samples()
        .iter()
        .map(|&(t, v)| (t, v, c3 * t.powf(-gamma) * norm + c4 * t.powf(-n_t) * weighted))
        .collect();
    let check = collect_check(rows.iter().map(|&(t, v, b)| (t, b * (T::one() + slack) - v)));
    Ok(UpperBoundReport {
        holds: check.holds,
        c3,
        c4,
        worst_margin: check.worst_margin,
        worst_t: check.worst_t,
        rows,
    })
}

/// |⟨Ω(t)φ − Ω(t₁)φ, Ω(T)φ⟩| with t₁ = min and T = max of the grid.
pub fn divergence_witness<T: Real>(
    phi: &WavePacket<T>,
    params: &EvolutionParams<T>,
    t_grid: &[T],
) -> Result<TimeSeries<T>> {
    check_times(t_grid, T::zero())?;
    if t_grid.len() < 2 {
        return Err(Error::InvalidArgument("divergence witness needs at least two times".into()));
    }
    let omega = OmegaEvaluator::new(phi.lattice(), params)?;
    let states = omega.apply_many(phi, t_grid)?;
    let first = &states[0];
    let reference = &states[states.len() - 1];
    let samples = t_grid
        .iter()
        .zip(&states)
        .map(|(&t, s)| Ok((t, s.sub(first)?.inner_product(reference)?.norm())))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::DivergenceIntegral, samples)
}

/// max |value(t) − value(t_a)| over samples in the window, t_a the first of them.
pub fn witness_drift<T: Real>(series: &TimeSeries<T>, window: (T, T)) -> Result<T> {
    let pts: Vec<(T, T)> = series
        .samples()
        .iter()
        .copied()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    let Some(&(_, base)) = pts.first() else {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    };
    Ok(pts.iter().fold(T::zero(), |m, &(_, v)| m.max((v - base).abs())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogBoundReport<T> {
    pub holds: bool,
    /// Smallest (value(t) − value(t₁)) / (scale·log(t/t₁)) in the window.
    pub min_ratio: T,
    pub scale: T,
    pub log_slope: T,
}

/// value(t) − value(t₁) ≥ ½|κ|c1‖φ‖² log(t/t₁) for every sample in `window`.
pub fn log_bound_check<T: Real>(
    series: &TimeSeries<T>,
    constants: &BoundConstants<T>,
    norm: T,
    window: (T, T),
) -> Result<LogBoundReport<T>> {
    let &(t1, v1) = series
        .samples()
        .first()
        .ok_or(Error::InsufficientSamples { needed: 1, found: 0 })?;
    let scale = constants.kappa.abs() * constants.c1 * norm * norm / T::lit(2.0);
    let mut min_ratio = T::infinity();
    for &(t, v) in series.samples() {
        if t < window.0 || t > window.1 || t <= t1 {
            continue;
        }
        min_ratio = min_ratio.min((v - v1) / (scale * (t / t1).ln()));
    }
    if min_ratio.is_infinite() {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    }
    let fit = fit_log_model(series, window)?;
    Ok(LogBoundReport {
        holds: min_ratio >= T::one(),
        min_ratio,
        scale,
        log_slope: fit.slope,
    })
}

/// Inside-cone amplitude ‖F(|x| ≤ vt) e^{−itH₀}φ‖ at a given speed v.
pub fn cone_mass_series_at_speed<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    speed: T,
    times: &[T],
) -> Result<TimeSeries<T>> {
    check_times(times, T::min_positive_value())?;
    let half = phi.lattice().spec().half_length / T::lit(2.0);
    let t_max = times[times.len() - 1];
    if speed * t_max >= half {
        return Err(Error::ConeExceedsBox {
            radius: (speed * t_max).as_f64(),
            limit: half.as_f64(),
        });
    }
    let free = FreeEvolver::new(phi.lattice(), symbol)?;
    let samples = times
        .par_iter()
        .map(|&t| {
            let state = free.evolve(phi, t)?;
            Ok((t, state.cone_mass(speed, t)?.inside_mass.sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::ConeMassInside, samples)
}

/// Inside-cone amplitude at the cone threshold for the given mode.
pub fn propagation_estimate_series<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    mode: ConeMode,
    eps: T,
    r: T,
    times: &[T],
) -> Result<TimeSeries<T>> {
    let threshold = cone_threshold(symbol, eps, r, mode)?;
    if threshold.degenerate {
        return Err(Error::InvalidArgument("cone threshold is zero on this annulus".into()));
    }
    cone_mass_series_at_speed(phi, symbol, threshold.speed, times)
}

/// ‖(x + 2tΨ′(|D|²)D)φ‖ at each time.
pub fn heisenberg_norm_series<T: Real>(
    phi: &WavePacket<T>,
    symbol: &SymbolSpec<T>,
    times: &[T],
) -> Result<TimeSeries<T>> {
    check_times(times, T::zero())?;
    let samples = times
        .par_iter()
        .map(|&t| Ok((t, heisenberg_position(phi, symbol, t)?.norm)))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(Quantity::HeisenbergNorm, samples)
}
