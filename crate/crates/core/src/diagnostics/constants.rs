use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::symbol::{cone_threshold, ConeMode, SymbolSpec};

/// Monotonicity direction of the group-speed envelope on the annulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn cone_mode(self) -> ConeMode {
        match self {
            Direction::Increasing => ConeMode::Increasing,
            Direction::Decreasing => ConeMode::Decreasing,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.cone_mode().as_str()
    }
}

/// Explicit constants of the lower and upper pairing bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundConstants<T> {
    pub direction: Direction,
    pub eps: T,
    pub r: T,
    pub dim: usize,
    /// Cone speed Ψ′(ε²)ε (increasing) or Ψ′(R²)R (decreasing).
    pub threshold: T,
    /// Envelope at the opposite edge: Ψ′(R²)R (increasing) or Ψ′(ε²)ε (decreasing).
    pub edge_envelope: T,
    /// Γ = max(4√n·edge_envelope, 1).
    pub gamma_cap: T,
    pub kappa: T,
    pub gamma_l: T,
    pub c1: T,
    pub c2: T,
    pub c3: T,
    /// Fitted by calibration, not known in closed form.
    pub c4: Option<T>,
    pub n: u32,
}

impl<T: Real> BoundConstants<T> {
    pub fn compute(
        symbol: &SymbolSpec<T>,
        eps: T,
        r: T,
        dim: usize,
        direction: Direction,
        kappa: T,
        gamma_l: T,
        n: u32,
    ) -> Result<Self> {
        if !(gamma_l > T::zero() && gamma_l <= T::one()) {
            return Err(Error::InvalidArgument(format!("gamma_l must lie in (0, 1], got {gamma_l}")));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be positive".into()));
        }
        let threshold = cone_threshold(symbol, eps, r, direction.cone_mode())?.speed;
        let edge_envelope = match direction {
            Direction::Increasing => symbol.group_speed_envelope(r)?,
            Direction::Decreasing => symbol.group_speed_envelope(eps)?,
        };
        let gamma_cap = (T::lit(4.0) * T::from_usize_lossy(dim).sqrt() * edge_envelope).max(T::one());
        let two = T::lit(2.0);
        let c1 = (two * gamma_cap).powf(-gamma_l) / two;
        let c2 = two * gamma_cap.powf(-two - gamma_l);
        let c3 = kappa.abs() * threshold.powf(-gamma_l);
        Ok(BoundConstants {
            direction,
            eps,
            r,
            dim,
            threshold,
            edge_envelope,
            gamma_cap,
            kappa,
            gamma_l,
            c1,
            c2,
            c3,
            c4: None,
            n,
        })
    }

    /// c1·t^{−γ}‖φ‖² − c2·t^{−2−γ}‖xφ‖².
    pub fn pairing_lower_bound(&self, t: T, norm: T, x_norm: T) -> T {
        self.c1 * t.powf(-self.gamma_l) * norm * norm
            - self.c2 * t.powf(-T::lit(2.0) - self.gamma_l) * x_norm * x_norm
    }

    /// (2/(Γ²t²))‖xφ‖² + ½‖φ‖².
    pub fn outside_mass_bound(&self, t: T, norm: T, x_norm: T) -> T {
        let g = self.gamma_cap * t;
        T::lit(2.0) * x_norm * x_norm / (g * g) + norm * norm / T::lit(2.0)
    }

    /// 2‖xφ‖² + 8n t² v² ‖φ‖² with v the edge envelope.
    pub fn heisenberg_bound(&self, t: T, norm: T, x_norm: T) -> T {
        crate::evolution::heisenberg_quadratic_bound(x_norm, norm, self.dim, t, self.edge_envelope)
    }

    pub fn to_text_block(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "direction = {}", self.direction.as_str());
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "R = {}", self.r);
        let _ = writeln!(s, "n = {}", self.dim);
        let _ = writeln!(s, "threshold = {}", self.threshold);
        let _ = writeln!(s, "Gamma = {}", self.gamma_cap);
        let _ = writeln!(s, "kappa = {}", self.kappa);
        let _ = writeln!(s, "gamma_L = {}", self.gamma_l);
        let _ = writeln!(s, "c1 = {}", self.c1);
        let _ = writeln!(s, "c2 = {}", self.c2);
        let _ = writeln!(s, "c3 = {}", self.c3);
        match self.c4 {
            Some(c4) => {
                let _ = writeln!(s, "c4 = {c4}");
            }
            None => {
                let _ = writeln!(s, "c4 = uncalibrated");
            }
        }
        let _ = writeln!(s, "N = {}", self.n);
        s
    }
}
