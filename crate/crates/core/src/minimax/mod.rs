//! Best uniform rational approximation of `t^alpha` on `[0, 1]`.
//!
//! The approximant is kept in barycentric form. [`brasil_approximate`]
//! moves the `2k + 1` interpolation nodes until the `2k + 2` local maxima
//! of the error are level; [`sup_error`] certifies the result and
//! [`pole_residues`] converts it to partial fractions.

mod barycentric;
mod brasil;
pub mod io;
mod poles;
mod sup_error;

pub use barycentric::{interpolate_rational, BarycentricRational};
pub use brasil::{brasil_approximate, brasil_with_restarts, resample_nodes, NodeInit, RESTART_EXPONENTS};
pub use poles::{pole_residues, PartialFractionForm, PoleDiagnostic};

pub use sup_error::{sup_error, SupError};

use crate::error::{BuraError, Result};
use crate::xprec::{Precision, Real};

/// The function `t^alpha` on the canonical interval `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproximationTarget {
    alpha: f64,
    precision: Precision,
}

impl ApproximationTarget {
    /// `digits` selects the working precision (at least 16).
    pub fn new(alpha: f64, digits: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(BuraError::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(ApproximationTarget { alpha, precision: Precision::from_digits(digits)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn with_precision(self, precision: Precision) -> Self {
        ApproximationTarget { precision, ..self }
    }

    /// Interval endpoints; always `(0, 1)`.
    pub fn interval(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    /// `t^alpha` in the scalar type `T`.
    pub fn eval<T: Real>(&self, t: T) -> T {
        if t.to_f64() <= 0.0 {
            return T::zero();
        }
        if self.alpha == 0.5 {
            t.sqrt()
        } else if self.alpha == 0.25 {
            t.sqrt().sqrt()
        } else if self.alpha == 0.75 {
            let s = t.sqrt();
            s * s.sqrt()
        } else {
            t.powf(T::from_f64(self.alpha))
        }
    }
}

/// Knobs of the interval-rescaling iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOptions {
    pub max_iterations: usize,
    /// Converged when `(max - min) / min` of the local errors is below this.
    pub tolerance: f64,
    /// Exponent `tau` in `len_j <- len_j * (mean / e_j)^tau`.
    pub damping: f64,
    /// Cap on a single step's per-interval rescale factor.
    pub max_rescale: f64,
    pub golden_iterations: usize,
    pub init: NodeInit,
    /// Run the iteration in `f64` first and continue from its nodes in the
    /// requested precision.
    pub double_warmup: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            max_iterations: 1000,
            tolerance: 1e-3,
            damping: 0.5,
            max_rescale: 10.0,
            golden_iterations: 60,
            init: NodeInit::default(),
            double_warmup: true,
        }
    }
}

/// State of the equioscillation iteration at exit.
#[derive(Debug, Clone, PartialEq)]
pub struct EquioscillationInfo {
    /// The `2k + 1` interpolation nodes.
    pub nodes: Vec<f64>,
    /// `max |t^alpha - r(t)|` on each of the `2k + 2` subintervals.
    pub local_errors: Vec<f64>,
    /// Signed error `t^alpha - r(t)` at each local maximum.
    pub signed_extrema: Vec<f64>,
    /// Location of each local maximum.
    pub extrema_locations: Vec<f64>,
    /// `(max - min) / min` of `local_errors`.
    pub deviation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub precision: Precision,
}

impl EquioscillationInfo {
    /// Whether the signed extrema alternate in sign.
    pub fn alternates(&self) -> bool {
        self.signed_extrema.windows(2).all(|w| w[0] * w[1] < 0.0)
    }

    pub fn max_local_error(&self) -> f64 {
        self.local_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_local_error(&self) -> f64 {
        self.local_errors.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xprec::QuadDouble;

    #[test]
    fn target_validation() {
        assert!(ApproximationTarget::new(0.0, 16).is_err());
        assert!(ApproximationTarget::new(1.0, 16).is_err());
        assert!(ApproximationTarget::new(0.5, 8).is_err());
        let t = ApproximationTarget::new(0.3, 32).unwrap();
        assert_eq!(t.precision(), Precision::DoubleDouble);
        assert_eq!(t.interval(), (0.0, 1.0));
    }

    #[test]
    fn target_special_exponents_agree_with_pow() {
        for alpha in [0.25, 0.5, 0.75] {
            let t = ApproximationTarget::new(alpha, 64).unwrap();
            let x = QuadDouble::from_f64(3.7e-9);
            let fast = t.eval(x);
            let slow = x.powf(QuadDouble::from_f64(alpha));
            assert!(((fast - slow) / slow).abs().to_f64() < 1e-60);
        }
        assert_eq!(ApproximationTarget::new(0.3, 16).unwrap().eval(0.0f64), 0.0);
    }
}
