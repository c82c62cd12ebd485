//! Best uniform rational approximation (BURA) of `t^alpha` on `[0, 1]` and
//! the BURA / reduced-sum RS-BURA solvers for spectral fractional diffusion
//! on uniform finite-difference grids.

pub mod bura_coeffs;
pub mod error;
pub mod fractional_solver;
pub mod minimax;
pub mod operators;
pub mod sampling;
pub mod solvers;
pub mod xprec;

pub use error::{BuraError, Result};
pub use xprec::{DoubleDouble, Extended, Precision, QuadDouble, Real};
