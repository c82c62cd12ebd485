//! Reproduction harness: minimal-degree tables, coefficient studies, error
//! curves, reduced-sum suggestions and certified end-to-end solves, driven
//! by a JSON run configuration.

pub mod approx;
pub mod commands;
pub mod config;
mod csv_out;
pub mod error;
pub mod figure;
pub mod solve;
pub mod study;
pub mod table;

pub use approx::{ApproxSummary, Approximation, Approximator};
pub use commands::{execute, Command, Outcome};
pub use config::RunConfig;
pub use error::{ExperimentError, Result};
pub use figure::{figure_error_curves, FigureData};
pub use solve::{run_solve, SolveArtifacts};
pub use study::{asymptotic_estimate, coefficient_study, CoefficientStudy};
pub use table::{table_min_degree, MinDegreeTable};
