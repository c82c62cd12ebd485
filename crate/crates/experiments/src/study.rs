//! Coefficient tables and the closed-form error estimate.

use bura_core::bura_coeffs::{to_bura_coefficients, BuraCoefficients, CoefficientDiagnostic, ShiftedSum};
use bura_core::minimax::PoleDiagnostic;
use bura_core::{Precision, Real};

use crate::approx::Approximator;
use crate::csv_out::CsvTable;
use crate::error::{Result, StageExt};

/// `4^{alpha+1} sin(alpha pi) exp(-2 pi sqrt(alpha k))`, the asymptotic size
/// of `E_{alpha,k}`.
pub fn asymptotic_estimate(alpha: f64, k: usize) -> f64 {
    use std::f64::consts::PI;
    4f64.powf(alpha + 1.0) * (alpha * PI).sin() * (-2.0 * PI * (alpha * k as f64).sqrt()).exp()
}

#[derive(Debug, Clone)]
pub struct StudyEntry {
    pub k: usize,
    /// Sampled minimax error.
    pub sup_error: f64,
    pub converged: bool,
    pub coeffs: BuraCoefficients,
    /// Broken monotonicities of `c_i` and `|c_i / dtilde_i|`.
    pub diagnostics: Vec<CoefficientDiagnostic>,
    /// Residues of the wrong sign.
    pub pole_diagnostics: Vec<PoleDiagnostic>,
}

#[derive(Debug, Clone)]
pub struct CoefficientStudy {
    pub alpha: f64,
    pub entries: Vec<StudyEntry>,
}

impl CoefficientStudy {
    /// `(k, dtilde_1)` in the order the degrees were given.
    pub fn dtilde1(&self) -> Vec<(usize, f64)> {
        self.entries.iter().map(|e| (e.k, e.coeffs.shifts()[0].to_f64())).collect()
    }

    /// Whether `|dtilde_1|` grows with `k` across the study.
    pub fn dtilde1_grows(&self) -> bool {
        let mut d = self.dtilde1();
        d.sort_by_key(|p| p.0);
        d.windows(2).all(|w| w[1].0 == w[0].0 || w[1].1.abs() > w[0].1.abs())
    }

    /// Rows `k, i, dtilde_i, c_i, c_i/dtilde_i`, `i = 0` holding `c_0`.
    pub fn to_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(["k", "i", "dtilde_i", "c_i", "c_i/dtilde_i"])?;
        for e in &self.entries {
            let digits = e.coeffs.precision().digits() as usize;
            let s = |x: bura_core::Extended| x.to_sci_string(digits);
            t.row([e.k.to_string(), "0".into(), String::new(), s(e.coeffs.constant()), String::new()])?;
            let ratios = e.coeffs.ratios();
            for (i, ((c, d), r)) in e.coeffs.weights().iter().zip(e.coeffs.shifts()).zip(&ratios).enumerate() {
                t.row([e.k.to_string(), (i + 1).to_string(), s(*d), s(*c), s(*r)])?;
            }
        }
        t.finish()
    }

    /// Rows `k, sup_error, estimate, dtilde_1, diagnostics`.
    pub fn summary_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(["k", "sup_error", "asymptotic_estimate", "dtilde_1", "converged", "diagnostics"])?;
        for e in &self.entries {
            let diag: Vec<String> = e
                .diagnostics
                .iter()
                .map(|d| format!("{d:?}"))
                .chain(e.pole_diagnostics.iter().map(|p| p.to_string()))
                .collect();
            t.row([
                e.k.to_string(),
                format!("{:e}", e.sup_error),
                format!("{:e}", asymptotic_estimate(self.alpha, e.k)),
                format!("{:e}", e.coeffs.shifts()[0].to_f64()),
                e.converged.to_string(),
                diag.join(";"),
            ])?;
        }
        t.finish()
    }
}

/// Solver-form coefficients for every `k`, with the sign and monotonicity
/// observations recorded (not enforced beyond the signs).
pub fn coefficient_study(
    approximator: &Approximator,
    alpha: f64,
    ks: &[usize],
    precision: Precision,
    lambda1: f64,
) -> Result<CoefficientStudy> {
    let mut entries = Vec::with_capacity(ks.len());
    for &k in ks {
        let a = approximator.approximate(alpha, k, precision, None)?;
        let pf = a.partial_fractions()?;
        let coeffs = to_bura_coefficients(&pf, alpha, lambda1)
            .stage("coefficients", || format!("alpha={alpha}, k={k}, lambda1={lambda1}"))?;
        entries.push(StudyEntry {
            k,
            sup_error: a.summary.sup_error,
            converged: a.summary.converged,
            diagnostics: coeffs.diagnostics(),
            pole_diagnostics: pf.diagnostics().to_vec(),
            coeffs,
        });
    }
    Ok(CoefficientStudy { alpha, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_values() {
        let e = asymptotic_estimate(0.25, 85);
        assert!((e / 1.05e-12 - 1.0).abs() < 0.01, "{e}");
        let e = asymptotic_estimate(0.5, 45);
        assert!(e > 1e-13 && e < 1e-11);
        assert!((1..100).all(|k| asymptotic_estimate(0.75, k + 1) < asymptotic_estimate(0.75, k)));
    }

    #[test]
    fn small_study() {
        let s = coefficient_study(&Approximator::default(), 0.5, &[4, 8], Precision::Double, 1.0).unwrap();
        assert!(s.dtilde1_grows());
        for e in &s.entries {
            assert!(e.converged && e.pole_diagnostics.is_empty());
            assert!(e.coeffs.weights().iter().all(|c| c.to_f64() > 0.0));
        }
        let csv = s.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1 + 5 + 9);
        assert!(csv.lines().nth(1).unwrap().starts_with("4,0,,"));
    }
}
