//! Conjugate gradients for the shifted systems `(A - s I) x = f`, `s <= 0`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{BuraError, Result};
use crate::operators::{SparseOperator, CHUNK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    #[default]
    None,
    /// Jacobi scaling by the diagonal of `A - s I`.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Stop when `||f - (A - s I) x|| / ||f|| <= tolerance`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig { tolerance: 1e-12, max_iterations: 20_000, preconditioner: Preconditioner::None }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(BuraError::InvalidInput(format!("CG tolerance must lie in (0, 1), got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(BuraError::InvalidInput("CG needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Outcome of one shifted solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSolveReport {
    pub shift: f64,
    pub iterations: usize,
    /// Relative residual recomputed from the returned iterate.
    pub residual: f64,
    /// Relative residual carried by the CG recurrence.
    pub recursive_residual: f64,
    /// `(lambda_max - s) / (lambda_min - s)` when the operator's spectral
    /// bounds are known.
    pub kappa: Option<f64>,
    pub converged: bool,
    /// Restarts triggered by loss of positivity in the CG scalars.
    pub restarts: usize,
}

/// `kappa = (lambda_n - s) / (lambda1 - s)`.
pub fn shift_condition(lambda1: f64, lambda_n: f64, shift: f64) -> f64 {
    (lambda_n - shift) / (lambda1 - shift)
}

/// `kappa - 1 = (lambda_n - lambda1) / (lambda1 - s)`, without the
/// cancellation of forming `kappa` first.
pub fn shift_condition_excess(lambda1: f64, lambda_n: f64, shift: f64) -> f64 {
    (lambda_n - lambda1) / (lambda1 - shift)
}

/// Deterministic dot product: fixed blocks, block sums added in order.
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let partial: Vec<f64> = x
        .par_chunks(CHUNK)
        .zip(y.par_chunks(CHUNK))
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    partial.iter().sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y = (A - s I) x`.
fn shifted_apply(a: &SparseOperator, shift: f64, x: &[f64], y: &mut [f64]) {
    a.matvec(x, y);
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi -= shift * xi);
}

/// Solves `(A - s I) x = f` by (optionally Jacobi-preconditioned) CG.
///
/// The shifted operator is applied as a matvec plus an axpy. On loss of
/// positivity in the CG scalars the iteration restarts once from the
/// current iterate with a recomputed residual; a second breakdown is an
/// error. Exhausting `max_iterations` returns the last iterate with
/// `converged = false`.
pub fn shifted_cg(a: &SparseOperator, shift: f64, f: &[f64], cfg: &CgConfig) -> Result<(Vec<f64>, ShiftSolveReport)> {
    cfg.validate()?;
    if !(shift <= 0.0) || !shift.is_finite() {
        return Err(BuraError::InvalidInput(format!("shift must be finite and non-positive, got {shift}")));
    }
    let n = a.dim();
    if f.len() != n {
        return Err(BuraError::InvalidInput(format!("right-hand side has length {}, operator {n}", f.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(BuraError::InvalidInput("right-hand side is not finite".into()));
    }
    let kappa = a.spectral_bounds().map(|(l1, ln)| shift_condition(l1, ln, shift));
    let fnorm = norm(f);
    let mut x = vec![0.0; n];
    let mut report = ShiftSolveReport {
        shift,
        iterations: 0,
        residual: 0.0,
        recursive_residual: 0.0,
        kappa,
        converged: true,
        restarts: 0,
    };
    if fnorm == 0.0 {
        return Ok((x, report));
    }
    let inv_diag: Option<Vec<f64>> = match cfg.preconditioner {
        Preconditioner::None => None,
        Preconditioner::Diagonal => Some(a.diagonal().iter().map(|d| 1.0 / (d - shift)).collect()),
    };
    let precondition = |r: &[f64]| -> Vec<f64> {
        match &inv_diag {
            None => r.to_vec(),
            Some(m) => r.iter().zip(m).map(|(ri, mi)| ri * mi).collect(),
        }
    };

    let mut r = f.to_vec();
    let mut ap = vec![0.0; n];
    let mut rnorm = fnorm;
    let mut it = 0;
    'outer: loop {
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while rnorm > cfg.tolerance * fnorm {
            if it >= cfg.max_iterations {
                report.converged = false;
                break 'outer;
            }
            shifted_apply(a, shift, &p, &mut ap);
            let pap = dot(&p, &ap);
            if !pap.is_finite() || !rz.is_finite() {
                return Err(BuraError::Solver(format!("non-finite CG scalar at iteration {it} (shift {shift:e})")));
            }
            if !(pap > 0.0) || !(rz > 0.0) {
                if report.restarts == 0 {
                    report.restarts = 1;
                    shifted_apply(a, shift, &x, &mut ap);
                    r.iter_mut().zip(f).zip(&ap).for_each(|((ri, fi), ai)| *ri = fi - ai);
                    rnorm = norm(&r);
                    continue 'outer;
                }
                return Err(BuraError::Solver(format!("CG breakdown after restart at iteration {it} (shift {shift:e})")));
            }
            let step = rz / pap;
            x.par_iter_mut().zip(p.par_iter()).for_each(|(xi, pi)| *xi += step * pi);
            r.par_iter_mut().zip(ap.par_iter()).for_each(|(ri, ai)| *ri -= step * ai);
            it += 1;
            rnorm = norm(&r);
            z = precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        break;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(BuraError::Solver(format!("non-finite iterate (shift {shift:e})")));
    }
    shifted_apply(a, shift, &x, &mut ap);
    let true_r: Vec<f64> = f.iter().zip(&ap).map(|(fi, ai)| fi - ai).collect();
    report.iterations = it;
    report.recursive_residual = rnorm / fnorm;
    report.residual = norm(&true_r) / fnorm;
    Ok((x, report))
}

/// Per-shift report rows `i, dtilde_i, kappa, iterations, residual`
/// (1-based `i`; empty `kappa` when unknown).
pub fn reports_csv(reports: &[ShiftSolveReport], first_index: usize) -> String {
    let mut s = String::from("i,dtilde_i,kappa,iterations,residual\n");
    for (j, r) in reports.iter().enumerate() {
        let kappa = r.kappa.map(|k| format!("{k:e}")).unwrap_or_default();
        let _ = writeln!(s, "{},{:e},{},{},{:e}", first_index + j, r.shift, kappa, r.iterations, r.residual);
    }
    s
}
