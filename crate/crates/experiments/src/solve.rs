//! End-to-end fractional solve with certification against the spectral
//! reference solution.

use bura_core::bura_coeffs::{
    error_indicator, ord, reduce, suggest_kprime, to_bura_coefficients, BuraCoefficients, ReducedBura,
};
use bura_core::fractional_solver::{certify, solve_bura, solve_rsbura, BoundSource, ErrorReport, FractionalSolveResult};
use bura_core::operators::{assemble_fdm_laplacian, extreme_eigenvalues, spectral_fractional_apply, ExtremeEigenvalues, UniformGrid};
use bura_core::solvers::reports_csv;
use bura_core::Precision;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::{ApproxSummary, Approximator};
use crate::config::SolveConfig;
use crate::csv_out::CsvTable;
use crate::error::{ExperimentError, Result, StageExt};

/// Right-hand side `index` of a run: uniform in `[-1, 1)` from a ChaCha
/// stream seeded by `seed + index`.
pub fn random_rhs(len: usize, seed: u64, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone)]
pub struct RhsRun {
    pub index: usize,
    pub result: FractionalSolveResult,
    pub report: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct SolveArtifacts {
    pub grid: UniformGrid,
    pub extremes: ExtremeEigenvalues,
    pub approximation: ApproxSummary,
    pub coeffs: BuraCoefficients,
    /// Reduced sum when one was requested or suggested.
    pub reduced: Option<ReducedBura>,
    /// Error indicator of the reduced sum at the grid's delta.
    pub etilde: Option<f64>,
    pub runs: Vec<RhsRun>,
}

impl SolveArtifacts {
    pub fn kprime(&self) -> usize {
        self.reduced.as_ref().map_or(self.coeffs.k(), |r| r.kprime())
    }

    pub fn passed(&self) -> bool {
        self.runs.iter().all(|r| r.report.pass)
    }

    /// Worst `relative_error / bound` over all right-hand sides.
    pub fn worst_ratio(&self) -> f64 {
        self.runs.iter().map(|r| r.report.relative_error / r.report.bound).fold(0.0, f64::max)
    }

    pub fn certificates_csv(&self) -> Result<String> {
        let mut t = CsvTable::new([
            "rhs", "method", "alpha", "k", "kprime", "relative_error", "bound", "slack", "max_iterations", "pass",
        ])?;
        for r in &self.runs {
            let res = &r.result;
            t.row([
                r.index.to_string(),
                res.method.to_string(),
                res.alpha.to_string(),
                res.k.to_string(),
                res.kprime.to_string(),
                format!("{:e}", r.report.relative_error),
                format!("{:e}", r.report.bound),
                format!("{:e}", r.report.slack),
                res.reports.iter().map(|s| s.iterations).max().unwrap_or(0).to_string(),
                r.report.pass.to_string(),
            ])?;
        }
        t.finish()
    }

    /// Per-shift reports of the first right-hand side.
    pub fn shifts_csv(&self) -> String {
        self.runs.first().map(|r| reports_csv(&r.result.reports, 1)).unwrap_or_default()
    }
}

/// Minimax (or cache) -> coefficients for the grid's `lambda1` -> optional
/// reduction -> shifted solves -> certification, for `cfg.rhs` random
/// right-hand sides.
pub fn run_solve(approximator: &Approximator, cfg: &SolveConfig, precision: Precision) -> Result<SolveArtifacts> {
    let (alpha, k) = (cfg.alpha, cfg.k);
    let grid_inputs = || format!("dim={}, n={}", cfg.dim, cfg.n);
    let grid = UniformGrid::new(cfg.dim, cfg.n).stage("grid", grid_inputs)?;
    let a = assemble_fdm_laplacian(&grid).stage("assembly", grid_inputs)?;
    let extremes = extreme_eigenvalues(&grid);
    let apx = approximator.approximate(alpha, k, precision, None)?;
    if !apx.summary.converged {
        return Err(ExperimentError::NotConverged { alpha, k, deviation: apx.summary.deviation });
    }
    let e = apx.summary.sup_error;
    let coeffs = to_bura_coefficients(&apx.partial_fractions()?, alpha, extremes.lambda1)
        .stage("coefficients", || format!("alpha={alpha}, k={k}, lambda1={:e}", extremes.lambda1))?;
    let kprime = match cfg.kprime {
        Some(kp) => Some(kp),
        None if cfg.suggest => {
            let target = cfg.target_order.unwrap_or_else(|| ord(e));
            Some(suggest_kprime(&coeffs, extremes.delta, target)).filter(|&kp| kp < k)
        }
        None => None,
    };
    let reduced = kprime
        .map(|kp| reduce(&coeffs, kp))
        .transpose()
        .stage("reduction", || format!("alpha={alpha}, k={k}, kprime={kprime:?}"))?;
    let etilde = match &reduced {
        Some(r) if r.kprime() < k => Some(
            error_indicator(r, extremes.delta, &approximator.plan)
                .stage("error indicator", || format!("kprime={}, delta={:e}", r.kprime(), extremes.delta))?
                .value,
        ),
        _ => None,
    };
    // Without folding the reduced sum is the full one and keeps its bound.
    let source = etilde.map_or(BoundSource::Bura { e }, |etilde| BoundSource::RsBura { etilde });
    let cg = cfg.cg();
    let mut runs = Vec::with_capacity(cfg.rhs);
    for index in 0..cfg.rhs {
        let f = random_rhs(grid.len(), cfg.seed, index);
        let u_ref = spectral_fractional_apply(&grid, -alpha, &f).stage("spectral reference", grid_inputs)?;
        let solve_inputs = || format!("alpha={alpha}, k={k}, rhs={index}");
        let result = match &reduced {
            Some(r) => solve_rsbura(&a, r, &f, &cg),
            None => solve_bura(&a, &coeffs, &f, &cg),
        }
        .stage("shifted solves", solve_inputs)?;
        let report = certify(&u_ref, &result, &f, source);
        runs.push(RhsRun { index, result, report });
    }
    Ok(SolveArtifacts { grid, extremes, approximation: apx.summary, coeffs, reduced, etilde, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SolveConfig {
        SolveConfig { alpha: 0.5, k: 7, dim: 1, n: 63, rhs: 3, ..Default::default() }
    }

    #[test]
    fn rhs_is_reproducible() {
        assert_eq!(random_rhs(10, 5, 2), random_rhs(10, 5, 2));
        assert_ne!(random_rhs(10, 5, 2), random_rhs(10, 5, 3));
        assert!(random_rhs(1000, 0, 0).iter().all(|x| (-1.0..1.0).contains(x)));
    }

    #[test]
    fn certified_solve() {
        let art = run_solve(&Approximator::default(), &cfg(), Precision::Double).unwrap();
        assert!(art.passed(), "{}", art.certificates_csv().unwrap());
        assert_eq!(art.kprime(), 7);
        assert_eq!(art.runs.len(), 3);
        assert_eq!(art.certificates_csv().unwrap().lines().count(), 4);
        assert_eq!(art.shifts_csv().lines().count(), 8);
    }

    #[test]
    fn full_reduction_differs_only_in_method() {
        let apx = Approximator::default();
        let full = run_solve(&apx, &cfg(), Precision::Double).unwrap();
        let same = run_solve(&apx, &SolveConfig { kprime: Some(7), ..cfg() }, Precision::Double).unwrap();
        let a = full.certificates_csv().unwrap();
        let b = same.certificates_csv().unwrap();
        assert_ne!(a, b);
        assert_eq!(a.replace(",BURA,", ",RS-BURA,"), b);
        assert_eq!(full.shifts_csv(), same.shifts_csv());
    }

    #[test]
    fn suggested_reduction_is_certified() {
        let c = SolveConfig { alpha: 0.25, k: 24, suggest: true, n: 255, rhs: 2, ..cfg() };
        let art = run_solve(&Approximator::default(), &c, Precision::Double).unwrap();
        assert!(art.kprime() < 24 && art.etilde.is_some());
        assert!(art.passed(), "{}", art.certificates_csv().unwrap());
    }
}
