//! Minimax runs at a chosen working precision, with an optional on-disk
//! cache keyed by `(alpha, k, precision)`.

use std::fs;
use std::path::{Path, PathBuf};

use bura_core::minimax::io::{barycentric_from_text, barycentric_to_text};
use bura_core::minimax::{
    brasil_with_restarts, pole_residues, sup_error, ApproximationTarget, BarycentricRational, EquioscillationInfo,
    IterationOptions, PartialFractionForm,
};
use bura_core::sampling::SamplingPlan;
use bura_core::{DoubleDouble, Extended, Precision, QuadDouble, Real};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Result, StageExt};

/// Convergence data stored next to a cached approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxSummary {
    pub alpha: f64,
    pub k: usize,
    pub precision: u32,
    pub converged: bool,
    pub iterations: usize,
    pub deviation: f64,
    /// Sampled `max |t^alpha - r(t)|` on `[0, 1]`.
    pub sup_error: f64,
    pub sup_argmax: f64,
    pub nodes: Vec<f64>,
    pub local_errors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Approximation {
    pub summary: ApproxSummary,
    /// Barycentric export at the native working precision.
    pub text: String,
    rational: BarycentricRational<Extended>,
}

impl Approximation {
    pub fn precision(&self) -> Precision {
        Precision::from_digits(self.summary.precision).expect("validated on creation")
    }

    pub fn rational(&self) -> &BarycentricRational<Extended> {
        &self.rational
    }

    pub fn partial_fractions(&self) -> Result<PartialFractionForm> {
        let pf = pole_residues(&self.rational).stage("pole location", || self.inputs())?;
        // The export is only as accurate as the iteration that produced it.
        PartialFractionForm::new(
            pf.constant(),
            pf.poles().to_vec(),
            pf.residues().to_vec(),
            self.precision(),
        )
        .stage("pole location", || self.inputs())
    }

    fn inputs(&self) -> String {
        format!("alpha={}, k={}, precision={}", self.summary.alpha, self.summary.k, self.summary.precision)
    }
}

/// Runs (or loads) minimax approximations.
#[derive(Debug, Clone, Default)]
pub struct Approximator {
    pub options: IterationOptions,
    pub plan: SamplingPlan,
    pub cache_dir: Option<PathBuf>,
}

impl Approximator {
    pub fn new(options: IterationOptions, plan: SamplingPlan, cache_dir: Option<PathBuf>) -> Self {
        Approximator { options, plan, cache_dir }
    }

    /// `r_{alpha,k}` at `precision`. `warm` nodes (of any degree) seed the
    /// iteration; a cache hit ignores them.
    pub fn approximate(&self, alpha: f64, k: usize, precision: Precision, warm: Option<&[f64]>) -> Result<Approximation> {
        let inputs = || format!("alpha={alpha}, k={k}, precision={precision}");
        let target = ApproximationTarget::new(alpha, precision.digits()).stage("minimax", inputs)?;
        if let Some(hit) = self.load(alpha, k, precision)? {
            return Ok(hit);
        }
        let out = match precision {
            Precision::Double => self.run::<f64>(&target, k, warm),
            Precision::DoubleDouble => self.run::<DoubleDouble>(&target, k, warm),
            Precision::QuadDouble => self.run::<QuadDouble>(&target, k, warm),
        }
        .stage("minimax", inputs)?;
        self.store(&out)?;
        Ok(out)
    }

    fn run<T: Real>(&self, target: &ApproximationTarget, k: usize, warm: Option<&[f64]>) -> bura_core::Result<Approximation> {
        let (r, info) = brasil_with_restarts::<T>(target, k, &self.options, warm)?;
        // Roundoff in r matters only relative to the error itself, so the
        // certificate is sampled in at most double-double.
        let sup = if T::DIGITS <= 16 {
            sup_error(&r, target, &self.plan)
        } else {
            sup_error(&r.convert::<DoubleDouble>(), target, &self.plan)
        };
        let text = barycentric_to_text(&r, target.alpha());
        Ok(Approximation { summary: summary(target, k, &info, sup.value, sup.argmax), text, rational: r.convert() })
    }

    fn paths(&self, alpha: f64, k: usize, precision: Precision) -> Option<(PathBuf, PathBuf)> {
        let dir = self.cache_dir.as_ref()?;
        let stem = format!("a{alpha}_k{k}_p{}", precision.digits());
        Some((dir.join(format!("{stem}.bary")), dir.join(format!("{stem}.json"))))
    }

    fn load(&self, alpha: f64, k: usize, precision: Precision) -> Result<Option<Approximation>> {
        let Some((bary, meta)) = self.paths(alpha, k, precision) else { return Ok(None) };
        if !bary.exists() || !meta.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&bary).map_err(io_err(&bary))?;
        let summary: ApproxSummary = serde_json::from_str(&fs::read_to_string(&meta).map_err(io_err(&meta))?)?;
        let (header, rational) = barycentric_from_text::<Extended>(&text)
            .stage("cache load", || bary.display().to_string())?;
        if header.k != k || header.alpha != alpha || header.precision != precision || summary.k != k {
            // A stale or foreign entry; recompute rather than trust it.
            return Ok(None);
        }
        Ok(Some(Approximation { summary, text, rational }))
    }

    fn store(&self, a: &Approximation) -> Result<()> {
        let Some((bary, meta)) = self.paths(a.summary.alpha, a.summary.k, a.precision()) else { return Ok(()) };
        let dir = bary.parent().unwrap_or(Path::new("."));
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        fs::write(&bary, &a.text).map_err(io_err(&bary))?;
        fs::write(&meta, serde_json::to_string_pretty(&a.summary)? + "\n").map_err(io_err(&meta))?;
        Ok(())
    }
}

fn summary(target: &ApproximationTarget, k: usize, info: &EquioscillationInfo, sup: f64, argmax: f64) -> ApproxSummary {
    ApproxSummary {
        alpha: target.alpha(),
        k,
        precision: target.precision().digits(),
        converged: info.converged,
        iterations: info.iterations,
        deviation: info.deviation,
        sup_error: sup,
        sup_argmax: argmax,
        nodes: info.nodes.clone(),
        local_errors: info.local_errors.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let apx = Approximator { cache_dir: Some(dir.path().to_path_buf()), ..Default::default() };
        let a = apx.approximate(0.5, 4, Precision::DoubleDouble, None).unwrap();
        assert!(a.summary.converged);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
        let b = apx.approximate(0.5, 4, Precision::DoubleDouble, None).unwrap();
        assert_eq!(a.rational(), b.rational());
        assert_eq!(a.summary, b.summary);
        // Different precision is a different key.
        let c = apx.approximate(0.5, 4, Precision::Double, None).unwrap();
        assert_eq!(c.precision(), Precision::Double);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 4);
    }

    #[test]
    fn failure_names_the_stage() {
        let err = Approximator::default().approximate(1.5, 4, Precision::Double, None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("minimax failed (alpha=1.5, k=4"), "{msg}");
    }
}
