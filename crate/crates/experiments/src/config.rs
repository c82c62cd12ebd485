//! Run configuration. A JSON file supplies any subset of the fields below;
//! missing fields take their defaults and command-line flags override both.

use std::path::{Path, PathBuf};

use bura_core::minimax::{IterationOptions, NodeInit};
use bura_core::sampling::SamplingPlan;
use bura_core::solvers::{CgConfig, Preconditioner};
use bura_core::Precision;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Working precision in decimal digits (16, up to 32, up to 64).
    pub precision: u32,
    pub out: PathBuf,
    /// Worker threads; the rayon default when absent.
    pub threads: Option<usize>,
    /// Directory of cached approximations; no caching when absent.
    pub cache_dir: Option<PathBuf>,
    pub sampling: SamplingConfig,
    pub iteration: IterationConfig,
    pub approx: ApproxConfig,
    pub coeffs: CoeffsConfig,
    pub table1: Table1Config,
    pub figure1: Figure1Config,
    pub suggest_kprime: SuggestConfig,
    pub solve: SolveConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: 16,
            out: PathBuf::from("out"),
            threads: None,
            cache_dir: None,
            sampling: SamplingConfig::default(),
            iteration: IterationConfig::default(),
            approx: ApproxConfig::default(),
            coeffs: CoeffsConfig::default(),
            table1: Table1Config::default(),
            figure1: Figure1Config::default(),
            suggest_kprime: SuggestConfig::default(),
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub grid_points: usize,
    pub points_per_gap: usize,
    pub golden_iterations: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let p = SamplingPlan::default();
        SamplingConfig { grid_points: p.grid_points, points_per_gap: p.points_per_gap, golden_iterations: p.golden_iterations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub damping: f64,
    pub max_rescale: f64,
    /// Power-law exponent of the cold-start node distribution.
    pub init_exponent: f64,
    pub double_warmup: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        let o = IterationOptions::default();
        let init_exponent = match o.init {
            NodeInit::PowerLaw { exponent } => exponent,
            NodeInit::Warm(_) => 8.0,
        };
        IterationConfig {
            max_iterations: o.max_iterations,
            tolerance: o.tolerance,
            damping: o.damping,
            max_rescale: o.max_rescale,
            init_exponent,
            double_warmup: o.double_warmup,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxConfig {
    pub alpha: f64,
    pub k: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig { alpha: 0.25, k: 85 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub alpha: f64,
    pub ks: Vec<usize>,
    pub lambda1: f64,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        CoeffsConfig { alpha: 0.25, ks: vec![10, 20, 40, 85], lambda1: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Config {
    pub alphas: Vec<f64>,
    /// Strictly decreasing.
    pub accuracies: Vec<f64>,
    /// Degrees above this are reported as holes.
    pub max_k: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            alphas: vec![0.25, 0.5, 0.75, 0.8, 0.9],
            accuracies: (3..=12).map(|e| format!("1e-{e}").parse().expect("literal")).collect(),
            max_k: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure1Config {
    pub alpha: f64,
    pub k: usize,
    pub kprime: usize,
    pub deltas: Vec<f64>,
    /// Rows per delta.
    pub samples: usize,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Figure1Config { alpha: 0.25, k: 85, kprime: 46, deltas: vec![1e-6, 1e-7, 1e-9], samples: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuggestConfig {
    pub alpha: f64,
    pub k: usize,
    pub delta: f64,
    /// `ord(E)` when absent.
    pub target_order: Option<i32>,
}

impl Default for SuggestConfig {
    fn default() -> Self {
        SuggestConfig { alpha: 0.25, k: 85, delta: 1e-9, target_order: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    None,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub alpha: f64,
    pub k: usize,
    /// Fixed reduced size; takes precedence over `suggest`.
    pub kprime: Option<usize>,
    /// Pick `kprime` with the order heuristic at the grid's delta.
    pub suggest: bool,
    /// Target order for `suggest`; `ord(E)` when absent.
    pub target_order: Option<i32>,
    pub dim: usize,
    pub n: usize,
    /// Number of random right-hand sides.
    pub rhs: usize,
    pub seed: u64,
    pub cg_tolerance: f64,
    pub cg_max_iterations: usize,
    pub preconditioner: PreconditionerKind,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let cg = CgConfig::default();
        SolveConfig {
            alpha: 0.25,
            k: 12,
            kprime: None,
            suggest: false,
            target_order: None,
            dim: 2,
            n: 63,
            rhs: 20,
            seed: 1,
            cg_tolerance: cg.tolerance,
            cg_max_iterations: cg.max_iterations,
            preconditioner: PreconditionerKind::None,
        }
    }
}

impl SolveConfig {
    pub fn cg(&self) -> CgConfig {
        CgConfig {
            tolerance: self.cg_tolerance,
            max_iterations: self.cg_max_iterations,
            preconditioner: match self.preconditioner {
                PreconditionerKind::None => Preconditioner::None,
                PreconditionerKind::Diagonal => Preconditioner::Diagonal,
            },
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn working_precision(&self) -> Result<Precision> {
        Precision::from_digits(self.precision).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            grid_points: self.sampling.grid_points,
            points_per_gap: self.sampling.points_per_gap,
            golden_iterations: self.sampling.golden_iterations,
        }
    }

    pub fn iteration_options(&self) -> IterationOptions {
        let it = &self.iteration;
        IterationOptions {
            max_iterations: it.max_iterations,
            tolerance: it.tolerance,
            damping: it.damping,
            max_rescale: it.max_rescale,
            init: NodeInit::PowerLaw { exponent: it.init_exponent },
            double_warmup: it.double_warmup,
            ..IterationOptions::default()
        }
    }

    /// Checks every section, so a run never starts from a bad tree.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        self.working_precision()?;
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if self.sampling.grid_points < 2 {
            return bad("sampling.grid_points must be at least 2".into());
        }
        let it = &self.iteration;
        if !(it.tolerance > 0.0) || !(it.damping > 0.0) || !(it.max_rescale > 1.0) || !(it.init_exponent > 0.0) {
            return bad(format!("bad iteration settings {it:?}"));
        }
        let alphas = [self.approx.alpha, self.coeffs.alpha, self.figure1.alpha, self.suggest_kprime.alpha, self.solve.alpha];
        let alphas = alphas.iter().chain(&self.table1.alphas);
        if let Some(a) = alphas.into_iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha must lie in (0, 1), got {a}"));
        }
        let ks = [self.approx.k, self.figure1.k, self.suggest_kprime.k, self.solve.k];
        if ks.iter().chain(&self.coeffs.ks).any(|&k| k == 0) || self.coeffs.ks.is_empty() {
            return bad("degrees must be positive".into());
        }
        if !(self.coeffs.lambda1 >= 1.0) {
            return bad(format!("coeffs.lambda1 must be at least 1, got {}", self.coeffs.lambda1));
        }
        let t = &self.table1;
        if t.accuracies.is_empty() || t.accuracies.iter().any(|&e| !(e > 0.0)) {
            return bad("table1.accuracies must be positive".into());
        }
        if t.accuracies.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("table1.accuracies must be strictly decreasing".into());
        }
        if t.max_k == 0 {
            return bad("table1.max_k must be positive".into());
        }
        let f = &self.figure1;
        if f.kprime == 0 || f.kprime > f.k {
            return bad(format!("figure1.kprime must lie in 1..={}, got {}", f.k, f.kprime));
        }
        if f.samples < 2 {
            return bad("figure1.samples must be at least 2".into());
        }
        let delta_ok = |d: f64| d > 0.0 && d < 1.0;
        if !f.deltas.iter().all(|&d| delta_ok(d)) || !delta_ok(self.suggest_kprime.delta) {
            return bad("delta must lie in (0, 1)".into());
        }
        let s = &self.solve;
        if let Some(kp) = s.kprime {
            if kp == 0 || kp > s.k {
                return bad(format!("solve.kprime must lie in 1..={}, got {kp}", s.k));
            }
        }
        if !(1..=3).contains(&s.dim) || s.n == 0 || s.rhs == 0 {
            return bad(format!("bad grid or rhs count: dim {}, n {}, rhs {}", s.dim, s.n, s.rhs));
        }
        s.cg().validate().map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c = RunConfig::from_json(r#"{"precision": 32, "solve": {"k": 24, "n": 255}}"#).unwrap();
        assert_eq!(c.precision, 32);
        assert_eq!((c.solve.k, c.solve.n, c.solve.dim), (24, 255, 2));
        assert_eq!(c.table1, Table1Config::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        assert!(RunConfig::from_json(r#"{"precison": 32}"#).is_err());
        let mut c = RunConfig::default();
        c.table1.accuracies = vec![1e-3, 1e-3];
        assert!(c.validate().is_err());
        assert!(RunConfig { precision: 8, ..Default::default() }.validate().is_err());
        let mut c = RunConfig::default();
        c.figure1.kprime = 90;
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
