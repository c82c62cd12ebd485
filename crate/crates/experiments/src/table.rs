//! Minimal degree `k` with `E_{alpha,k} <= eps`.

use bura_core::Precision;

use crate::approx::Approximator;
use crate::csv_out::CsvTable;
use crate::error::{ExperimentError, Result};

/// One minimax run of the incremental search.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeRun {
    pub alpha: f64,
    pub k: usize,
    pub sup_error: f64,
    pub deviation: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinDegreeTable {
    pub alphas: Vec<f64>,
    pub accuracies: Vec<f64>,
    /// `degrees[a][e]` for `alphas[a]`, `accuracies[e]`; `None` is a hole:
    /// either `max_k` was reached or a non-converged run left the minimal
    /// degree undecided.
    pub degrees: Vec<Vec<Option<usize>>>,
    pub runs: Vec<DegreeRun>,
}

impl MinDegreeTable {
    pub fn degree(&self, alpha: f64, accuracy: f64) -> Option<usize> {
        let a = self.alphas.iter().position(|&x| x == alpha)?;
        let e = self.accuracies.iter().position(|&x| x == accuracy)?;
        self.degrees[a][e]
    }

    pub fn holes(&self) -> usize {
        self.degrees.iter().flatten().filter(|d| d.is_none()).count()
    }

    /// Rows per accuracy, one column per alpha; holes are empty cells.
    pub fn to_csv(&self) -> Result<String> {
        let mut header = vec!["accuracy".to_string()];
        header.extend(self.alphas.iter().map(|a| format!("alpha={a}")));
        let mut t = CsvTable::new(header)?;
        for (e, acc) in self.accuracies.iter().enumerate() {
            let mut row = vec![format!("{acc:e}")];
            row.extend(self.degrees.iter().map(|col| col[e].map(|k| k.to_string()).unwrap_or_default()));
            t.row(row)?;
        }
        t.finish()
    }

    pub fn runs_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(["alpha", "k", "sup_error", "deviation", "iterations", "converged"])?;
        for r in &self.runs {
            t.row([
                r.alpha.to_string(),
                r.k.to_string(),
                format!("{:e}", r.sup_error),
                format!("{:e}", r.deviation),
                r.iterations.to_string(),
                r.converged.to_string(),
            ])?;
        }
        t.finish()
    }
}

/// For every alpha, raises `k` from 1 until each accuracy in turn is met,
/// seeding every run with the previous converged node set.
///
/// A converged run certifies `E_{alpha,k}` from below by sampling; a
/// non-converged run whose sampled error already meets the accuracy still
/// proves that degree sufficient (the minimax error is no larger), but one
/// that misses leaves the cell undecided.
pub fn table_min_degree(
    approximator: &Approximator,
    alphas: &[f64],
    accuracies: &[f64],
    precision: Precision,
    max_k: usize,
) -> Result<MinDegreeTable> {
    if accuracies.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(ExperimentError::Config("accuracies must be strictly decreasing".into()));
    }
    let mut degrees = Vec::with_capacity(alphas.len());
    let mut runs = Vec::new();
    for &alpha in alphas {
        let mut column = Vec::with_capacity(accuracies.len());
        let mut k = 1;
        let mut warm: Option<Vec<f64>> = None;
        let mut last: Option<DegreeRun> = None;
        for &eps in accuracies {
            let mut undecided = false;
            let mut found = None;
            while k <= max_k {
                let run = match &last {
                    Some(r) if r.k == k => r.clone(),
                    _ => {
                        let a = approximator.approximate(alpha, k, precision, warm.as_deref())?;
                        let s = &a.summary;
                        if s.converged {
                            warm = Some(s.nodes.clone());
                        }
                        let run = DegreeRun {
                            alpha,
                            k,
                            sup_error: s.sup_error,
                            deviation: s.deviation,
                            iterations: s.iterations,
                            converged: s.converged,
                        };
                        runs.push(run.clone());
                        last = Some(run.clone());
                        run
                    }
                };
                if run.sup_error <= eps {
                    found = Some(k);
                    break;
                }
                undecided |= !run.converged;
                k += 1;
            }
            column.push(if undecided { None } else { found });
        }
        degrees.push(column);
    }
    Ok(MinDegreeTable { alphas: alphas.to_vec(), accuracies: accuracies.to_vec(), degrees, runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shallow_rows_and_trivial_accuracy() {
        let t = table_min_degree(&Approximator::default(), &[0.5, 0.9], &[2.0, 1e-3, 1e-4], Precision::Double, 20)
            .unwrap();
        assert_eq!(t.degrees, vec![vec![Some(1), Some(4), Some(7)], vec![Some(1), Some(2), Some(3)]]);
        assert_eq!(t.holes(), 0);
        assert_eq!(t.degree(0.9, 1e-4), Some(3));
        let csv = t.to_csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), "accuracy,alpha=0.5,alpha=0.9");
        assert_eq!(csv.lines().nth(2).unwrap(), "1e-3,4,2");
        // Every degree is run once per alpha.
        assert_eq!(t.runs.len(), 7 + 3);
    }

    #[test]
    fn degree_cap_leaves_a_hole() {
        let t = table_min_degree(&Approximator::default(), &[0.25], &[1e-3, 1e-6], Precision::Double, 8).unwrap();
        assert_eq!(t.degrees, vec![vec![Some(7), None]]);
        assert!(table_min_degree(&Approximator::default(), &[0.25], &[1e-3, 1e-2], Precision::Double, 8).is_err());
    }
}
