//! Error curves of the full and reduced sums on `[1, 1/delta]`.

use bura_core::bura_coeffs::{
    error_gap_bound, error_indicator, eval_rational_in, gap_order, reduce, BuraCoefficients, ShiftedSum,
};
use bura_core::sampling::SamplingPlan;
use bura_core::{DoubleDouble, Real};

use crate::csv_out::CsvTable;
use crate::error::{Result, StageExt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub delta: f64,
    pub z: f64,
    /// `r(z) - z^{-alpha}` for the full sum.
    pub bura: f64,
    /// Same for the reduced sum.
    pub rsbura: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSummary {
    pub delta: f64,
    /// Sampled `max |z^{-alpha} - r(z)|` on `[1, 1/delta]`.
    pub e: f64,
    /// Same for the reduced sum.
    pub etilde: f64,
    pub gap_bound: f64,
    /// Predicted order of the reduction gap; absent when nothing is folded.
    pub gap_order: Option<i32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub k: usize,
    pub kprime: usize,
    pub rows: Vec<FigureRow>,
    pub summary: Vec<FigureSummary>,
}

impl FigureData {
    pub fn to_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(["delta", "z", "bura_error", "rsbura_error"])?;
        for r in &self.rows {
            t.row([r.delta, r.z, r.bura, r.rsbura].map(|x| format!("{x:e}")))?;
        }
        t.finish()
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut t = CsvTable::new(["delta", "k", "kprime", "E", "Etilde", "gap_bound", "gap_order"])?;
        for s in &self.summary {
            t.row([
                format!("{:e}", s.delta),
                self.k.to_string(),
                self.kprime.to_string(),
                format!("{:e}", s.e),
                format!("{:e}", s.etilde),
                format!("{:e}", s.gap_bound),
                s.gap_order.map(|o| o.to_string()).unwrap_or_default(),
            ])?;
        }
        t.finish()
    }
}

/// `samples` log-uniform points `z_j = delta^{-j/samples}`, `j = 1..=samples`,
/// per delta, evaluated in double-double in the normalized variable.
pub fn figure_error_curves(
    coeffs: &BuraCoefficients,
    kprime: usize,
    deltas: &[f64],
    samples: usize,
    plan: &SamplingPlan,
) -> Result<FigureData> {
    let inputs = || format!("alpha={}, k={}, kprime={kprime}", coeffs.alpha(), coeffs.k());
    let full = coeffs.normalized();
    let reduced = reduce(&full, kprime).stage("reduction", inputs)?;
    let minus_alpha = DoubleDouble::from_f64(-full.alpha());
    let mut rows = Vec::with_capacity(deltas.len() * samples);
    let mut summary = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let hi = (1.0 / delta).ln();
        for j in 1..=samples {
            let z = (hi * j as f64 / samples as f64).exp();
            let zz = DoubleDouble::from_f64(z);
            let exact = zz.powf(minus_alpha);
            rows.push(FigureRow {
                delta,
                z,
                bura: (eval_rational_in(&full, zz) - exact).to_f64(),
                rsbura: (eval_rational_in(&reduced, zz) - exact).to_f64(),
            });
        }
        let e = error_indicator(&full, delta, plan).stage("error indicator", inputs)?.value;
        let etilde = error_indicator(&reduced, delta, plan).stage("error indicator", inputs)?.value;
        let order = (kprime < full.k()).then(|| gap_order(&full, kprime, delta)).transpose().stage("gap order", inputs)?;
        summary.push(FigureSummary { delta, e, etilde, gap_bound: error_gap_bound(&full, kprime, delta), gap_order: order });
    }
    Ok(FigureData { k: full.k(), kprime, rows, summary })
}
