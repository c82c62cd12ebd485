//! Partial-fraction form `r(t) = C + sum b_i / (t - d_i)` of a barycentric
//! rational whose poles are real and negative.
//!
//! Poles are the zeros of the barycentric denominator
//! `q(t) = sum w_i / (t - x_i)`, which is smooth on the negative axis since
//! all support points are positive. They are bracketed by a sign-change
//! scan on a logarithmic grid and polished by safeguarded Newton steps in
//! quad-double arithmetic.

use std::fmt;

use super::BarycentricRational;
use crate::error::{BuraError, Result};
use crate::xprec::{Extended, Precision, Real};

/// Poles closer to zero come first: `0 > d_1 > d_2 > ... > d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionForm {
    constant: Extended,
    poles: Vec<Extended>,
    residues: Vec<Extended>,
    precision: Precision,
    diagnostics: Vec<PoleDiagnostic>,
}

/// A residue whose sign is not the one expected for an increasing target.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleDiagnostic {
    /// 1-based pole index.
    pub index: usize,
    pub pole: f64,
    pub residue: f64,
}

impl fmt::Display for PoleDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pole {} at {:e} has non-negative residue {:e}", self.index, self.pole, self.residue)
    }
}

impl PartialFractionForm {
    /// Checks `0 > d_1 > ... > d_k`, finite residues, and records residues
    /// that are not negative.
    pub fn new(
        constant: Extended,
        poles: Vec<Extended>,
        residues: Vec<Extended>,
        precision: Precision,
    ) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(BuraError::InvalidInput(format!(
                "{} poles but {} residues",
                poles.len(),
                residues.len()
            )));
        }
        if let Some(d) = poles.iter().find(|d| !(d.to_f64() < 0.0) || !d.is_finite()) {
            return Err(BuraError::PoleStructure(format!("pole {d:e} is not negative", d = d.to_f64())));
        }
        if poles.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(BuraError::PoleStructure("poles are not strictly decreasing".into()));
        }
        if !constant.is_finite() || residues.iter().any(|b| !b.is_finite()) {
            return Err(BuraError::PoleStructure("non-finite constant or residue".into()));
        }
        let diagnostics = poles
            .iter()
            .zip(&residues)
            .enumerate()
            .filter(|(_, (_, b))| !(b.to_f64() < 0.0))
            .map(|(i, (d, b))| PoleDiagnostic { index: i + 1, pole: d.to_f64(), residue: b.to_f64() })
            .collect();
        Ok(PartialFractionForm { constant, poles, residues, precision, diagnostics })
    }

    pub fn degree(&self) -> usize {
        self.poles.len()
    }

    /// `C = lim_{t -> inf} r(t)`.
    pub fn constant(&self) -> Extended {
        self.constant
    }

    pub fn poles(&self) -> &[Extended] {
        &self.poles
    }

    pub fn residues(&self) -> &[Extended] {
        &self.residues
    }

    /// Working precision of the rational this form was derived from.
    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Residues with unexpected sign.
    pub fn diagnostics(&self) -> &[PoleDiagnostic] {
        &self.diagnostics
    }

    pub fn eval(&self, t: Extended) -> Extended {
        self.poles.iter().zip(&self.residues).fold(self.constant, |acc, (&d, &b)| acc + b / (t - d))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.residues)
            .fold(self.constant.to_f64(), |acc, (d, b)| acc + b.to_f64() / (t - d.to_f64()))
    }
}

/// Grid density of the first (double precision) scan, points per decade.
const COARSE_PER_DECADE: usize = 64;
/// Density of the fallback scan in extended precision.
const FINE_PER_DECADE: usize = 512;
/// Decades scanned beyond the support points on either side.
const MARGIN_DECADES: f64 = 30.0;

/// Converts a barycentric rational of degree `k` to partial fractions.
///
/// Fails with [`BuraError::PoleStructure`] unless exactly `k` distinct
/// negative poles are found.
pub fn pole_residues<T: Real>(r: &BarycentricRational<T>) -> Result<PartialFractionForm> {
    let k = r.degree();
    let rq: BarycentricRational<Extended> = r.convert();
    let x = rq.support_points();
    let w = rq.weights();
    let f = rq.values();
    if k == 0 {
        return PartialFractionForm::new(rq.value_at_infinity(), vec![], vec![], T::PRECISION);
    }
    let lo = x[0].to_f64().log10() - MARGIN_DECADES;
    let hi = x[k].to_f64().log10().max(0.0) + MARGIN_DECADES;

    let xf: Vec<f64> = x.iter().map(|v| v.to_f64()).collect();
    let wf: Vec<f64> = w.iter().map(|v| v.to_f64()).collect();
    let q64 = |t: f64| xf.iter().zip(&wf).map(|(&xi, &wi)| wi / (t - xi)).sum::<f64>();
    let qext = |t: f64| q_and_derivative(x, w, Extended::from_f64(t)).0.to_f64();

    let mut brackets = sign_changes(q64, lo, hi, COARSE_PER_DECADE);
    if brackets.len() != k {
        brackets = sign_changes(qext, lo, hi, FINE_PER_DECADE);
    }
    if brackets.len() != k {
        return Err(BuraError::PoleStructure(format!(
            "expected {k} negative real poles, found {}",
            brackets.len()
        )));
    }
    let poles: Vec<Extended> = brackets.iter().map(|&(a, b)| polish(x, w, a, b)).collect();
    let residues = poles
        .iter()
        .map(|&d| {
            let (_, dq) = q_and_derivative(x, w, d);
            let n = x.iter().zip(w).zip(f).fold(Extended::zero(), |acc, ((&xi, &wi), &fi)| acc + wi * fi / (d - xi));
            n / dq
        })
        .collect();
    PartialFractionForm::new(rq.value_at_infinity(), poles, residues, T::PRECISION)
}

/// Sign-change brackets `(a, b)` with `a < b < 0` of `q` on the grid
/// `-10^s`, ordered from the bracket nearest zero outward.
fn sign_changes<F: Fn(f64) -> f64>(q: F, lo: f64, hi: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let n = ((hi - lo) * per_decade as f64).ceil() as usize;
    let ts: Vec<f64> = (0..=n).map(|j| -(10f64.powf(lo + (hi - lo) * j as f64 / n as f64))).collect();
    let mut out = Vec::new();
    let mut prev = (ts[0], q(ts[0]));
    for &t in &ts[1..] {
        let v = q(t);
        if v == 0.0 {
            // Exact hit: bracket it with the neighbours.
            continue;
        }
        if prev.1 != 0.0 && (v > 0.0) != (prev.1 > 0.0) {
            // t moves away from zero, so `t < prev.0`.
            out.push((t, prev.0));
        }
        prev = (t, v);
    }
    out
}

/// `q(t)` and `q'(t)` in extended precision.
fn q_and_derivative(x: &[Extended], w: &[Extended], t: Extended) -> (Extended, Extended) {
    let mut q = Extended::zero();
    let mut dq = Extended::zero();
    for (&xi, &wi) in x.iter().zip(w) {
        let c = wi / (t - xi);
        q += c;
        dq -= c / (t - xi);
    }
    (q, dq)
}

/// Safeguarded Newton on a sign-change bracket `a < b < 0`.
fn polish(x: &[Extended], w: &[Extended], a: f64, b: f64) -> Extended {
    let mut lo = Extended::from_f64(a);
    let mut hi = Extended::from_f64(b);
    let lo_positive = q_and_derivative(x, w, lo).0.to_f64() > 0.0;
    let mut t = -Extended::from_f64(a * b).sqrt();
    let tol = 4.0 * Extended::epsilon();
    for _ in 0..400 {
        let (v, dv) = q_and_derivative(x, w, t);
        if v.to_f64() == 0.0 {
            return t;
        }
        if (v.to_f64() > 0.0) == lo_positive {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - v / dv;
        let next = if dv.to_f64() != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi).mul_f64(0.5)
        };
        let step = (next - t).abs().to_f64();
        t = next;
        if step <= tol * t.abs().to_f64() || (hi - lo).to_f64() <= tol * t.abs().to_f64() {
            break;
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::interpolate_rational;

    #[test]
    fn simple_rational_partial_fractions() {
        // (t + 2) / (t + 1) = 1 + 1 / (t + 1).
        let nodes = [0.25, 0.5, 0.75];
        let values: Vec<f64> = nodes.iter().map(|t| (t + 2.0) / (t + 1.0)).collect();
        let r = interpolate_rational(&nodes, &values).unwrap();
        let pf = pole_residues(&r).unwrap();
        assert_eq!(pf.degree(), 1);
        assert!((pf.constant().to_f64() - 1.0).abs() < 1e-14);
        assert!((pf.poles()[0].to_f64() + 1.0).abs() < 1e-14);
        assert!((pf.residues()[0].to_f64() - 1.0).abs() < 1e-14);
        // Positive residue is flagged, not rejected.
        assert_eq!(pf.diagnostics().len(), 1);
        assert_eq!(pf.diagnostics()[0].index, 1);
    }

    #[test]
    fn positive_pole_is_rejected() {
        // 1 / (t - 2) has its pole on the positive axis.
        let nodes = [0.25, 0.5, 0.75];
        let values: Vec<f64> = nodes.iter().map(|t| 1.0 / (t - 2.0)).collect();
        let r = interpolate_rational(&nodes, &values).unwrap();
        assert!(matches!(pole_residues(&r), Err(BuraError::PoleStructure(_))));
    }

    #[test]
    fn form_validation() {
        let e = Extended::from_f64;
        assert!(PartialFractionForm::new(e(1.0), vec![e(-1.0), e(-2.0)], vec![e(-1.0); 2], Precision::Double).is_ok());
        assert!(PartialFractionForm::new(e(1.0), vec![e(-2.0), e(-1.0)], vec![e(-1.0); 2], Precision::Double).is_err());
        assert!(PartialFractionForm::new(e(1.0), vec![e(0.0)], vec![e(-1.0)], Precision::Double).is_err());
        assert!(PartialFractionForm::new(e(1.0), vec![e(-1.0)], vec![], Precision::Double).is_err());
    }
}
