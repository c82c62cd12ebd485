//! Solver coefficients `u = c_0 f + sum c_i (A - dtilde_i I)^{-1} f` and
//! the reduced sum that folds the largest-shift terms into `c_0`.
//!
//! With `t = lambda1 / z`, `lambda1^{-alpha} r(t)` for the partial-fraction
//! form `r(t) = C + sum b_i / (t - d_i)` becomes
//! `c_0 + sum c_i / (z - dtilde_i)` with
//! `dtilde_i = lambda1 / d_i`, `c_i = -lambda1^{1-alpha} b_i / d_i^2` and
//! `c_0 = lambda1^{-alpha} (C - sum b_i / d_i)`.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{BuraError, Result};
use crate::minimax::PartialFractionForm;
use crate::sampling::{golden_max, ordered_max, Resolution, SamplingPlan};
use crate::xprec::{DoubleDouble, Extended, Precision, Real};

/// A sum `c_0 + sum_i c_i / (z - dtilde_i)` approximating `z^{-alpha}`.
pub trait ShiftedSum: Sync {
    fn alpha(&self) -> f64;
    fn lambda1(&self) -> f64;
    fn constant(&self) -> Extended;
    /// Weights `c_i`, in the same order as [`ShiftedSum::shifts`].
    fn weights(&self) -> &[Extended];
    /// Shifts `dtilde_i < 0`, largest magnitude first.
    fn shifts(&self) -> &[Extended];

    /// Number of shifted systems.
    fn terms(&self) -> usize {
        self.shifts().len()
    }

    /// Evaluation in extended precision, ascending `i`.
    fn eval(&self, z: Extended) -> Extended {
        self.weights().iter().zip(self.shifts()).fold(self.constant(), |acc, (&c, &d)| acc + c / (z - d))
    }
}

/// `c_0 + sum c_i / (z - dtilde_i)` in double precision, summed in ascending
/// `i` as a production solver would.
pub fn eval_rational<S: ShiftedSum + ?Sized>(s: &S, z: f64) -> f64 {
    s.weights()
        .iter()
        .zip(s.shifts())
        .fold(s.constant().to_f64(), |acc, (c, d)| acc + c.to_f64() / (z - d.to_f64()))
}

/// `c_0 + sum c_i / (z - dtilde_i)` in a chosen precision.
pub fn eval_rational_in<T: Real, S: ShiftedSum + ?Sized>(s: &S, z: T) -> T {
    let cv = |x: Extended| T::from_limbs(&x.limbs());
    s.weights().iter().zip(s.shifts()).fold(cv(s.constant()), |acc, (&c, &d)| acc + cv(c) / (z - cv(d)))
}

/// Coefficients of the full BURA sum; `|dtilde_1| > |dtilde_2| > ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuraCoefficients {
    alpha: f64,
    lambda1: f64,
    precision: Precision,
    c0: Extended,
    c: Vec<Extended>,
    dtilde: Vec<Extended>,
}

/// An observed monotonicity that does not hold for a coefficient set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoefficientDiagnostic {
    /// `c_{i+1} >= c_i`.
    WeightNotDecreasing { index: usize },
    /// `|c_{i+1} / dtilde_{i+1}| <= |c_i / dtilde_i|`.
    RatioNotIncreasing { index: usize },
}

impl BuraCoefficients {
    /// Validates `c_i > 0`, `dtilde_i < 0` and strictly decreasing
    /// `|dtilde_i|`.
    pub fn from_parts(
        alpha: f64,
        lambda1: f64,
        precision: Precision,
        c0: Extended,
        c: Vec<Extended>,
        dtilde: Vec<Extended>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(BuraError::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(lambda1 >= 1.0) || !lambda1.is_finite() {
            return Err(BuraError::InvalidInput(format!("lambda1 must be at least 1, got {lambda1}")));
        }
        if c.len() != dtilde.len() {
            return Err(BuraError::InvalidInput(format!("{} weights but {} shifts", c.len(), dtilde.len())));
        }
        if let Some(i) = c.iter().position(|x| !(x.to_f64() > 0.0) || !x.is_finite()) {
            return Err(BuraError::CoefficientSign(format!("c_{} = {:e} is not positive", i + 1, c[i].to_f64())));
        }
        if let Some(i) = dtilde.iter().position(|x| !(x.to_f64() < 0.0) || !x.is_finite()) {
            return Err(BuraError::CoefficientSign(format!(
                "dtilde_{} = {:e} is not negative",
                i + 1,
                dtilde[i].to_f64()
            )));
        }
        if dtilde.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(BuraError::CoefficientSign("|dtilde_i| is not strictly decreasing".into()));
        }
        if !c0.is_finite() {
            return Err(BuraError::CoefficientSign("c_0 is not finite".into()));
        }
        Ok(BuraCoefficients { alpha, lambda1, precision, c0, c, dtilde })
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    /// Working precision of the underlying approximation.
    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// The same sum for the spectrum scaled by `1 / lambda1`:
    /// `dtilde_i / lambda1`, `c_i lambda1^{alpha-1}`, `c_0 lambda1^alpha`.
    pub fn normalized(&self) -> BuraCoefficients {
        if self.lambda1 == 1.0 {
            return self.clone();
        }
        let l1 = Extended::from_f64(self.lambda1);
        let la = l1.powf(Extended::from_f64(self.alpha));
        BuraCoefficients {
            lambda1: 1.0,
            c0: self.c0 * la,
            c: self.c.iter().map(|&c| c * la / l1).collect(),
            dtilde: self.dtilde.iter().map(|&d| d / l1).collect(),
            ..self.clone()
        }
    }

    /// `c_i / dtilde_i` for `i = 1..=k`.
    pub fn ratios(&self) -> Vec<Extended> {
        self.c.iter().zip(&self.dtilde).map(|(&c, &d)| c / d).collect()
    }

    /// Violations of the monotonicities `c_i` decreasing and
    /// `|c_i / dtilde_i|` increasing (1-based index of the first element of
    /// the offending pair). These are observations, not requirements.
    pub fn diagnostics(&self) -> Vec<CoefficientDiagnostic> {
        let mut out = Vec::new();
        for i in 0..self.k().saturating_sub(1) {
            if !(self.c[i + 1] < self.c[i]) {
                out.push(CoefficientDiagnostic::WeightNotDecreasing { index: i + 1 });
            }
        }
        let r = self.ratios();
        for i in 0..self.k().saturating_sub(1) {
            if !(r[i + 1].abs() > r[i].abs()) {
                out.push(CoefficientDiagnostic::RatioNotIncreasing { index: i + 1 });
            }
        }
        out
    }

    /// Writes the coefficient file: a version line, the header
    /// `alpha k lambda1 precision` with its values, then `i c_i dtilde_i`
    /// rows, row 0 holding `c_0` (with a zero shift).
    pub fn to_text(&self) -> String {
        let mut s = String::from("bura-coefficients 1\nalpha k lambda1 precision\n");
        let _ = writeln!(s, "{:e} {} {:e} {}", self.alpha, self.k(), self.lambda1, self.precision.digits());
        let _ = writeln!(s, "0 {} 0e0", self.c0.to_exact_string());
        for (i, (c, d)) in self.c.iter().zip(&self.dtilde).enumerate() {
            let _ = writeln!(s, "{} {} {}", i + 1, c.to_exact_string(), d.to_exact_string());
        }
        s
    }

    /// Inverse of [`BuraCoefficients::to_text`]; bit-exact.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let bad = |m: &str| BuraError::Parse(m.to_string());
        if lines.next() != Some("bura-coefficients 1") {
            return Err(bad("missing `bura-coefficients 1` version line"));
        }
        if lines.next().map(|l| l.split_whitespace().collect::<Vec<_>>())
            != Some(vec!["alpha", "k", "lambda1", "precision"])
        {
            return Err(bad("missing `alpha k lambda1 precision` header"));
        }
        let head: Vec<&str> = lines.next().ok_or_else(|| bad("missing header values"))?.split_whitespace().collect();
        if head.len() != 4 {
            return Err(bad("header values need four fields"));
        }
        let alpha: f64 = head[0].parse().map_err(|_| bad("bad alpha"))?;
        let k: usize = head[1].parse().map_err(|_| bad("bad k"))?;
        let lambda1: f64 = head[2].parse().map_err(|_| bad("bad lambda1"))?;
        let precision = Precision::from_digits(head[3].parse().map_err(|_| bad("bad precision"))?)?;
        let mut c0 = None;
        let (mut c, mut dtilde) = (Vec::with_capacity(k), Vec::with_capacity(k));
        for (row, line) in lines.enumerate() {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 || f[0].parse::<usize>().ok() != Some(row) {
                return Err(BuraError::Parse(format!("bad coefficient row `{line}`")));
            }
            let ci = Extended::parse_exact(f[1])?;
            if row == 0 {
                c0 = Some(ci);
            } else {
                c.push(ci);
                dtilde.push(Extended::parse_exact(f[2])?);
            }
        }
        if c.len() != k {
            return Err(BuraError::Parse(format!("expected {k} coefficient rows, found {}", c.len())));
        }
        Self::from_parts(alpha, lambda1, precision, c0.ok_or_else(|| bad("missing c_0 row"))?, c, dtilde)
    }
}

impl ShiftedSum for BuraCoefficients {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn lambda1(&self) -> f64 {
        self.lambda1
    }
    fn constant(&self) -> Extended {
        self.c0
    }
    fn weights(&self) -> &[Extended] {
        &self.c
    }
    fn shifts(&self) -> &[Extended] {
        &self.dtilde
    }
}

/// Change of variable from partial fractions of `r ~ t^alpha` on `[0, 1]`
/// to solver coefficients for a spectrum in `[lambda1, inf)`.
pub fn to_bura_coefficients(pf: &PartialFractionForm, alpha: f64, lambda1: f64) -> Result<BuraCoefficients> {
    if !(lambda1 >= 1.0) || !lambda1.is_finite() {
        return Err(BuraError::InvalidInput(format!("lambda1 must be at least 1, got {lambda1}")));
    }
    let l1 = Extended::from_f64(lambda1);
    let a = Extended::from_f64(alpha);
    let scale = if lambda1 == 1.0 { Extended::one() } else { l1.powf(-a) };
    let mut c0 = pf.constant();
    let mut c = Vec::with_capacity(pf.degree());
    let mut dtilde = Vec::with_capacity(pf.degree());
    for (&d, &b) in pf.poles().iter().zip(pf.residues()) {
        c0 -= b / d;
        c.push(-(l1 * scale) * b / (d * d));
        dtilde.push(l1 / d);
    }
    BuraCoefficients::from_parts(alpha, lambda1, pf.precision(), scale * c0, c, dtilde)
}

/// The reduced sum retaining the last `kprime` terms of a BURA sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBura {
    alpha: f64,
    lambda1: f64,
    k: usize,
    c0_reduced: Extended,
    c: Vec<Extended>,
    dtilde: Vec<Extended>,
}

impl ReducedBura {
    /// Degree of the parent BURA sum.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kprime(&self) -> usize {
        self.c.len()
    }
}

impl ShiftedSum for ReducedBura {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn lambda1(&self) -> f64 {
        self.lambda1
    }
    fn constant(&self) -> Extended {
        self.c0_reduced
    }
    fn weights(&self) -> &[Extended] {
        &self.c
    }
    fn shifts(&self) -> &[Extended] {
        &self.dtilde
    }
}

/// Folds terms `1..=k-kprime` into the constant:
/// `c0_reduced = c_0 - sum_{i <= k-kprime} c_i / dtilde_i`.
pub fn reduce(coeffs: &BuraCoefficients, kprime: usize) -> Result<ReducedBura> {
    let k = coeffs.k();
    if kprime == 0 || kprime > k {
        return Err(BuraError::InvalidInput(format!("kprime must lie in 1..={k}, got {kprime}")));
    }
    let m = k - kprime;
    let c0_reduced = coeffs.c[..m].iter().zip(&coeffs.dtilde[..m]).fold(coeffs.c0, |acc, (&c, &d)| acc - c / d);
    Ok(ReducedBura {
        alpha: coeffs.alpha,
        lambda1: coeffs.lambda1,
        k,
        c0_reduced,
        c: coeffs.c[m..].to_vec(),
        dtilde: coeffs.dtilde[m..].to_vec(),
    })
}

/// `sum_{i <= k-kprime} (-c_i / dtilde_i) z / (z - dtilde_i)`, the exact
/// difference between the reduced and the full sum at `z`.
pub fn reduction_gap(coeffs: &BuraCoefficients, kprime: usize, z: Extended) -> Extended {
    let m = coeffs.k().saturating_sub(kprime);
    coeffs.c[..m]
        .iter()
        .zip(&coeffs.dtilde[..m])
        .fold(Extended::zero(), |acc, (&c, &d)| acc - (c / d) * z / (z - d))
}

/// Sampled maximum of `|z^{-alpha} - s(z)|` over `[1, 1/delta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorIndicator {
    pub value: f64,
    pub argmax: f64,
    pub resolution: Resolution,
}

/// Log-uniform grid of `plan.grid_points` on `[1, 1/delta]` with
/// golden-section refinement of every grid-local maximum. Evaluated in
/// double-double arithmetic, in the normalized variable: for
/// `lambda1 != 1` the error is `|z^{-alpha} - lambda1^alpha s(lambda1 z)|`.
pub fn error_indicator<S: ShiftedSum + ?Sized>(s: &S, delta: f64, plan: &SamplingPlan) -> Result<ErrorIndicator> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BuraError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    let alpha = DoubleDouble::from_f64(-s.alpha());
    let l1 = DoubleDouble::from_f64(s.lambda1());
    let scale = if s.lambda1() == 1.0 { DoubleDouble::one() } else { l1.powf(-alpha) };
    let err = |lz: f64| {
        let z = DoubleDouble::from_f64(lz.exp());
        (z.powf(alpha) - scale * eval_rational_in(s, l1 * z)).abs().to_f64()
    };
    let hi = (1.0 / delta).ln();
    let m = plan.grid_points.max(2);
    let grid: Vec<f64> = (0..=m).map(|j| hi * j as f64 / m as f64).collect();
    let values: Vec<f64> = grid.par_iter().map(|&x| err(x)).collect();
    let peaks: Vec<usize> = (0..=m)
        .filter(|&i| (i == 0 || values[i] >= values[i - 1]) && (i == m || values[i] >= values[i + 1]))
        .collect();
    let refined: Vec<(f64, f64)> = peaks
        .par_iter()
        .map(|&i| golden_max(err, grid[i.saturating_sub(1)], grid[(i + 1).min(m)], plan.golden_iterations))
        .collect();
    let sampled: Vec<(f64, f64)> = grid.iter().copied().zip(values).collect();
    let candidates: Vec<(f64, f64)> = [ordered_max(&sampled), ordered_max(&refined)].into_iter().flatten().collect();
    let (lz, value) = ordered_max(&candidates).unwrap_or((0.0, 0.0));
    Ok(ErrorIndicator {
        value,
        argmax: lz.exp(),
        resolution: Resolution { samples: m + 1, refined_maxima: peaks.len(), golden_iterations: plan.golden_iterations },
    })
}

/// Upper bound on the reduction gap over `[1, 1/delta]` (in the
/// normalized variable, see [`BuraCoefficients::normalized`]):
/// `(1/delta) / (1/delta - dtilde_m) * m c_m / (-dtilde_m)` with
/// `m = k - kprime`. Zero when nothing is folded.
pub fn error_gap_bound(coeffs: &BuraCoefficients, kprime: usize, delta: f64) -> f64 {
    let k = coeffs.k();
    if kprime >= k {
        return 0.0;
    }
    let m = k - kprime;
    let coeffs = coeffs.normalized();
    let inv = Extended::from_f64(1.0 / delta);
    let d = coeffs.dtilde[m - 1];
    let c = coeffs.c[m - 1];
    (inv / (inv - d) * Extended::from_usize(m) * c / (-d)).to_f64()
}

/// Order of magnitude `floor(log10 |x|)`.
pub fn ord(x: f64) -> i32 {
    let l = x.abs().log10().floor();
    // log10 of an exact power of ten can round to just below the integer.
    let p = 10f64.powi(l as i32 + 1);
    if x.abs() >= p {
        l as i32 + 1
    } else {
        l as i32
    }
}

/// `ord(1/delta) + ord(c_m / (-dtilde_m)) - ord(-dtilde_m)` with
/// `m = k - kprime`, the predicted order of the reduction gap (normalized
/// variable).
pub fn gap_order(coeffs: &BuraCoefficients, kprime: usize, delta: f64) -> Result<i32> {
    let k = coeffs.k();
    if kprime == 0 || kprime >= k {
        return Err(BuraError::InvalidInput(format!("kprime must lie in 1..{k}, got {kprime}")));
    }
    let m = k - kprime;
    let coeffs = coeffs.normalized();
    let d = coeffs.dtilde[m - 1];
    let ratio = (coeffs.c[m - 1] / (-d)).to_f64();
    Ok(ord(1.0 / delta) + ord(ratio) - ord(d.to_f64()))
}

/// Smallest `kprime` whose predicted gap order is strictly below
/// `target_order`; `k` when no reduction qualifies.
pub fn suggest_kprime(coeffs: &BuraCoefficients, delta: f64, target_order: i32) -> usize {
    let k = coeffs.k();
    let coeffs = &coeffs.normalized();
    (1..k)
        .find(|&kp| gap_order(coeffs, kp, delta).is_ok_and(|o| o < target_order))
        .unwrap_or(k)
}
