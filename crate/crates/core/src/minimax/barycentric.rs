//! Rational interpolants in barycentric form.

use crate::error::{BuraError, Result};
use crate::xprec::{convert, Real};

/// A type-(k, k) rational function
/// `r(t) = sum w_i f_i / (t - x_i) / sum w_i / (t - x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricRational<T> {
    support: Vec<T>,
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> BarycentricRational<T> {
    /// Builds a rational from raw parts, checking the structural invariants.
    pub fn new(support: Vec<T>, values: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if support.is_empty() || support.len() != values.len() || support.len() != weights.len() {
            return Err(BuraError::InvalidInput(format!(
                "barycentric parts have mismatched lengths {}/{}/{}",
                support.len(),
                values.len(),
                weights.len()
            )));
        }
        if support.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(BuraError::InvalidInput("support points must be strictly increasing".into()));
        }
        if let Some(i) = weights.iter().position(|w| w.to_f64() == 0.0 || !w.is_finite()) {
            return Err(BuraError::InvalidInput(format!("weight {i} is zero or not finite")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BuraError::InvalidInput("values must be finite".into()));
        }
        Ok(BarycentricRational { support, values, weights })
    }

    /// Numerator and denominator degree.
    pub fn degree(&self) -> usize {
        self.support.len() - 1
    }

    pub fn support_points(&self) -> &[T] {
        &self.support
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Evaluates `r(t)`, failing when `t` is exactly a pole.
    pub fn try_eval(&self, t: T) -> Result<T> {
        let (num, den) = match self.sums(t) {
            Ok(nd) => nd,
            Err(fi) => return Ok(fi),
        };
        if den.to_f64() == 0.0 {
            return Err(BuraError::PoleHit(t.to_f64()));
        }
        Ok(num / den)
    }

    /// Evaluates `r(t)`. Returns the stored value at a support point and a
    /// signed infinity when the denominator cancels to zero.
    pub fn eval(&self, t: T) -> T {
        match self.sums(t) {
            Err(fi) => fi,
            Ok((num, den)) => {
                if den.to_f64() == 0.0 {
                    let s = if num.to_f64() < 0.0 { -1.0 } else { 1.0 };
                    T::from_f64(s * f64::INFINITY)
                } else {
                    num / den
                }
            }
        }
    }

    /// Numerator and denominator sums; `Err(f_i)` when `t == x_i`.
    fn sums(&self, t: T) -> std::result::Result<(T, T), T> {
        let mut num = T::zero();
        let mut den = T::zero();
        for ((&x, &f), &w) in self.support.iter().zip(&self.values).zip(&self.weights) {
            let d = t - x;
            if d.to_f64() == 0.0 {
                return Err(f);
            }
            let c = w / d;
            num += c * f;
            den += c;
        }
        Ok((num, den))
    }

    /// `r(inf) = sum w_i f_i / sum w_i`.
    pub fn value_at_infinity(&self) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for (&f, &w) in self.values.iter().zip(&self.weights) {
            num += w * f;
            den += w;
        }
        num / den
    }

    /// Lossless widening (or rounding narrowing) to another scalar type.
    pub fn convert<U: Real>(&self) -> BarycentricRational<U> {
        let c = |v: &Vec<T>| v.iter().map(|&x| convert::<T, U>(x)).collect();
        BarycentricRational { support: c(&self.support), values: c(&self.values), weights: c(&self.weights) }
    }
}

/// Builds the type-(k, k) rational interpolating `2k + 1` data pairs.
///
/// Even-indexed nodes become the `k + 1` support points; the weights are
/// the null vector of the `k x (k + 1)` Loewner matrix that enforces
/// interpolation at the `k` odd-indexed nodes.
pub fn interpolate_rational<T: Real>(nodes: &[T], values: &[T]) -> Result<BarycentricRational<T>> {
    if nodes.len() != values.len() {
        return Err(BuraError::InvalidInput(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.len().is_multiple_of(2) {
        return Err(BuraError::InvalidInput(format!(
            "need an odd number 2k+1 of nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(BuraError::InvalidInput("nodes must be strictly increasing".into()));
    }
    if values.iter().chain(nodes).any(|v| !v.is_finite()) {
        return Err(BuraError::InvalidInput("nodes and values must be finite".into()));
    }
    let k = nodes.len() / 2;
    let support: Vec<T> = nodes.iter().step_by(2).copied().collect();
    let fs: Vec<T> = values.iter().step_by(2).copied().collect();
    if k == 0 {
        return BarycentricRational::new(support, fs, vec![T::one()]);
    }
    let tests: Vec<T> = nodes.iter().skip(1).step_by(2).copied().collect();
    let gs: Vec<T> = values.iter().skip(1).step_by(2).copied().collect();

    // Loewner matrix, stored row-major k x (k+1).
    let cols = k + 1;
    let mut loewner = vec![T::zero(); k * cols];
    for i in 0..k {
        for j in 0..cols {
            loewner[i * cols + j] = (gs[i] - fs[j]) / (tests[i] - support[j]);
        }
    }
    if loewner.iter().all(|v| v.to_f64() == 0.0) {
        // Constant data: every weight vector reproduces the constant, so take
        // the pole-free alternating choice.
        let weights = (0..cols).map(|j| T::from_f64(if j % 2 == 0 { 1.0 } else { -1.0 })).collect();
        return BarycentricRational::new(support, fs, weights);
    }
    let weights = loewner_null_vector(&mut loewner, k, cols)?;
    BarycentricRational::new(support, fs, weights)
}

/// Null vector of a row-major `rows x cols` matrix with `cols = rows + 1`.
///
/// The matrix is equilibrated (rows, then columns, to unit max norm) and
/// the transpose is factored by Householder QR; the last column of `Q`
/// spans the null space.
fn loewner_null_vector<T: Real>(m: &mut [T], rows: usize, cols: usize) -> Result<Vec<T>> {
    for i in 0..rows {
        let s = (0..cols).map(|j| m[i * cols + j].abs()).fold(T::zero(), T::max);
        if s.to_f64() == 0.0 {
            return Err(BuraError::Degenerate(format!("Loewner row {i} vanishes")));
        }
        for j in 0..cols {
            m[i * cols + j] /= s;
        }
    }
    let mut col_scale = vec![T::one(); cols];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let s = (0..rows).map(|i| m[i * cols + j].abs()).fold(T::zero(), T::max);
        if s.to_f64() == 0.0 {
            continue;
        }
        for i in 0..rows {
            m[i * cols + j] /= s;
        }
        *cs = s.recip();
    }

    // a = m^T, (cols x rows), column-major by Householder column.
    let n = cols;
    let mut a: Vec<Vec<T>> = (0..rows).map(|i| (0..cols).map(|j| m[i * cols + j]).collect()).collect();
    let mut vs: Vec<Vec<T>> = Vec::with_capacity(rows);
    let mut diag = Vec::with_capacity(rows);
    for c in 0..rows {
        let norm = a[c][c..].iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
        if norm.to_f64() == 0.0 {
            return Err(BuraError::Degenerate(format!(
                "Loewner matrix is rank deficient at column {c}"
            )));
        }
        let alpha = if a[c][c].to_f64() > 0.0 { -norm } else { norm };
        let mut v: Vec<T> = a[c][c..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        diag.push(alpha.abs());
        if vnorm2.to_f64() != 0.0 {
            for col in a.iter_mut().skip(c + 1) {
                let dot = v.iter().zip(&col[c..]).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
                let f = (dot + dot) / vnorm2;
                for (x, &vi) in col[c..].iter_mut().zip(&v) {
                    *x -= f * vi;
                }
            }
        }
        vs.push(v);
    }
    let dmax = diag.iter().fold(T::zero(), |acc: T, &d| acc.max(d)).to_f64();
    let dmin = diag.iter().fold(T::from_f64(f64::INFINITY), |acc: T, &d| acc.min(d)).to_f64();
    if dmin <= T::epsilon() * dmax {
        return Err(BuraError::Degenerate(format!(
            "Loewner null space is not one-dimensional (pivot ratio {:e})",
            dmin / dmax
        )));
    }

    // Q e_n: apply the reflectors in reverse order.
    let mut q = vec![T::zero(); n];
    q[n - 1] = T::one();
    for (c, v) in vs.iter().enumerate().rev() {
        let vnorm2 = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vnorm2.to_f64() == 0.0 {
            continue;
        }
        let dot = v.iter().zip(&q[c..]).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
        let f = (dot + dot) / vnorm2;
        for (x, &vi) in q[c..].iter_mut().zip(v) {
            *x -= f * vi;
        }
    }
    let w: Vec<T> = q.iter().zip(&col_scale).map(|(&x, &s)| x * s).collect();
    if let Some(j) = w.iter().position(|x| x.to_f64() == 0.0) {
        return Err(BuraError::Degenerate(format!("weight {j} of the interpolant vanishes")));
    }
    Ok(w)
}
