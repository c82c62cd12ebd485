//! Sampling plans and golden-section refinement shared by the sup-norm
//! certificates.

/// Grid used to certify a sup-norm error from below.
///
/// A dense clustered grid is scanned, then every grid-local maximum is
/// refined by golden-section search between its neighbours. The result is
/// a lower bound on the true supremum whose quality is set by these knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    /// Points in the base grid.
    pub grid_points: usize,
    /// Extra points inserted between consecutive features (support points
    /// of a rational, for instance) when the caller knows them.
    pub points_per_gap: usize,
    /// Golden-section iterations per refined local maximum.
    pub golden_iterations: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { grid_points: 10_000, points_per_gap: 32, golden_iterations: 60 }
    }
}

/// Reported alongside every sampled maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub samples: usize,
    pub refined_maxima: usize,
    pub golden_iterations: usize,
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "lower bound from {} samples, {} maxima refined by {} golden-section steps",
            self.samples, self.refined_maxima, self.golden_iterations
        )
    }
}

pub(crate) const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[a, b]` by golden-section search, also checking both
/// endpoints. Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iterations: usize) -> (f64, f64) {
    let (fa, fb) = (f(a), f(b));
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iterations {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if fa > best.1 {
        best = (a, fa);
    }
    if fb > best.1 {
        best = (b, fb);
    }
    best
}

/// `n` points `lo * (hi/lo)^(i/(n-1))`; `lo` must be positive.
pub fn geometric_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo * (ratio * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Index-ordered maximum of `(location, value)` pairs; ties keep the first.
pub(crate) fn ordered_max(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    pairs.iter().copied().fold(None, |acc, p| match acc {
        Some(best) if best.1 >= p.1 => Some(best),
        _ => Some(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_max() {
        let (x, fx) = golden_max(|t| -(t - 0.3) * (t - 0.3), 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx.abs() < 1e-17);
    }

    #[test]
    fn golden_reports_endpoint() {
        let (x, _) = golden_max(|t| t, 0.0, 2.0, 60);
        assert_eq!(x, 2.0);
    }

    #[test]
    fn geometric_ends_are_exact() {
        let p = geometric_points(1e-50, 1.0, 11);
        assert_eq!(p[0], 1e-50);
        assert_eq!(p[10], 1.0);
        assert!((p[5] / 1e-25 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ordered_max_keeps_first_tie() {
        assert_eq!(ordered_max(&[(1.0, 2.0), (3.0, 2.0), (0.0, 1.0)]), Some((1.0, 2.0)));
        assert_eq!(ordered_max(&[]), None);
    }
}
