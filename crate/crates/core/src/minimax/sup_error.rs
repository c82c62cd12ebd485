use rayon::prelude::*;

use super::{ApproximationTarget, BarycentricRational};
use crate::sampling::{geometric_points, golden_max, ordered_max, Resolution, SamplingPlan};
use crate::xprec::Real;

/// Sampled sup-norm of `t^alpha - r(t)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupError {
    pub value: f64,
    pub argmax: f64,
    pub resolution: Resolution,
}

/// Lower-bound certificate for `max_{[0,1]} |t^alpha - r(t)|`.
///
/// The grid is a power-law clustered base grid, plus geometric points in
/// every gap between consecutive support points of `r` (the error
/// oscillates about twice per gap, and the gaps shrink geometrically
/// toward `t = 0`). Every grid-local maximum is refined by golden-section
/// search.
pub fn sup_error<T: Real>(
    r: &BarycentricRational<T>,
    target: &ApproximationTarget,
    plan: &SamplingPlan,
) -> SupError {
    let support: Vec<f64> = r.support_points().iter().map(|x| x.to_f64()).collect();
    let grid = build_grid(&support, plan);
    let err = |t: f64| {
        let tt = T::from_f64(t);
        (target.eval(tt) - r.eval(tt)).to_f64().abs()
    };
    let values: Vec<f64> = grid.par_iter().map(|&t| err(t)).collect();
    let n = grid.len();
    let peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] >= values[i - 1];
            let right = i + 1 == n || values[i] >= values[i + 1];
            left && right && values[i] > 0.0
        })
        .collect();
    let refined: Vec<(f64, f64)> = peaks
        .par_iter()
        .map(|&i| {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(n - 1)];
            golden_max(err, lo, hi, plan.golden_iterations)
        })
        .collect();
    let sampled: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let (argmax, value) = ordered_max(&[ordered_max(&sampled), ordered_max(&refined)]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>())
    .unwrap_or((0.0, 0.0));
    SupError {
        value,
        argmax,
        resolution: Resolution {
            samples: n,
            refined_maxima: peaks.len(),
            golden_iterations: plan.golden_iterations,
        },
    }
}

fn build_grid(support: &[f64], plan: &SamplingPlan) -> Vec<f64> {
    let m = plan.grid_points.max(2);
    let smallest = support.iter().copied().filter(|&x| x > 0.0).fold(1.0, f64::min);
    // Exponent that puts the first nonzero grid point a decade below the
    // smallest support point.
    let q = ((smallest / 10.0).ln() / (1.0 / m as f64).ln()).clamp(1.0, 60.0);
    let mut grid: Vec<f64> = (0..=m).map(|i| (i as f64 / m as f64).powf(q)).collect();
    let per_gap = plan.points_per_gap;
    if per_gap >= 2 {
        let mut edges: Vec<f64> = support.iter().copied().filter(|&x| x > 0.0 && x < 1.0).collect();
        edges.insert(0, smallest * 1e-6);
        edges.push(1.0);
        for w in edges.windows(2) {
            if w[1] > w[0] {
                grid.extend(geometric_points(w[0], w[1], per_gap));
            }
        }
    }
    grid.retain(|t| (0.0..=1.0).contains(t));
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_interval_and_support_gaps() {
        let support = [1e-30, 1e-20, 1e-3, 0.5];
        let g = build_grid(&support, &SamplingPlan::default());
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.iter().filter(|&&t| t > 1e-30 && t < 1e-20).count() >= 30);
    }

    #[test]
    fn exact_function_has_zero_error() {
        // r(t) = constant 1 vs t^alpha: error max at t = 0, equal to 1.
        let r = BarycentricRational::new(vec![0.5f64], vec![1.0], vec![1.0]).unwrap();
        let target = ApproximationTarget::new(0.5, 16).unwrap();
        let e = sup_error(&r, &target, &SamplingPlan::default());
        assert_eq!(e.value, 1.0);
        assert_eq!(e.argmax, 0.0);
    }
}
