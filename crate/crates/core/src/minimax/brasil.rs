//! Interval-rescaling iteration for the best rational approximation.
//!
//! The approximant interpolates `t^alpha` at `2k + 1` nodes in `(0, 1)`.
//! These split `[0, 1]` into `2k + 2` subintervals, each holding one local
//! maximum of the error. Subintervals whose local error is above the mean
//! are shrunk and the others stretched until all local errors agree.

use rayon::prelude::*;

use super::{interpolate_rational, ApproximationTarget, BarycentricRational, EquioscillationInfo, IterationOptions};
use crate::error::{BuraError, Result};
use crate::sampling::golden_max;
use crate::xprec::Real;

/// Starting node distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeInit {
    /// `z_j = (j / (2k + 2))^exponent`.
    PowerLaw { exponent: f64 },
    /// Nodes of an earlier run, possibly of another degree; they are
    /// resampled to `2k + 1` points.
    Warm(Vec<f64>),
}

impl Default for NodeInit {
    fn default() -> Self {
        NodeInit::PowerLaw { exponent: 8.0 }
    }
}

impl NodeInit {
    fn nodes(&self, k: usize) -> Vec<f64> {
        let m = 2 * k + 2;
        match self {
            NodeInit::PowerLaw { exponent } => {
                (1..m).map(|j| (j as f64 / m as f64).powf(*exponent)).collect()
            }
            NodeInit::Warm(old) => resample_nodes(old, 2 * k + 1),
        }
    }
}

/// Resamples an increasing node set in `(0, 1)` to `count` nodes.
///
/// The map `j / (n + 1) -> ln z_j` is interpolated piecewise linearly and
/// extrapolated below the first node with the slope of the first pair.
pub fn resample_nodes(old: &[f64], count: usize) -> Vec<f64> {
    let n = old.len();
    if n == count {
        return old.to_vec();
    }
    if n < 2 {
        return NodeInit::PowerLaw { exponent: 8.0 }.nodes(count / 2);
    }
    let m_old = (n + 1) as f64;
    // Knots: (u_j, ln z_j) for the interior nodes plus (1, 0) at t = 1.
    let mut us: Vec<f64> = (1..=n).map(|j| j as f64 / m_old).collect();
    let mut ls: Vec<f64> = old.iter().map(|z| z.ln()).collect();
    us.push(1.0);
    ls.push(0.0);
    let m_new = (count + 1) as f64;
    let mut out: Vec<f64> = (1..=count)
        .map(|j| {
            let u = j as f64 / m_new;
            let l = if u <= us[0] {
                ls[0] - (us[0] - u) * (ls[1] - ls[0]) / (us[1] - us[0])
            } else {
                let i = us.partition_point(|&x| x < u).min(us.len() - 1);
                let (u0, u1, l0, l1) = (us[i - 1], us[i], ls[i - 1], ls[i]);
                l0 + (u - u0) * (l1 - l0) / (u1 - u0)
            };
            l.exp()
        })
        .collect();
    for j in 1..out.len() {
        if out[j] <= out[j - 1] {
            out[j] = out[j - 1] * (1.0 + 1e-6);
        }
    }
    out
}

/// Best uniform rational approximation of `t^alpha` of type `(k, k)`.
///
/// Runs in the precision of `T`. With `opts.double_warmup` set and `T`
/// wider than `f64`, the iteration first runs in `f64` and then continues
/// in `T` from the best `f64` nodes. On non-convergence the best iterate
/// (smallest deviation) is returned with `converged = false`.
pub fn brasil_approximate<T: Real>(
    target: &ApproximationTarget,
    k: usize,
    opts: &IterationOptions,
) -> Result<(BarycentricRational<T>, EquioscillationInfo)> {
    if k == 0 {
        return Err(BuraError::InvalidInput("degree k must be at least 1".into()));
    }
    if !(opts.tolerance > 0.0) || !(opts.damping > 0.0) || opts.max_rescale <= 1.0 {
        return Err(BuraError::InvalidInput(format!("bad iteration options {opts:?}")));
    }
    let start = opts.init.nodes(k);
    if T::DIGITS > 16 && opts.double_warmup {
        let warm = run::<f64>(target, k, start.clone(), opts, true);
        let nodes = match warm {
            Ok(w) => w.info.nodes,
            Err(_) => start,
        };
        let mut out = run::<T>(target, k, nodes, opts, false)?;
        out.info.precision = T::PRECISION;
        return Ok((out.rational, out.info));
    }
    let out = run::<T>(target, k, start, opts, false)?;
    Ok((out.rational, out.info))
}

/// Power-law exponents tried, in order, after the configured start fails.
pub const RESTART_EXPONENTS: [f64; 4] = [16.0, 20.0, 10.0, 6.0];

/// [`brasil_approximate`] from successive starting points until one
/// converges: `warm` nodes if given, then `opts.init`, then power laws with
/// [`RESTART_EXPONENTS`]. Without convergence, returns the attempt with the
/// smallest deviation.
pub fn brasil_with_restarts<T: Real>(
    target: &ApproximationTarget,
    k: usize,
    opts: &IterationOptions,
    warm: Option<&[f64]>,
) -> Result<(BarycentricRational<T>, EquioscillationInfo)> {
    let mut inits: Vec<NodeInit> = warm.map(|w| NodeInit::Warm(w.to_vec())).into_iter().collect();
    inits.push(opts.init.clone());
    inits.extend(RESTART_EXPONENTS.iter().map(|&exponent| NodeInit::PowerLaw { exponent }));
    let mut best: Option<(BarycentricRational<T>, EquioscillationInfo)> = None;
    let mut last_err = None;
    for init in inits {
        let o = IterationOptions { init, ..opts.clone() };
        match brasil_approximate::<T>(target, k, &o) {
            Ok(out) if out.1.converged => return Ok(out),
            Ok(out) => {
                if best.as_ref().is_none_or(|b| out.1.deviation < b.1.deviation) {
                    best = Some(out);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one attempt"))
}

struct Outcome<T> {
    rational: BarycentricRational<T>,
    info: EquioscillationInfo,
}

/// Local maxima of `|t^alpha - r(t)|` between consecutive boundary points.
/// Returns `(location, |error|, signed error)` per subinterval.
pub(crate) fn local_maxima<T: Real>(
    target: &ApproximationTarget,
    r: &BarycentricRational<T>,
    nodes: &[f64],
    golden_iterations: usize,
) -> Vec<(f64, f64, f64)> {
    let mut bounds = Vec::with_capacity(nodes.len() + 2);
    bounds.push(0.0);
    bounds.extend_from_slice(nodes);
    bounds.push(1.0);
    let err = |t: f64| {
        let tt = T::from_f64(t);
        (target.eval(tt) - r.eval(tt)).to_f64()
    };
    bounds
        .par_windows(2)
        .map(|w| {
            let (x, e) = golden_max(|t| err(t).abs(), w[0], w[1], golden_iterations);
            (x, e, err(x))
        })
        .collect()
}

/// Iterations without a new best deviation before the step is halved.
const PATIENCE: usize = 12;

fn run<T: Real>(
    target: &ApproximationTarget,
    k: usize,
    mut nodes: Vec<f64>,
    opts: &IterationOptions,
    warmup: bool,
) -> Result<Outcome<T>> {
    debug_assert_eq!(nodes.len(), 2 * k + 1);
    let mut best: Option<Outcome<T>> = None;
    let mut since_best = 0usize;
    let mut damping = opts.damping;
    let min_damping = opts.damping / 256.0;
    // Warm-up gives up once f64 roundoff stalls progress.
    let stall_limit = if warmup { 5 * PATIENCE } else { usize::MAX };
    for iter in 1..=opts.max_iterations {
        match evaluate::<T>(target, &nodes, iter, opts) {
            Ok(out) => {
                let improved = best.as_ref().is_none_or(|b| out.info.deviation < b.info.deviation);
                if out.info.deviation <= opts.tolerance {
                    best = Some(out);
                    break;
                }
                if improved {
                    nodes = rescale(&out.info.nodes, &out.info.local_errors, damping, opts.max_rescale);
                    best = Some(out);
                    since_best = 0;
                    continue;
                }
                since_best += 1;
                if since_best >= stall_limit {
                    break;
                }
                if since_best.is_multiple_of(PATIENCE) {
                    // Oscillating: restart from the best iterate with a shorter step.
                    damping = (damping * 0.5).max(min_damping);
                    let b = &best.as_ref().expect("improved on first pass").info;
                    nodes = rescale(&b.nodes, &b.local_errors, damping, opts.max_rescale);
                } else {
                    nodes = rescale(&out.info.nodes, &out.info.local_errors, damping, opts.max_rescale);
                }
            }
            Err(e) => {
                // A degenerate or non-finite iterate is a step that went too far.
                let Some(b) = best.as_ref() else { return Err(e) };
                damping = (damping * 0.5).max(min_damping);
                since_best += 1;
                if since_best >= stall_limit {
                    break;
                }
                nodes = rescale(&b.info.nodes, &b.info.local_errors, damping, opts.max_rescale);
            }
        }
    }
    let mut out = best.ok_or_else(|| BuraError::InvalidInput("max_iterations must be at least 1".into()))?;
    out.info.converged = out.info.deviation <= opts.tolerance;
    Ok(out)
}

/// Interpolant and local errors for one node set.
fn evaluate<T: Real>(
    target: &ApproximationTarget,
    nodes: &[f64],
    iter: usize,
    opts: &IterationOptions,
) -> Result<Outcome<T>> {
    let tn: Vec<T> = nodes.iter().map(|&z| T::from_f64(z)).collect();
    let tv: Vec<T> = tn.iter().map(|&z| target.eval(z)).collect();
    let r = interpolate_rational(&tn, &tv)?;
    let maxima = local_maxima(target, &r, nodes, opts.golden_iterations);
    let errs: Vec<f64> = maxima.iter().map(|m| m.1).collect();
    if errs.iter().any(|e| !e.is_finite()) {
        return Err(BuraError::Degenerate(format!("non-finite local error at iteration {iter}")));
    }
    let emax = errs.iter().copied().fold(0.0, f64::max);
    let emin = errs.iter().copied().fold(f64::INFINITY, f64::min);
    let deviation = if emin > 0.0 { (emax - emin) / emin } else { f64::INFINITY };
    let info = EquioscillationInfo {
        nodes: nodes.to_vec(),
        local_errors: errs,
        signed_extrema: maxima.iter().map(|m| m.2).collect(),
        extrema_locations: maxima.iter().map(|m| m.0).collect(),
        deviation,
        iterations: iter,
        converged: deviation <= opts.tolerance,
        precision: T::PRECISION,
    };
    Ok(Outcome { rational: r, info })
}

/// One equilibration step on the subinterval lengths.
fn rescale(nodes: &[f64], errs: &[f64], damping: f64, cap: f64) -> Vec<f64> {
    let mut bounds = Vec::with_capacity(nodes.len() + 2);
    bounds.push(0.0);
    bounds.extend_from_slice(nodes);
    bounds.push(1.0);
    let floor = errs.iter().copied().filter(|e| *e > 0.0).fold(f64::INFINITY, f64::min);
    let logs: Vec<f64> = errs.iter().map(|&e| e.max(floor).ln()).collect();
    let log_mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let mut lens: Vec<f64> = bounds
        .windows(2)
        .zip(&logs)
        .map(|(w, &le)| {
            let factor = (damping * (log_mean - le)).exp().clamp(1.0 / cap, cap);
            (w[1] - w[0]) * factor
        })
        .collect();
    let total: f64 = lens.iter().sum();
    for l in &mut lens {
        *l /= total;
    }
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    for l in &lens[..nodes.len()] {
        acc += l;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_keeps_order_and_count() {
        let old = NodeInit::default().nodes(5);
        let new = resample_nodes(&old, 13);
        assert_eq!(new.len(), 13);
        assert!(new.windows(2).all(|w| w[0] < w[1]));
        assert!(new[0] > 0.0 && *new.last().unwrap() < 1.0);
        assert_eq!(resample_nodes(&old, old.len()), old);
    }

    #[test]
    fn rescale_preserves_partition() {
        let nodes = vec![0.1, 0.3, 0.6];
        let errs = vec![1.0, 2.0, 0.5, 1.0];
        let out = rescale(&nodes, &errs, 0.5, 10.0);
        assert_eq!(out.len(), 3);
        assert!(out.windows(2).all(|w| w[0] < w[1]));
        // The interval with the largest error shrinks relative to the rest.
        let before = (nodes[1] - nodes[0]) / (nodes[2] - nodes[1]);
        let after = (out[1] - out[0]) / (out[2] - out[1]);
        assert!(after < before);
    }

    #[test]
    fn low_degree_converges() {
        let target = ApproximationTarget::new(0.5, 16).unwrap();
        let (r, info) = brasil_approximate::<f64>(&target, 3, &IterationOptions::default()).unwrap();
        assert!(info.converged, "{info:?}");
        assert!(info.alternates());
        assert_eq!(r.degree(), 3);
        assert_eq!(info.local_errors.len(), 8);
    }

    #[test]
    fn zero_degree_is_rejected() {
        let target = ApproximationTarget::new(0.5, 16).unwrap();
        assert!(brasil_approximate::<f64>(&target, 0, &IterationOptions::default()).is_err());
    }
}
