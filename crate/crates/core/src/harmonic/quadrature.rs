//! One-dimensional quadrature on a closed interval.

use crate::error::{Result, SyncError};

/// Result of a quadrature: value, function evaluations, estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub nodes: usize,
    pub error: f64,
}

const MAX_DEPTH: u32 = 40;
const MAX_EVALS: usize = 2_000_000;

/// Adaptive composite Simpson rule.
///
/// The interval is first cut into `panels` pieces so oscillatory integrands
/// are never accepted on a coincidentally small five-point estimate. Returns
/// `None` when the evaluation budget runs out before `tol` is met.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, tol: f64) -> Option<Quadrature> {
    let nodes = std::cell::Cell::new(0usize);
    let eval = |x: f64| {
        nodes.set(nodes.get() + 1);
        f(x)
    };
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    let mut err = 0.0;
    // stack of (a, b, fa, fm, fb, whole, tol, depth)
    let mut stack = Vec::new();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        let (fa, fm, fb) = (eval(lo), eval(0.5 * (lo + hi)), eval(hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        stack.push((lo, hi, fa, fm, fb, whole, tol / panels as f64, 0u32));
    }
    while let Some((lo, hi, fa, fm, fb, whole, t, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (flm, frm) = (eval(0.5 * (lo + mid)), eval(0.5 * (mid + hi)));
        let left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * t || depth >= MAX_DEPTH {
            total += left + right + delta / 15.0;
            err += delta.abs() / 15.0;
        } else {
            stack.push((lo, mid, fa, flm, fm, left, 0.5 * t, depth + 1));
            stack.push((mid, hi, fm, frm, fb, right, 0.5 * t, depth + 1));
        }
        if nodes.get() > MAX_EVALS {
            return None;
        }
    }
    if !total.is_finite() || err > tol {
        return None;
    }
    Some(Quadrature { value: total, nodes: nodes.get(), error: err })
}

/// Trapezoid rule for a `2π`-periodic integrand over one period starting at `a`.
///
/// The error estimate compares against the rule on every other node.
pub fn periodic_trapezoid<F: Fn(f64) -> f64>(f: &F, a: f64, period: f64, n: usize) -> Quadrature {
    let n = n.max(2) & !1;
    let h = period / n as f64;
    let vals: Vec<f64> = (0..n).map(|i| f(a + i as f64 * h)).collect();
    let fine = vals.iter().sum::<f64>() * h;
    let coarse = vals.iter().step_by(2).sum::<f64>() * 2.0 * h;
    Quadrature { value: fine, nodes: n, error: (fine - coarse).abs() }
}

/// Integrates a smooth periodic integrand over one period to absolute
/// accuracy `tol`: adaptive Simpson first, then a dense trapezoid fallback.
pub fn integrate_periodic<F: Fn(f64) -> f64>(
    f: &F,
    period: f64,
    panels: usize,
    tol: f64,
    accept: f64,
) -> Result<Quadrature> {
    if let Some(q) = adaptive_simpson(f, 0.0, period, panels, tol) {
        return Ok(q);
    }
    let q = periodic_trapezoid(f, 0.0, period, 100_000);
    if q.value.is_finite() && q.error <= accept {
        log::debug!("simpson did not converge, trapezoid fallback error {:.2e}", q.error);
        return Ok(q);
    }
    Err(SyncError::Numeric(format!(
        "quadrature did not converge: trapezoid fallback with {} nodes has error estimate {:.3e} (target {:.1e})",
        q.nodes, q.error, accept
    )))
}
