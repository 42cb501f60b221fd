use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector3};

use crate::error::{usage, Result};
use crate::group::{GroupKind, IrrepIndex, Rotation};
use crate::harmonic::{BandLimitedFunction, Evaluator};
use crate::spectral::SpectralBlock;

/// Band-limited posterior of one edge: coefficients `D^ρ_ij = Φ_iᵀ Φ_j`.
///
/// The trivial irrep contributes the constant 1, so the function is the
/// truncated delta at `g_i⁻¹ g_j` in the noiseless case.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgePosterior {
    pub i: usize,
    pub j: usize,
    pub function: BandLimitedFunction,
}

impl EdgePosterior {
    pub fn group(&self) -> GroupKind {
        self.function.group
    }

    pub fn max_order(&self) -> usize {
        self.function.coefficients.len() - 1
    }

    /// `D_ij(g)`.
    pub fn value(&self, g: &Rotation) -> Result<f64> {
        self.function.evaluate(g)
    }

    /// The posterior of the reversed edge: transposed coefficients.
    pub fn reversed(&self) -> Self {
        let coefficients = self.function.coefficients.iter().map(|c| c.transpose()).collect();
        EdgePosterior { i: self.j, j: self.i, function: BandLimitedFunction { group: self.group(), coefficients } }
    }

    /// `|D(g)|² / (‖D‖² Σ w_ρ d_ρ)`: 1 for an exact delta, smaller when spread out.
    ///
    /// Orders whose coefficients vanish identically are left out of the sum.
    pub fn sharpness(&self, peak: f64) -> f64 {
        let norm = self.function.parseval_norm();
        let delta_norm: f64 = (0..=self.max_order())
            .filter(|&o| self.function.coefficients[o].iter().any(|x| *x != 0.0))
            .map(|o| {
                let irrep = IrrepIndex::new(self.group(), o);
                irrep.plancherel_weight() * irrep.dim() as f64
            })
            .sum();
        if norm <= 0.0 {
            0.0
        } else {
            peak / (norm * delta_norm)
        }
    }
}

/// Fuses the spectral blocks of orders `1..=L` into the posterior of edge `(i, j)`.
pub fn edge_posterior(blocks: &[SpectralBlock], i: usize, j: usize) -> Result<EdgePosterior> {
    let first = blocks.first().ok_or_else(|| usage!("no spectral blocks"))?;
    let group = first.irrep.group;
    let max_order = blocks.iter().map(|b| b.irrep.order).max().unwrap_or(0);
    let mut coefficients = vec![DMatrix::from_element(1, 1, 1.0)];
    for order in 1..=max_order {
        let b = blocks
            .iter()
            .find(|b| b.irrep.order == order && b.irrep.group == group)
            .ok_or_else(|| usage!("missing spectral block for irrep order {order}"))?;
        if i >= b.node_count || j >= b.node_count {
            return Err(usage!("edge ({i}, {j}) outside a {}-node block", b.node_count));
        }
        coefficients.push(b.node_block(i).transpose() * b.node_block(j));
    }
    Ok(EdgePosterior { i, j, function: BandLimitedFunction { group, coefficients } })
}

/// Grid plus golden-section search for the maximiser of `|D(g)|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArgmaxOptions {
    pub grid_resolution: f64,
    pub refine_steps: usize,
}

pub const DEFAULT_REFINE_STEPS: usize = 40;

/// Coarsest admissible grid step for order `max_order`.
pub fn max_grid_resolution(max_order: usize) -> f64 {
    PI / (2 * max_order + 1) as f64
}

impl ArgmaxOptions {
    pub fn for_order(max_order: usize) -> Self {
        ArgmaxOptions { grid_resolution: max_grid_resolution(max_order), refine_steps: DEFAULT_REFINE_STEPS }
    }
}

const INVPHI: f64 = 0.618_033_988_749_894_9;
const MAX_SWEEPS: usize = 30;

/// Maximises `f` on `[lo, hi]` by golden-section search; returns `(x, f(x))`.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, steps: usize) -> (f64, f64) {
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..steps {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid samples of `|D(g)|²` used for plotting: `(grid point, value)`.
pub fn posterior_samples(p: &EdgePosterior, resolution: f64) -> Result<Vec<(Rotation, f64)>> {
    if !(resolution > 0.0) {
        return Err(usage!("grid resolution must be positive"));
    }
    let eval = Evaluator::new(&p.function);
    Ok(match p.group() {
        GroupKind::So2 => {
            let n = (TAU / resolution).ceil() as usize;
            (0..n)
                .map(|k| {
                    let psi = TAU * k as f64 / n as f64;
                    (Rotation::so2(psi), eval.so2(psi).powi(2))
                })
                .collect()
        }
        GroupKind::So3 => {
            let (alphas, betas, gammas) = euler_grid(resolution);
            let vals = eval.so3_grid(&alphas, &betas, &gammas);
            let mut out = Vec::with_capacity(alphas.len() * betas.len() * gammas.len());
            for (bi, b) in betas.iter().enumerate() {
                for (ai, a) in alphas.iter().enumerate() {
                    for (ci, c) in gammas.iter().enumerate() {
                        out.push((euler_rotation(*a, *b, *c), vals[bi][ai][ci].powi(2)));
                    }
                }
            }
            out
        }
    })
}

/// Euler-angle grid with per-axis step at most `step`: α, γ on `[0, 2π)`, β on `[0, π]`.
pub fn euler_grid(step: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let na = (TAU / step).ceil() as usize;
    let nb = (PI / step).ceil() as usize;
    let alphas: Vec<f64> = (0..na).map(|k| TAU * k as f64 / na as f64).collect();
    let betas: Vec<f64> = (0..=nb).map(|k| PI * k as f64 / nb as f64).collect();
    (alphas.clone(), betas, alphas)
}

pub fn euler_rotation(alpha: f64, beta: f64, gamma: f64) -> Rotation {
    let q = nalgebra::UnitQuaternion::from_axis_angle(&Vector3::z_axis(), alpha)
        * nalgebra::UnitQuaternion::from_axis_angle(&Vector3::y_axis(), beta)
        * nalgebra::UnitQuaternion::from_axis_angle(&Vector3::z_axis(), gamma);
    Rotation::So3(q)
}

/// The maximiser of `|D(g)|²` and the peak value.
pub fn argmax_on_group(p: &EdgePosterior, opts: &ArgmaxOptions) -> Result<(Rotation, f64)> {
    let lmax = p.max_order();
    if lmax == 0 {
        return Err(usage!("posterior has no non-trivial coefficients"));
    }
    let bound = max_grid_resolution(lmax);
    if !(opts.grid_resolution > 0.0) || opts.grid_resolution > bound * (1.0 + 1e-12) {
        return Err(usage!(
            "grid resolution {} must be positive and at most π/(2·{lmax}+1) = {bound}",
            opts.grid_resolution
        ));
    }
    let eval = Evaluator::new(&p.function);
    match p.group() {
        GroupKind::So2 => {
            let step = opts.grid_resolution.min(TAU / (8 * lmax) as f64);
            let n = (TAU / step).ceil() as usize;
            let h = TAU / n as f64;
            let grid: Vec<(Rotation, f64)> =
                (0..n).map(|k| (Rotation::so2(h * k as f64), eval.so2(h * k as f64).powi(2))).collect();
            let poly = match &eval {
                Evaluator::So2 { constant, terms } => TrigPoly { constant: *constant, terms: terms.clone() },
                Evaluator::So3 { .. } => unreachable!(),
            };
            let peak = |k: usize| grid[k].1 >= grid[(k + 1) % n].1 && grid[k].1 >= grid[(k + n - 1) % n].1;
            let keyed: Vec<(usize, f64)> = grid.iter().enumerate().map(|(k, (_, v))| (k, *v)).collect();
            let starts = candidates(&keyed, h, |k| grid[k].0, peak);
            Ok(best_of(starts, |(g, v)| {
                let centre = g.as_angle().expect("SO(2) grid");
                let (x, rv) = poly.max_square(centre - h, centre + h, opts.refine_steps);
                if rv >= v {
                    (Rotation::so2(x), rv)
                } else {
                    (g, v)
                }
            }))
        }
        GroupKind::So3 => {
            let (alphas, betas, gammas) = euler_grid(opts.grid_resolution);
            let vals = eval.so3_grid(&alphas, &betas, &gammas);
            let mut grid = Vec::with_capacity(alphas.len() * betas.len() * gammas.len());
            for (bi, plane) in vals.iter().enumerate() {
                for (ai, row) in plane.iter().enumerate() {
                    for (ci, v) in row.iter().enumerate() {
                        grid.push(((bi, ai, ci), v * v));
                    }
                }
            }
            let step = alphas[1] - alphas[0];
            let at = |(bi, ai, ci): (usize, usize, usize)| euler_rotation(alphas[ai], betas[bi], gammas[ci]);
            let (nb, na, nc) = (betas.len(), alphas.len(), gammas.len());
            let peak = |(bi, ai, ci): (usize, usize, usize)| {
                let v = vals[bi][ai][ci].powi(2);
                let b_range = bi.saturating_sub(1)..=(bi + 1).min(nb - 1);
                b_range.into_iter().all(|b| {
                    [na - 1, 0, 1]
                        .iter()
                        .all(|da| [nc - 1, 0, 1].iter().all(|dc| vals[b][(ai + da) % na][(ci + dc) % nc].powi(2) <= v))
                })
            };
            let starts = candidates(&grid, step, at, peak);
            Ok(best_of(starts, |(g, v)| refine_so3(&eval, g, v, step, opts.refine_steps, lmax)))
        }
    }
}

/// Grid values within this fraction of the best are refined too: a narrow
/// peak that falls between grid points can hide behind a broader one.
const CANDIDATE_FRACTION: f64 = 0.8;
const MAX_CANDIDATES: usize = 4;

/// Up to [`MAX_CANDIDATES`] grid local maxima, best first, at least two grid
/// steps apart and within [`CANDIDATE_FRACTION`] of the best value. The
/// global grid maximum always comes first; ties keep grid order.
fn candidates<K, F, P>(grid: &[(K, f64)], step: f64, at: F, peak: P) -> Vec<(Rotation, f64)>
where
    K: Copy,
    F: Fn(K) -> Rotation,
    P: Fn(K) -> bool,
{
    let mut order: Vec<usize> = (0..grid.len()).collect();
    // stable: equal values stay in grid order, so the lowest index wins ties
    order.sort_by(|&a, &b| grid[b].1.total_cmp(&grid[a].1));
    let best = grid[order[0]].1;
    let mut out: Vec<(Rotation, f64)> = Vec::new();
    for k in order {
        let (key, v) = grid[k];
        if out.len() == MAX_CANDIDATES || v < CANDIDATE_FRACTION * best {
            break;
        }
        if !out.is_empty() && !peak(key) {
            continue;
        }
        let g = at(key);
        if out.iter().all(|(c, _)| c.angle_to(&g).expect("same group") > 2.0 * step) {
            out.push((g, v));
        }
    }
    out
}

/// Refines every candidate and keeps the highest; earlier candidates win ties.
fn best_of<F: Fn((Rotation, f64)) -> (Rotation, f64)>(starts: Vec<(Rotation, f64)>, refine: F) -> (Rotation, f64) {
    starts
        .into_iter()
        .map(refine)
        .fold(None, |acc: Option<(Rotation, f64)>, c| match acc {
            Some(a) if a.1 >= c.1 => Some(a),
            _ => Some(c),
        })
        .expect("the grid is never empty")
}

/// `a₀ + Σ_k (a_k cos kt + b_k sin kt)`.
struct TrigPoly {
    constant: f64,
    terms: Vec<(f64, f64)>,
}

impl TrigPoly {
    /// Exact interpolation of a degree-`degree` trigonometric polynomial from
    /// `2·degree + 1` equispaced samples.
    fn from_fn<F: Fn(f64) -> f64>(f: F, degree: usize) -> Self {
        let m = 2 * degree + 1;
        let samples: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let t = TAU * j as f64 / m as f64;
                (t, f(t))
            })
            .collect();
        let constant = samples.iter().map(|s| s.1).sum::<f64>() / m as f64;
        let terms = (1..=degree)
            .map(|k| {
                let k = k as f64;
                let (mut a, mut b) = (0.0, 0.0);
                for &(t, v) in &samples {
                    let (sn, cs) = (k * t).sin_cos();
                    a += v * cs;
                    b += v * sn;
                }
                (2.0 * a / m as f64, 2.0 * b / m as f64)
            })
            .collect();
        TrigPoly { constant, terms }
    }

    /// Value and first two derivatives.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (self.constant, 0.0, 0.0);
        for (k, (a, b)) in self.terms.iter().enumerate() {
            let k = (k + 1) as f64;
            let (sn, cs) = (k * t).sin_cos();
            v += a * cs + b * sn;
            d1 += k * (b * cs - a * sn);
            d2 -= k * k * (a * cs + b * sn);
        }
        (v, d1, d2)
    }

    /// Local maximiser of the square on `[lo, hi]`: golden section, then
    /// Newton on the derivative to remove the flat-peak resolution limit.
    fn max_square(&self, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
        let sq = |t: f64| self.eval(t).0.powi(2);
        let (mut t, mut best) = golden_max(&sq, lo, hi, steps);
        let mut x = t;
        for _ in 0..8 {
            let (_, d1, d2) = self.eval(x);
            if d2 == 0.0 {
                return (t, best);
            }
            x -= d1 / d2;
            if !(lo..=hi).contains(&x) {
                return (t, best);
            }
        }
        // at a flat peak the squared values cannot rank points ~1e-8 apart, so
        // accept any maximum of f² that Newton converged to
        let (v, d1, d2) = self.eval(x);
        if v * d2 < 0.0 && d1.abs() <= 1e-9 * (v.abs() + 1.0) * self.terms.len() as f64 && v * v >= best * (1.0 - 1e-12)
        {
            t = x;
            best = v * v;
        }
        (t, best)
    }
}

/// Coordinate-wise line maximisation along body-frame axes. Along
/// `t ↦ g exp(t e_k)` the posterior is a trigonometric polynomial of degree
/// `L`, so each line is interpolated exactly and searched without further
/// group evaluations.
fn refine_so3(
    eval: &Evaluator,
    start: Rotation,
    start_value: f64,
    step: f64,
    steps: usize,
    lmax: usize,
) -> (Rotation, f64) {
    let mut g = start;
    let mut value = start_value;
    let mut bracket = step;
    // maximise along t ↦ g exp(t u); returns the step taken
    let search = |g: &mut Rotation, value: &mut f64, u: &Vector3<f64>, half_width: f64| -> f64 {
        let base = *g;
        let line =
            TrigPoly::from_fn(|t| eval.at(&base.compose(&Rotation::exp_so3(&(u * t))).expect("same group")), lmax);
        let (t, v) = line.max_square(-half_width, half_width, steps);
        // compare on the interpolant so both sides carry the same rounding
        let here = line.eval(0.0).0.powi(2);
        if t != 0.0 && v >= here - 1e-14 * here.abs() {
            *g = base.compose(&Rotation::exp_so3(&(u * t))).expect("same group");
            *value = v;
            t.abs()
        } else {
            0.0
        }
    };
    for _ in 0..MAX_SWEEPS {
        let before = g;
        let mut moved: f64 = 0.0;
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            moved = moved.max(search(&mut g, &mut value, &axis, bracket));
        }
        // Powell-style step along the sweep's net displacement
        let net = match before.between(&g).expect("same group") {
            Rotation::So3(q) => q.scaled_axis(),
            Rotation::So2(_) => unreachable!(),
        };
        let len = net.norm();
        if len > 0.0 {
            moved = moved.max(search(&mut g, &mut value, &(net / len), (4.0 * len).min(step)));
        }
        if moved < 1e-10 {
            break;
        }
        bracket = (4.0 * moved).clamp(1e-6, step);
    }
    (g, value)
}
