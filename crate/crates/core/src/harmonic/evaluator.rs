use nalgebra::DMatrix;
use num_complex::Complex64;

use super::BandLimitedFunction;
use crate::group::{wigner, GroupKind, Rotation};

/// Precomputed fast evaluator of a band-limited function.
///
/// SO(3) evaluation goes through Euler angles, small-d plans and phase
/// tables instead of full irrep matrices.
pub enum Evaluator {
    So2 {
        constant: f64,
        /// `(cos, sin)` weights per order `k ≥ 1`.
        terms: Vec<(f64, f64)>,
    },
    So3 {
        constant: f64,
        /// `w_ℓ C^† D^ℓ C` per order `ℓ ≥ 1`.
        coeffs: Vec<DMatrix<Complex64>>,
        plans: Vec<wigner::SmallDPlan>,
    },
}

impl Evaluator {
    pub fn new(f: &BandLimitedFunction) -> Self {
        let c = &f.coefficients;
        let constant = c.first().map_or(0.0, |m| m[(0, 0)]);
        let higher = c.get(1..).unwrap_or(&[]);
        match f.group {
            GroupKind::So2 => Evaluator::So2 {
                constant,
                terms: higher.iter().map(|m| (m[(0, 0)] + m[(1, 1)], m[(0, 1)] - m[(1, 0)])).collect(),
            },
            GroupKind::So3 => Evaluator::So3 {
                constant,
                coeffs: higher
                    .iter()
                    .enumerate()
                    .map(|(k, m)| wigner::trace_coefficients(m) * Complex64::new((2 * k + 3) as f64, 0.0))
                    .collect(),
                plans: (1..=higher.len()).map(wigner::SmallDPlan::new).collect(),
            },
        }
    }

    pub fn so2(&self, psi: f64) -> f64 {
        match self {
            Evaluator::So2 { constant, terms } => {
                let mut v = *constant;
                for (k, (a, b)) in terms.iter().enumerate() {
                    let (s, c) = ((k + 1) as f64 * psi).sin_cos();
                    v += a * c + b * s;
                }
                v
            }
            Evaluator::So3 { .. } => unreachable!(),
        }
    }

    pub fn so3_euler(&self, alpha: f64, beta: f64, gamma: f64) -> f64 {
        match self {
            Evaluator::So3 { constant, coeffs, plans } => {
                let lmax = coeffs.len() as i64;
                // e^{-i m α} and e^{-i m γ} for m = -L..=L
                let pa: Vec<Complex64> =
                    (-lmax..=lmax).map(|m| Complex64::from_polar(1.0, -(m as f64) * alpha)).collect();
                let pg: Vec<Complex64> =
                    (-lmax..=lmax).map(|m| Complex64::from_polar(1.0, -(m as f64) * gamma)).collect();
                let mut d = vec![0.0; (2 * coeffs.len() + 1).pow(2)];
                let mut v = *constant;
                for (c, plan) in coeffs.iter().zip(plans) {
                    let l = plan.order();
                    let n = 2 * l + 1;
                    plan.eval_into(beta, &mut d[..n * n]);
                    let off = (lmax as usize) - l;
                    for p in 0..n {
                        let mut row = Complex64::new(0.0, 0.0);
                        for q in 0..n {
                            row += c[(p, q)] * (pg[q + off] * d[p * n + q]);
                        }
                        v += (pa[p + off] * row).re;
                    }
                }
                v
            }
            Evaluator::So2 { .. } => unreachable!(),
        }
    }

    /// `f(g)`. Panics if `g` belongs to the other group.
    pub fn at(&self, g: &Rotation) -> f64 {
        match g {
            Rotation::So2(psi) => self.so2(*psi),
            Rotation::So3(q) => {
                let (a, b, c) = wigner::zyz_angles(q);
                self.so3_euler(a, b, c)
            }
        }
    }

    /// Values on a full Euler grid, `out[b][a][c]`, summed separably.
    pub fn so3_grid(&self, alphas: &[f64], betas: &[f64], gammas: &[f64]) -> Vec<Vec<Vec<f64>>> {
        let (constant, coeffs, plans) = match self {
            Evaluator::So3 { constant, coeffs, plans } => (*constant, coeffs, plans),
            Evaluator::So2 { .. } => unreachable!(),
        };
        let lmax = coeffs.len();
        let n = 2 * lmax + 1;
        let li = lmax as i64;
        // phase tables e^{-i m x}
        let table = |xs: &[f64]| -> Vec<Vec<Complex64>> {
            xs.iter().map(|x| (-li..=li).map(|m| Complex64::from_polar(1.0, -(m as f64) * x)).collect()).collect()
        };
        let ea = table(alphas);
        let eg = table(gammas);
        betas
            .iter()
            .map(|&beta| {
                let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
                for (c, plan) in coeffs.iter().zip(plans) {
                    let l = plan.order();
                    let d = plan.eval(beta);
                    let off = lmax - l;
                    for p in 0..2 * l + 1 {
                        for q in 0..2 * l + 1 {
                            a[(p + off, q + off)] += c[(p, q)] * d[(p, q)];
                        }
                    }
                }
                // b[p][γ] = Σ_q A_pq e^{-iqγ}
                let b: Vec<Vec<Complex64>> =
                    eg.iter().map(|row| (0..n).map(|p| (0..n).map(|q| a[(p, q)] * row[q]).sum()).collect()).collect();
                ea.iter()
                    .map(|ra| b.iter().map(|bg| constant + (0..n).map(|p| (ra[p] * bg[p]).re).sum::<f64>()).collect())
                    .collect()
            })
            .collect()
    }
}
