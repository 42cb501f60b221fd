//! Gauge-invariant distances between an estimate and the ground truth.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::consensus::project_matrix;
use crate::error::{usage, Result};
use crate::group::Rotation;

/// Both normalised metrics, the aligning gauge and per-node angular errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub d_f: f64,
    pub d_inf: f64,
    /// `U` with `U R̂_i ≈ R_i`.
    pub gauge: Rotation,
    /// Rotation angle between `U R̂_i` and `R_i`, radians.
    pub node_angles: Vec<f64>,
}

fn check(truth: &[Rotation], estimate: &[Rotation]) -> Result<usize> {
    if truth.len() != estimate.len() {
        return Err(usage!("{} ground-truth rotations but {} estimates", truth.len(), estimate.len()));
    }
    let first = truth.first().ok_or_else(|| usage!("no rotations to compare"))?;
    if truth.iter().chain(estimate).any(|r| r.group() != first.group()) {
        return Err(usage!("rotations from different groups"));
    }
    Ok(first.group().matrix_dim())
}

/// Procrustes gauge: `proj(Σ R_i R̂_iᵀ)`.
fn optimal_gauge(truth: &[Rotation], estimate: &[Rotation], d: usize) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(d, d);
    for (r, e) in truth.iter().zip(estimate) {
        m += r.fundamental_matrix() * e.fundamental_matrix().transpose();
    }
    // a singular correlation leaves the gauge undetermined; any rotation is optimal then
    Ok(project_matrix(&m).unwrap_or_else(|_| DMatrix::identity(d, d)))
}

fn residuals(truth: &[Rotation], estimate: &[Rotation], u: &DMatrix<f64>) -> Vec<f64> {
    truth.iter().zip(estimate).map(|(r, e)| (u * e.fundamental_matrix() - r.fundamental_matrix()).norm()).collect()
}

/// `min_U ‖[U R̂_i] − [R_i]‖_F / (2√(dN))` and the minimising `U`.
pub fn d_f(truth: &[Rotation], estimate: &[Rotation]) -> Result<(f64, Rotation)> {
    let d = check(truth, estimate)?;
    let u = optimal_gauge(truth, estimate, d)?;
    let total: f64 = residuals(truth, estimate, &u).iter().map(|r| r * r).sum();
    Ok((total.sqrt() / (2.0 * ((d * truth.len()) as f64).sqrt()), Rotation::from_matrix(&u)?))
}

/// `max_i ‖U R̂_i − R_i‖_F / (2√d)` with the `U` of [`d_f`].
pub fn d_inf(truth: &[Rotation], estimate: &[Rotation]) -> Result<f64> {
    let d = check(truth, estimate)?;
    let u = optimal_gauge(truth, estimate, d)?;
    Ok(residuals(truth, estimate, &u).into_iter().fold(0.0, f64::max) / (2.0 * (d as f64).sqrt()))
}

pub fn error_report(truth: &[Rotation], estimate: &[Rotation]) -> Result<ErrorReport> {
    let d = check(truth, estimate)?;
    let u = optimal_gauge(truth, estimate, d)?;
    let res = residuals(truth, estimate, &u);
    let gauge = Rotation::from_matrix(&u)?;
    let node_angles = truth
        .iter()
        .zip(estimate)
        .map(|(r, e)| gauge.compose(e).and_then(|ue| ue.angle_to(r)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = res.iter().map(|r| r * r).sum();
    Ok(ErrorReport {
        d_f: total.sqrt() / (2.0 * ((d * truth.len()) as f64).sqrt()),
        d_inf: res.iter().copied().fold(0.0, f64::max) / (2.0 * (d as f64).sqrt()),
        gauge,
        node_angles,
    })
}
