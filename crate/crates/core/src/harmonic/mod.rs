//! Fourier coefficients of edge losses over the group, robust-loss λ policies,
//! and band-limited functions.
//!
//! An edge loss `f(g) = h(‖σ(g) − σ(g̃)‖_F)` has matrix Fourier coefficients
//! `K^ρ ρ(g̃)` with a scalar `K^ρ` per irrep. Those scalars are what this
//! module computes, by one-dimensional quadrature over the rotation angle.

mod band;
mod evaluator;
pub mod quadrature;

pub use band::{plancherel_part, BandLimitedFunction};
pub use evaluator::Evaluator;

use std::cell::Cell;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result, SyncError};
use crate::group::{GroupKind, DEFAULT_MAX_ORDER};
use quadrature::integrate_periodic;

/// Which resummation of the character series defines the coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// Plain Fourier coefficients; may have either sign.
    Dirichlet,
    /// Cesàro-resummed coefficients, nonnegative for nonnegative losses.
    #[default]
    Fejer,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Dirichlet => "dirichlet",
            Kernel::Fejer => "fejer",
        })
    }
}

impl FromStr for Kernel {
    type Err = SyncError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Kernel::Dirichlet),
            "fejer" | "fejér" => Ok(Kernel::Fejer),
            other => Err(usage!("unknown kernel `{other}`, expected dirichlet or fejer")),
        }
    }
}

/// Scalar loss profile `h` applied to the Frobenius distance.
#[derive(Clone)]
pub enum LossKind {
    /// `(κ/2) x²`, the maximum-likelihood loss for Langevin noise.
    Quadratic,
    /// `λ² log(1 + (x/λ)²)`.
    Cauchy,
    /// Geman–McClure, `2x² / (x² + 4λ²)`.
    Gmc,
    /// Any user profile; it ignores `κ` and `λ`.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Quadratic => "quadratic",
            LossKind::Cauchy => "cauchy",
            LossKind::Gmc => "gmc",
            LossKind::Custom(_) => "custom",
        }
    }

    pub fn is_robust(&self) -> bool {
        matches!(self, LossKind::Cauchy | LossKind::Gmc)
    }
}

impl FromStr for LossKind {
    type Err = SyncError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quadratic" => Ok(LossKind::Quadratic),
            "cauchy" => Ok(LossKind::Cauchy),
            "gmc" | "geman-mcclure" => Ok(LossKind::Gmc),
            other => Err(usage!("unknown loss `{other}`, expected quadratic, cauchy or gmc")),
        }
    }
}

/// How a robust loss picks its scale `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaPolicy {
    /// Fit `λ` to the edge's Langevin concentration (see [`lambda_policy`]).
    FromConcentration,
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct LossSpec {
    pub kind: LossKind,
    pub lambda: LambdaPolicy,
}

impl LossSpec {
    pub fn new(kind: LossKind) -> Self {
        LossSpec { kind, lambda: LambdaPolicy::FromConcentration }
    }

    pub fn with_fixed_lambda(kind: LossKind, lambda: f64) -> Self {
        LossSpec { kind, lambda: LambdaPolicy::Fixed(lambda) }
    }

    /// The `λ` used on an edge of concentration `kappa`, if the loss has one.
    pub fn lambda_for(&self, group: GroupKind, kappa: f64) -> Result<Option<f64>> {
        if !self.kind.is_robust() {
            return Ok(None);
        }
        let lambda = match self.lambda {
            LambdaPolicy::Fixed(l) => l,
            LambdaPolicy::FromConcentration => lambda_policy(&self.kind, group.matrix_dim(), kappa)?,
        };
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(usage!("robust loss scale must be positive and finite, got {lambda}"));
        }
        Ok(Some(lambda))
    }

    /// The scalar profile `h` for an edge of concentration `kappa`.
    pub fn profile(&self, group: GroupKind, kappa: f64) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        let lambda = self.lambda_for(group, kappa)?;
        Ok(match (&self.kind, lambda) {
            (LossKind::Quadratic, _) => {
                if !(kappa > 0.0) || !kappa.is_finite() {
                    return Err(usage!("quadratic loss needs a positive concentration, got {kappa}"));
                }
                Arc::new(move |x: f64| 0.5 * kappa * x * x)
            }
            (LossKind::Cauchy, Some(l)) => Arc::new(move |x: f64| l * l * (x / l).powi(2).ln_1p()),
            (LossKind::Gmc, Some(l)) => Arc::new(move |x: f64| 2.0 * x * x / (x * x + 4.0 * l * l)),
            (LossKind::Custom(h), _) => h.clone(),
            (_, None) => unreachable!("robust losses always carry a scale"),
        })
    }
}

/// Robust-loss scale fitted to Langevin noise of concentration `kappa` in `SO(d)`.
///
/// Places the loss's inflection point at `(d + √10)/√κ`, the bulk of the
/// `√(χ²/κ)` deviation of a Langevin sample.
pub fn lambda_policy(kind: &LossKind, d: usize, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(usage!("λ policy needs a positive concentration, got {kappa}"));
    }
    let d = d as f64;
    match kind {
        LossKind::Cauchy => Ok((d + 10f64.sqrt()) / kappa.sqrt()),
        LossKind::Gmc => Ok((d * 3f64.sqrt() + 30f64.sqrt()) / (2.0 * kappa.sqrt())),
        other => Err(usage!("{} loss has no λ policy", other.name())),
    }
}

/// Quadrature bookkeeping for one coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureInfo {
    pub nodes: usize,
    pub error: f64,
}

/// Per-irrep scalar coefficients `K^ρ` of one edge loss, for orders `0..=max_order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierWeights {
    pub group: GroupKind,
    pub kernel: Kernel,
    /// `coefficients[k]` is `K^k`; index 0 is the trivial irrep.
    pub coefficients: Vec<f64>,
    pub quadrature: Vec<QuadratureInfo>,
}

impl FourierWeights {
    pub fn max_order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, order: usize) -> Option<f64> {
        self.coefficients.get(order).copied()
    }

    /// The edge weight this coefficient contributes to the order-`order` Laplacian.
    ///
    /// Plain coefficients of a loss that grows away from the identity are
    /// negative (the loss anti-correlates with the character), so they are
    /// negated into agreement weights. Fejér coefficients already subtract
    /// the character term and are used as they are.
    pub fn agreement_weight(&self, order: usize) -> Option<f64> {
        self.coefficient(order).map(|k| match self.kernel {
            Kernel::Dirichlet => -k,
            Kernel::Fejer => k,
        })
    }

    pub fn max_quadrature_error(&self) -> f64 {
        self.quadrature.iter().map(|q| q.error).fold(0.0, f64::max)
    }

    pub fn total_nodes(&self) -> usize {
        self.quadrature.iter().map(|q| q.nodes).sum()
    }
}

/// Largest `‖σ(g) − I‖_F` for the defining representation: `2√2` at a half turn.
pub const MAX_DISTANCE: f64 = 2.0 * std::f64::consts::SQRT_2;

const QUAD_TOL: f64 = 1e-10;
const QUAD_ACCEPT: f64 = 1e-8;

/// Fourier coefficients `K^ρ`, `ρ = 0..=max_order`, of `x ↦ h(x)` composed with
/// the Frobenius distance on `group`.
///
/// SO(3) coefficients use the Weyl reduction to a single rotation angle.
/// The Haar measure is normalised to total mass one throughout.
pub fn loss_fourier_coefficients(
    h: &(dyn Fn(f64) -> f64 + Send + Sync),
    group: GroupKind,
    max_order: usize,
    kernel: Kernel,
) -> Result<FourierWeights> {
    if max_order < 1 {
        return Err(usage!("maximum irrep order must be at least 1"));
    }
    if max_order > DEFAULT_MAX_ORDER {
        return Err(SyncError::Capability(format!(
            "irrep order {max_order} exceeds the supported maximum {DEFAULT_MAX_ORDER}"
        )));
    }
    check_finite(h)?;
    // ‖σ(g_φ) − I‖_F = √(4 − 4cos φ) = 2√2 sin(φ/2) on [0, 2π]
    let dist = |phi: f64| MAX_DISTANCE * (0.5 * phi).sin().abs();
    // absolute targets scale with the loss magnitude
    let scale = (0..=64).map(|i| h(MAX_DISTANCE * i as f64 / 64.0).abs()).fold(1.0, f64::max);
    let (tol, accept) = (QUAD_TOL * scale, QUAD_ACCEPT * scale);

    let mut coefficients = Vec::with_capacity(max_order + 1);
    let mut quadrature = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        let n = order as f64;
        let bad = Cell::new(None);
        let guarded = |x: f64| {
            let v = h(x);
            if !v.is_finite() && bad.get().is_none() {
                bad.set(Some(x));
            }
            v
        };
        let panels = 16 * (order + 2);
        let (prefactor, q) = match (group, kernel) {
            (GroupKind::So3, Kernel::Dirichlet) | (GroupKind::So3, Kernel::Fejer) if order == 0 => {
                // Haar mean of h: (1/2π) ∫ (1 − cos φ) h dφ
                let f = |phi: f64| (1.0 - phi.cos()) * guarded(dist(phi));
                (1.0 / TAU, integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
            (GroupKind::So3, Kernel::Dirichlet) => {
                // (1 − cos φ) χ^ℓ(φ) = 2 sin(φ/2) sin((ℓ+½)φ), smooth at φ = 0
                let f = |phi: f64| 2.0 * (0.5 * phi).sin() * ((n + 0.5) * phi).sin() * guarded(dist(phi));
                (1.0 / ((2.0 * n + 1.0) * TAU), integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
            (GroupKind::So3, Kernel::Fejer) => {
                let f = |phi: f64| (1.0 - (n * phi).cos()) * guarded(dist(phi));
                (1.0 / (n * (2.0 * n + 1.0) * TAU), integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
            (GroupKind::So2, Kernel::Dirichlet) => {
                let f = |psi: f64| (n * psi).cos() * guarded(dist(psi));
                (1.0 / TAU, integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
            (GroupKind::So2, Kernel::Fejer) if order == 0 => {
                let f = |psi: f64| guarded(dist(psi));
                (1.0 / TAU, integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
            (GroupKind::So2, Kernel::Fejer) => {
                // the real block has dimension 2, so the resummed trace is halved
                let f = |psi: f64| fejer_circle(order, psi) * guarded(dist(psi));
                (0.5 / TAU, integrate_periodic(&f, TAU, panels, tol * TAU, accept * TAU)?)
            }
        };
        if let Some(x) = bad.get() {
            return Err(SyncError::Evaluation(format!("loss is not finite at distance {x}")));
        }
        coefficients.push(prefactor * q.value);
        quadrature.push(QuadratureInfo { nodes: q.nodes, error: (prefactor * q.error).abs() });
    }
    Ok(FourierWeights { group, kernel, coefficients, quadrature })
}

/// Fejér kernel on the circle: `Σ_{|m|<k} (1 − |m|/k) e^{imψ}`.
fn fejer_circle(k: usize, psi: f64) -> f64 {
    let kf = k as f64;
    let half = (0.5 * psi).sin();
    if half.abs() < 1e-7 {
        return kf;
    }
    let ratio = (0.5 * kf * psi).sin() / half;
    ratio * ratio / kf
}

fn check_finite(h: &(dyn Fn(f64) -> f64 + Send + Sync)) -> Result<()> {
    for i in 0..=256 {
        let x = MAX_DISTANCE * i as f64 / 256.0;
        if !h(x).is_finite() {
            return Err(SyncError::Evaluation(format!("loss is not finite at distance {x}")));
        }
    }
    Ok(())
}

/// Coefficients for an edge of concentration `kappa` under `loss`.
pub fn edge_coefficients(
    loss: &LossSpec,
    group: GroupKind,
    kappa: f64,
    max_order: usize,
    kernel: Kernel,
) -> Result<FourierWeights> {
    let h = loss.profile(group, kappa)?;
    loss_fourier_coefficients(h.as_ref(), group, max_order, kernel)
}
