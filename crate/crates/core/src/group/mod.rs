//! Elements of SO(2) and SO(3), their defining matrices, and random sampling.
//!
//! SO(2) elements are stored as an angle reduced to `[0, 2π)`; SO(3) elements
//! as unit quaternions. All other representations are derived from these.

mod irrep;
pub mod wigner;

pub use irrep::{character, irrep_matrix, irrep_matrix_capped, IrrepIndex, IrrepMatrix, DEFAULT_MAX_ORDER};

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result, SyncError};

/// Which rotation group a value lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GroupKind {
    So2,
    So3,
}

impl GroupKind {
    /// Size `d` of the defining `d × d` matrices.
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::So2 => 2,
            GroupKind::So3 => 3,
        }
    }

    /// Dimension of the group as a manifold.
    pub fn manifold_dim(self) -> usize {
        match self {
            GroupKind::So2 => 1,
            GroupKind::So3 => 3,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::So2 => "SO2",
            GroupKind::So3 => "SO3",
        })
    }
}

impl FromStr for GroupKind {
    type Err = SyncError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SO2" | "SO(2)" => Ok(GroupKind::So2),
            "SO3" | "SO(3)" => Ok(GroupKind::So3),
            other => Err(usage!("unknown group `{other}`, expected SO2 or SO3")),
        }
    }
}

/// An element of SO(2) or SO(3).
///
/// Serialises as `{"angle": θ}` or `{"quaternion": [w, x, y, z]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "RotationRepr", try_from = "RotationRepr")]
pub enum Rotation {
    /// Planar rotation by an angle in `[0, 2π)`.
    So2(f64),
    /// Spatial rotation as a unit quaternion.
    So3(UnitQuaternion<f64>),
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RotationRepr {
    Angle { angle: f64 },
    Quaternion { quaternion: [f64; 4] },
}

impl From<Rotation> for RotationRepr {
    fn from(r: Rotation) -> Self {
        match r {
            Rotation::So2(angle) => RotationRepr::Angle { angle },
            Rotation::So3(q) => RotationRepr::Quaternion { quaternion: [q.w, q.i, q.j, q.k] },
        }
    }
}

impl TryFrom<RotationRepr> for Rotation {
    type Error = SyncError;

    fn try_from(r: RotationRepr) -> Result<Self> {
        match r {
            RotationRepr::Angle { angle } if angle.is_finite() => Ok(Rotation::so2(angle)),
            RotationRepr::Angle { angle } => Err(usage!("non-finite angle {angle}")),
            RotationRepr::Quaternion { quaternion: [w, x, y, z] } => Rotation::from_quaternion(w, x, y, z),
        }
    }
}

impl Rotation {
    pub fn so2(angle: f64) -> Self {
        Rotation::So2(wrap_angle(angle))
    }

    pub fn so3(q: UnitQuaternion<f64>) -> Self {
        Rotation::So3(q)
    }

    /// Builds an SO(3) element from `(w, x, y, z)`, normalising the input.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(usage!("quaternion ({w}, {x}, {y}, {z}) cannot be normalised"));
        }
        // leave already-unit input bit-exact so text round-trips are lossless
        let q = if (n - 1.0).abs() <= 4.0 * f64::EPSILON { q } else { q / n };
        Ok(Rotation::So3(UnitQuaternion::new_unchecked(q)))
    }

    /// Rotation by `angle` about `axis` (normalised internally).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n < 1e-15 {
            return Err(usage!("rotation axis must be non-zero"));
        }
        let half = 0.5 * angle;
        let v = axis * (half.sin() / n);
        Ok(Rotation::So3(UnitQuaternion::new_unchecked(Quaternion::new(half.cos(), v.x, v.y, v.z))))
    }

    /// Exponential map from a tangent vector (rotation vector) at the identity.
    pub fn exp_so3(omega: &Vector3<f64>) -> Self {
        Rotation::So3(UnitQuaternion::from_scaled_axis(*omega))
    }

    /// Rotation from a special-orthogonal matrix of matching size.
    ///
    /// The input is assumed orthogonal with determinant +1; use
    /// [`crate::consensus::project_to_group`] for arbitrary matrices.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        match (m.nrows(), m.ncols()) {
            (2, 2) => Ok(Rotation::so2(m[(1, 0)].atan2(m[(0, 0)]))),
            (3, 3) => {
                let m3 = Matrix3::from_iterator(m.iter().copied());
                let rot = Rotation3::from_matrix_unchecked(m3);
                Ok(Rotation::So3(UnitQuaternion::from_rotation_matrix(&rot)))
            }
            (r, c) => Err(usage!("cannot build a rotation from a {r}x{c} matrix")),
        }
    }

    pub fn group(&self) -> GroupKind {
        match self {
            Rotation::So2(_) => GroupKind::So2,
            Rotation::So3(_) => GroupKind::So3,
        }
    }

    pub fn identity(group: GroupKind) -> Self {
        match group {
            GroupKind::So2 => Rotation::So2(0.0),
            GroupKind::So3 => Rotation::So3(UnitQuaternion::identity()),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Rotation::So2(a) => Rotation::so2(-a),
            Rotation::So3(q) => Rotation::So3(q.inverse()),
        }
    }

    /// Group product `self · other`.
    pub fn compose(&self, other: &Rotation) -> Result<Self> {
        match (self, other) {
            (Rotation::So2(a), Rotation::So2(b)) => Ok(Rotation::so2(a + b)),
            (Rotation::So3(a), Rotation::So3(b)) => {
                Ok(Rotation::So3(UnitQuaternion::new_normalize(a.into_inner() * b.into_inner())))
            }
            _ => Err(usage!("cannot compose {} with {}", self.group(), other.group())),
        }
    }

    /// `self⁻¹ · other`, the relative rotation taking `self` to `other`.
    pub fn between(&self, other: &Rotation) -> Result<Self> {
        self.inverse().compose(other)
    }

    /// The defining `d × d` orthogonal matrix.
    pub fn fundamental_matrix(&self) -> DMatrix<f64> {
        match self {
            Rotation::So2(a) => {
                let (s, c) = a.sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
            }
            Rotation::So3(q) => {
                let m = q.to_rotation_matrix().into_inner();
                DMatrix::from_iterator(3, 3, m.iter().copied())
            }
        }
    }

    /// Rotation angle in `[0, π]` (geodesic distance from the identity).
    pub fn rotation_angle(&self) -> f64 {
        match self {
            Rotation::So2(a) => {
                let a = wrap_angle(*a);
                if a > PI {
                    TAU - a
                } else {
                    a
                }
            }
            Rotation::So3(q) => {
                let v = q.imag().norm();
                2.0 * v.atan2(q.w.abs())
            }
        }
    }

    /// Geodesic distance `angle(self⁻¹ · other)`.
    pub fn angle_to(&self, other: &Rotation) -> Result<f64> {
        Ok(self.between(other)?.rotation_angle())
    }

    /// The planar angle of an SO(2) element.
    pub fn as_angle(&self) -> Option<f64> {
        match self {
            Rotation::So2(a) => Some(*a),
            Rotation::So3(_) => None,
        }
    }

    pub fn as_quaternion(&self) -> Option<&UnitQuaternion<f64>> {
        match self {
            Rotation::So3(q) => Some(q),
            Rotation::So2(_) => None,
        }
    }
}

/// Draws a Haar-uniform element of `group`.
pub fn sample_haar<R: Rng + ?Sized>(group: GroupKind, rng: &mut R) -> Rotation {
    match group {
        GroupKind::So2 => Rotation::so2(rng.random::<f64>() * TAU),
        GroupKind::So3 => loop {
            let q = Quaternion::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            );
            let n = q.norm();
            if n > 1e-9 {
                break Rotation::So3(UnitQuaternion::new_unchecked(q / n));
            }
        },
    }
}

/// Below this concentration the rejection proposal is the Haar measure itself.
const LANGEVIN_SMALL_KAPPA: f64 = 0.5;

/// Draws from the isotropic Langevin density `∝ exp(κ Tr(mode⁻¹ R))`
/// relative to Haar measure.
///
/// Sampling is exact (rejection on the rotation-angle marginal); `κ = 0`
/// reduces to the Haar distribution.
pub fn sample_langevin<R: Rng + ?Sized>(mode: &Rotation, kappa: f64, rng: &mut R) -> Result<Rotation> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(usage!("Langevin concentration must be finite and non-negative, got {kappa}"));
    }
    let noise = match mode.group() {
        GroupKind::So2 => Rotation::so2(langevin_angle_so2(kappa, rng)),
        GroupKind::So3 => langevin_so3(kappa, rng),
    };
    mode.compose(&noise)
}

/// Target density on `[-π, π]` is `∝ exp(2κ (cos θ − 1))`.
fn langevin_angle_so2<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> f64 {
    if kappa < LANGEVIN_SMALL_KAPPA {
        loop {
            let theta = (rng.random::<f64>() * 2.0 - 1.0) * PI;
            let log_accept = -4.0 * kappa * (0.5 * theta).sin().powi(2);
            if rng.random::<f64>().ln() <= log_accept {
                return theta;
            }
        }
    }
    // Gaussian envelope: 1 − cos θ ≥ 2θ²/π² on [-π, π]
    let sigma = PI / (8.0 * kappa).sqrt();
    loop {
        let theta = sigma * rng.sample::<f64, _>(StandardNormal);
        if theta.abs() > PI {
            continue;
        }
        let log_accept = -4.0 * kappa * (0.5 * theta).sin().powi(2) + 4.0 * kappa * theta * theta / (PI * PI);
        if rng.random::<f64>().ln() <= log_accept {
            return theta;
        }
    }
}

/// Angle marginal on `[0, π]` is `∝ sin²(θ/2) exp(2κ (cos θ − 1))`; the axis is uniform.
fn langevin_so3<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> Rotation {
    if kappa < LANGEVIN_SMALL_KAPPA {
        loop {
            let candidate = sample_haar(GroupKind::So3, rng);
            let theta = candidate.rotation_angle();
            let log_accept = -4.0 * kappa * (0.5 * theta).sin().powi(2);
            if rng.random::<f64>().ln() <= log_accept {
                return candidate;
            }
        }
    }
    // Maxwell (chi-3) envelope; its direction doubles as the uniform axis.
    let sigma = PI / (8.0 * kappa).sqrt();
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let r = v.norm();
        let theta = sigma * r;
        if theta > PI || r < 1e-300 {
            continue;
        }
        let half_sin = (0.5 * theta).sin();
        let shape = (half_sin / (0.5 * theta)).powi(2);
        let log_accept = shape.ln() - 4.0 * kappa * half_sin * half_sin + 4.0 * kappa * theta * theta / (PI * PI);
        if rng.random::<f64>().ln() <= log_accept {
            let axis = v / r;
            let (s, c) = (0.5 * theta).sin_cos();
            return Rotation::So3(UnitQuaternion::new_unchecked(Quaternion::new(
                c,
                s * axis.x,
                s * axis.y,
                s * axis.z,
            )));
        }
    }
}
