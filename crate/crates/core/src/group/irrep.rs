use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{wigner, GroupKind, Rotation};
use crate::error::{usage, Result, SyncError};

/// Largest irrep order supported unless a caller raises the cap.
pub const DEFAULT_MAX_ORDER: usize = 16;

/// A real irreducible representation: `k` for SO(2), `ℓ` for SO(3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepIndex {
    pub group: GroupKind,
    pub order: usize,
}

impl IrrepIndex {
    pub fn new(group: GroupKind, order: usize) -> Self {
        IrrepIndex { group, order }
    }

    /// Matrix size of the real representation.
    pub fn dim(&self) -> usize {
        match (self.group, self.order) {
            (GroupKind::So2, 0) => 1,
            (GroupKind::So2, _) => 2,
            (GroupKind::So3, l) => 2 * l + 1,
        }
    }

    /// Weight of this irrep in the inverse Fourier transform:
    /// `f(g) = Σ w_ρ Tr[ρ(g)ᵀ f̂^ρ]`.
    ///
    /// For SO(3) this is `d_ℓ = 2ℓ+1`. A real SO(2) block with `k ≥ 1` packs the
    /// complex irreps `±k` together, and its trace already counts both, so the
    /// weight is 1.
    pub fn plancherel_weight(&self) -> f64 {
        match self.group {
            GroupKind::So2 => 1.0,
            GroupKind::So3 => (2 * self.order + 1) as f64,
        }
    }
}

impl std::fmt::Display for IrrepIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.group {
            GroupKind::So2 => write!(f, "SO2 k={}", self.order),
            GroupKind::So3 => write!(f, "SO3 l={}", self.order),
        }
    }
}

/// A real orthogonal representation matrix `ρ(g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepMatrix {
    pub irrep: IrrepIndex,
    pub entries: DMatrix<f64>,
}

pub fn irrep_matrix(irrep: IrrepIndex, g: &Rotation) -> Result<IrrepMatrix> {
    irrep_matrix_capped(irrep, g, DEFAULT_MAX_ORDER)
}

pub fn irrep_matrix_capped(irrep: IrrepIndex, g: &Rotation, max_order: usize) -> Result<IrrepMatrix> {
    if irrep.group != g.group() {
        return Err(usage!("irrep {irrep} applied to an element of {}", g.group()));
    }
    if irrep.order > max_order {
        return Err(SyncError::Capability(format!(
            "irrep order {} exceeds the configured maximum {max_order}",
            irrep.order
        )));
    }
    let entries = match g {
        Rotation::So2(phi) => so2_block(irrep.order, *phi),
        Rotation::So3(q) => wigner::real_d(irrep.order, q),
    };
    Ok(IrrepMatrix { irrep, entries })
}

/// `[[cos kφ, sin kφ], [−sin kφ, cos kφ]]`, or `[1]` for `k = 0`.
pub(crate) fn so2_block(k: usize, phi: f64) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let (s, c) = (k as f64 * phi).sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

const SMALL_HALF_ANGLE: f64 = 1e-7;

/// Character `Tr ρ(g)` as a function of the rotation angle of `g`.
pub fn character(irrep: IrrepIndex, angle: f64) -> f64 {
    match (irrep.group, irrep.order) {
        (GroupKind::So2, 0) => 1.0,
        (GroupKind::So2, k) => 2.0 * (k as f64 * angle).cos(),
        (GroupKind::So3, l) => {
            let lf = l as f64;
            let half = (0.5 * angle).sin();
            if half.abs() < SMALL_HALF_ANGLE {
                // near a multiple of 2π the Dirichlet ratio is 0/0
                let mut phi = angle.rem_euclid(TAU);
                if phi > PI {
                    phi -= TAU;
                }
                (2.0 * lf + 1.0) * (1.0 - lf * (lf + 1.0) * phi * phi / 6.0)
            } else {
                ((lf + 0.5) * angle).sin() / half
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::sample_haar;
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_irrep_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = sample_haar(GroupKind::So3, &mut rng);
        let m = irrep_matrix(IrrepIndex::new(GroupKind::So3, 0), &g).unwrap();
        assert_eq!(m.entries.shape(), (1, 1));
        assert!((m.entries[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn so2_order_two_quarter_turn() {
        let m = irrep_matrix(IrrepIndex::new(GroupKind::So2, 2), &Rotation::so2(PI / 4.0)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((m.entries - expected).norm() < 1e-15);
    }

    #[test]
    fn order_cap_is_enforced() {
        let g = Rotation::identity(GroupKind::So3);
        let err = irrep_matrix(IrrepIndex::new(GroupKind::So3, 17), &g).unwrap_err();
        assert!(matches!(err, SyncError::Capability(_)));
        assert!(irrep_matrix_capped(IrrepIndex::new(GroupKind::So3, 17), &g, 20).is_ok());
    }

    #[test]
    fn group_mismatch_is_usage_error() {
        let err = irrep_matrix(IrrepIndex::new(GroupKind::So2, 1), &Rotation::identity(GroupKind::So3)).unwrap_err();
        assert!(matches!(err, SyncError::Usage(_)));
    }

    #[test]
    fn character_examples() {
        for l in 0..6 {
            let i = IrrepIndex::new(GroupKind::So3, l);
            assert!((character(i, 0.0) - (2 * l + 1) as f64).abs() < 1e-12);
            assert!((character(i, 1e-9) - (2 * l + 1) as f64).abs() < 1e-9);
            assert!((character(i, TAU) - (2 * l + 1) as f64).abs() < 1e-9);
        }
        assert!((character(IrrepIndex::new(GroupKind::So3, 1), PI) + 1.0).abs() < 1e-12);
        // exponential-sum oracle
        let phi: f64 = 0.7;
        let sum: f64 = (-3..=3).map(|k: i32| (k as f64 * phi).cos()).sum();
        assert!((character(IrrepIndex::new(GroupKind::So3, 3), phi) - sum).abs() < 1e-12);
    }

    #[test]
    fn character_is_continuous_across_series_threshold() {
        let i = IrrepIndex::new(GroupKind::So3, 8);
        for phi in [1.9e-7, 2.1e-7, 1e-6] {
            let sum: f64 = (-8..=8).map(|k: i32| (k as f64 * phi).cos()).sum();
            assert!((character(i, phi) - sum).abs() < 1e-8);
        }
    }

    #[test]
    fn degree_two_matches_spherical_harmonics() {
        // real spherical harmonics of degree two, ordered m = -2..2
        fn sh2(n: &Vector3<f64>) -> [f64; 5] {
            let (x, y, z) = (n.x, n.y, n.z);
            let a = 0.5 * (15.0 / PI).sqrt();
            let b = 0.25 * (5.0 / PI).sqrt();
            let c = 0.25 * (15.0 / PI).sqrt();
            [a * x * y, a * y * z, b * (3.0 * z * z - 1.0), a * x * z, c * (x * x - y * y)]
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sample_haar(GroupKind::So3, &mut rng);
        let q = *g.as_quaternion().unwrap();
        let d = irrep_matrix(IrrepIndex::new(GroupKind::So3, 2), &g).unwrap().entries;
        for _ in 0..100 {
            let n = Vector3::new(
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
                rand::Rng::random::<f64>(&mut rng) - 0.5,
            )
            .normalize();
            let lhs = sh2(&(q * n));
            let rhs = &d * DMatrix::from_column_slice(5, 1, &sh2(&n));
            for k in 0..5 {
                assert!((lhs[k] - rhs[k]).abs() < 1e-12);
            }
        }
    }
}
