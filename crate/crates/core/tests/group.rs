use nalgebra::Vector3;
use proptest::prelude::*;

use irrepsync::{character, irrep_matrix, GroupKind, IrrepIndex, Rotation};

fn so3() -> impl Strategy<Value = Rotation> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate quaternion", |(w, x, y, z)| w * w + x * x + y * y + z * z > 1e-3)
        .prop_map(|(w, x, y, z)| Rotation::from_quaternion(w, x, y, z).unwrap())
}

fn so2() -> impl Strategy<Value = Rotation> {
    (-10.0f64..10.0).prop_map(Rotation::so2)
}

fn any_rotation_pair() -> impl Strategy<Value = (Rotation, Rotation)> {
    prop_oneof![(so2(), so2()), (so3(), so3())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn irreps_are_homomorphisms((a, b) in any_rotation_pair(), order in 0usize..=8) {
        let irrep = IrrepIndex::new(a.group(), order);
        let ab = irrep_matrix(irrep, &a.compose(&b).unwrap()).unwrap().entries;
        let product = irrep_matrix(irrep, &a).unwrap().entries * irrep_matrix(irrep, &b).unwrap().entries;
        prop_assert!((ab - product).amax() < 1e-9);
    }

    #[test]
    fn irreps_are_orthogonal((a, _) in any_rotation_pair(), order in 0usize..=8) {
        let irrep = IrrepIndex::new(a.group(), order);
        let m = irrep_matrix(irrep, &a).unwrap().entries;
        let d = irrep.dim();
        prop_assert!((m.transpose() * &m - nalgebra::DMatrix::identity(d, d)).amax() < 1e-10);
        prop_assert!((m.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn inverse_maps_to_transpose((a, _) in any_rotation_pair(), order in 1usize..=6) {
        let irrep = IrrepIndex::new(a.group(), order);
        let inv = irrep_matrix(irrep, &a.inverse()).unwrap().entries;
        prop_assert!((inv - irrep_matrix(irrep, &a).unwrap().entries.transpose()).amax() < 1e-10);
        prop_assert!(a.compose(&a.inverse()).unwrap().rotation_angle() < 1e-7);
    }

    #[test]
    fn character_is_trace((a, _) in any_rotation_pair(), order in 0usize..=8) {
        let irrep = IrrepIndex::new(a.group(), order);
        let trace = irrep_matrix(irrep, &a).unwrap().entries.trace();
        prop_assert!((character(irrep, a.rotation_angle()) - trace).abs() < 1e-8);
    }

    #[test]
    fn composition_is_associative(a in so3(), b in so3(), c in so3()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left.angle_to(&right).unwrap() < 1e-7);
    }

    #[test]
    fn axis_angle_has_its_angle(x in -1.0f64..1.0, y in -1.0f64..1.0, z in 0.1f64..1.0, angle in 0.0f64..3.1) {
        let r = Rotation::from_axis_angle(&Vector3::new(x, y, z), angle).unwrap();
        prop_assert!((r.rotation_angle() - angle).abs() < 1e-7);
        prop_assert_eq!(r.group(), GroupKind::So3);
    }
}
