use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irrepsync::laplacian::{block_diagonal_s, rho_laplacian_from_weights};
use irrepsync::spectral::{extract_block_with, smallest_eigenpairs_with, SolverKind};
use irrepsync::{
    generate, irrep_matrix, sample_haar, Concentration, GroupKind, IrrepIndex, MeasurementGraph, Rotation,
    SolverChoice, SpectralBlock, SynthesisConfig, Topology,
};

fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn relative(truth: &[Rotation], irrep: IrrepIndex, i: usize, j: usize) -> DMatrix<f64> {
    irrep_matrix(irrep, &truth[i].between(&truth[j]).unwrap()).unwrap().entries
}

/// Mean error of the pairwise products `Φ_iᵀ Φ_j` against `ρ(g_i⁻¹ g_j)`; gauge free.
fn pairwise_error(block: &SpectralBlock, truth: &[Rotation]) -> f64 {
    let n = truth.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let est = block.node_block(i).transpose() * block.node_block(j);
            total += (est - relative(truth, block.irrep, i, j)).norm();
        }
    }
    total / (n * n) as f64
}

#[test]
fn noiseless_triangle_has_rho_dimensional_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for group in [GroupKind::So2, GroupKind::So3] {
        let truth: Vec<Rotation> = (0..3).map(|_| sample_haar(group, &mut rng)).collect();
        let graph = MeasurementGraph::noiseless(&truth, &[(0, 1), (1, 2), (0, 2)], 1.0).unwrap();
        for order in 1..=5 {
            let irrep = IrrepIndex::new(group, order);
            let d = irrep.dim();
            let l = rho_laplacian_from_weights(&graph, &[1.0, 2.0, 0.5], irrep).unwrap().to_dense();
            let e = eigenvalues(&l);
            assert!(e[..d].iter().all(|x| x.abs() < 1e-10), "{group} order {order}: {e:?}");
            assert!(e[d] > 1e-3, "{group} order {order}: λ after kernel {}", e[d]);

            let s = block_diagonal_s(&truth, irrep).unwrap();
            assert!((&s * s.transpose() - DMatrix::identity(3 * d, 3 * d)).amax() < 1e-10);
        }
    }
}

#[test]
fn positive_weights_give_positive_semidefinite_laplacians() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for group in [GroupKind::So2, GroupKind::So3] {
        let mut cfg = SynthesisConfig::new(group, 12, Topology::SmallWorld { k_local: 4, p_rewire: 0.3 });
        cfg.corruption_fraction = 0.3;
        cfg.seed = 5;
        let inst = generate(&cfg).unwrap();
        let w: Vec<f64> = (0..inst.graph.edge_count()).map(|_| rng.random_range(0.1..3.0)).collect();
        for order in 1..=4 {
            let l = rho_laplacian_from_weights(&inst.graph, &w, IrrepIndex::new(group, order)).unwrap().to_dense();
            assert!(eigenvalues(&l)[0] >= -1e-10);
        }
    }
}

#[test]
fn spectral_block_is_stiefel_scaled() {
    let mut cfg = SynthesisConfig::new(GroupKind::So3, 15, Topology::Complete);
    cfg.seed = 2;
    let inst = generate(&cfg).unwrap();
    let w = vec![1.0; inst.graph.edge_count()];
    for order in 1..=3 {
        let irrep = IrrepIndex::new(GroupKind::So3, order);
        let block =
            extract_block_with(&rho_laplacian_from_weights(&inst.graph, &w, irrep).unwrap(), SolverChoice::Dense)
                .unwrap();
        let d = irrep.dim();
        assert!((&block.phi * block.phi.transpose() - DMatrix::identity(d, d) * 15.0).amax() < 1e-9);
    }
}

/// The start block only fixes a gauge: `ΦᵀΦ` must not depend on it.
#[test]
fn lobpcg_gram_is_seed_invariant() {
    let mut cfg = SynthesisConfig::new(GroupKind::So3, 40, Topology::SmallWorld { k_local: 6, p_rewire: 0.2 });
    cfg.seed = 3;
    let inst = generate(&cfg).unwrap();
    let w = vec![1.0; inst.graph.edge_count()];
    let l = rho_laplacian_from_weights(&inst.graph, &w, IrrepIndex::new(GroupKind::So3, 2)).unwrap();
    let grams: Vec<DMatrix<f64>> = [1u64, 77, 4242]
        .iter()
        .map(|&seed| {
            let b = extract_block_with(&l, SolverChoice::Lobpcg { seed }).unwrap();
            assert_eq!(b.diagnostics.solver, SolverKind::Lobpcg);
            b.phi.transpose() * &b.phi
        })
        .collect();
    let dense = extract_block_with(&l, SolverChoice::Dense).unwrap();
    let reference = dense.phi.transpose() * &dense.phi;
    for g in &grams {
        assert!((g - &reference).amax() <= 1e-6);
    }
}

#[test]
fn eigenpairs_are_ascending_with_small_residuals() {
    let mut cfg = SynthesisConfig::new(GroupKind::So2, 30, Topology::SmallWorld { k_local: 4, p_rewire: 0.1 });
    cfg.seed = 11;
    let inst = generate(&cfg).unwrap();
    let w = vec![1.0; inst.graph.edge_count()];
    let l = rho_laplacian_from_weights(&inst.graph, &w, IrrepIndex::new(GroupKind::So2, 3)).unwrap();
    let dense = eigenvalues(&l.to_dense());
    for choice in [SolverChoice::Dense, SolverChoice::Lobpcg { seed: 5 }] {
        let p = smallest_eigenpairs_with(&l, 4, choice).unwrap();
        assert!(p.values.windows(2).all(|v| v[0] <= v[1]));
        for (a, b) in p.values.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(p.diagnostics.residuals.iter().all(|r| *r < 1e-7));
    }
}

#[test]
fn higher_concentration_tightens_pairwise_estimates() {
    let irrep = IrrepIndex::new(GroupKind::So3, 1);
    let errors: Vec<f64> = [5.0, 20.0, 80.0]
        .iter()
        .map(|&kappa| {
            (0..10)
                .map(|seed| {
                    let mut cfg = SynthesisConfig::new(GroupKind::So3, 20, Topology::Complete);
                    cfg.kappa = Concentration::Global(kappa);
                    cfg.seed = seed;
                    let inst = generate(&cfg).unwrap();
                    let w = vec![1.0; inst.graph.edge_count()];
                    let l = rho_laplacian_from_weights(&inst.graph, &w, irrep).unwrap();
                    pairwise_error(&extract_block_with(&l, SolverChoice::Dense).unwrap(), &inst.truth)
                })
                .sum::<f64>()
                / 10.0
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}
