//! Edge-wise consensus: posterior per edge, its maximiser, and the final
//! rotation recovery from the denoised edges.

mod posterior;

pub use posterior::{
    argmax_on_group, edge_posterior, euler_grid, euler_rotation, max_grid_resolution, posterior_samples, ArgmaxOptions,
    EdgePosterior, DEFAULT_REFINE_STEPS,
};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{usage, Result, SyncError};
use crate::group::{GroupKind, IrrepIndex, Rotation};
use crate::laplacian::{MeasurementGraph, RhoLaplacian};
use crate::spectral::{smallest_eigenpairs_with, SolverChoice, SolverDiagnostics, SpectralBlock};

/// Nearest rotation to a square matrix in Frobenius norm (polar factor with
/// the determinant forced to +1).
pub fn project_to_group(m: &DMatrix<f64>) -> Result<Rotation> {
    Rotation::from_matrix(&project_matrix(m)?)
}

pub fn project_matrix(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if m.ncols() != d || !(d == 2 || d == 3) {
        return Err(usage!("cannot project a {}x{} matrix onto a rotation group", m.nrows(), m.ncols()));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(SyncError::Numeric("matrix to project has non-finite entries".into()));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= 1e-12 * smax {
        return Err(SyncError::Numeric(format!(
            "matrix is singular (singular values {:?}); its rotation projection is not unique",
            svd.singular_values.as_slice()
        )));
    }
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut r = &u * &vt;
    if r.determinant() < 0.0 {
        // flip the direction of the smallest singular value
        let k = svd.singular_values.imin();
        let mut u2 = u.clone();
        u2.column_mut(k).neg_mut();
        r = u2 * vt;
    }
    Ok(r)
}

/// One edge after consensus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoisedEdge {
    pub i: usize,
    pub j: usize,
    pub estimate: Rotation,
    /// `|D_ij|²` at the maximiser.
    pub peak: f64,
    /// Peak relative to an exact delta of the same band limit, in `[0, 1]`.
    pub sharpness: f64,
}

/// The denoised graph: same topology, `ĝ_ij` on every edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoisedGraph {
    pub group: GroupKind,
    pub node_count: usize,
    pub edges: Vec<DenoisedEdge>,
}

impl DenoisedGraph {
    /// `ĝ_ij` in either orientation.
    pub fn estimate(&self, i: usize, j: usize) -> Option<Rotation> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let e = self.edges.iter().find(|e| e.i == a && e.j == b)?;
        Some(if i < j { e.estimate } else { e.estimate.inverse() })
    }

    pub fn as_measurement_graph(&self) -> Result<MeasurementGraph> {
        let mut g = MeasurementGraph::new(self.group, self.node_count);
        for e in &self.edges {
            g.add_edge(e.i, e.j, e.estimate, 1.0)?;
        }
        Ok(g)
    }
}

/// Runs the posterior argmax on every edge of `graph`, in parallel.
pub fn denoise_graph(
    blocks: &[SpectralBlock],
    graph: &MeasurementGraph,
    opts: &ArgmaxOptions,
) -> Result<DenoisedGraph> {
    let edges = graph
        .edges()
        .par_iter()
        .map(|e| {
            let p = edge_posterior(blocks, e.i, e.j)?;
            let (estimate, peak) = argmax_on_group(&p, opts)?;
            Ok(DenoisedEdge { i: e.i, j: e.j, estimate, peak, sharpness: p.sharpness(peak) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DenoisedGraph { group: graph.group, node_count: graph.node_count, edges })
}

/// Absolute rotations with `R̂_0 = I`.
#[derive(Clone, Debug)]
pub struct RotationEstimate {
    pub rotations: Vec<Rotation>,
    pub diagnostics: SolverDiagnostics,
}

/// Fundamental-representation spectral synchronisation: the bottom `d`
/// eigenvectors of the Laplacian with blocks `−w_ij g̃_ij`, rounded per node.
pub fn synchronize(graph: &MeasurementGraph, weights: &[f64], solver: SolverChoice) -> Result<RotationEstimate> {
    graph.check_connected()?;
    if weights.len() != graph.edge_count() {
        return Err(usage!("{} weights for {} edges", weights.len(), graph.edge_count()));
    }
    let d = graph.group.matrix_dim();
    let n = graph.node_count;
    let mut degrees = vec![0.0; n];
    let mut blocks = Vec::with_capacity(graph.edge_count());
    for (e, &w) in graph.edges().iter().zip(weights) {
        degrees[e.i] += w;
        degrees[e.j] += w;
        blocks.push((e.i, e.j, e.measurement.fundamental_matrix() * (-w)));
    }
    // order 1 has the fundamental dimension for both groups
    let l = RhoLaplacian { irrep: IrrepIndex::new(graph.group, 1), node_count: n, degrees, blocks };
    let pairs = smallest_eigenpairs_with(&l, d, solver)?;
    // rows i·d.. of V are R_iᵀ C up to scale; R̂_i = proj(V_iᵀ)
    let v = &pairs.vectors;
    let node = |i: usize| v.rows(i * d, d).transpose();
    let negative = (0..n).filter(|&i| node(i).determinant() < 0.0).count();
    let flip = 2 * negative > n;
    let mut raw = Vec::with_capacity(n);
    for i in 0..n {
        let mut m = node(i);
        if flip {
            m.row_mut(d - 1).neg_mut();
        }
        raw.push(project_matrix(&m)?);
    }
    let gauge = raw[0].transpose();
    let rotations = raw.iter().map(|r| Rotation::from_matrix(&(&gauge * r))).collect::<Result<Vec<_>>>()?;
    Ok(RotationEstimate { rotations, diagnostics: pairs.diagnostics })
}

/// Order-1 synchronisation of the denoised edges with unit weights.
pub fn recover_rotations(denoised: &DenoisedGraph, solver: SolverChoice) -> Result<RotationEstimate> {
    let g = denoised.as_measurement_graph()?;
    synchronize(&g, &vec![1.0; g.edge_count()], solver)
}
