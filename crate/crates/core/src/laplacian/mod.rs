//! Per-irrep graph Laplacians built from a measurement graph and edge weights.

mod graph;

pub use graph::{Edge, GraphSummary, MeasurementGraph};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::group::{irrep_matrix_capped, IrrepIndex, Rotation};
use crate::harmonic::FourierWeights;

/// Block matrix with diagonal blocks `D_i I` and off-diagonal blocks
/// `−w_ij ρ(g̃_ij)`, stored as its nonzero blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoLaplacian {
    pub irrep: IrrepIndex,
    pub node_count: usize,
    pub degrees: Vec<f64>,
    /// `(i, j, block)` with `i < j`; block `(j, i)` is the transpose.
    pub blocks: Vec<(usize, usize, DMatrix<f64>)>,
}

/// Diagnostics about the edge weights that went into a Laplacian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub min: f64,
    pub max: f64,
    pub negative: usize,
}

impl WeightStats {
    pub fn of(weights: &[f64]) -> Self {
        WeightStats {
            min: weights.iter().copied().fold(f64::INFINITY, f64::min),
            max: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            negative: weights.iter().filter(|w| **w < 0.0).count(),
        }
    }
}

impl RhoLaplacian {
    pub fn block_dim(&self) -> usize {
        self.irrep.dim()
    }

    pub fn size(&self) -> usize {
        self.node_count * self.block_dim()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.block_dim();
        let mut m = DMatrix::zeros(self.size(), self.size());
        for (i, deg) in self.degrees.iter().enumerate() {
            for a in 0..d {
                m[(i * d + a, i * d + a)] = *deg;
            }
        }
        for (i, j, b) in &self.blocks {
            m.view_mut((i * d, j * d), (d, d)).copy_from(b);
            m.view_mut((j * d, i * d), (d, d)).copy_from(&b.transpose());
        }
        m
    }

    /// `y = L x` for a block of column vectors.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.block_dim();
        let mut y = DMatrix::zeros(x.nrows(), x.ncols());
        for (i, deg) in self.degrees.iter().enumerate() {
            let xi = x.rows(i * d, d);
            y.rows_mut(i * d, d).copy_from(&(xi * *deg));
        }
        for (i, j, b) in &self.blocks {
            let yi = b * x.rows(*j * d, d);
            let yj = b.transpose() * x.rows(*i * d, d);
            let mut r = y.rows_mut(*i * d, d);
            r += yi;
            let mut r = y.rows_mut(*j * d, d);
            r += yj;
        }
        y
    }

    pub fn apply_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        let m = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
        DVector::from_column_slice(self.apply(&m).as_slice())
    }

    /// Upper bound on the spectral norm (Gershgorin, using `‖ρ‖₂ = 1`).
    pub fn norm_bound(&self) -> f64 {
        let mut rows: Vec<f64> = self.degrees.iter().map(|d| d.abs()).collect();
        for (i, j, b) in &self.blocks {
            // blocks are scaled orthogonal matrices, so the spectral norm is the scale
            let s = b.norm() / (self.block_dim() as f64).sqrt();
            rows[*i] += s;
            rows[*j] += s;
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

/// Scalar Laplacian of the edge weights: `D_i` on the diagonal, `−w_ij` off it.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightLaplacian {
    pub irrep: IrrepIndex,
    pub matrix: DMatrix<f64>,
}

fn check_weights(graph: &MeasurementGraph, irrep: IrrepIndex, weights: &[f64]) -> Result<()> {
    if irrep.group != graph.group {
        return Err(usage!("irrep {irrep} does not belong to the graph's group {}", graph.group));
    }
    if weights.len() != graph.edge_count() {
        return Err(usage!("{} edge weights for {} edges", weights.len(), graph.edge_count()));
    }
    if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
        return Err(usage!("edge {k} has a non-finite weight"));
    }
    Ok(())
}

/// Agreement weights of every edge at one irrep order.
pub fn edge_weights(graph: &MeasurementGraph, weights: &[FourierWeights], order: usize) -> Result<Vec<f64>> {
    if weights.len() != graph.edge_count() {
        return Err(usage!("Fourier weights for {} of {} edges", weights.len(), graph.edge_count()));
    }
    weights
        .iter()
        .enumerate()
        .map(|(k, w)| w.agreement_weight(order).ok_or_else(|| usage!("edge {k} has no weight at order {order}")))
        .collect()
}

/// The Laplacian of `graph` at `irrep` with the loss coefficients of each edge.
pub fn build_rho_laplacian(
    graph: &MeasurementGraph,
    weights: &[FourierWeights],
    irrep: IrrepIndex,
) -> Result<RhoLaplacian> {
    graph.check_connected()?;
    let w = edge_weights(graph, weights, irrep.order)?;
    rho_laplacian_from_weights(graph, &w, irrep)
}

/// As [`build_rho_laplacian`] with explicit scalar edge weights and no
/// connectivity check.
pub fn rho_laplacian_from_weights(
    graph: &MeasurementGraph,
    weights: &[f64],
    irrep: IrrepIndex,
) -> Result<RhoLaplacian> {
    check_weights(graph, irrep, weights)?;
    let mut degrees = vec![0.0; graph.node_count];
    let mut blocks = Vec::with_capacity(graph.edge_count());
    for (e, &w) in graph.edges().iter().zip(weights) {
        degrees[e.i] += w;
        degrees[e.j] += w;
        let rho = irrep_matrix_capped(irrep, &e.measurement, usize::MAX)?.entries;
        blocks.push((e.i, e.j, rho * (-w)));
    }
    Ok(RhoLaplacian { irrep, node_count: graph.node_count, degrees, blocks })
}

pub fn build_weight_laplacian(
    graph: &MeasurementGraph,
    weights: &[FourierWeights],
    irrep: IrrepIndex,
) -> Result<WeightLaplacian> {
    graph.check_connected()?;
    let w = edge_weights(graph, weights, irrep.order)?;
    weight_laplacian_from_weights(graph, &w, irrep)
}

pub fn weight_laplacian_from_weights(
    graph: &MeasurementGraph,
    weights: &[f64],
    irrep: IrrepIndex,
) -> Result<WeightLaplacian> {
    check_weights(graph, irrep, weights)?;
    let n = graph.node_count;
    let mut m = DMatrix::zeros(n, n);
    for (e, &w) in graph.edges().iter().zip(weights) {
        m[(e.i, e.j)] -= w;
        m[(e.j, e.i)] -= w;
        m[(e.i, e.i)] += w;
        m[(e.j, e.j)] += w;
    }
    Ok(WeightLaplacian { irrep, matrix: m })
}

/// Block-diagonal matrix of `ρ(g_i)`; conjugating a noiseless Laplacian by it
/// gives `L(W) ⊗ I`.
pub fn block_diagonal_s(truth: &[Rotation], irrep: IrrepIndex) -> Result<DMatrix<f64>> {
    let d = irrep.dim();
    let mut s = DMatrix::zeros(d * truth.len(), d * truth.len());
    for (i, g) in truth.iter().enumerate() {
        let rho = irrep_matrix_capped(irrep, g, usize::MAX)?.entries;
        s.view_mut((i * d, i * d), (d, d)).copy_from(&rho);
    }
    Ok(s)
}
