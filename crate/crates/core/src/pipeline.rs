//! End-to-end solve: edge weights, per-irrep Laplacians and spectral blocks,
//! edge consensus, and rotation recovery.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consensus::{
    denoise_graph, max_grid_resolution, recover_rotations, synchronize, ArgmaxOptions, DenoisedGraph, RotationEstimate,
    DEFAULT_REFINE_STEPS,
};
use crate::error::{usage, Result, SyncError};
use crate::group::{IrrepIndex, DEFAULT_MAX_ORDER};
use crate::harmonic::{edge_coefficients, FourierWeights, Kernel, LambdaPolicy, LossKind, LossSpec};
use crate::laplacian::{build_rho_laplacian, edge_weights, GraphSummary, MeasurementGraph, WeightStats};
use crate::spectral::{extract_block_with, SolverChoice, SolverDiagnostics, SpectralBlock};

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_order: usize,
    pub loss: LossSpec,
    pub kernel: Kernel,
    /// `None` picks the coarsest admissible step for `max_order`.
    pub grid_resolution: Option<f64>,
    pub refine_steps: usize,
    /// Seed of the iterative eigensolver's start block.
    pub seed: u64,
    pub solver: SolverChoice,
    /// Order 1 with the quadratic loss, and nodes rounded straight from the
    /// order-1 spectral relaxation rather than from the denoised edges.
    pub baseline: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_order: 8,
            loss: LossSpec::new(LossKind::Cauchy),
            kernel: Kernel::Fejer,
            grid_resolution: None,
            refine_steps: DEFAULT_REFINE_STEPS,
            seed: 0,
            solver: SolverChoice::Auto,
            baseline: false,
        }
    }
}

impl SolverConfig {
    pub fn baseline() -> Self {
        SolverConfig { baseline: true, ..Self::default() }.effective()
    }

    /// The configuration actually run: baseline mode forces order 1 and the
    /// quadratic loss.
    pub fn effective(&self) -> Self {
        if !self.baseline {
            return self.clone();
        }
        SolverConfig {
            max_order: 1,
            loss: LossSpec::new(LossKind::Quadratic),
            grid_resolution: self.grid_resolution.map(|r| r.min(max_grid_resolution(1))),
            ..self.clone()
        }
    }

    pub fn argmax_options(&self) -> ArgmaxOptions {
        ArgmaxOptions {
            grid_resolution: self.grid_resolution.unwrap_or_else(|| max_grid_resolution(self.max_order)),
            refine_steps: self.refine_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_order == 0 || self.max_order > DEFAULT_MAX_ORDER {
            return Err(usage!("maximum irrep order must be in 1..={DEFAULT_MAX_ORDER}, got {}", self.max_order));
        }
        let bound = max_grid_resolution(self.max_order);
        if let Some(r) = self.grid_resolution {
            if !(r > 0.0) || r > bound * (1.0 + 1e-12) {
                return Err(usage!(
                    "grid resolution {r} must be positive and at most {bound:.6} for order {}",
                    self.max_order
                ));
            }
        }
        if let LambdaPolicy::Fixed(l) = self.loss.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(usage!("fixed robust-loss scale must be positive, got {l}"));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub weights: f64,
    pub laplacians: f64,
    pub spectral: f64,
    pub consensus: f64,
    pub recovery: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrepDiagnostics {
    pub order: usize,
    pub dim: usize,
    pub weights: WeightStats,
    pub eigenvalues: Vec<f64>,
    pub gap: Option<f64>,
    pub solver: SolverDiagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDiagnostics {
    pub i: usize,
    pub j: usize,
    pub peak: f64,
    pub sharpness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSummary {
    /// Distinct concentrations integrated (edges sharing `κ` share weights).
    pub profiles: usize,
    pub max_error: f64,
    pub total_nodes: usize,
}

/// Everything a run measured about itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub graph: GraphSummary,
    pub max_order: usize,
    pub loss: String,
    pub kernel: Kernel,
    pub grid_resolution: f64,
    pub refine_steps: usize,
    pub baseline: bool,
    pub quadrature: QuadratureSummary,
    pub irreps: Vec<IrrepDiagnostics>,
    pub edges: Vec<EdgeDiagnostics>,
    pub timings: Timings,
}

pub struct Solution {
    pub weights: Vec<FourierWeights>,
    pub blocks: Vec<SpectralBlock>,
    pub denoised: DenoisedGraph,
    pub estimate: RotationEstimate,
    pub diagnostics: SolveDiagnostics,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        SyncError::Usage(m) => SyncError::Usage(format!("[{name}] {m}")),
        SyncError::Capability(m) => SyncError::Capability(format!("[{name}] {m}")),
        SyncError::Evaluation(m) => SyncError::Evaluation(format!("[{name}] {m}")),
        SyncError::Numeric(m) => SyncError::Numeric(format!("[{name}] {m}")),
        SyncError::Structural(m) => SyncError::Structural(format!("[{name}] {m}")),
    })
}

/// Loss coefficients of every edge; edges with equal `κ` share one quadrature.
pub fn compute_edge_weights(graph: &MeasurementGraph, cfg: &SolverConfig) -> Result<(Vec<FourierWeights>, usize)> {
    let mut kappas: Vec<f64> = graph.edges().iter().map(|e| e.kappa).collect();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    let table: HashMap<u64, FourierWeights> = kappas
        .par_iter()
        .map(|&k| edge_coefficients(&cfg.loss, graph.group, k, cfg.max_order, cfg.kernel).map(|w| (k.to_bits(), w)))
        .collect::<Result<_>>()?;
    Ok((graph.edges().iter().map(|e| table[&e.kappa.to_bits()].clone()).collect(), kappas.len()))
}

/// Runs the full pipeline on `graph`.
pub fn solve(graph: &MeasurementGraph, config: &SolverConfig) -> Result<Solution> {
    let cfg = config.effective();
    stage("config", cfg.validate())?;
    let start = Instant::now();
    let mut timings = Timings::default();
    stage("laplacian", graph.check_connected())?;

    let t = Instant::now();
    let (weights, profiles) = stage("harmonic", compute_edge_weights(graph, &cfg))?;
    timings.weights = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let stats = (1..=cfg.max_order)
        .map(|order| edge_weights(graph, &weights, order).map(|w| WeightStats::of(&w)))
        .collect::<Result<Vec<_>>>()?;
    let active = active_orders(&stats);
    for (order, s) in (1..=cfg.max_order).zip(&stats) {
        if !active[order - 1] {
            log::info!("order {order}: all edge weights vanish; irrep skipped");
        } else if s.negative > 0 {
            log::warn!("order {order}: {} edges carry negative weight (min {:.3e})", s.negative, s.min);
        }
    }
    let laplacians = stage(
        "laplacian",
        (1..=cfg.max_order)
            .into_par_iter()
            .filter(|order| active[order - 1])
            .map(|order| build_rho_laplacian(graph, &weights, IrrepIndex::new(graph.group, order)))
            .collect::<Result<Vec<_>>>(),
    )?;
    timings.laplacians = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let solved = stage(
        "spectral",
        laplacians
            .par_iter()
            .map(|l| extract_block_with(l, solver_for(&cfg, l.irrep.order)))
            .collect::<Result<Vec<_>>>(),
    )?;
    let mut solved = solved.into_iter();
    let blocks: Vec<SpectralBlock> = (1..=cfg.max_order)
        .map(|order| {
            let irrep = IrrepIndex::new(graph.group, order);
            if active[order - 1] {
                solved.next().expect("one block per active order")
            } else {
                SpectralBlock::null(irrep, graph.node_count)
            }
        })
        .collect();
    timings.spectral = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let opts = cfg.argmax_options();
    let denoised = stage("consensus", denoise_graph(&blocks, graph, &opts))?;
    timings.consensus = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let estimate = if cfg.baseline {
        let w = edge_weights(graph, &weights, 1)?;
        stage("recovery", synchronize(graph, &w, solver_for(&cfg, 0)))?
    } else {
        stage("recovery", recover_rotations(&denoised, solver_for(&cfg, 0)))?
    };
    timings.recovery = t.elapsed().as_secs_f64();
    timings.total = start.elapsed().as_secs_f64();

    let quadrature = QuadratureSummary {
        profiles,
        max_error: weights.iter().map(|w| w.max_quadrature_error()).fold(0.0, f64::max),
        total_nodes: weights.first().map(|w| w.total_nodes() * profiles).unwrap_or(0),
    };
    let irreps = blocks
        .iter()
        .zip(&stats)
        .map(|(b, s)| IrrepDiagnostics {
            order: b.irrep.order,
            dim: b.dim(),
            weights: *s,
            eigenvalues: b.eigenvalues.clone(),
            gap: b.gap,
            solver: b.diagnostics.clone(),
        })
        .collect();
    let edges = denoised
        .edges
        .iter()
        .map(|e| EdgeDiagnostics { i: e.i, j: e.j, peak: e.peak, sharpness: e.sharpness })
        .collect();
    let diagnostics = SolveDiagnostics {
        graph: graph.into(),
        max_order: cfg.max_order,
        loss: cfg.loss.kind.name().to_string(),
        kernel: cfg.kernel,
        grid_resolution: opts.grid_resolution,
        refine_steps: opts.refine_steps,
        baseline: cfg.baseline,
        quadrature,
        irreps,
        edges,
        timings,
    };
    Ok(Solution { weights, blocks, denoised, estimate, diagnostics })
}

/// Below this fraction of the largest weight an order counts as silent.
const SILENT_WEIGHT: f64 = 1e-9;

/// Orders with any edge weight above the silence threshold. A silent order's
/// Laplacian is numerically zero, so its eigenvectors are arbitrary and would
/// only inject noise into the posteriors.
fn active_orders(stats: &[WeightStats]) -> Vec<bool> {
    let scale = stats.iter().map(|s| s.min.abs().max(s.max.abs())).fold(0.0, f64::max);
    stats.iter().map(|s| s.min.abs().max(s.max.abs()) > SILENT_WEIGHT * scale).collect()
}

/// Distinct start-block seeds per order keep the iterative solves independent.
fn solver_for(cfg: &SolverConfig, order: usize) -> SolverChoice {
    match cfg.solver {
        SolverChoice::Lobpcg { seed } => SolverChoice::Lobpcg { seed: seed.wrapping_add(order as u64) },
        SolverChoice::Auto => SolverChoice::Auto,
        SolverChoice::Dense => SolverChoice::Dense,
    }
}
