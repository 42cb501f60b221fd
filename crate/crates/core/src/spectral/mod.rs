//! Bottom eigenspaces of the per-irrep Laplacians.

mod lobpcg;

pub use lobpcg::{lobpcg, LobpcgOptions, LobpcgOutput};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::group::IrrepIndex;
use crate::laplacian::RhoLaplacian;

/// Above this matrix size the iterative solver is used.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dense,
    Lobpcg,
    /// No solve: the irrep carried no weight.
    Skipped,
}

/// How to pick the eigensolver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverChoice {
    /// Dense up to [`DENSE_LIMIT`], iterative above.
    Auto,
    Dense,
    /// Iterative with the given start-block seed.
    Lobpcg {
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub solver: SolverKind,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub norm_bound: f64,
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal columns matching `values`.
    pub vectors: DMatrix<f64>,
    pub diagnostics: SolverDiagnostics,
}

const LOBPCG_TOL: f64 = 1e-10;
const LOBPCG_MAX_ITER: usize = 5000;

/// The `m` algebraically smallest eigenpairs of `l`.
pub fn smallest_eigenpairs(l: &RhoLaplacian, m: usize) -> Result<EigenPairs> {
    smallest_eigenpairs_with(l, m, SolverChoice::Auto)
}

pub fn smallest_eigenpairs_with(l: &RhoLaplacian, m: usize, choice: SolverChoice) -> Result<EigenPairs> {
    let n = l.size();
    if m > n {
        return Err(usage!("asked for {m} eigenpairs of a {n}x{n} Laplacian"));
    }
    let norm = l.norm_bound();
    let kind = match choice {
        SolverChoice::Auto if n <= DENSE_LIMIT => SolverKind::Dense,
        SolverChoice::Dense => SolverKind::Dense,
        SolverChoice::Auto | SolverChoice::Lobpcg { .. } => SolverKind::Lobpcg,
    };
    let (values, vectors, iterations) = match kind {
        SolverKind::Dense => {
            let eig = l.to_dense().symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let values: Vec<f64> = order[..m].iter().map(|&k| eig.eigenvalues[k]).collect();
            let cols: Vec<_> = order[..m].iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
            let vectors = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
            (values, vectors, 0)
        }
        SolverKind::Lobpcg => {
            let seed = match choice {
                SolverChoice::Lobpcg { seed } => seed,
                _ => 0,
            };
            let d = l.block_dim();
            let mut diag = Vec::with_capacity(n);
            for deg in &l.degrees {
                diag.extend(std::iter::repeat_n(*deg, d));
            }
            let opts = LobpcgOptions {
                wanted: m,
                guard: (m / 2).max(2).min(n - m),
                tol: LOBPCG_TOL,
                max_iter: LOBPCG_MAX_ITER,
                seed,
            };
            let out = lobpcg(&|x: &DMatrix<f64>| l.apply(x), n, &diag, norm, &opts)?;
            (out.values, out.vectors, out.iterations)
        }
        SolverKind::Skipped => unreachable!("never chosen"),
    };
    let residuals = if m == 0 {
        Vec::new()
    } else {
        let lv = l.apply(&vectors);
        (0..m).map(|k| (lv.column(k) - vectors.column(k) * values[k]).norm()).collect()
    };
    Ok(EigenPairs {
        values,
        vectors,
        diagnostics: SolverDiagnostics { solver: kind, iterations, residuals, norm_bound: norm },
    })
}

/// The relaxed solution for one irrep: `Φ = √N Vᵀ` from the bottom `d_ρ`
/// eigenvectors `V`, so that `Φ Φᵀ = N I`.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub irrep: IrrepIndex,
    pub node_count: usize,
    /// `d_ρ × d_ρ N`.
    pub phi: DMatrix<f64>,
    /// The bottom `d_ρ` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `γ_{d+1} − γ_d`; `None` when the Laplacian has no further eigenvalue.
    pub gap: Option<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl SpectralBlock {
    pub fn dim(&self) -> usize {
        self.irrep.dim()
    }

    /// The `d_ρ × d_ρ` column block of node `i`.
    pub fn node_block(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        self.phi.columns(i * d, d).into_owned()
    }

    /// A block with `Φ = 0`: the irrep contributes nothing to any posterior.
    pub fn null(irrep: IrrepIndex, node_count: usize) -> Self {
        SpectralBlock {
            irrep,
            node_count,
            phi: DMatrix::zeros(irrep.dim(), irrep.dim() * node_count),
            eigenvalues: Vec::new(),
            gap: None,
            diagnostics: SolverDiagnostics {
                solver: SolverKind::Skipped,
                iterations: 0,
                residuals: Vec::new(),
                norm_bound: 0.0,
            },
        }
    }

    /// Same block with `Φ` replaced by `QΦ`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        SpectralBlock { phi: q * &self.phi, ..self.clone() }
    }
}

const GAP_WARN: f64 = 1e-9;

pub fn extract_block(l: &RhoLaplacian) -> Result<SpectralBlock> {
    extract_block_with(l, SolverChoice::Auto)
}

pub fn extract_block_with(l: &RhoLaplacian, choice: SolverChoice) -> Result<SpectralBlock> {
    let d = l.block_dim();
    let n = l.size();
    let m = (d + 1).min(n);
    let pairs = smallest_eigenpairs_with(l, m, choice)?;
    let gap = (m > d).then(|| pairs.values[d] - pairs.values[d - 1]);
    if let Some(g) = gap {
        if g < GAP_WARN * pairs.diagnostics.norm_bound {
            log::warn!(
                "{}: spectral gap {:.3e} below {:.0e}·‖L‖; the bottom subspace is ill-separated",
                l.irrep,
                g,
                GAP_WARN
            );
        }
    }
    let v = pairs.vectors.columns(0, d);
    let phi = v.transpose() * (l.node_count as f64).sqrt();
    let mut diagnostics = pairs.diagnostics;
    diagnostics.residuals.truncate(d);
    Ok(SpectralBlock {
        irrep: l.irrep,
        node_count: l.node_count,
        phi,
        eigenvalues: pairs.values[..d].to_vec(),
        gap,
        diagnostics,
    })
}
