//! Multi-irreducible spectral synchronization for rotation averaging on SO(2)
//! and SO(3).
//!
//! Edge losses are decomposed over the irreducible representations of the
//! group, one graph Laplacian is solved per irrep, and the resulting spectral
//! blocks are fused edge by edge into band-limited posteriors whose maxima give
//! denoised relative rotations.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consensus;
pub mod error;
pub mod evaluation;
pub mod group;
pub mod harmonic;
pub mod laplacian;
pub mod pipeline;
pub mod spectral;
pub mod synthesis;

pub use consensus::{DenoisedEdge, DenoisedGraph, EdgePosterior, RotationEstimate};
pub use error::{Result, SyncError};
pub use evaluation::{d_f, d_inf, error_report, ErrorReport};
pub use group::{character, irrep_matrix, sample_haar, sample_langevin, GroupKind, IrrepIndex, IrrepMatrix, Rotation};
pub use harmonic::{FourierWeights, Kernel, LambdaPolicy, LossKind, LossSpec};
pub use laplacian::{Edge, MeasurementGraph};
pub use pipeline::{solve, Solution, SolveDiagnostics, SolverConfig};
pub use spectral::{SolverChoice, SpectralBlock};
pub use synthesis::{generate, Concentration, Instance, SynthesisConfig, Topology};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeExamples;
