//! Time-fractional pseudo-parabolic equation: L1/finite-difference forward
//! solver, Tikhonov reconstruction of the initial state from terminal data,
//! and a spectral reference solver.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caputo;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod inverse;
pub mod linalg;
pub mod manufactured;
pub mod mesh;
pub mod oracle;

pub use caputo::{gamma, l1_coefficients, L1Weights, WeightTable};
pub use error::{Error, Result};
pub use forward::{solve_forward, Coefficient, ForwardSolver, ProblemConfig, Source, Trajectory};
pub use inverse::{
    add_noise, assemble_forward_operator, assemble_forward_operator_cached, reconstruct,
    tikhonov_solve, ErrorPair, Fingerprint, ForwardOperator, NoiseModel, ReconstructionResult,
    Reconstructor,
};
pub use linalg::{solve_tridiagonal, DenseMatrix, DiscreteNorms, StateVector, TridiagonalMatrix};
pub use manufactured::ManufacturedCase;
pub use mesh::{default_grading, SpaceGrid, TimeMesh};
pub use oracle::{reconstruct_u0_spectral, ModeOracle, ModeSolution, SpectralReconstruction};
