//! Discretized Dunkl–Schrödinger forms on sign-flip invariant grids,
//! eigensolvers and the counting function.

pub mod convergence;
pub mod eigen;
pub mod grid;
pub mod operator;

pub use grid::SymmetricGrid;
pub use operator::{assemble, assemble_values, discrete_dunkl_derivative, DiscreteOperatorPair};
pub use eigen::{counting_by_inertia, counting_n, eigensolve, EigenRequest, SpectrumResult};
pub use convergence::{converged_spectrum, spectrum_at, ConvergedSpectrum, SpectralSpec};
