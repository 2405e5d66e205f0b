//! Numerical laboratory for rational Dunkl analysis and the eigenvalue
//! counting function of Dunkl–Schrödinger operators `-Δ_k + V`.
//!
//! Layers, bottom to top:
//! - [`root_system`]: roots, reflection groups, multiplicities, the weight `w`.
//! - [`measure`]: quadrature against `dw`, ball volumes, `c_k`.
//! - [`potential`], [`landscape`], [`dyadic`]: potentials, the auxiliary
//!   function `m`, grid counts and stopping-time cubes.
//! - [`kernel`], [`transform`], [`bounds`]: the rank-one Dunkl kernel,
//!   transform, translations, heat kernel and bound checks.
//! - [`spectral`]: the discretized form, eigensolvers and `N(L, λ)`.
//! - [`experiment`]: configuration and end-to-end experiments.

pub mod bounds;
pub mod dyadic;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod kernel;
pub mod landscape;
pub mod measure;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod root_system;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
pub use exec::Execution;
