//! Ground states of higher-order nonlinear equations built from positive
//! homogeneous operators with anisotropic dilation structure, and the best
//! constants of the Sobolev and Gagliardo-Nirenberg inequalities they
//! determine.
//!
//! The crate is organised around the pipeline
//!
//! 1. [`exponents`] - exact rational index algebra: admissibility ranges,
//!    interpolation exponents, closed-form constant factors;
//! 2. [`grid`] / [`symbol`] / [`spectral`] - periodic grids, anisotropic
//!    homogeneous Fourier multipliers and their fractional powers;
//! 3. [`functionals`] - the energy, the Nehari functional and its exact
//!    projection, interpolation quotients and the energy gradient;
//! 4. [`solver`] - Nehari-projected gradient descent for the least energy
//!    solution, with Pohozaev balance diagnostics and a brute-force oracle;
//! 5. [`constants`] - both closed forms of the best constants, sampled
//!    inequality verification and the operator-independent ratio identity.

pub mod constants;
pub mod error;
pub mod exponents;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod rational;
pub mod solver;
pub mod spectral;
pub mod symbol;

pub use constants::BestConstants;
pub use error::{Error, Result};
pub use exponents::{DilationStructure, GNExponents, IndexSet};
pub use functionals::{FunctionalReport, ProblemSpec, Term};
pub use grid::{GridFunction, GridSpec};
pub use rational::Rat;
pub use solver::{GroundStateResult, SolverOptions};
pub use symbol::HomogeneousSymbol;
