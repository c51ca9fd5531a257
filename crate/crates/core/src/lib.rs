//! Numerical solver for the continuous coagulation equation with multiple
//! fragmentation, on a truncated volume interval `]0, n[`.
//!
//! The crate is generic over the floating-point type ([`Scalar`]); the
//! `*64` aliases at the crate root fix it to `f64`, which is what the CLI
//! and the acceptance suite use.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod quadrature;
pub mod reference;
pub mod rhs;
pub mod scalar;
pub mod solver;
pub mod truncation;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CoagulationKernel64 = kernels::CoagulationKernel<f64>;
pub type FragmentationKernel64 = kernels::FragmentationKernel<f64>;
pub type HypothesisReport64 = kernels::HypothesisReport<f64>;
pub type VolumeGrid64 = grid::VolumeGrid<f64>;
pub type NumberDensity64 = grid::NumberDensity<f64>;
pub type InitialData64 = grid::InitialData<f64>;
pub type TruncationParams64 = truncation::TruncationParams<f64>;
pub type Rhs64 = rhs::Rhs<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type SimulationState64 = solver::SimulationState<f64>;
