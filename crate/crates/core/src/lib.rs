//! Numerical toolkit for the fractional relativistic Schrödinger operator
//! `(-Δ+m²)^s` on periodic lattices in one and two dimensions.

pub mod bessel;
pub mod error;
pub mod extension;
pub mod grid;
pub mod model;
pub mod numerics;
pub mod solver;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Field, Grid, Point, MAX_TOTAL_POINTS};
pub use model::{AutonomousConfig, DiscreteProblem, ModelConfig};
pub use solver::{SolveResult, SolveStatus, Tolerances};
pub use specfun::FracParams;
pub use spectral::{KernelTable, SymbolKind};
