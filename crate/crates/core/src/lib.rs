//! Parallel multisplitting and block GAOR iterations for block linear
//! systems whose coefficient matrix is a generalized H-matrix.

pub mod analysis;
pub mod blockcore;
pub mod error;
pub mod generators;
pub mod io;
pub mod solver;
pub mod splitting;
pub mod tables;

pub use blockcore::{BlockMatrix, BlockVector, ClassReport, Dense, C64};
pub use error::{Error, Result};
pub use solver::{SolveOptions, SolveReport, StopKind, StopRule};
pub use splitting::{BlockWeights, IndexSetSplit, Multisplitting, TripleSplit};
