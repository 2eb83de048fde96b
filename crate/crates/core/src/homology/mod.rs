//! Integral cellular homology: Smith normal form, relative groups,
//! connecting maps, cap products and duality on cubical complexes.

pub mod complex;
pub mod cubical;
pub mod groups;
pub mod matrix;
pub mod snf;

use thiserror::Error;

pub use complex::{Cell, CellComplex, CellComplexFile, CellSet, Locus};
pub use cubical::{Axis, CubicalComplex, Duality};
pub use groups::{CellularGroup, HomologyGroup};
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SnfResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("cell {cell}: {reason}")]
    Invalid { cell: usize, reason: String },
    #[error("{0} is not a subcomplex")]
    NotSubcomplex(String),
    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse { line: usize, column: usize, reason: String },
    #[error("not a manifold: {0}")]
    NotManifold(String),
    #[error("not orientable: {0}")]
    NotOrientable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
