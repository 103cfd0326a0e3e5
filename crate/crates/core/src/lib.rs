//! Periodic loop models, lattice Jordan cells and the bulk indecomposability
//! parameter b at c = 0.
//!
//! The pipeline for one size: enumerate link-pattern sectors, project the
//! Hamiltonian onto momentum blocks, find the stress-tensor state T and its
//! logarithmic partner, then evaluate the lattice estimator of b through the
//! lattice Virasoro mode H_{-2}. The `coulomb` module holds the closed-form
//! predictions the lattice numbers are compared against.

pub mod bilinear;
pub mod checks;
pub mod coulomb;
pub mod error;
pub mod graded;
pub mod linalg;
pub mod linkstate;
pub mod measure;
pub mod model;
pub mod sparse;
pub mod spectra;
pub mod tl_dense;
pub mod tl_dilute;
pub mod virasoro;

pub use error::{Error, Result};
pub use graded::{Contraction, GradedSpace, Model, Term, Weighting};
pub use linkstate::{LinkPattern, SectorBasis, Site};
pub use measure::{extrapolate, measure_b, sweep, Extrapolation, MeasurementRecord};
pub use model::{make_spec, ModelKind, ModelSpec};
pub use num_complex::Complex64;
pub use sparse::SparseOperator;
pub use spectra::JordanPair;
