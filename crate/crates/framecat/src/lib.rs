//! Finite contextual models of type theory, the fibration-category structure
//! they carry, and frame diagrams over simplicial shapes.
//!
//! The crate is organized in layers:
//!
//! * [`gpd`] — skeletal finite groupoids (sets are the discrete ones);
//! * [`cat`] — finite categories, groupoids and functors presented by tables;
//! * [`ctx`] — context towers of split groupoid families and their
//!   morphisms, with Π/Σ/Id formers;
//! * [`model`] — the two executable contextual models (finite-set families
//!   and finite-groupoid families) and their validators;
//! * [`fib`] — fibration-category structure on the models and their slices;
//! * [`simp`] — dimension-truncated simplicial sets and their combinatorics;
//! * [`dcat`] — inverse categories of simplices, subdivisions, matching
//!   categories;
//! * [`frames`] — Reedy-fibrant homotopical diagrams (frames) and the
//!   constructions on them;
//! * [`report`] — JSON report and certificate types shared by the CLI.

pub mod cat;
pub mod ctx;
pub mod fib;
pub mod frames;
pub mod gpd;
pub mod model;
pub mod report;
pub mod simp;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("validation failed: {0}")]
    Invalid(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
