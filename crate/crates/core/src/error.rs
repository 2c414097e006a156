use thiserror::Error;

use crate::setup::CompositionError;

/// Errors produced by the lattice laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A structurally invalid input: out-of-range site, backward time, zero state, etc.
    #[error("invalid input: {0}")]
    Structural(String),

    #[error(transparent)]
    Composition(#[from] CompositionError),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resource guard exceeded: {what} = {requested} > {limit}")]
    Resource {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    /// Two consecutive states of a curve coincide, so the arc-length density vanishes.
    #[error("degenerate curve: segment {segment} has zero length")]
    DegenerateCurve { segment: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
