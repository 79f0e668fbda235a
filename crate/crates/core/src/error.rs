//! Error type shared by every module in the crate.
//!
//! The enum distinguishes the failure modes that callers are expected to
//! branch on: domain violations that a driver treats as bad input
//! (`InvalidParameter`, `DimensionMismatch`, …) versus the structural
//! failures that the constructions are designed to *detect*
//! (`TubularViolation`, `IllConditionedDegree`).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A vector that should lie on (or near) the unit sphere does not.
    #[error("point off the unit sphere: |v| = {norm:.17}, deviation {dev:.3e} exceeds {tol:.1e}")]
    OffManifold { norm: f64, dev: f64, tol: f64 },

    /// Stereographic chart evaluated at (or too close to) the north pole.
    #[error("stereographic chart undefined at the north pole (chordal distance {dist:.3e} < {tol:.1e})")]
    AtPole { dist: f64, tol: f64 },

    /// A value left the tubular neighborhood on which the nearest-point
    /// projection to the target is defined. `node` is the worst offender
    /// (`usize::MAX` when no node index applies).
    #[error("value at node {node} outside the tubular neighborhood: distance {dist:.6} ≥ radius {radius}")]
    TubularViolation { node: usize, dist: f64, radius: f64 },

    /// Pair kernel evaluated at a non-positive distance.
    #[error("kernel singularity: pair distance {0:.3e} is not positive")]
    KernelSingularity(f64),

    /// Gradient formulas require p ≥ 2 (|·|^{p−2} continuous at 0).
    #[error("energy gradient requires p ≥ 2, got p = {0}")]
    UnsupportedExponent(f64),

    /// Consecutive node values are (numerically) antipodal, so the discrete
    /// degree is not well defined: the field is too coarse for its variation.
    #[error("degree ill-conditioned: values at nodes {i} and {j} are antipodal (chordal gap {gap:.9})")]
    IllConditionedDegree { i: usize, j: usize, gap: f64 },

    /// Two objects that must live on the same mesh / in the same ambient
    /// dimension do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The mesh cannot resolve the requested construction.
    #[error("mesh too coarse: {0}")]
    ResolutionTooCoarse(String),

    /// Degenerate direction pair θ = ω in the double-integral bound.
    #[error("degenerate direction: |θ − ω| = {0:.3e} (bound blows up as θ → ω)")]
    DegenerateDirection(f64),

    /// Any other precondition violation, described in plain words.
    #[error("{0}")]
    InvalidParameter(String),

    /// A field file failed validation on load.
    #[error("field file invalid: {0}")]
    InvalidFieldFile(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Convenience constructor for `InvalidParameter`.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
