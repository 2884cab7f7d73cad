use thiserror::Error;

use crate::lattice::LatticePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice basis is singular (|det| = {det:e})")]
    SingularBasis { det: f64 },

    #[error("matrix is not in SL(2,R): det = {det}")]
    NotSpecialLinear { det: f64 },

    #[error("segment {start:?} -> {end:?} has zero length")]
    DegenerateSegment { start: LatticePoint, end: LatticePoint },

    #[error("segment {start:?} -> {end:?} contains interior lattice points")]
    SegmentHasInteriorLatticePoint { start: LatticePoint, end: LatticePoint },

    #[error("cycle is self-intersecting")]
    SelfIntersection,

    #[error("boundary cycles {0} and {1} touch or intersect")]
    TouchingCycles(usize, usize),

    #[error("cycle is not closed: {0}")]
    OpenCycle(String),

    #[error("cycle nesting is invalid: {0}")]
    WrongNesting(String),

    #[error("parameter violation: {0}")]
    ParameterViolation(String),

    #[error("quadrature did not converge (last change {change:e})")]
    QuadratureNonConvergence { change: f64 },

    #[error("condition Phi could not be certified: tail {tail:e} > tol {tol:e} at radius {radius}")]
    ConditionPhiDivergence { radius: f64, tail: f64, tol: f64 },

    #[error("kernel table carries no condition-Phi certificate")]
    ConditionPhiUncertified,

    #[error("window does not generate a frame: smallest frame-operator eigenvalue {min_eigenvalue:e}")]
    NotAFrame { min_eigenvalue: f64 },

    #[error("discretization too coarse: tightness residual {deviation:e} exceeds {tol:e}")]
    DiscretizationTooCoarse { deviation: f64, tol: f64 },

    #[error("grid incompatible with lattice: {0}")]
    GridIncompatible(String),

    #[error("grid aliasing: {0}")]
    GridAliasing(String),

    #[error("operation requires a rectangular lattice aZ x bZ")]
    UnsupportedLattice,

    #[error("window is not certified tight on this lattice")]
    NotTight,

    #[error("truncation error {error:e} exceeds requested tolerance {tol:e}")]
    TailTooLarge { error: f64, tol: f64 },

    #[error("matrix of size {size} exceeds cap {cap}")]
    MatrixTooLarge { size: usize, cap: usize },

    #[error("kernel table has no phase information")]
    PhasesUnavailable,

    #[error("kernel table and domain live on different lattices")]
    LatticeMismatch,

    #[error("({m}, {n}) are not coprime")]
    NotCoprime { m: i64, n: i64 },

    #[error("slope pair ({m}, {n}) outside n >= m >= 0, n > 0")]
    BadRange { m: i64, n: i64 },

    #[error("symbol value {value} at {point:?} outside [0, 1]")]
    InvalidSymbol { point: LatticePoint, value: f64 },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
