//! Crate-wide error type. Variants are deliberately specific so that callers
//! (in particular the CLI) can emit diagnostics naming the offending value.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimension mismatch in {context}: {expected_height}x{expected_width} vs {actual_height}x{actual_width}")]
    DimensionMismatch {
        context: &'static str,
        expected_height: usize,
        expected_width: usize,
        actual_height: usize,
        actual_width: usize,
    },

    #[error("grid dimensions must be positive, got {height}x{width}")]
    EmptyGrid { height: usize, width: usize },

    #[error("polygon center ({row}, {col}) lies outside the {height}x{width} grid")]
    CenterOutsideGrid {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("pixel ({row}, {col}) lies outside the {height}x{width} grid")]
    PixelOutsideGrid {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
    },

    #[error("pixel ({row}, {col}) is not a member of the mask")]
    PixelOutsideMask { row: usize, col: usize },

    #[error("ray count must be at least 3, got {n_rays}")]
    TooFewRays { n_rays: usize },

    #[error("radii count {actual} does not match ray count {expected}")]
    RayCountMismatch { expected: usize, actual: usize },

    #[error("{what} must lie in [0, 1], got {value}")]
    ValueOutOfRange { what: &'static str, value: f64 },

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("{what} must be non-negative, got {value}")]
    NegativeValue { what: &'static str, value: f64 },

    #[error("include mask selects no pixels")]
    EmptyInclude,

    #[error("task uncertainty sigma must be positive and finite, got {value}")]
    NonPositiveSigma { value: f64 },

    #[error("candidate list is not sorted by descending score (violation at index {index})")]
    UnsortedCandidates { index: usize },

    #[error("label stack instance {index} is empty")]
    EmptyInstance { index: usize },

    #[error("input instances are not pairwise disjoint (first collision at pixel ({row}, {col}))")]
    InstancesNotDisjoint { row: usize, col: usize },

    #[error("matching threshold tau must lie in (0, 1), got {value}")]
    InvalidTau { value: f64 },

    #[error("invalid configuration: {message}")]
    InvalidConfig { message: String },

    #[error("overlap constraint unreachable: achieved fraction {achieved:.4} < required {required:.4} after {attempts} attempts")]
    ConstraintUnreachable {
        achieved: f64,
        required: f64,
        attempts: usize,
    },

    #[error("not an npy file: bad magic bytes")]
    NpyBadMagic,

    #[error("unsupported npy version {major}.{minor} (only 1.0 is supported)")]
    NpyUnsupportedVersion { major: u8, minor: u8 },

    #[error("malformed npy header: {message}")]
    NpyBadHeader { message: String },

    #[error("unsupported npy dtype {descr:?} (supported: |u1, <u2, <f4)")]
    NpyUnsupportedDtype { descr: String },

    #[error("npy file declares fortran_order=True; only C (row-major) order is supported")]
    NpyFortranOrder,

    #[error("npy payload length mismatch: expected {expected} bytes, found {actual}")]
    NpyPayloadLength { expected: usize, actual: usize },

    #[error("unsupported array rank {rank} for {context} (expected {expected})")]
    UnsupportedRank {
        rank: usize,
        context: &'static str,
        expected: &'static str,
    },

    #[error("unsupported array dtype for {context}: {message}")]
    UnsupportedArrayDtype {
        context: &'static str,
        message: String,
    },

    #[error("run-length encoding invalid: {message}")]
    InvalidRle { message: String },

    #[error("segmentation document invalid: {message}")]
    InvalidDocument { message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected_height: expected.0,
            expected_width: expected.1,
            actual_height: actual.0,
            actual_width: actual.1,
        }
    }
}
