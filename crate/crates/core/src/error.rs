//! Crate-wide error type.
//!
//! Errors are split along the boundaries the command-line driver cares
//! about: malformed input (shape/domain/grid problems) versus verification
//! failures discovered while checking mathematical invariants.

use thiserror::Error;

/// Everything that can go wrong outside of plain `panic!`-worthy bugs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        context: &'static str,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("generator images do not define a representation: {reason}")]
    NotARepresentation { reason: String },

    #[error("singular linear system: {context}")]
    SingularSystem { context: &'static str },

    #[error("generators span dimension {have}, but closing under {operation} reaches dimension {need}: not dense")]
    NotDense {
        have: usize,
        need: usize,
        operation: &'static str,
    },

    #[error("not a spectral decomposition of the ambient algebra: fiber dimensions sum to {fiber_sum}, stacked rank {rank}, ambient dimension {ambient}")]
    NotSpectralDecomposition {
        fiber_sum: usize,
        rank: usize,
        ambient: usize,
    },

    #[error("section value at character index {index} leaves its fiber (residual {residual:.3e})")]
    OutsideFiber { index: usize, residual: f64 },

    #[error("bundle axiom violated: {which} (residual {residual:.3e})")]
    AxiomViolation { which: &'static str, residual: f64 },

    #[error("dual action is only projectively implementable (commutator phase defect {defect:.3e}); no unitary representation exists")]
    ProjectiveObstruction { defect: f64 },

    #[error("map is not an equivariant *-homomorphism: {reason} (residual {residual:.3e})")]
    NotAMorphism { reason: String, residual: f64 },

    #[error("point {value} is not on the 1/{grid} grid")]
    OffGrid { value: String, grid: usize },

    #[error("{context}: need at least {need} samples, got {got}")]
    InsufficientSamples {
        context: &'static str,
        need: usize,
        got: usize,
    },

    #[error("argument step {step:.6} exceeds the half-turn bound; refine the sampling")]
    ArgumentStepTooLarge { step: f64 },

    #[error("zero sample encountered where a nonvanishing function is required")]
    ZeroSample,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported set expression: {0}")]
    UnsupportedSetExpression(String),

    #[error("verdict undecidable at this truncation depth: measure bracket [{lo}, {hi}] straddles the threshold; increase depth")]
    UndecidableAtDepth { lo: String, hi: String },

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
