//! Numerical tolerances used across the crate, with the reasoning pinned
//! down in one place.
//!
//! Two regimes appear throughout:
//!
//! * *Exactly representable data* (roots of unity, permutation matrices,
//!   small integer matrices): identities hold to a few ulps and are checked
//!   at `EXACT`-grade tolerances.
//! * *Constructed data* (random unitaries from QR, Gram–Schmidt bases,
//!   eigensolver output): each factor is accurate to ~1e-14; compositions
//!   of a few dozen operations justify the 1e-8 .. 1e-9 grades below.

/// Equality of quantities that are exact up to a handful of floating
/// operations (e.g. sums of roots of unity at desk scale).
pub const EXACT: f64 = 1e-12;

/// Default tolerance for identities between constructed operators
/// (Fourier coefficient identities, covariance, bundle axioms).
pub const IDENTITY: f64 = 1e-9;

/// Membership of a matrix in an exactly-constructed span: residual after
/// projection, relative to max(1, Frobenius norm of the candidate).
pub const MEMBERSHIP: f64 = 1e-8;

/// Rank decisions: singular values / Gram–Schmidt column norms below
/// `RANK_REL` times the largest input norm are treated as zero.
pub const RANK_REL: f64 = 1e-9;

/// Relative accuracy of `operator_norm` (largest singular value).
pub const OPNORM_REL: f64 = 1e-9;

/// Residual bound for least-squares witnesses that are exactly solvable
/// in infinite precision (crossed-product witness recovery).
pub const WITNESS_RESIDUAL: f64 = 1e-8;

/// Norm bound slack for maps that are contractions in exact arithmetic.
pub const CONTRACTION_SLACK: f64 = 1e-8;

/// Elementwise commutativity of fibers of a bundle over a commutative
/// algebra (permutation actions: data is exact, sums are short).
pub const COMMUTATIVITY: f64 = 1e-9;
