//! Spectral decomposition of finite abelian group actions on matrix
//! algebras, with desk-scale laboratories for the phenomena that only appear
//! at infinite scale.
//!
//! The crate is organized bottom-up:
//!
//! * [`linalg`] — dense complex matrices, spans, eigensolver, operator norm;
//! * [`group`] — finite abelian groups, characters, scalar Fourier pair;
//! * [`action`] — unitary actions on matrix algebras: spectral subspaces,
//!   Fourier coefficient operators, square-integrability diagnostics, the
//!   crossed-product representation and its witnesses;
//! * [`bundle`] — graded decompositions ("bundles") over the dual group:
//!   construction from an action plus a dense subspace, section algebra,
//!   integration back to the algebra, and round trips in both directions;
//! * [`arcs`] — exact rational arc sets on the circle;
//! * [`torus`] — grid models over the circle/torus where the
//!   square-integrable theory is genuinely sensitive to the choice of dense
//!   subspace: symbol calculus, summability checks, line-bundle invariants;
//! * [`multiplicity`] — exact measure bookkeeping deciding when a
//!   multiplicity function admits a continuous decomposition;
//! * [`proper`] — finite models of proper actions and translation windows;
//! * [`random`] — seeded random instance generators shared by tests and the
//!   command-line driver;
//! * [`jsonio`] — JSON encodings of the core types.
//!
//! A note on topologies: at matrix scale the strict topology coincides with
//! the norm topology, so "strict continuity" plays no role in this crate;
//! all completeness assertions reduce to linear-span statements. The places
//! where the distinction matters in the large are exercised through the grid
//! models in [`torus`].

pub mod error;
pub mod tol;

pub mod linalg;

pub mod group;

pub mod action;
pub mod bundle;

pub mod arcs;
pub mod torus;

pub mod multiplicity;

pub mod proper;

pub mod random;

pub mod jsonio;
