//! Counterterm distributions on configuration-space diagonals for a
//! Euclidean Gaussian scalar theory, together with the scaling group
//! `U* = U ⋊ G_m` acting on the space of counterterm coordinates.
//!
//! Module map:
//!
//! * [`combinatorics`]: subsets as bitmasks, zeta/Möbius transforms on the
//!   Boolean lattice, multi-indices, perfect matchings.
//! * [`distributions`]: kernels, test functions, quadrature, scaling degree
//!   and Taylor-subtraction extension.
//! * [`wick`]: Wick expansion of time-ordered products of normal-ordered
//!   monomials, vacuum moments, axiom checks and 0-dimensional Dyson terms.
//! * [`deformation`]: sparse coordinate points `b^α_{J,I}`, shifts,
//!   filtration levels and embeddings.
//! * [`group`]: the scaling matrices, their generator, the grading,
//!   the truncated free graded Lie algebra and the semidirect product.
//! * [`report`]: claim verdicts and golden verdict files.
//!
//! Exact arithmetic uses [`Scalar`] (arbitrary precision rationals).
//! Floating-point work is confined to quadrature and regression.

pub mod combinatorics;
pub mod deformation;
pub mod distributions;
pub mod error;
pub mod exec;
pub mod group;
pub mod rational;
pub mod report;
pub mod wick;

pub use error::{Error, Result};
pub use rational::Scalar;
