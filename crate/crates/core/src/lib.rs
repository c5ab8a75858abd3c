//! Contraction certification toolkit for monotone and positive dynamical
//! systems under weighted p-norms.
//!
//! The crate is organized around a small set of primitives:
//!
//! * [`linalg`] — dense vectors/matrices, an in-house symmetric eigensolver,
//!   and structural predicates (Metzler, nonnegative).
//! * [`norm`] — weighted p-norm specifications ([`norm::NormSpec`]).
//! * [`pairings`] — weak pairings for the p,R norm family and numerical
//!   checks of their defining inequalities.
//! * [`measures`] — classical and conic matrix measures: closed forms,
//!   a sup estimator over the nonnegative orthant, and the definitional
//!   limit oracle.
//! * [`odesim`] — an adaptive Dormand–Prince integrator with dense output,
//!   plus empirical monotonicity/positivity checks and the conic Coppel
//!   bound verifier.
//! * [`certify`] — falsifiable sampling-based contraction checks that
//!   produce [`certify::Certificate`] values.
//! * [`models`] — built-in model families: Hopfield networks, separable
//!   systems, and comparison-system ISS machinery.
//! * [`acceptance`] — the self-test battery run by the CLI and the
//!   integration suite.
//!
//! All certification here is sampling/simulation based. A passing
//! certificate means "no violation found at the recorded samples", never a
//! formal proof.

pub mod acceptance;
pub mod certify;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod norm;
pub mod odesim;
pub mod pairings;
pub mod sampling;

pub use error::CoreError;
pub use linalg::{Matrix, Vector};
pub use norm::{NormSpec, PExp, Weight};
