//! Machine verification of the non-compact quantum dilogarithm calculus and
//! the positive principal series representations of U_q(sl2) and U_q(sl3).
//!
//! The crate has three layers:
//!
//! * exact symbolic algebra of q-Weyl exponential monomials ([`symbolic`]),
//!   the representations built from them ([`reps`]), and a term-rewriting
//!   engine that replays operator-identity derivations step by step
//!   ([`rewrite`]);
//! * arbitrary-precision numerics for G_b and g_b ([`special`]) with contour
//!   quadrature ([`quad`]);
//! * an analytic engine that applies complex powers of generators to test
//!   functions and verifies the transcendental identities -- the generalized
//!   Kac identity, the eigenfunction property, and the Kashaev-transform
//!   isometry ([`analytic`]).
//!
//! Every check produces an [`report::IdentityReport`]; the `qgv` binary and
//! the examples drive the suites in [`suites`].

pub mod analytic;
pub mod cx;
pub mod error;
pub mod modular;
pub mod pointwise;
pub mod quad;
pub mod report;
pub mod reps;
pub mod sample;
pub mod rewrite;
pub mod scalar_checks;
pub mod special;
pub mod suites;
pub mod symbolic;

pub use cx::Cx;
pub use error::{Error, Result};
pub use modular::ModularParameter;
