//! Crate-wide error types.

use crate::special::LatticePoint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument is a G_b lattice point ({0:?})")]
    Pole(LatticePoint),

    #[error("argument within the refusal band of a G_b pole/zero ({0:?})")]
    NearSingular(LatticePoint),

    #[error("requested accuracy not attained: {0}")]
    Precision(String),

    #[error("argument outside the asymptotic regime: |Im z| = {0}, threshold {1}")]
    AsymptoticRegime(f64, f64),

    #[error("integrand does not decay on the contour: {0}")]
    NonDecaying(String),

    #[error("contour detour collides with a singularity near {0}")]
    DetourCollision(String),

    #[error("residue extraction did not converge (pole not simple?): {0}")]
    ResidueNonConvergent(String),

    #[error("rewrite side condition failed: {0}")]
    SideCondition(String),

    #[error("script replay failed at step {step}: {reason}")]
    ScriptStep { step: usize, reason: String },

    #[error("fixture parse error: {0}")]
    FixtureParse(String),

    #[error("non-nilpotent adjoint action in quadratic exponential")]
    NonNilpotent,

    #[error("unknown identifier: {0}")]
    Unknown(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
