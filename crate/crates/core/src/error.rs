use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator is not Hermitian (max |A_ij - conj(A_ji)| = {defect:.3e})")]
    NonHermitianInput { defect: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    ConvergenceFailure { sweeps: usize, off_norm: f64 },

    #[error("spectrum is fully degenerate: no non-zero gaps, derivative vanishes identically")]
    EmptyGapSet,

    #[error("could not find a well-conditioned shift set after {attempts} attempts")]
    ShiftSelectionFailure { attempts: usize },

    #[error("singular shift system: {0}")]
    SingularSystem(String),

    #[error("singular shift: sin(shift * gap / 2) vanishes for shift {shift}, gap {gap}")]
    SingularShift { shift: f64, gap: f64 },

    #[error("singular shift pair ({0}, {1}): closed-form denominator vanishes")]
    SingularShiftPair(f64, f64),

    #[error("singular stencil {0:?}: closed-form denominator vanishes")]
    SingularStencil(Vec<f64>),

    #[error("degenerate stencil: shifts {0} and {1} coincide modulo the gap period")]
    DegenerateStencil(f64, f64),

    #[error("insufficient stencils: {needed} shifts required, {given} given")]
    InsufficientStencils { needed: usize, given: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("generator gaps {missing:?} are not covered by the rule gaps")]
    GapMismatch { missing: Vec<f64> },

    #[error("invalid Pauli character {0:?}")]
    InvalidPauliCharacter(char),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
    }
}
