//! Parameter-shift differentiation for unitaries with arbitrary Hermitian
//! generators: spectral analysis, shift rules, a statevector simulator and
//! shot-noise analysis.

pub mod error;
pub mod gates;
pub mod io;
pub mod linalg;
pub mod rules;
pub mod sampling;
pub mod sim;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use rules::{RuleMethod, ShiftRule, ShiftTerm};
pub use sim::{Circuit, CircuitSpec, StateVector};
pub use spectral::{GapSet, HermitianOperator, PauliTerm, Spectrum};
