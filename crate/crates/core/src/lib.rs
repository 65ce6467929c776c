//! Two-qubit and qubit-qutrit density matrices, entanglement measures,
//! entanglement-preserving unitary (EPU) conversion to X states, and the
//! true-generalized X (TGX) element masks for arbitrary subsystem dimensions.

pub mod epuconv;
pub mod error;
pub mod matcore;
pub mod measures;
pub mod qstates;
pub mod rng;
pub mod tgx;

pub use error::{Error, Result};
pub use matcore::{CMatrix, C64};
pub use qstates::DensityMatrix;
