pub mod bell;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod optimize;
pub mod povm;
pub mod qubit;
pub mod scalar;

pub use error::{Error, Result};
