//! Fock-basis numerics shared by the measurement, Bell and circuit layers.

pub mod hermite;
pub mod linalg;

pub use hermite::{wavefunction, wavefunctions};
pub use linalg::{
    hermitian_eigensystem, project_subspace, tensor, BipartiteState, Eigensystem, FockVector, HermitianOperator,
    StateRecord,
};
