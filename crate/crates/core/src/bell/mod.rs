//! Bell operators built from binned homodyne observables.

pub mod inequality;
pub mod operator;

pub use inequality::Inequality;
pub use operator::{
    assemble, assemble_from_observables, energy_conserving_basis, local_observables, local_subspace_basis, score,
    top_of_operator, BellScenario, BellScore,
};
