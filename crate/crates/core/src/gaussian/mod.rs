//! Heralded Gaussian state preparation on truncated Fock spaces.

pub mod circuit;
pub mod gates;
pub mod optimize;
mod space;

pub use circuit::{
    fidelity, gaussian_stage, rectangular_mesh, report_parameters, run_circuit, run_circuit_at, CircuitReport,
    HeraldedOutput, MeshElement, MultimodeState, PhotonicCircuit, LEAKAGE_BUDGET, MAX_CUTOFF,
};
pub use gates::{displacement_row, gate_matrix, squeezed_vacuum, squeezing_db, Gate};
pub use optimize::{optimize_circuit, CircuitFit, CircuitOptions};
