//! Binned homodyne measurements in the Fock basis, and photon loss.

pub mod integrals;
pub mod interval;
pub mod loss;
pub mod setting;

pub use integrals::{cell_matrix, quadrature_cell_integral};
pub use interval::IntervalSet;
pub use loss::{apply_loss, LossKernel, LossModel};
pub use setting::{observable, observable_from_cells, povm_element, reduce_angle, HomodyneSetting, Outcome};
