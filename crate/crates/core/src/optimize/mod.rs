//! Outer maximization of Bell scores over quadrature angles and bins.

pub mod driver;
pub mod objective;
pub mod params;
pub mod studies;

pub use driver::{maximize_score, LocalMethod, OptimizationReport, OptimizeOptions};
pub use objective::{evaluate_params, Evaluation, ScoreProblem};
pub use params::{Layout, ParameterVector, ShareMode};
pub use studies::{
    dimension_sweep, efficiency_sweep, efficiency_threshold, energy_conserving_check, fixed_state_problem,
    maximize_with_bin_growth, EfficiencyPoint, EnergyPoint, SweepPoint, ThresholdResult, BIN_CAP,
};
