//! The stochastic heat equation `dY = ΔY dt + dM^n`, `Y_0 = η^n`, solved in
//! mild form on the truncated Hermite basis.

mod driver;
mod initial;
mod mild;
mod report;

pub use driver::mn_dual_path;
pub use initial::{sample_initial, InitialCondition};
pub use mild::{
    loglog_slope, mild_solution, residual_refinement, weak_form_residual, HeatSolver,
    RefinementStudy,
};
pub use report::{
    heat_convergence_report, heat_reps, heat_run, null_calibration, HeatRep, HeatSettings,
    NullCalibration, Source, RESIDUAL_GATE_FACTOR,
};
