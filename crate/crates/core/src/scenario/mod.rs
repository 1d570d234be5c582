//! Batch front door: scenario configs in, report JSON and CSV samples out.

mod commands;
mod config;

pub use commands::{
    clt_settings, default_out_dir, heat_settings, q99_spread, run_basis_check, run_clt,
    run_command, run_config, run_file, run_heat, run_tightness, BasisCheckReport, CommandOutput,
    ExitStatus,
};
pub use config::{CalibrationConfig, Command, Overrides, PhiEntry, ScenarioConfig};
