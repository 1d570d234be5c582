//! Two-sample statistics and report assembly.

mod energy;
mod ks;
mod report;
mod tables;

pub use energy::{energy_distance, EnergyDistance};
pub use ks::{
    kolmogorov_survival, ks_one_sample, ks_two_sample, standard_normal_cdf, KsOutcome, KS_C_01,
    KS_C_05,
};
pub use report::{
    assemble_report, sha256_hex, Cell, CellKey, ConvergenceReport, Gate, ReportHeader, ReportMeta,
    TightnessEntry, REPORT_SCHEMA,
};
pub use tables::{RunOutput, SampleTable};
