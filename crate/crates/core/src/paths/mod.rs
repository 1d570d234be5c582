//! Grid paths in `C_T(R)` and in the truncated dual `C_T(Φ')`.

mod csv;
mod grid;
mod modulus;

pub use csv::{read_dual_csv, read_scalar_csv, write_dual_csv, write_scalar_csv};
pub use grid::{DualPath, DualPathEnsemble, ScalarPath, ScalarPathEnsemble, TimeGrid};
pub use modulus::{
    compact_containment_report, containment_from_stats, modulus_dual, modulus_dual_curve,
    modulus_testfn, path_tightness, scalar_modulus, sup_dual_norm, ContainmentReport,
    PathTightness, QuantileSummary,
};
