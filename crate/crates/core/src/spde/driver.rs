use crate::error::Result;
use crate::hermite::BasisSpec;
use crate::martingale::{ito_sums, ParticleEnsemble};
use crate::paths::DualPath;

/// Coordinates `M^n_t(h_k)`, `k < N`, of the driving martingale, all from the
/// same particle realization.
pub fn mn_dual_path(particles: &ParticleEnsemble, basis: BasisSpec) -> Result<DualPath> {
    let sums = ito_sums(particles, basis, &[], true)?;
    Ok(sums.dual.expect("dual path requested"))
}
