//! The particle martingales `M^n_t(φ) = n^{-1/2} Σ_i ∫₀ᵗ φ'(B^i_s) dB^i_s`,
//! their quadratic variations, and the Gaussian limit `M⁰`.

mod clt;
mod limit;
mod particles;
mod variance;

pub use clt::{
    clt_report, clt_run, coord_label, limit_fdd_sample, limit_seed, martingale_fdd_sample,
    particle_seed, run_martingale_reps, CltSettings, LabeledFunction, RepOutcome,
    TightnessSettings,
};
pub use limit::{covariance_sqrt, simulate_limit, LimitSampler, INTEGRITY_TOLERANCE};
pub use particles::{
    ito_sums, mn_scalar_path, quadratic_variation_path, simulate_particles, ItoSums,
    ParticleEnsemble,
};
pub use variance::{cross_covariance, limit_variance, QuadraticForm};
