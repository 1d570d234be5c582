use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{BasisSpec, DualElement};
use crate::rng::StreamKey;

/// Law of the initial condition `η`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Zero,
    /// Deterministic coefficients; missing trailing entries are zero.
    Fixed { coeffs: Vec<f64> },
    /// Independent coefficients `η_k ~ N(0, scale² (2k+1)^{-2r})`.
    Gaussian { r: f64, scale: f64 },
}

impl InitialCondition {
    pub fn validate(&self, basis: BasisSpec) -> Result<()> {
        match self {
            InitialCondition::Zero => Ok(()),
            InitialCondition::Fixed { coeffs } => {
                if coeffs.len() > basis.n {
                    return Err(Error::invalid(format!(
                        "{} fixed coefficients exceed basis size {}",
                        coeffs.len(),
                        basis.n
                    )));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("fixed coefficients must be finite"));
                }
                Ok(())
            }
            InitialCondition::Gaussian { r, scale } => {
                if !(r.is_finite() && *r > 0.5) {
                    return Err(Error::invalid(format!(
                        "gaussian initial condition needs r > 1/2 (got {r}); otherwise the dual norm is not summable"
                    )));
                }
                if !(scale.is_finite() && *scale >= 0.0) {
                    return Err(Error::invalid(format!(
                        "gaussian scale must be >= 0, got {scale}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, InitialCondition::Gaussian { .. })
    }
}

/// One draw of `η`. Callers pass a key whose purpose differs from every
/// driver stream, which makes `η` independent of the driver.
pub fn sample_initial(
    kind: &InitialCondition,
    basis: BasisSpec,
    key: StreamKey,
) -> Result<DualElement> {
    kind.validate(basis)?;
    match kind {
        InitialCondition::Zero => Ok(DualElement::zero(basis)),
        InitialCondition::Fixed { coeffs } => {
            let mut c = coeffs.clone();
            c.resize(basis.n, 0.0);
            DualElement::new(basis, c)
        }
        InitialCondition::Gaussian { r, scale } => {
            let mut rng = key.rng();
            let c = (0..basis.n)
                .map(|k| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    scale * (2.0 * k as f64 + 1.0).powf(-r) * z
                })
                .collect();
            DualElement::new(basis, c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{dual_norm, SeminormIndex};
    use crate::rng::Purpose;
    use crate::stats;

    #[test]
    fn zero_and_fixed() {
        let spec = BasisSpec::new(4).unwrap();
        let key = StreamKey::new(0, Purpose::InitialCondition, 0);
        assert_eq!(
            sample_initial(&InitialCondition::Zero, spec, key).unwrap(),
            DualElement::zero(spec)
        );
        let f = InitialCondition::Fixed {
            coeffs: vec![0.1, 1.0 / 3.0],
        };
        let e = sample_initial(&f, spec, key).unwrap();
        assert_eq!(e.coeffs(), &[0.1, 1.0 / 3.0, 0.0, 0.0]);
        let long = InitialCondition::Fixed {
            coeffs: vec![1.0; 5],
        };
        assert!(sample_initial(&long, spec, key).is_err());
    }

    #[test]
    fn fixed_roundtrips_bit_exactly() {
        let f = InitialCondition::Fixed {
            coeffs: vec![0.1, std::f64::consts::PI, -1e-300, 1.0 / 7.0],
        };
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<InitialCondition>(&json).unwrap(), f);
    }

    #[test]
    fn rough_gaussian_rejected() {
        let spec = BasisSpec::new(4).unwrap();
        let key = StreamKey::new(0, Purpose::InitialCondition, 0);
        for r in [0.5, 0.2, f64::NAN] {
            let g = InitialCondition::Gaussian { r, scale: 1.0 };
            assert!(sample_initial(&g, spec, key).is_err());
        }
    }

    #[test]
    fn gaussian_second_moment_matches_series() {
        let spec = BasisSpec::new(64).unwrap();
        let g = InitialCondition::Gaussian { r: 1.0, scale: 1.0 };
        let r1 = SeminormIndex::new(1.0).unwrap();
        let sq: Vec<f64> = (0..5000)
            .map(|m| {
                let e = sample_initial(&g, spec, StreamKey::new(3, Purpose::InitialCondition, m))
                    .unwrap();
                dual_norm(&e, r1).powi(2)
            })
            .collect();
        let partial: f64 = (0..64).map(|k| (2.0 * k as f64 + 1.0).powi(-4)).sum();
        assert!((partial - std::f64::consts::PI.powi(4) / 96.0).abs() < 1e-5);
        let mean = stats::mean(&sq);
        assert!((mean - partial).abs() < 3.0 * stats::std_error_of_mean(&sq));
    }
}
