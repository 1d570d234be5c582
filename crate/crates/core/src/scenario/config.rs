//! Scenario configuration: a single JSON document, resolved per command into
//! a fully materialized settings record.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::sha256_hex;
use crate::error::{Error, Result};
use crate::hermite::{BasisSpec, SeminormIndex, TestFunction};
use crate::martingale::{LabeledFunction, TightnessSettings};
use crate::paths::TimeGrid;
use crate::spde::{InitialCondition, RESIDUAL_GATE_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BasisCheck,
    Clt,
    Heat,
    Tightness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BasisCheck => "basis-check",
            Command::Clt => "clt",
            Command::Heat => "heat",
            Command::Tightness => "tightness",
        }
    }

    fn default_basis(self) -> BasisSpec {
        match self {
            Command::BasisCheck | Command::Clt => BasisSpec::default(),
            Command::Heat | Command::Tightness => BasisSpec::new(16).expect("valid basis"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "Q")]
    q: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "J")]
    steps: usize,
}

/// A test function given by its leading Hermite coefficients, optionally named.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum RawPhi {
    Coeffs(Vec<f64>),
    Labeled { label: String, coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub outer: usize,
    pub reps: usize,
}

/// The document as written; every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    basis: Option<RawBasis>,
    grid: Option<RawGrid>,
    n_list: Option<Vec<usize>>,
    reps: Option<usize>,
    eta: Option<InitialCondition>,
    eta_by_n: Option<BTreeMap<usize, InitialCondition>>,
    phi_list: Option<Vec<RawPhi>>,
    times: Option<Vec<f64>>,
    seed: Option<u64>,
    threads: Option<usize>,
    r: Option<f64>,
    c_levels: Option<Vec<f64>>,
    deltas: Option<Vec<f64>>,
    tightness: Option<bool>,
    residual_factor: Option<f64>,
    calibration: Option<CalibrationConfig>,
}

/// Function entry of a resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiEntry {
    pub label: String,
    pub coeffs: Vec<f64>,
}

/// Resolved configuration; this is what the report header embeds.
///
/// The thread hint is kept out of the serialized form so reports do not
/// depend on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub command: Command,
    pub basis: BasisSpec,
    pub grid: TimeGrid,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub eta: InitialCondition,
    pub eta_by_n: BTreeMap<usize, InitialCondition>,
    pub phi_list: Vec<PhiEntry>,
    pub times: Vec<f64>,
    pub seed: u64,
    pub r: f64,
    pub c_levels: Vec<f64>,
    pub deltas: Vec<f64>,
    pub tightness: bool,
    pub residual_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationConfig>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Overrides applied on top of the file (command-line flags).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub scenario: Option<String>,
}

fn parse_raw(text: &str) -> Result<RawConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path == "." {
            "<document>".to_string()
        } else {
            path
        };
        Error::config(
            field,
            format!("{inner} (line {}, column {})", inner.line(), inner.column()),
        )
    })
}

/// Label for a coefficient vector: `h3`, `h0+h2`, `0`, or `phi{i}`.
fn default_label(coeffs: &[f64], index: usize) -> String {
    let nonzero: Vec<(usize, f64)> = coeffs
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, c)| *c != 0.0)
        .collect();
    if nonzero.is_empty() {
        return "0".into();
    }
    if nonzero.iter().all(|(_, c)| *c == 1.0) {
        return nonzero
            .iter()
            .map(|(k, _)| format!("h{k}"))
            .collect::<Vec<_>>()
            .join("+");
    }
    format!("phi{index}")
}

fn check<T>(field: &str, ok: bool, value: T, msg: impl FnOnce() -> String) -> Result<T> {
    if ok {
        Ok(value)
    } else {
        Err(Error::config(field, msg()))
    }
}

fn positive_list(field: &str, v: Vec<f64>) -> Result<Vec<f64>> {
    let ok = !v.is_empty() && v.iter().all(|x| x.is_finite() && *x > 0.0);
    check(field, ok, v, || {
        "must be a nonempty list of positive numbers".into()
    })
}

impl ScenarioConfig {
    /// Parses and resolves `text` for `command`. Errors name the offending
    /// field; syntax errors carry line and column.
    pub fn parse(text: &str, command: Command, overrides: &Overrides) -> Result<Self> {
        let raw = parse_raw(text)?;
        Self::resolve(raw, command, overrides)
    }

    /// The configuration with every default materialized.
    pub fn defaults(command: Command) -> Self {
        Self::resolve(RawConfig::default(), command, &Overrides::default())
            .expect("defaults are valid")
    }

    fn resolve(raw: RawConfig, command: Command, ov: &Overrides) -> Result<Self> {
        let basis = match raw.basis {
            None => command.default_basis(),
            Some(b) => {
                let q = b.q.unwrap_or(2 * b.n);
                BasisSpec::with_quadrature(b.n, q).map_err(|e| Error::config("basis", strip(e)))?
            }
        };
        let grid = match raw.grid {
            None => TimeGrid::new(1.0, 1000)?,
            Some(g) => {
                TimeGrid::new(g.horizon, g.steps).map_err(|e| Error::config("grid", strip(e)))?
            }
        };
        let n_list = raw.n_list.unwrap_or_else(|| vec![10, 40, 160]);
        let n_list = check(
            "n_list",
            !n_list.is_empty() && !n_list.contains(&0),
            n_list,
            || "must be a nonempty list of positive particle counts".into(),
        )?;
        let reps = raw.reps.unwrap_or(2000);
        let reps = check("reps", reps >= 2, reps, || {
            "needs at least 2 repetitions".into()
        })?;

        let eta = raw.eta.unwrap_or_default();
        eta.validate(basis)
            .map_err(|e| Error::config("eta", strip(e)))?;
        let eta_by_n = raw.eta_by_n.unwrap_or_default();
        for (n, e) in &eta_by_n {
            e.validate(basis)
                .map_err(|err| Error::config(format!("eta_by_n.{n}"), strip(err)))?;
        }

        let phi_raw = raw
            .phi_list
            .unwrap_or_else(|| vec![RawPhi::Coeffs(vec![1.0]), RawPhi::Coeffs(vec![0.0, 1.0])]);
        if phi_raw.is_empty() {
            return Err(Error::config("phi_list", "must not be empty"));
        }
        let mut phi_list = Vec::with_capacity(phi_raw.len());
        for (i, p) in phi_raw.into_iter().enumerate() {
            let (label, coeffs) = match p {
                RawPhi::Coeffs(c) => (default_label(&c, i), c),
                RawPhi::Labeled { label, coeffs } => (label, coeffs),
            };
            TestFunction::from_leading(basis, &coeffs)
                .map_err(|e| Error::config(format!("phi_list[{i}]"), strip(e)))?;
            if phi_list.iter().any(|p: &PhiEntry| p.label == label) {
                return Err(Error::config(
                    format!("phi_list[{i}]"),
                    format!("duplicate label `{label}`"),
                ));
            }
            phi_list.push(PhiEntry { label, coeffs });
        }

        let times = raw
            .times
            .unwrap_or_else(|| vec![0.5 * grid.horizon(), grid.horizon()]);
        if times.is_empty() {
            return Err(Error::config("times", "must not be empty"));
        }
        for (i, &t) in times.iter().enumerate() {
            grid.index_of(t)
                .map_err(|e| Error::config(format!("times[{i}]"), strip(e)))?;
        }

        let r = raw.r.unwrap_or(1.0);
        SeminormIndex::new(r).map_err(|e| Error::config("r", strip(e)))?;
        let c_levels = positive_list(
            "c_levels",
            raw.c_levels.unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]),
        )?;
        let deltas = positive_list(
            "deltas",
            raw.deltas.unwrap_or_else(|| {
                vec![0.01, 0.05, 0.1, 0.25, 0.5]
                    .into_iter()
                    .map(|d| d * grid.horizon())
                    .collect()
            }),
        )?;
        for (i, &d) in deltas.iter().enumerate() {
            grid.lag_for(d)
                .map_err(|e| Error::config(format!("deltas[{i}]"), strip(e)))?;
        }
        let residual_factor = raw.residual_factor.unwrap_or(RESIDUAL_GATE_FACTOR);
        let residual_factor = check(
            "residual_factor",
            residual_factor.is_finite() && residual_factor > 0.0,
            residual_factor,
            || "must be positive".into(),
        )?;
        if let Some(c) = raw.calibration {
            if c.outer == 0 || c.reps < 2 {
                return Err(Error::config(
                    "calibration",
                    "needs outer >= 1 and reps >= 2",
                ));
            }
        }
        let threads = ov.threads.or(raw.threads);
        if threads == Some(0) {
            return Err(Error::config("threads", "must be >= 1"));
        }

        Ok(Self {
            scenario: ov
                .scenario
                .clone()
                .or(raw.scenario)
                .unwrap_or_else(|| command.name().to_string()),
            command,
            basis,
            grid,
            n_list,
            reps,
            eta,
            eta_by_n,
            phi_list,
            times,
            seed: ov.seed.or(raw.seed).unwrap_or(0),
            r,
            c_levels,
            deltas,
            tightness: raw.tightness.unwrap_or(command != Command::Clt),
            residual_factor,
            calibration: raw.calibration,
            threads,
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn functions(&self) -> Vec<LabeledFunction> {
        self.phi_list
            .iter()
            .map(|p| {
                let f = TestFunction::from_leading(self.basis, &p.coeffs)
                    .expect("validated at parse time");
                LabeledFunction::new(p.label.clone(), f)
            })
            .collect()
    }

    pub fn tightness_settings(&self) -> TightnessSettings {
        TightnessSettings {
            r: SeminormIndex::new(self.r).expect("validated at parse time"),
            levels: self.c_levels.clone(),
            deltas: self.deltas.clone(),
        }
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidInput(m) => m,
        other => other.to_string(),
    }
}
