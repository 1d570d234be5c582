use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::paths::ContainmentReport;

pub const REPORT_SCHEMA: &str = "nucleartight-report/1";

/// Self-describing run metadata. Thread counts are deliberately absent: they
/// never influence results and would break byte-identity across machines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub scenario: String,
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    /// The fully materialized configuration, defaults included.
    pub config: serde_json::Value,
}

/// Statistics for one `(n, φ, t)` combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub n: usize,
    pub phi: String,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qv_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qv_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qv_target: Option<f64>,
    /// Ensemble variance of the simulated value (Itô isometry check).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_se: Option<f64>,
    pub ks: f64,
    pub ks_critical: f64,
    pub ks_pvalue: f64,
    pub energy: f64,
    pub energy_se: f64,
    /// Set when `φ = 0`: the law is a point mass and the KS comparison is skipped.
    pub trivial: bool,
}

impl Cell {
    pub fn key(&self) -> CellKey {
        CellKey {
            n: self.n,
            phi: self.phi.clone(),
            t: self.t,
        }
    }

    fn statistics(&self) -> impl Iterator<Item = f64> + '_ {
        [
            self.t,
            self.ks,
            self.ks_critical,
            self.ks_pvalue,
            self.energy,
            self.energy_se,
        ]
        .into_iter()
        .chain(
            [
                self.qv_mean,
                self.qv_se,
                self.qv_target,
                self.variance,
                self.variance_se,
            ]
            .into_iter()
            .flatten(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub n: usize,
    pub phi: String,
    pub t: f64,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} phi={} t={}", self.n, self.phi, self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessEntry {
    pub n: usize,
    /// `"M"` for drivers, `"Y"` for heat-equation solutions; `"limit"` suffixes mark `n = ∞`.
    pub process: String,
    pub containment: ContainmentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub header: ReportHeader,
    pub complete: bool,
    pub missing: Vec<String>,
    pub cells: Vec<Cell>,
    pub tightness: Vec<TightnessEntry>,
    pub gates: Vec<Gate>,
}

/// Everything but the cells.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub header: ReportHeader,
    pub expected: Vec<CellKey>,
    pub tightness: Vec<TightnessEntry>,
    pub gates: Vec<Gate>,
}

/// Orders cells as `meta.expected`, flags absent ones, and rejects non-finite
/// statistics.
pub fn assemble_report(cells: Vec<Cell>, meta: ReportMeta) -> Result<ConvergenceReport> {
    if cells.is_empty() && meta.tightness.is_empty() {
        return Err(Error::IncompleteReport("no cells to report".into()));
    }
    if let Some(c) = cells
        .iter()
        .find(|c| c.statistics().any(|v| !v.is_finite()))
    {
        return Err(Error::NumericalIntegrity(format!(
            "non-finite statistic in cell {}",
            c.key()
        )));
    }
    for t in &meta.tightness {
        let c = &t.containment;
        let values = c
            .exceedance
            .iter()
            .chain(&c.levels)
            .chain(&c.deltas)
            .copied()
            .chain(
                c.modulus
                    .iter()
                    .flat_map(|q| [q.median, q.q90, q.q99, q.max]),
            )
            .chain([
                c.sup_norm.median,
                c.sup_norm.q90,
                c.sup_norm.q99,
                c.sup_norm.max,
            ]);
        if values.clone().any(|v| !v.is_finite()) {
            return Err(Error::NumericalIntegrity(format!(
                "non-finite tightness statistic for n={} {}",
                t.n, t.process
            )));
        }
    }

    let mut ordered = Vec::with_capacity(cells.len());
    let mut missing = Vec::new();
    let mut remaining = cells;
    for key in &meta.expected {
        match remaining.iter().position(|c| c.key() == *key) {
            Some(i) => ordered.push(remaining.remove(i)),
            None => missing.push(key.to_string()),
        }
    }
    // cells that were not announced are kept, after the expected ones
    ordered.extend(remaining);

    Ok(ConvergenceReport {
        schema: REPORT_SCHEMA.to_string(),
        header: meta.header,
        complete: missing.is_empty(),
        missing,
        cells: ordered,
        tightness: meta.tightness,
        gates: meta.gates,
    })
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::invalid(format!(
                "unknown report schema `{}`",
                r.schema
            )));
        }
        Ok(r)
    }

    /// SHA-256 of the serialized report.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }

    pub fn gates_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
