use std::io::Write;

use serde::{Deserialize, Serialize};

/// Raw Monte Carlo values behind one group of report cells, one row per
/// repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    /// CSV with a leading `rep` column.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        write!(out, "rep")?;
        for c in &self.columns {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
        for (m, row) in self.rows.iter().enumerate() {
            write!(out, "{m}")?;
            for v in row {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// A report plus the samples it was computed from.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: super::ConvergenceReport,
    pub tables: Vec<SampleTable>,
}
