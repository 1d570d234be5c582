use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::config::{Command, Overrides, ScenarioConfig};
use crate::diagnostics::{
    assemble_report, ConvergenceReport, Gate, ReportHeader, ReportMeta, RunOutput, SampleTable,
    TightnessEntry, REPORT_SCHEMA,
};
use crate::error::{Error, Result};
use crate::hermite::{
    derivative_op, heat_matrix, hs_norm, hs_tail_bound, laplacian_op, HermiteBasis, SeminormIndex,
    TestFunction,
};
use crate::martingale::{clt_run, run_martingale_reps, CltSettings};
use crate::paths::{containment_from_stats, PathTightness};
use crate::spde::{heat_reps, heat_run, null_calibration, HeatSettings, Source};

/// Process exit status for each outcome class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    GateFailure = 1,
    ConfigError = 2,
    NumericalIntegrity = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::NumericalIntegrity(_) | Error::IncompleteReport(_) => {
                ExitStatus::NumericalIntegrity
            }
            _ => ExitStatus::ConfigError,
        }
    }
}

/// Invariant checks on the truncated Hermite model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisCheckReport {
    pub schema: String,
    pub header: ReportHeader,
    pub checks: Vec<Gate>,
}

impl BasisCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|g| g.passed)
    }
}

/// Result of one command, ready to be written out.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub json: String,
    pub passed: bool,
    pub tables: Vec<SampleTable>,
}

impl CommandOutput {
    pub fn status(&self) -> ExitStatus {
        if self.passed {
            ExitStatus::Pass
        } else {
            ExitStatus::GateFailure
        }
    }

    /// Writes `OUT/report.json` and, if `dump_paths`, `OUT/cells/<table>.csv`.
    pub fn write(&self, out: &Path, dump_paths: bool) -> Result<()> {
        fs::create_dir_all(out)?;
        fs::write(out.join("report.json"), &self.json)?;
        if dump_paths {
            let cells = out.join("cells");
            fs::create_dir_all(&cells)?;
            for t in &self.tables {
                let mut f = std::io::BufWriter::new(fs::File::create(
                    cells.join(format!("{}.csv", t.name)),
                )?);
                t.write_csv(&mut f)?;
            }
        }
        Ok(())
    }
}

fn header(cfg: &ScenarioConfig) -> ReportHeader {
    ReportHeader {
        scenario: cfg.scenario.clone(),
        command: cfg.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash: cfg.hash(),
        config: cfg.to_value(),
    }
}

fn gate(name: &str, passed: bool, detail: String) -> Gate {
    Gate {
        name: name.into(),
        passed,
        detail,
    }
}

/// Runs `command` on config text inside a thread pool sized by the hint.
pub fn run_command(command: Command, text: &str, overrides: &Overrides) -> Result<CommandOutput> {
    let cfg = ScenarioConfig::parse(text, command, overrides)?;
    run_config(&cfg)
}

pub fn run_config(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| match cfg.command {
        Command::BasisCheck => run_basis_check(cfg),
        Command::Clt => run_clt(cfg),
        Command::Heat => run_heat(cfg),
        Command::Tightness => run_tightness(cfg),
    })
}

/// Reads the config file and derives the scenario name from its stem when
/// the document does not set one.
pub fn run_file(command: Command, path: &Path, overrides: &Overrides) -> Result<CommandOutput> {
    let text = fs::read_to_string(path)?;
    let mut ov = overrides.clone();
    if ov.scenario.is_none() && !text.contains("\"scenario\"") {
        ov.scenario = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    run_command(command, &text, &ov)
}

pub fn run_basis_check(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let spec = cfg.basis;
    let n = spec.n;
    let mut checks = Vec::new();

    let g = HermiteBasis::new(spec).gram_matrix();
    let gram_err = (g - DMatrix::<f64>::identity(n, n)).abs().max();
    checks.push(gate(
        "gram identity",
        gram_err <= 1e-10,
        format!("max |G - I| = {gram_err:e}"),
    ));

    let d = derivative_op(spec);
    let skew = &d + d.transpose();
    let skew_exact = skew.iter().all(|v| *v == 0.0);
    checks.push(gate(
        "derivative skew-symmetric",
        skew_exact,
        format!("max |D + D^T| = {:e}", skew.abs().max()),
    ));

    let lmax = SymmetricEigen::new(laplacian_op(spec)).eigenvalues.max();
    checks.push(gate(
        "laplacian negative semidefinite",
        lmax <= 1e-10,
        format!("largest eigenvalue {lmax:e}"),
    ));

    let e0 = heat_matrix(0.0, spec)?;
    checks.push(gate(
        "heat semigroup at zero",
        e0 == DMatrix::identity(n, n),
        "E(0) = I".into(),
    ));

    let (s, t) = (0.3, 0.2);
    let law = (heat_matrix(s, spec)? * heat_matrix(t, spec)? - heat_matrix(s + t, spec)?)
        .abs()
        .max();
    checks.push(gate(
        "semigroup law",
        law <= 1e-10,
        format!("max |E(s)E(t) - E(s+t)| = {law:e}"),
    ));

    let r = SeminormIndex::new(cfg.r)?;
    let s1 = SeminormIndex::new(cfg.r + 1.0)?;
    let hs = hs_norm(r, s1, n)?;
    let gap = std::f64::consts::PI.powi(2) / 8.0 - hs.squared();
    let bound = hs_tail_bound(r, s1, n);
    checks.push(gate(
        "hilbert-schmidt series",
        hs.converges && gap >= -1e-15 && gap <= bound,
        format!("pi^2/8 - partial sum = {gap:e}, remainder bound {bound:e}"),
    ));

    let phi = TestFunction::hermite(spec, 0);
    let coeff = phi.apply(&heat_matrix(0.5, spec)?).coeffs()[0];
    checks.push(gate(
        "heat flow contracts",
        coeff > 0.0 && coeff <= 1.0,
        format!("<E(0.5) h0, h0> = {coeff}"),
    ));

    let report = BasisCheckReport {
        schema: REPORT_SCHEMA.to_string(),
        header: header(cfg),
        checks,
    };
    Ok(CommandOutput {
        json: serde_json::to_string_pretty(&report)? + "\n",
        passed: report.passed(),
        tables: vec![],
    })
}

fn finish(out: RunOutput) -> CommandOutput {
    CommandOutput {
        json: out.report.to_json(),
        passed: out.report.gates_passed() && out.report.complete,
        tables: out.tables,
    }
}

pub fn clt_settings(cfg: &ScenarioConfig) -> CltSettings {
    CltSettings {
        basis: cfg.basis,
        grid: cfg.grid,
        n_list: cfg.n_list.clone(),
        functions: cfg.functions(),
        times: cfg.times.clone(),
        reps: cfg.reps,
        seed: cfg.seed,
        tightness: cfg.tightness.then(|| cfg.tightness_settings()),
    }
}

pub fn run_clt(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    Ok(finish(clt_run(&clt_settings(cfg), header(cfg))?))
}

pub fn heat_settings(cfg: &ScenarioConfig) -> HeatSettings {
    HeatSettings {
        basis: cfg.basis,
        grid: cfg.grid,
        n_list: cfg.n_list.clone(),
        eta: cfg.eta.clone(),
        eta_by_n: cfg.eta_by_n.clone(),
        functions: cfg.functions(),
        times: cfg.times.clone(),
        reps: cfg.reps,
        seed: cfg.seed,
        tightness: cfg.tightness.then(|| cfg.tightness_settings()),
        residual_factor: cfg.residual_factor,
    }
}

pub fn run_heat(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let mut out = heat_run(&heat_settings(cfg), header(cfg))?;
    if let Some(c) = cfg.calibration {
        let phi = cfg.functions().remove(0);
        let t = *cfg.times.last().expect("nonempty");
        let cal = null_calibration(
            cfg.basis,
            cfg.grid,
            &cfg.eta,
            &phi.function,
            t,
            c.reps,
            c.outer,
            cfg.seed,
        )?;
        out.report.gates.push(gate(
            "null calibration",
            cal.false_alarm_fraction <= 0.2,
            format!(
                "{} of {} p-values below {} (fraction {})",
                cal.p_values.iter().filter(|p| **p < cal.level).count(),
                c.outer,
                cal.level,
                cal.false_alarm_fraction
            ),
        ));
    }
    Ok(finish(out))
}

/// Largest over smallest 99% quantile of the sup-norm across `n`.
pub fn q99_spread(entries: &[&TightnessEntry]) -> f64 {
    let q: Vec<f64> = entries.iter().map(|e| e.containment.sup_norm.q99).collect();
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn modulus_monotone(entry: &TightnessEntry) -> bool {
    let c = &entry.containment;
    let mut order: Vec<usize> = (0..c.deltas.len()).collect();
    order.sort_by(|&a, &b| c.deltas[a].total_cmp(&c.deltas[b]));
    order.windows(2).all(|w| {
        let (a, b) = (&c.modulus[w[0]], &c.modulus[w[1]]);
        a.median <= b.median && a.q90 <= b.q90 && a.q99 <= b.q99 && a.max <= b.max
    })
}

pub fn run_tightness(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let ts = cfg.tightness_settings();
    let mut entries = Vec::new();
    for &n in &cfg.n_list {
        let reps = run_martingale_reps(
            cfg.basis,
            cfg.grid,
            n,
            &[],
            &[],
            cfg.reps,
            cfg.seed,
            Some(&ts),
        )?;
        let stats: Vec<PathTightness> = reps.into_iter().filter_map(|r| r.tightness).collect();
        entries.push(TightnessEntry {
            n,
            process: "M".into(),
            containment: containment_from_stats(ts.r, &ts.levels, &ts.deltas, &stats)?,
        });
    }
    let mut heat = heat_settings(cfg);
    heat.tightness = Some(ts.clone());
    heat.functions.truncate(1);
    heat.times = vec![cfg.grid.horizon()];
    for &n in &cfg.n_list {
        let stats: Vec<PathTightness> = heat_reps(&heat, Source::Particles(n))?
            .into_iter()
            .filter_map(|r| r.tightness)
            .collect();
        entries.push(TightnessEntry {
            n,
            process: "Y".into(),
            containment: containment_from_stats(ts.r, &ts.levels, &ts.deltas, &stats)?,
        });
    }

    let m_entries: Vec<&TightnessEntry> = entries.iter().filter(|e| e.process == "M").collect();
    let spread = q99_spread(&m_entries);
    let y_entries: Vec<&TightnessEntry> = entries.iter().filter(|e| e.process == "Y").collect();
    let gates = vec![
        gate(
            "sup-norm q99 bounded across n",
            spread <= 2.0,
            format!(
                "M: max/min = {spread:.4}; Y: max/min = {:.4} (reported)",
                q99_spread(&y_entries)
            ),
        ),
        gate(
            "modulus monotone in delta",
            entries.iter().all(modulus_monotone),
            "quantiles of w(delta) nondecreasing in delta".into(),
        ),
    ];
    let report: ConvergenceReport = assemble_report(
        vec![],
        ReportMeta {
            header: header(cfg),
            expected: vec![],
            tightness: entries,
            gates,
        },
    )?;
    Ok(finish(RunOutput {
        report,
        tables: vec![],
    }))
}

/// Default output directory for a scenario.
pub fn default_out_dir(cfg_path: &Path) -> PathBuf {
    let stem = cfg_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    PathBuf::from("out").join(stem)
}
