//! Monte Carlo experiment for the martingale CLT: `⟨M^n(φ)⟩_t → A(t, φ)` and
//! `M^n ⇒ M⁰`, checked cell by cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::limit::simulate_limit;
use super::particles::{ito_sums, simulate_particles};
use super::variance::QuadraticForm;
use crate::diagnostics::{
    assemble_report, energy_distance, ks_one_sample, standard_normal_cdf, Cell, CellKey,
    ConvergenceReport, EnergyDistance, ReportHeader, ReportMeta, RunOutput, SampleTable,
    TightnessEntry, KS_C_01,
};
use crate::error::{Error, Result};
use crate::hermite::{BasisSpec, SeminormIndex, TestFunction};
use crate::paths::{containment_from_stats, path_tightness, PathTightness, TimeGrid};
use crate::rng::{Purpose, StreamKey};
use crate::stats;

/// A test function with the name it carries in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFunction {
    pub label: String,
    pub function: TestFunction,
}

impl LabeledFunction {
    pub fn new(label: impl Into<String>, function: TestFunction) -> Self {
        Self {
            label: label.into(),
            function,
        }
    }

    pub fn hermite(basis: BasisSpec, k: usize) -> Self {
        Self::new(format!("h{k}"), TestFunction::hermite(basis, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessSettings {
    pub r: SeminormIndex,
    pub levels: Vec<f64>,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CltSettings {
    pub basis: BasisSpec,
    pub grid: TimeGrid,
    pub n_list: Vec<usize>,
    pub functions: Vec<LabeledFunction>,
    pub times: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub tightness: Option<TightnessSettings>,
}

/// What one Monte Carlo repetition contributes.
#[derive(Debug, Clone)]
pub struct RepOutcome {
    /// `M^n_t(φ)` at `coords`, function-major over `(φ, t)`.
    pub martingale: Vec<f64>,
    /// `⟨M^n(φ)⟩_t` at the same coordinates.
    pub quadratic_variation: Vec<f64>,
    pub tightness: Option<PathTightness>,
}

/// Stream seed for the particle ensembles of particle count `n`.
pub fn particle_seed(seed: u64, n: usize) -> u64 {
    StreamKey::derive_seed(seed, n as u64)
}

/// Stream seed for the limit sample shared by every `n`.
pub fn limit_seed(seed: u64) -> u64 {
    StreamKey::derive_seed(seed, u64::MAX)
}

/// Runs `reps` independent particle ensembles of size `n` and records the
/// values at `(function index, time)` coordinates. Repetition `m` uses stream
/// `(particle_seed(seed, n), Particles, m)`.
#[allow(clippy::too_many_arguments)]
pub fn run_martingale_reps(
    basis: BasisSpec,
    grid: TimeGrid,
    n: usize,
    fns: &[TestFunction],
    coords: &[(usize, f64)],
    reps: usize,
    seed: u64,
    tightness: Option<&TightnessSettings>,
) -> Result<Vec<RepOutcome>> {
    let idx: Vec<(usize, usize)> = coords
        .iter()
        .map(|&(f, t)| {
            if f >= fns.len() {
                return Err(Error::invalid(format!("coordinate refers to function {f}")));
            }
            Ok((f, grid.index_of(t)?))
        })
        .collect::<Result<_>>()?;
    let base = StreamKey::new(particle_seed(seed, n), Purpose::Particles, 0);
    (0..reps as u64)
        .into_par_iter()
        .map(|m| {
            let particles = simulate_particles(n, grid, base.with_index(m))?;
            let sums = ito_sums(&particles, basis, fns, tightness.is_some())?;
            let tight = match (tightness, &sums.dual) {
                (Some(t), Some(path)) => Some(path_tightness(path, t.r, &t.deltas)?),
                _ => None,
            };
            Ok(RepOutcome {
                martingale: idx
                    .iter()
                    .map(|&(f, j)| sums.martingales[f].values[j])
                    .collect(),
                quadratic_variation: idx
                    .iter()
                    .map(|&(f, j)| sums.quadratic_variations[f].values[j])
                    .collect(),
                tightness: tight,
            })
        })
        .collect()
}

/// Joint samples `(M^n_{t_1}(φ_{f_1}), …)` over `reps` repetitions.
pub fn martingale_fdd_sample(
    basis: BasisSpec,
    grid: TimeGrid,
    n: usize,
    fns: &[TestFunction],
    coords: &[(usize, f64)],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    Ok(
        run_martingale_reps(basis, grid, n, fns, coords, reps, seed, None)?
            .into_iter()
            .map(|r| r.martingale)
            .collect(),
    )
}

/// Joint samples of the limit `(M⁰_{t_1}(φ_{f_1}), …)`.
pub fn limit_fdd_sample(
    fns: &[TestFunction],
    grid: TimeGrid,
    coords: &[(usize, f64)],
    reps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let ensembles = simulate_limit(fns, grid, reps, limit_seed(seed))?;
    let idx: Vec<(usize, usize)> = coords
        .iter()
        .map(|&(f, t)| Ok((f, grid.index_of(t)?)))
        .collect::<Result<_>>()?;
    Ok((0..reps)
        .map(|m| idx.iter().map(|&(f, j)| ensembles[f].paths[m][j]).collect())
        .collect())
}

fn validate(settings: &CltSettings) -> Result<()> {
    if settings.n_list.is_empty() || settings.functions.is_empty() || settings.times.is_empty() {
        return Err(Error::invalid(
            "n-list, function list and times must be nonempty",
        ));
    }
    if settings.n_list.contains(&0) {
        return Err(Error::invalid("particle counts must be >= 1"));
    }
    if settings.reps < 2 {
        return Err(Error::invalid("at least two repetitions are needed"));
    }
    for f in &settings.functions {
        settings.basis.ensure_same(&f.function.basis())?;
    }
    Ok(())
}

/// Column label of a `(function, time)` coordinate in sample tables.
pub fn coord_label(label: &str, t: f64) -> String {
    format!("{label}@t={t}")
}

pub fn clt_report(settings: &CltSettings, header: ReportHeader) -> Result<ConvergenceReport> {
    Ok(clt_run(settings, header)?.report)
}

/// [`clt_report`] together with the raw `M^n` and `M⁰` samples.
pub fn clt_run(settings: &CltSettings, header: ReportHeader) -> Result<RunOutput> {
    validate(settings)?;
    let fns: Vec<TestFunction> = settings
        .functions
        .iter()
        .map(|f| f.function.clone())
        .collect();
    let coords: Vec<(usize, f64)> = (0..fns.len())
        .flat_map(|f| settings.times.iter().map(move |&t| (f, t)))
        .collect();
    let form = QuadraticForm::new(settings.basis);
    let targets: Vec<f64> = coords
        .iter()
        .map(|&(f, t)| form.limit_variance(&fns[f], t))
        .collect::<Result<_>>()?;
    let limit = limit_fdd_sample(&fns, settings.grid, &coords, settings.reps, settings.seed)?;
    let columns: Vec<String> = coords
        .iter()
        .map(|&(f, t)| coord_label(&settings.functions[f].label, t))
        .collect();
    let mut tables = Vec::new();

    let mut cells = Vec::new();
    let mut expected = Vec::new();
    let mut tightness = Vec::new();
    for &n in &settings.n_list {
        let reps = run_martingale_reps(
            settings.basis,
            settings.grid,
            n,
            &fns,
            &coords,
            settings.reps,
            settings.seed,
            settings.tightness.as_ref(),
        )?;
        let joint: Vec<Vec<f64>> = reps.iter().map(|r| r.martingale.clone()).collect();
        let energy: EnergyDistance = energy_distance(&joint, &limit)?;
        tables.push(SampleTable {
            name: format!("clt-n{n}"),
            columns: columns.clone(),
            rows: joint,
        });
        for (c, &(f, t)) in coords.iter().enumerate() {
            let values: Vec<f64> = reps.iter().map(|r| r.martingale[c]).collect();
            let qv: Vec<f64> = reps.iter().map(|r| r.quadratic_variation[c]).collect();
            let target = targets[c];
            let trivial = fns[f].is_zero() || target <= 0.0;
            let (ks, ks_pvalue) = if trivial {
                (0.0, 1.0)
            } else {
                let scale = target.sqrt();
                let z: Vec<f64> = values.iter().map(|v| v / scale).collect();
                let o = ks_one_sample(&z, standard_normal_cdf)?;
                (o.statistic, o.p_value)
            };
            let key = CellKey {
                n,
                phi: settings.functions[f].label.clone(),
                t,
            };
            expected.push(key.clone());
            cells.push(Cell {
                n: key.n,
                phi: key.phi,
                t,
                qv_mean: Some(stats::mean(&qv)),
                qv_se: Some(stats::std_error_of_mean(&qv)),
                qv_target: Some(target),
                variance: Some(stats::variance(&values)),
                variance_se: Some(stats::std_error_of_variance(&values)),
                ks,
                ks_critical: KS_C_01 / (settings.reps as f64).sqrt(),
                ks_pvalue,
                energy: energy.statistic,
                energy_se: energy.std_error,
                trivial,
            });
        }
        if let Some(t) = &settings.tightness {
            let stats: Vec<PathTightness> = reps.into_iter().filter_map(|r| r.tightness).collect();
            tightness.push(TightnessEntry {
                n,
                process: "M".into(),
                containment: containment_from_stats(t.r, &t.levels, &t.deltas, &stats)?,
            });
        }
    }
    tables.push(SampleTable {
        name: "clt-limit".into(),
        columns,
        rows: limit,
    });
    let report = assemble_report(
        cells,
        ReportMeta {
            header,
            expected,
            tightness,
            gates: vec![],
        },
    )?;
    Ok(RunOutput { report, tables })
}
