//! Weak-convergence experiment `Y^n ⇒ Y⁰` for the stochastic heat equation.
//!
//! `Y^n` is driven by the particle martingale `M^n`, `Y⁰` by the Gaussian
//! limit `M⁰`. Both go through the same [`HeatSolver`] on the same grid and
//! basis, so solver bias cancels in the two-sample comparisons.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::driver::mn_dual_path;
use super::initial::{sample_initial, InitialCondition};
use super::mild::{weak_form_residual, HeatSolver};
use crate::diagnostics::{
    assemble_report, energy_distance, ks_two_sample, Cell, CellKey, ConvergenceReport, Gate,
    ReportHeader, ReportMeta, RunOutput, SampleTable, TightnessEntry,
};
use crate::error::{Error, Result};
use crate::hermite::{dot, BasisSpec, TestFunction};
use crate::martingale::{
    coord_label, limit_seed, particle_seed, simulate_particles, LabeledFunction, LimitSampler,
    QuadraticForm, TightnessSettings,
};
use crate::paths::{containment_from_stats, path_tightness, DualPath, PathTightness, TimeGrid};
use crate::rng::{Purpose, StreamKey};
use crate::stats;

/// Default multiple of `dt` allowed for the per-repetition weak-form residual.
pub const RESIDUAL_GATE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct HeatSettings {
    pub basis: BasisSpec,
    pub grid: TimeGrid,
    pub n_list: Vec<usize>,
    /// Law of `η⁰`, and of `η^n` unless overridden in `eta_by_n`.
    pub eta: InitialCondition,
    pub eta_by_n: BTreeMap<usize, InitialCondition>,
    pub functions: Vec<LabeledFunction>,
    pub times: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub tightness: Option<TightnessSettings>,
    pub residual_factor: f64,
}

impl HeatSettings {
    pub fn eta_for(&self, n: usize) -> &InitialCondition {
        self.eta_by_n.get(&n).unwrap_or(&self.eta)
    }

    fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.functions.is_empty() || self.times.is_empty() {
            return Err(Error::invalid(
                "n-list, function list and times must be nonempty",
            ));
        }
        if self.n_list.contains(&0) {
            return Err(Error::invalid("particle counts must be >= 1"));
        }
        if self.reps < 2 {
            return Err(Error::invalid("at least two repetitions are needed"));
        }
        self.eta.validate(self.basis)?;
        for eta in self.eta_by_n.values() {
            eta.validate(self.basis)?;
        }
        for f in &self.functions {
            self.basis.ensure_same(&f.function.basis())?;
        }
        for &t in &self.times {
            self.grid.index_of(t)?;
        }
        Ok(())
    }
}

/// Which ensemble a repetition belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Particles(usize),
    Limit,
}

/// One solved repetition.
#[derive(Debug, Clone)]
pub struct HeatRep {
    /// `Y_t(φ)` at the requested coordinates, function-major.
    pub values: Vec<f64>,
    /// Largest weak-form residual over the test functions.
    pub residual: f64,
    pub tightness: Option<PathTightness>,
}

struct Context<'a> {
    settings: &'a HeatSettings,
    solver: HeatSolver,
    fns: Vec<TestFunction>,
    idx: Vec<(usize, usize)>,
}

impl Context<'_> {
    fn driver_and_eta(
        &self,
        source: Source,
        m: u64,
        sampler: Option<&LimitSampler>,
    ) -> Result<(DualPath, crate::hermite::DualElement)> {
        let s = self.settings;
        match source {
            Source::Particles(n) => {
                let seed = particle_seed(s.seed, n);
                let particles =
                    simulate_particles(n, s.grid, StreamKey::new(seed, Purpose::Particles, m))?;
                let driver = mn_dual_path(&particles, s.basis)?;
                let eta = sample_initial(
                    s.eta_for(n),
                    s.basis,
                    StreamKey::new(seed, Purpose::InitialCondition, m),
                )?;
                Ok((driver, eta))
            }
            Source::Limit => {
                let seed = limit_seed(s.seed);
                let sampler = sampler.expect("limit sampler");
                let driver =
                    sampler.sample_dual(s.basis, StreamKey::new(seed, Purpose::LimitDriver, m))?;
                let eta = sample_initial(
                    &s.eta,
                    s.basis,
                    StreamKey::new(seed, Purpose::LimitInitialCondition, m),
                )?;
                Ok((driver, eta))
            }
        }
    }

    fn run(&self, source: Source, sampler: Option<&LimitSampler>) -> Result<Vec<HeatRep>> {
        (0..self.settings.reps as u64)
            .into_par_iter()
            .map(|m| {
                let (driver, eta) = self.driver_and_eta(source, m, sampler)?;
                let y = self.solver.solve(&driver, &eta)?;
                let residual = self
                    .fns
                    .iter()
                    .map(|phi| weak_form_residual(&y, &driver, &eta, phi))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                let tightness = match &self.settings.tightness {
                    Some(t) => Some(path_tightness(&y, t.r, &t.deltas)?),
                    None => None,
                };
                Ok(HeatRep {
                    values: self
                        .idx
                        .iter()
                        .map(|&(f, j)| dot(y.state(j), self.fns[f].coeffs()))
                        .collect(),
                    residual,
                    tightness,
                })
            })
            .collect()
    }
}

fn coordinates(settings: &HeatSettings) -> Result<Vec<(usize, f64, usize)>> {
    (0..settings.functions.len())
        .flat_map(|f| settings.times.iter().map(move |&t| (f, t)))
        .map(|(f, t)| Ok((f, t, settings.grid.index_of(t)?)))
        .collect()
}

fn context(settings: &HeatSettings) -> Result<Context<'_>> {
    Ok(Context {
        settings,
        solver: HeatSolver::new(settings.basis, settings.grid)?,
        fns: settings
            .functions
            .iter()
            .map(|f| f.function.clone())
            .collect(),
        idx: coordinates(settings)?
            .into_iter()
            .map(|(f, _, j)| (f, j))
            .collect(),
    })
}

/// Solved repetitions for one ensemble, as used by the report.
pub fn heat_reps(settings: &HeatSettings, source: Source) -> Result<Vec<HeatRep>> {
    settings.validate()?;
    let ctx = context(settings)?;
    let sampler = match source {
        Source::Limit => Some(LimitSampler::for_basis(
            &QuadraticForm::new(settings.basis),
            settings.grid,
        )?),
        Source::Particles(_) => None,
    };
    ctx.run(source, sampler.as_ref())
}

pub fn heat_convergence_report(
    settings: &HeatSettings,
    header: ReportHeader,
) -> Result<ConvergenceReport> {
    Ok(heat_run(settings, header)?.report)
}

/// [`heat_convergence_report`] with the raw `Y^n` and `Y⁰` samples.
pub fn heat_run(settings: &HeatSettings, header: ReportHeader) -> Result<RunOutput> {
    settings.validate()?;
    let ctx = context(settings)?;
    let coords = coordinates(settings)?;
    let columns: Vec<String> = coords
        .iter()
        .map(|&(f, t, _)| coord_label(&settings.functions[f].label, t))
        .collect();
    let sampler = LimitSampler::for_basis(&QuadraticForm::new(settings.basis), settings.grid)?;
    let limit = ctx.run(Source::Limit, Some(&sampler))?;
    let limit_rows: Vec<Vec<f64>> = limit.iter().map(|r| r.values.clone()).collect();
    let gate_level = settings.residual_factor * settings.grid.dt();

    let mut cells = Vec::new();
    let mut expected = Vec::new();
    let mut tightness = Vec::new();
    let mut tables = Vec::new();
    let mut worst_residual = limit.iter().map(|r| r.residual).fold(0.0, f64::max);
    let mut failing = limit.iter().filter(|r| r.residual >= gate_level).count();

    for &n in &settings.n_list {
        let reps = ctx.run(Source::Particles(n), None)?;
        worst_residual = reps
            .iter()
            .map(|r| r.residual)
            .fold(worst_residual, f64::max);
        failing += reps.iter().filter(|r| r.residual >= gate_level).count();
        let rows: Vec<Vec<f64>> = reps.iter().map(|r| r.values.clone()).collect();
        let energy = energy_distance(&rows, &limit_rows)?;
        for (c, &(f, t, _)) in coords.iter().enumerate() {
            let a: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            let b: Vec<f64> = limit_rows.iter().map(|r| r[c]).collect();
            let trivial = settings.functions[f].function.is_zero();
            let ks = ks_two_sample(&a, &b)?;
            let (stat, pvalue) = if trivial {
                (0.0, 1.0)
            } else {
                (ks.statistic, ks.p_value)
            };
            let key = CellKey {
                n,
                phi: settings.functions[f].label.clone(),
                t,
            };
            expected.push(key.clone());
            cells.push(Cell {
                n,
                phi: key.phi,
                t,
                qv_mean: None,
                qv_se: None,
                qv_target: None,
                variance: Some(stats::variance(&a)),
                variance_se: Some(stats::std_error_of_variance(&a)),
                ks: stat,
                ks_critical: ks.critical_01,
                ks_pvalue: pvalue,
                energy: energy.statistic,
                energy_se: energy.std_error,
                trivial,
            });
        }
        tables.push(SampleTable {
            name: format!("heat-n{n}"),
            columns: columns.clone(),
            rows,
        });
        if let Some(t) = &settings.tightness {
            let per_path: Vec<PathTightness> =
                reps.into_iter().filter_map(|r| r.tightness).collect();
            tightness.push(TightnessEntry {
                n,
                process: "Y".into(),
                containment: containment_from_stats(t.r, &t.levels, &t.deltas, &per_path)?,
            });
        }
    }
    if let Some(t) = &settings.tightness {
        let per_path: Vec<PathTightness> =
            limit.iter().filter_map(|r| r.tightness.clone()).collect();
        tightness.push(TightnessEntry {
            n: 0,
            process: "Y-limit".into(),
            containment: containment_from_stats(t.r, &t.levels, &t.deltas, &per_path)?,
        });
    }
    tables.push(SampleTable {
        name: "heat-limit".into(),
        columns,
        rows: limit_rows,
    });

    let gate = Gate {
        name: "weak-form residual".into(),
        passed: failing == 0,
        detail: format!(
            "max residual {worst_residual:e} vs {} dt = {gate_level:e}; {failing} repetitions over the limit",
            settings.residual_factor
        ),
    };
    let report = assemble_report(
        cells,
        ReportMeta {
            header,
            expected,
            tightness,
            gates: vec![gate],
        },
    )?;
    Ok(RunOutput { report, tables })
}

/// Outcome of comparing two independent `Y⁰` ensembles repeatedly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullCalibration {
    pub level: f64,
    pub p_values: Vec<f64>,
    /// Fraction of p-values below `level`.
    pub false_alarm_fraction: f64,
}

/// Two-sample KS between independent limit ensembles of `Y⁰_t(φ)`, repeated
/// `outer` times. Under correct calibration the false-alarm fraction is close
/// to `level`.
#[allow(clippy::too_many_arguments)]
pub fn null_calibration(
    basis: BasisSpec,
    grid: TimeGrid,
    eta: &InitialCondition,
    phi: &TestFunction,
    t: f64,
    reps: usize,
    outer: usize,
    seed: u64,
) -> Result<NullCalibration> {
    if outer == 0 {
        return Err(Error::invalid(
            "null calibration needs at least one repetition",
        ));
    }
    let level = 0.05;
    let sampler = LimitSampler::for_basis(&QuadraticForm::new(basis), grid)?;
    let mut settings = HeatSettings {
        basis,
        grid,
        n_list: vec![1],
        eta: eta.clone(),
        eta_by_n: BTreeMap::new(),
        functions: vec![LabeledFunction::new("phi", phi.clone())],
        times: vec![t],
        reps,
        seed,
        tightness: None,
        residual_factor: RESIDUAL_GATE_FACTOR,
    };
    settings.validate()?;
    let mut sample = |salt: u64| -> Result<Vec<f64>> {
        settings.seed = StreamKey::derive_seed(seed, salt);
        let ctx = context(&settings)?;
        Ok(ctx
            .run(Source::Limit, Some(&sampler))?
            .into_iter()
            .map(|r| r.values[0])
            .collect())
    };
    let mut p_values = Vec::with_capacity(outer);
    for o in 0..outer as u64 {
        let a = sample(2 * o)?;
        let b = sample(2 * o + 1)?;
        p_values.push(ks_two_sample(&a, &b)?.p_value);
    }
    let false_alarm_fraction =
        p_values.iter().filter(|p| **p < level).count() as f64 / outer as f64;
    Ok(NullCalibration {
        level,
        p_values,
        false_alarm_fraction,
    })
}
