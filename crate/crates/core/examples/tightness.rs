//! Compact-containment diagnostics for driver ensembles across n: exceedance
//! of sup-norm levels and modulus-of-continuity quantiles.

use nucleartight::hermite::{BasisSpec, SeminormIndex};
use nucleartight::martingale::{run_martingale_reps, TightnessSettings};
use nucleartight::paths::{containment_from_stats, PathTightness, TimeGrid};

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(12)?;
    let grid = TimeGrid::new(1.0, 400)?;
    let settings = TightnessSettings {
        r: SeminormIndex::new(1.0)?,
        levels: vec![0.5, 1.0, 1.5],
        deltas: vec![0.01, 0.05, 0.25],
    };
    for n in [10, 40, 160] {
        let stats: Vec<PathTightness> =
            run_martingale_reps(spec, grid, n, &[], &[], 300, 5, Some(&settings))?
                .into_iter()
                .filter_map(|r| r.tightness)
                .collect();
        let rep = containment_from_stats(settings.r, &settings.levels, &settings.deltas, &stats)?;
        let moduli: Vec<String> = rep
            .modulus
            .iter()
            .map(|q| format!("{:.3}", q.q90))
            .collect();
        println!(
            "n={n:>3}: sup-norm q99 {:.3}, P(sup > C) {:?}, w(delta) q90 {:?}",
            rep.sup_norm.q99, rep.exceedance, moduli
        );
    }
    Ok(())
}
