//! Solves dY = Delta Y dt + dM^n in mild form and checks the weak formulation
//! on a refinement sequence.

use nucleartight::hermite::{dual_norm, BasisSpec, DualElement, SeminormIndex, TestFunction};
use nucleartight::martingale::simulate_particles;
use nucleartight::paths::TimeGrid;
use nucleartight::rng::{Purpose, StreamKey};
use nucleartight::spde::{
    mn_dual_path, residual_refinement, sample_initial, weak_form_residual, HeatSolver,
    InitialCondition,
};

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(16)?;
    let grid = TimeGrid::new(1.0, 1000)?;
    let eta_law = InitialCondition::Gaussian { r: 1.0, scale: 1.0 };

    let particles = simulate_particles(100, grid, StreamKey::new(3, Purpose::Particles, 0))?;
    let m = mn_dual_path(&particles, spec)?;
    let eta = sample_initial(
        &eta_law,
        spec,
        StreamKey::new(3, Purpose::InitialCondition, 0),
    )?;
    let y = HeatSolver::new(spec, grid)?.solve(&m, &eta)?;

    let r = SeminormIndex::new(1.0)?;
    for t in [0.0, 0.25, 0.5, 1.0] {
        let j = grid.index_of(t)?;
        println!(
            "t={t:>4}: p'_1(Y_t) = {:.5}, Y_t(h0) = {:+.5}",
            dual_norm(&y.element(j), r),
            y.state(j)[0]
        );
    }
    let phi = TestFunction::hermite(spec, 1);
    println!(
        "weak-form residual at J=1000: {:.2e}",
        weak_form_residual(&y, &m, &eta, &phi)?
    );

    let drivers: Vec<(_, DualElement)> = (0..4)
        .map(|k| {
            let p = simulate_particles(100, grid, StreamKey::new(3, Purpose::Particles, 10 + k))?;
            Ok((mn_dual_path(&p, spec)?, eta.clone()))
        })
        .collect::<nucleartight::Result<_>>()?;
    let study = residual_refinement(&drivers, &[1, 2, 4], &phi)?;
    for (j, res) in study.steps.iter().zip(&study.residuals) {
        println!("J={j:>5}: mean residual {res:.3e}");
    }
    println!("log-log slope {:.2}", study.slope);
    Ok(())
}
