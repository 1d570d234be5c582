use proptest::prelude::*;

use nucleartight::diagnostics::{
    assemble_report, energy_distance, ks_two_sample, Cell, CellKey, ConvergenceReport,
    ReportHeader, ReportMeta,
};
use nucleartight::hermite::{
    dual_norm, hs_norm, pairing, seminorm, BasisSpec, DualElement, SeminormIndex, TestFunction,
};
use nucleartight::paths::{
    compact_containment_report, read_dual_csv, write_dual_csv, DualPath, DualPathEnsemble, TimeGrid,
};
use nucleartight::rng::{Purpose, StreamKey};
use nucleartight::spde::mild_solution;
use rand_distr::{Distribution, StandardNormal};

fn normals(seed: u64, index: u64, m: usize) -> Vec<f64> {
    let mut rng = StreamKey::new(seed, Purpose::Calibration, index).rng();
    (0..m).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ks_in_unit_interval_and_invariant_under_monotone_maps(
        a in prop::collection::vec(-5.0f64..5.0, 2..60),
        b in prop::collection::vec(-5.0f64..5.0, 2..60),
    ) {
        let ks = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks.statistic));
        let f = |v: &[f64]| v.iter().map(|x| x.exp() * 3.0 - 1.0).collect::<Vec<_>>();
        let mapped = ks_two_sample(&f(&a), &f(&b)).unwrap();
        prop_assert!((mapped.statistic - ks.statistic).abs() < 1e-12);
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    }

    #[test]
    fn energy_distance_is_permutation_invariant(
        x in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..20),
        y in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 2), 3..20),
        rot in 0usize..20,
    ) {
        let e = energy_distance(&x, &y).unwrap();
        let mut xr = x.clone();
        let k = rot % xr.len();
        xr.rotate_left(k);
        let mut yr = y.clone();
        yr.reverse();
        let e2 = energy_distance(&xr, &yr).unwrap();
        prop_assert!((e.statistic - e2.statistic).abs() < 1e-10);
    }

    #[test]
    fn seminorms_are_monotone_in_the_index(c in coeffs(12), r in 0.0f64..3.0, dr in 0.0f64..2.0) {
        let spec = BasisSpec::new(12).unwrap();
        let phi = TestFunction::new(spec, c.clone()).unwrap();
        let f = DualElement::new(spec, c).unwrap();
        let (lo, hi) = (SeminormIndex::new(r).unwrap(), SeminormIndex::new(r + dr).unwrap());
        prop_assert!(seminorm(&phi, lo) <= seminorm(&phi, hi) * (1.0 + 1e-12));
        prop_assert!(dual_norm(&f, hi) <= dual_norm(&f, lo) * (1.0 + 1e-12));
        // |f(φ)| ≤ p'_r(f) p_r(φ)
        prop_assert!(pairing(&f, &phi).unwrap().abs() <= dual_norm(&f, lo) * seminorm(&phi, lo) * (1.0 + 1e-12));
    }

    #[test]
    fn hs_convergence_flag_matches_gap(r in 0.0f64..3.0, gap in 0.01f64..2.0) {
        let hs = hs_norm(SeminormIndex::new(r).unwrap(), SeminormIndex::new(r + gap).unwrap(), 50).unwrap();
        prop_assert_eq!(hs.converges, gap > 0.5);
        prop_assert!(hs.value >= 1.0);
    }

    #[test]
    fn mild_solution_is_additive(c1 in coeffs(6), c2 in coeffs(6), seed in 0u64..1000) {
        let spec = BasisSpec::new(6).unwrap();
        let grid = TimeGrid::new(0.5, 16).unwrap();
        let path = |s: u64| {
            let z = normals(seed, s, grid.len() * 6);
            DualPath::from_fn(grid, spec, |t| {
                let j = (t / grid.dt()).round() as usize;
                z[j * 6..(j + 1) * 6].iter().map(|v| v * t).collect()
            })
            .unwrap()
        };
        let (m1, m2) = (path(0), path(1));
        let (e1, e2) = (DualElement::new(spec, c1.clone()).unwrap(), DualElement::new(spec, c2.clone()).unwrap());
        let e12 = DualElement::new(spec, c1.iter().zip(&c2).map(|(a, b)| a + b).collect()).unwrap();
        let whole = mild_solution(&m1.add(&m2).unwrap(), &e12, grid).unwrap();
        let parts = mild_solution(&m1, &e1, grid).unwrap().add(&mild_solution(&m2, &e2, grid).unwrap()).unwrap();
        for j in 0..grid.len() {
            for (a, b) in whole.state(j).iter().zip(parts.state(j)) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn dual_csv_roundtrips_bit_exactly(seed in 0u64..1000, paths in 1usize..4) {
        let spec = BasisSpec::new(3).unwrap();
        let grid = TimeGrid::new(2.0, 5).unwrap();
        let ens = DualPathEnsemble::new(
            (0..paths as u64)
                .map(|p| DualPath::new(grid, spec, normals(seed, p, grid.len() * 3)).unwrap())
                .collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dual_csv(&ens, &mut buf).unwrap();
        let back = read_dual_csv(buf.as_slice(), grid, spec).unwrap();
        prop_assert_eq!(back.paths(), ens.paths());
    }

    #[test]
    fn lag_is_a_non_strict_floor(steps in 1usize..500, frac in 0.001f64..1.0) {
        let grid = TimeGrid::new(1.0, steps).unwrap();
        let lag = grid.lag_for(frac).unwrap();
        prop_assert!(lag as f64 * grid.dt() <= frac * (1.0 + 1e-9));
        prop_assert!(lag == steps || (lag + 1) as f64 * grid.dt() > frac);
    }
}

#[test]
fn ks_null_calibration_at_size_2000() {
    let accepted = (0..100)
        .filter(|&m| {
            let ks = ks_two_sample(&normals(4, 2 * m, 2000), &normals(4, 2 * m + 1, 2000)).unwrap();
            !ks.rejects_at_01()
        })
        .count();
    assert!(accepted >= 98, "{accepted} of 100 accepted");
}

#[test]
fn ks_disjoint_supports() {
    let a: Vec<f64> = (1..50).map(|i| -(i as f64)).collect();
    let b: Vec<f64> = (1..30).map(|i| i as f64).collect();
    assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
}

#[test]
fn energy_distance_detects_a_large_shift() {
    let x: Vec<Vec<f64>> = normals(8, 0, 2000).into_iter().map(|v| vec![v]).collect();
    let y: Vec<Vec<f64>> = normals(8, 1, 2000)
        .into_iter()
        .map(|v| vec![v + 10.0])
        .collect();
    let e = energy_distance(&x, &y).unwrap();
    assert!(e.statistic >= 15.0, "{}", e.statistic);
}

#[test]
fn energy_distance_equal_multisets_within_noise() {
    let x: Vec<Vec<f64>> = normals(9, 0, 500).chunks(2).map(|c| c.to_vec()).collect();
    let mut y = x.clone();
    y.reverse();
    let e = energy_distance(&x, &y).unwrap();
    // shared points put zero-distance pairs in the cross term, so the
    // statistic sits slightly below zero
    assert!(e.statistic <= 2.0 * e.std_error, "{e:?}");
    assert!(e.statistic > -0.05, "{e:?}");
}

#[test]
fn zero_ensemble_has_all_zero_tables() {
    let spec = BasisSpec::new(4).unwrap();
    let grid = TimeGrid::new(1.0, 20).unwrap();
    let ens = DualPathEnsemble::new(vec![DualPath::zero(grid, spec); 5]).unwrap();
    let rep = compact_containment_report(
        &ens,
        SeminormIndex::new(1.0).unwrap(),
        &[0.1, 1.0],
        &[0.05, 0.5],
    )
    .unwrap();
    assert!(rep.exceedance.iter().all(|p| *p == 0.0));
    assert_eq!(rep.sup_norm.max, 0.0);
    assert!(rep.modulus.iter().all(|q| q.max == 0.0));
}

#[test]
fn report_roundtrip_and_missing_cells() {
    let header = ReportHeader {
        scenario: "s".into(),
        command: "clt".into(),
        version: "0".into(),
        seed: 3,
        config_hash: "h".into(),
        config: serde_json::json!({"a": 0.1}),
    };
    let cell = Cell {
        n: 10,
        phi: "h0".into(),
        t: 0.1 + 0.2,
        qv_mean: Some(1.0 / 3.0),
        qv_se: None,
        qv_target: Some(std::f64::consts::E),
        variance: None,
        variance_se: None,
        ks: 0.05,
        ks_critical: 0.0364,
        ks_pvalue: 0.3,
        energy: -1e-5,
        energy_se: 1e-4,
        trivial: false,
    };
    let expected = vec![
        CellKey {
            n: 10,
            phi: "h0".into(),
            t: 0.1 + 0.2,
        },
        CellKey {
            n: 40,
            phi: "h0".into(),
            t: 0.1 + 0.2,
        },
    ];
    let report = assemble_report(
        vec![cell],
        ReportMeta {
            header,
            expected,
            tightness: vec![],
            gates: vec![],
        },
    )
    .unwrap();
    assert!(!report.complete);
    assert_eq!(report.missing.len(), 1);
    let back = ConvergenceReport::from_json(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.to_json(), report.to_json());
}
