mod common;

use std::f64::consts::PI;

use wavebands::bands::{
    analyze_gaps, borg_test, brillouin_grid, compute_bands, symmetry_monotonicity_check, BandError, BorgVerdict,
    EffectiveSolver, FiberSolver, GapRule, GRID_TOLERANCE,
};
use wavebands::cross_section::SectionGrid;
use wavebands::fiber3d::FiberDiscretization;
use wavebands::geometry::{SectionShape, WaveguideSpec};

use common::*;

#[test]
fn gap_table_is_stable_under_more_modes() {
    let spec = straight_ripple();
    let coarse = analyze_gaps(&compute_bands(&EffectiveSolver::new(&spec, 32), 6, 17).unwrap()).unwrap();
    let fine = analyze_gaps(&compute_bands(&EffectiveSolver::new(&spec, 64), 6, 17).unwrap()).unwrap();
    for (a, b) in coarse.gaps.iter().zip(&fine.gaps) {
        assert_eq!(a.rule, GapRule::Endpoint);
        assert!((a.width - b.width).abs() < 1e-10, "gap {}: {} vs {}", a.n, a.width, b.width);
    }
    assert!(coarse.gaps.iter().all(|g| g.width > coarse.tolerance));
    assert!(matches!(coarse.borg, Some(BorgVerdict::NonConstant { n1: 1, .. })));
}

#[test]
fn free_bands_are_the_folded_parabola() {
    let bands = compute_bands(&EffectiveSolver::new(&free_tube(), 16), 5, 9).unwrap();
    for (j, &theta) in bands.thetas.iter().enumerate() {
        let want = free_eigenvalues(theta, 1.0, 5);
        for n in 0..5 {
            assert!((bands.values[n][j] - want[n]).abs() < 1e-10);
        }
    }
    let report = analyze_gaps(&bands).unwrap();
    assert_eq!(report.first_open_gap, None);
    assert_eq!(report.borg, Some(BorgVerdict::Constant));
}

#[test]
fn borg_dichotomy() {
    let flat = WaveguideSpec::builder(L).profile(constant(2.0)).build().unwrap();
    assert_eq!(borg_test(&flat, 6, GRID_TOLERANCE).unwrap(), BorgVerdict::Constant);
    assert_eq!(borg_test(&flat, 2, GRID_TOLERANCE).unwrap(), BorgVerdict::Inconclusive);
    assert!(matches!(
        borg_test(&straight_ripple(), 6, GRID_TOLERANCE).unwrap(),
        BorgVerdict::NonConstant { n1: 1, .. }
    ));
}

#[test]
fn properties_hold_on_every_test_geometry() {
    for (name, spec) in test_geometries() {
        let bands = compute_bands(&EffectiveSolver::new(&spec, 32), 4, 17).unwrap();
        let diag = symmetry_monotonicity_check(&bands).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(diag.symmetry_deviation <= 1e-10);
        assert!(diag.chain.windows(2).all(|w| w[0] <= w[1] + 1e-9), "{name}: {:?}", diag.chain);
    }
}

#[test]
fn fiber_gaps_track_effective_gaps() {
    let spec = straight_ripple();
    let disc = FiberDiscretization::new(L, 12, SectionGrid::new(SectionShape::unit_square(), 5, 5).unwrap()).unwrap();
    let fiber = compute_bands(&FiberSolver { spec: &spec, eps: 0.1, disc }, 3, 9).unwrap();
    let fr = analyze_gaps(&fiber).unwrap();
    let er = analyze_gaps(&compute_bands(&EffectiveSolver::new(&spec, 32), 3, 9).unwrap()).unwrap();
    assert!(fr.gaps.iter().all(|g| g.rule == GapRule::Extrema));
    assert_eq!(fr.borg, None);
    assert!((fr.gaps[0].width - er.gaps[0].width).abs() < 1e-3);
    assert!(matches!(symmetry_monotonicity_check(&fiber), Err(BandError::NotEffective(_))));
}

#[test]
fn grid_rules() {
    assert!(brillouin_grid(L, 8).is_err());
    let g = brillouin_grid(L, 9).unwrap();
    assert_eq!((g[0], g[8]), (0.0, PI / L));
}
