mod common;

use std::f64::consts::PI;

use wavebands::convergence::{eps_sweep, fit_log_slope, fit_rate, ConvergenceError};
use wavebands::cross_section::SectionGrid;
use wavebands::effective_1d::FourierTruncation;
use wavebands::fiber3d::FiberDiscretization;
use wavebands::geometry::{GeometryError, SectionShape};

use common::*;

fn disc(n_s: usize, nodes: usize) -> FiberDiscretization {
    FiberDiscretization::new(L, n_s, SectionGrid::new(SectionShape::unit_square(), nodes, nodes).unwrap()).unwrap()
}

#[test]
fn free_case_is_exact_at_every_thickness() {
    let thetas = [0.0, 0.25, 0.5];
    let sweep =
        eps_sweep(&free_tube(), &[0.05, 0.2, 0.1], &thetas, 3, &disc(12, 5), &FourierTruncation::new(L, 16)).unwrap();
    assert_eq!(sweep.eps, vec![0.2, 0.1, 0.05]);
    assert!(sweep.errors.iter().flatten().flatten().all(|e| *e <= 1e-7));
    assert!(sweep.exact.iter().flatten().all(|x| *x));
    assert_eq!(fit_rate(&sweep).unwrap().min_slope, None);
}

#[test]
fn ripple_errors_decrease_and_fit_is_stable() {
    let spec = straight_ripple();
    let thetas = [0.0, PI / (2.0 * L), PI / L];
    let eps = [0.2, 0.1, 0.05, 0.025];
    let sweep = eps_sweep(&spec, &eps, &thetas, 3, &disc(16, 5), &FourierTruncation::new(L, 32)).unwrap();
    let fit = fit_rate(&sweep).unwrap();
    for t in 0..thetas.len() {
        for n in 0..3 {
            if sweep.exact[t][n] {
                continue;
            }
            let col = sweep.error_column(t, n);
            assert!(col.windows(2).all(|w| w[1] < w[0]), "theta {t}, band {n}: {col:?}");
            let dropped = fit_log_slope(&sweep.eps[1..], &col[1..]);
            assert!((dropped - fit.slopes[t][n].unwrap()).abs() <= 0.15);
        }
    }
    assert!(sweep.exact[0][0]);
    assert!(fit.min_slope.unwrap() >= 0.9);
}

#[test]
fn admissibility_is_checked_before_solving() {
    let err = eps_sweep(&helix_square(), &[2.0, 0.1, 0.05], &[0.0], 1, &disc(8, 3), &FourierTruncation::new(L, 8))
        .unwrap_err();
    assert!(matches!(err, ConvergenceError::Geometry(GeometryError::TubeSelfIntersecting { .. })));
    let err = eps_sweep(&free_tube(), &[0.1, 0.1], &[0.0], 1, &disc(8, 3), &FourierTruncation::new(L, 8)).unwrap_err();
    assert!(matches!(err, ConvergenceError::InvalidRequest(_)));
}

#[test]
fn coarse_grids_trip_the_floor_gate() {
    let spec = helix_ripple();
    let err = eps_sweep(&spec, &[0.2, 0.1], &[PI / L], 3, &disc(8, 3), &FourierTruncation::new(L, 16)).unwrap_err();
    assert!(matches!(err, ConvergenceError::FloorTooHigh { .. }), "{err:?}");
}
