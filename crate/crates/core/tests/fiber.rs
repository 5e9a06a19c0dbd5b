mod common;

use std::f64::consts::PI;

use wavebands::cross_section::{neumann_eigs, SectionGrid};
use wavebands::effective_1d::{assemble_direct, effective_eigs, FourierTruncation};
use wavebands::fiber3d::{fiber_spectrum, reduction_defect, FiberDiscretization, FiberError};
use wavebands::geometry::{GeometryError, SectionShape};

use common::*;

fn small(n_s: usize, nodes: usize) -> FiberDiscretization {
    FiberDiscretization::new(L, n_s, SectionGrid::new(SectionShape::unit_square(), nodes, nodes).unwrap()).unwrap()
}

#[test]
fn free_tube_reproduces_longitudinal_spectrum() {
    let disc = small(16, 5);
    for theta in [0.0, 0.3, 0.5] {
        let got = fiber_spectrum(&free_tube(), 0.1, theta, &disc, 5).unwrap();
        for (g, w) in got.iter().zip(free_eigenvalues(theta, 1.0, 5)) {
            assert!((g - w).abs() < 1e-8, "theta = {theta}: {g} vs {w}");
        }
    }
}

#[test]
fn bottom_of_periodic_fiber_is_the_shift() {
    let disc = small(12, 5);
    for (name, spec) in test_geometries() {
        let e = fiber_spectrum(&spec, 0.1, 0.0, &disc, 1).unwrap()[0];
        assert!((e - spec.shift()).abs() < 1e-8, "{name}: {e}");
    }
}

#[test]
fn thin_fibers_approach_effective_eigenvalues() {
    let spec = straight_ripple();
    let disc = small(16, 5);
    let nu = effective_eigs(&assemble_direct(&spec, 0.25, &FourierTruncation::new(L, 32)).unwrap(), 3).unwrap();
    let errs: Vec<f64> = [0.2, 0.1]
        .iter()
        .map(|&eps| {
            let e = fiber_spectrum(&spec, eps, 0.25, &disc, 3).unwrap();
            e.iter().zip(&nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[0] < 5e-3 && errs[1] < errs[0] / 3.0, "{errs:?}");
}

#[test]
fn free_reduction_defect_has_closed_form() {
    let disc = small(8, 5);
    let lambda2 = neumann_eigs(disc.grid(), 2).unwrap().values[1];
    for eps in [0.3, 0.1] {
        let d = reduction_defect(&free_tube(), eps, 0.2, &disc).unwrap();
        // Slowest transverse mode sits on the lowest longitudinal momentum |θ|.
        let want = 1.0 / (1.0 + 0.2f64.powi(2) + lambda2 / (eps * eps));
        assert!((d - want).abs() < 1e-9, "eps = {eps}: {d} vs {want}");
    }
}

#[test]
fn self_intersecting_tube_is_rejected() {
    let disc = small(8, 3);
    let err = fiber_spectrum(&helix_square(), 1.5, 0.0, &disc, 1).unwrap_err();
    assert!(matches!(err, FiberError::Geometry(GeometryError::TubeSelfIntersecting { .. })), "{err:?}");
}

#[test]
fn refinement_scales_both_directions() {
    let disc = small(24, 9);
    let fine = disc.refined(1.5).unwrap();
    assert_eq!(fine.n_s(), 36);
    assert_eq!(fine.grid().dims(), (13, 13));
    assert!(fiber_spectrum(&free_tube(), 0.1, PI, &disc, 1).is_err());
}
