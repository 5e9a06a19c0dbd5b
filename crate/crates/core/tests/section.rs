mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use wavebands::cross_section::{neumann_eigs, section_spectra, uniform_gap, weighted_section_eigs, SectionGrid};
use wavebands::geometry::SectionShape;

use common::*;

#[test]
fn unit_square_converges_at_second_order() {
    let exact = square_neumann(6);
    let err = |n: usize| {
        let grid = SectionGrid::new(SectionShape::unit_square(), n, n).unwrap();
        let v = neumann_eigs(&grid, 6).unwrap().values;
        (1..6).map(|k| (v[k] - exact[k]).abs()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(11), err(21));
    let order = (coarse / fine).ln() / 2f64.ln();
    assert!(order > 1.8, "observed order {order}");
}

#[test]
fn rectangle_spectrum_scales_with_sides() {
    let shape = SectionShape::rectangle(2.0, 1.0, [0.3, -0.2]).unwrap();
    let grid = SectionGrid::new(shape, 41, 21).unwrap();
    let v = neumann_eigs(&grid, 4).unwrap().values;
    let want = [0.0, PI * PI / 4.0, PI * PI, PI * PI];
    for (g, w) in v.iter().zip(want) {
        assert!((g - w).abs() <= 5e-3 * (1.0 + w), "{g} vs {w}");
    }
}

#[test]
fn averaged_weight_matches_quadrature() {
    for (name, spec) in test_geometries() {
        let a = spec.averaged_weight(0.15);
        for j in 0..7 {
            let s = j as f64 * L / 7.0;
            let q = averaged_weight_quadrature(&spec, 0.15, s);
            assert!((a.value(s) - q).abs() < 1e-10, "{name} at s = {s}");
        }
    }
}

#[test]
fn weighted_problem_reduces_to_neumann_when_straight() {
    let grid = SectionGrid::new(SectionShape::unit_square(), 9, 9).unwrap();
    let plain = neumann_eigs(&grid, 4).unwrap().values;
    let weighted = weighted_section_eigs(&grid, &straight_ripple(), 0.3, 1.0, 4).unwrap().values;
    for (a, b) in plain.iter().zip(&weighted) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn helix_gap_stays_near_square_value() {
    let grid = SectionGrid::new(SectionShape::unit_square(), 13, 13).unwrap();
    let gamma = uniform_gap(&grid, &helix_square(), 0.1, 16).unwrap();
    assert!((0.9 * PI * PI..=1.05 * PI * PI).contains(&gamma), "gamma = {gamma}");
}

#[test]
fn spectra_are_returned_in_sample_order() {
    let grid = SectionGrid::new(SectionShape::unit_square(), 5, 5).unwrap();
    let out = section_spectra(&grid, &helix_square(), 0.2, 8, 2).unwrap();
    let s: Vec<f64> = out.iter().map(|(s, _)| *s).collect();
    assert!(s.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lowest_mode_is_constant_for_any_weight(eps in 0.0f64..0.5, s in 0.0f64..L) {
        let grid = SectionGrid::new(SectionShape::unit_square(), 6, 6).unwrap();
        let sp = weighted_section_eigs(&grid, &helix_square(), eps, s, 2).unwrap();
        prop_assert!(sp.values[0].abs() < 1e-9);
        let v0 = sp.vectors.col(0);
        let first = v0[0];
        for i in 0..v0.nrows() {
            prop_assert!((v0[i] - first).abs() < 1e-7 * first.abs().max(1.0));
        }
    }
}
