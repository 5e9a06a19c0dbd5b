//! Geometries and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use wavebands::geometry::{PeriodicScalar, SectionShape, WaveguideSpec};

pub const L: f64 = 2.0 * PI;
const SAMPLES: usize = 64;

pub fn constant(value: f64) -> PeriodicScalar {
    PeriodicScalar::constant(L, SAMPLES, value).unwrap()
}

/// `h(s) = 1 + amp·cos(2πs/L)`.
pub fn ripple(amp: f64) -> PeriodicScalar {
    PeriodicScalar::from_cosine_series(L, SAMPLES, &[(0, 1.0, 0.0), (1, amp, 0.0)]).unwrap()
}

pub fn free_tube() -> WaveguideSpec {
    WaveguideSpec::straight(L).unwrap()
}

pub fn straight_ripple() -> WaveguideSpec {
    WaveguideSpec::builder(L).profile(ripple(0.3)).build().unwrap()
}

/// Constant curvature and torsion 1 with the same profile as [`straight_ripple`].
pub fn helix_ripple() -> WaveguideSpec {
    WaveguideSpec::builder(L).profile(ripple(0.3)).curvature(constant(1.0)).torsion(constant(1.0)).build().unwrap()
}

pub fn helix_square() -> WaveguideSpec {
    WaveguideSpec::builder(L).curvature(constant(1.0)).torsion(constant(1.0)).build().unwrap()
}

/// Five profiles of increasing roughness, some on bent or twisted tubes.
pub fn test_geometries() -> Vec<(&'static str, WaveguideSpec)> {
    let series = |terms: &[(u32, f64, f64)]| PeriodicScalar::from_cosine_series(L, SAMPLES, terms).unwrap();
    vec![
        ("ripple", straight_ripple()),
        (
            "two-harmonic",
            WaveguideSpec::builder(L).profile(series(&[(0, 1.0, 0.0), (1, 0.2, 0.0), (2, 0.1, 0.7)])).build().unwrap(),
        ),
        (
            "phase-shifted",
            WaveguideSpec::builder(L).profile(series(&[(0, 1.5, 0.0), (3, 0.4, 1.1)])).shift(2.0).build().unwrap(),
        ),
        ("helix", helix_ripple()),
        (
            "offset-rectangle",
            WaveguideSpec::builder(L)
                .profile(series(&[(0, 1.0, 0.0), (1, 0.25, 0.3), (2, 0.05, 0.0)]))
                .curvature(series(&[(0, 0.5, 0.0), (1, 0.2, 0.0)]))
                .rotation(series(&[(1, 0.3, PI / 2.0)]))
                .section(SectionShape::rectangle(1.0, 0.6, [0.1, -0.05]).unwrap())
                .build()
                .unwrap(),
        ),
    ]
}

/// Lowest `n` values of `(k + θ)² + c`, `k ∈ ℤ`, for the free tube of period `2π`.
pub fn free_eigenvalues(theta: f64, c: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (-(n as i64) - 1..=n as i64 + 1).map(|k| (k as f64 + theta).powi(2) + c).collect();
    v.sort_by(f64::total_cmp);
    v.truncate(n);
    v
}

/// Neumann eigenvalues `π²(m² + n²)` of the unit square, lowest `count`.
pub fn square_neumann(count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..8).flat_map(|m| (0..8).map(move |n| PI * PI * (m * m + n * n) as f64)).collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (`e[i]` couples `i, i + 1`).
struct Tridiagonal {
    d: Vec<f64>,
    e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm count).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] };
            q = self.d[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th eigenvalue (0-based), by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let radius = self.d.iter().map(|d| d.abs()).fold(0.0, f64::max)
            + 2.0 * self.e.iter().map(|e| e.abs()).fold(0.0, f64::max);
        let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

const MATHIEU_TERMS: usize = 80;

/// Recurrence matrices for `−y'' + 2q cos(2s) y = a y`: `a_{2r}`, `b_{2r+2}`,
/// `a_{2r+1}`, `b_{2r+1}`.
fn mathieu_matrix(kind: &str, q: f64) -> Tridiagonal {
    let n = MATHIEU_TERMS;
    let sq = |j: usize| (j * j) as f64;
    let (d, mut e): (Vec<f64>, Vec<f64>) = match kind {
        "a_even" => ((0..n).map(|r| sq(2 * r)).collect(), vec![q; n - 1]),
        "b_even" => ((0..n).map(|r| sq(2 * r + 2)).collect(), vec![q; n - 1]),
        "a_odd" => ((0..n).map(|r| sq(2 * r + 1) + if r == 0 { q } else { 0.0 }).collect(), vec![q; n - 1]),
        "b_odd" => ((0..n).map(|r| sq(2 * r + 1) - if r == 0 { q } else { 0.0 }).collect(), vec![q; n - 1]),
        _ => unreachable!(),
    };
    if kind == "a_even" {
        e[0] = 2f64.sqrt() * q;
    }
    Tridiagonal { d, e }
}

/// Lowest `count` characteristic values of the period-`π` (`even = true`) or
/// antiperiodic problem for the Mathieu potential `2q cos 2s`.
pub fn mathieu_values(q: f64, even: bool, count: usize) -> Vec<f64> {
    let kinds: [&str; 2] = if even { ["a_even", "b_even"] } else { ["a_odd", "b_odd"] };
    let mut v: Vec<f64> = kinds
        .iter()
        .flat_map(|k| {
            let m = mathieu_matrix(k, q);
            (0..count).map(move |j| m.eigenvalue(j))
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

/// Residual of the continued-fraction characteristic equation for `a_0`:
/// `a − 2q²/(a − 4 − q²/(a − 16 − …))`.
pub fn mathieu_a0_fraction(a: f64, q: f64) -> f64 {
    let mut tail = 0.0;
    for r in (1..MATHIEU_TERMS).rev() {
        tail = q * q / (a - (4 * r * r) as f64 - tail);
    }
    a - 2.0 * tail
}

/// `∫_S β_ε(s, y) dy` by tensor Gauss–Legendre quadrature (5 × 5 points).
pub fn averaged_weight_quadrature(spec: &WaveguideSpec, eps: f64, s: f64) -> f64 {
    const X: [f64; 5] =
        [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let (lo, hi) = spec.section().bounds();
    let (h1, h2) = ((hi[0] - lo[0]) / 2.0, (hi[1] - lo[1]) / 2.0);
    let mut total = 0.0;
    for (xi, wi) in X.iter().zip(W) {
        for (xj, wj) in X.iter().zip(W) {
            let y = [lo[0] + h1 * (1.0 + xi), lo[1] + h2 * (1.0 + xj)];
            total += wi * wj * h1 * h2 * spec.beta(eps, s, y);
        }
    }
    total
}
