//! Neumann eigenproblem on the rectangular cross-section, discretized with
//! bilinear elements. Neumann conditions are natural in the form, so no
//! boundary rows are touched.

use faer::Mat;
use rayon::prelude::*;
use thiserror::Error;

use crate::eigensolve::{generalized_eigs, EigenError, PencilMatrix, SolveMode, SparseMatrix};
use crate::geometry::{GeometryError, SectionShape, WaveguideSpec};

/// Shift for the cross-section pencils; the stiffness is only semidefinite.
const SECTION_SHIFT: f64 = -0.5;

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectionError {
    #[error("cross-section eigensolve failed: {0}")]
    SolverFailure(#[from] EigenError),
    #[error("uniform spectral gap violated: min lambda_2 = {gamma}")]
    GapViolation { gamma: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid section grid: {0}")]
    InvalidGrid(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

/// Quadrature point of one element with the values and gradients of its four
/// nodal basis functions.
#[derive(Clone, Copy, Debug)]
pub struct GaussPoint {
    pub y: [f64; 2],
    pub weight: f64,
    pub nodes: [usize; 4],
    pub phi: [f64; 4],
    pub grad: [[f64; 2]; 4],
}

/// Tensor grid of `n1 × n2` nodes on the section; node `(i, j)` has index `i + n1·j`.
#[derive(Clone, Debug)]
pub struct SectionGrid {
    shape: SectionShape,
    n1: usize,
    n2: usize,
    quadrature: Vec<GaussPoint>,
}

impl SectionGrid {
    pub fn new(shape: SectionShape, n1: usize, n2: usize) -> Result<Self, SectionError> {
        if n1 < 3 || n2 < 3 {
            return Err(SectionError::InvalidGrid(format!("need at least 3x3 nodes, got {n1}x{n2}")));
        }
        let ([lo1, lo2], [hi1, hi2]) = shape.bounds();
        let h1 = (hi1 - lo1) / (n1 - 1) as f64;
        let h2 = (hi2 - lo2) / (n2 - 1) as f64;
        let mut quadrature = Vec::with_capacity(4 * (n1 - 1) * (n2 - 1));
        for ej in 0..n2 - 1 {
            for ei in 0..n1 - 1 {
                let nodes = [ei + n1 * ej, ei + 1 + n1 * ej, ei + n1 * (ej + 1), ei + 1 + n1 * (ej + 1)];
                for &gx in &GAUSS {
                    for &gy in &GAUSS {
                        // Reference coordinates in [0, 1]².
                        let (u, v) = (0.5 * (1.0 + gx), 0.5 * (1.0 + gy));
                        let phi = [(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v];
                        let grad = [
                            [-(1.0 - v) / h1, -(1.0 - u) / h2],
                            [(1.0 - v) / h1, -u / h2],
                            [-v / h1, (1.0 - u) / h2],
                            [v / h1, u / h2],
                        ];
                        let y = [lo1 + (ei as f64 + u) * h1, lo2 + (ej as f64 + v) * h2];
                        quadrature.push(GaussPoint { y, weight: 0.25 * h1 * h2, nodes, phi, grad });
                    }
                }
            }
        }
        Ok(Self { shape, n1, n2, quadrature })
    }

    pub fn shape(&self) -> &SectionShape {
        &self.shape
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn n_nodes(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn node_position(&self, index: usize) -> [f64; 2] {
        let ([lo1, lo2], [hi1, hi2]) = self.shape.bounds();
        let (i, j) = (index % self.n1, index / self.n1);
        [lo1 + (hi1 - lo1) * i as f64 / (self.n1 - 1) as f64, lo2 + (hi2 - lo2) * j as f64 / (self.n2 - 1) as f64]
    }

    /// 2×2 Gauss points of every element.
    pub fn quadrature(&self) -> &[GaussPoint] {
        &self.quadrature
    }

    /// Stiffness `∫ w_K ∇u·∇v` and mass `∫ w_M u v`.
    pub fn assemble(
        &self,
        stiffness_weight: impl Fn([f64; 2]) -> f64,
        mass_weight: impl Fn([f64; 2]) -> f64,
    ) -> (SparseMatrix<f64>, SparseMatrix<f64>) {
        let mut k = Vec::with_capacity(16 * self.quadrature.len());
        let mut m = Vec::with_capacity(16 * self.quadrature.len());
        for g in &self.quadrature {
            let wk = g.weight * stiffness_weight(g.y);
            let wm = g.weight * mass_weight(g.y);
            for a in 0..4 {
                for b in 0..4 {
                    let dot = g.grad[a][0] * g.grad[b][0] + g.grad[a][1] * g.grad[b][1];
                    k.push((g.nodes[a], g.nodes[b], wk * dot));
                    m.push((g.nodes[a], g.nodes[b], wm * g.phi[a] * g.phi[b]));
                }
            }
        }
        let n = self.n_nodes();
        (SparseMatrix::from_triplets(n, k), SparseMatrix::from_triplets(n, m))
    }
}

/// Ascending eigenvalues with eigenvectors orthonormal in the mass inner product.
#[derive(Clone, Debug)]
pub struct SectionSpectrum {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

/// Eigenpairs of `−Δ_S` with Neumann boundary conditions.
pub fn neumann_eigs(grid: &SectionGrid, n_eigs: usize) -> Result<SectionSpectrum, SectionError> {
    let (k, m) = grid.assemble(|_| 1.0, |_| 1.0);
    solve(k, m, n_eigs)
}

/// Eigenpairs of the section problem with both forms weighted by `β_ε(s, ·)`.
/// `ε = 0` is accepted and gives the unweighted problem.
pub fn weighted_section_eigs(
    grid: &SectionGrid,
    spec: &WaveguideSpec,
    eps: f64,
    s: f64,
    n_eigs: usize,
) -> Result<SectionSpectrum, SectionError> {
    if eps != 0.0 {
        spec.validate_epsilon(eps)?;
    }
    let beta = |y| spec.beta(eps, s, y);
    let (k, m) = grid.assemble(beta, beta);
    solve(k, m, n_eigs)
}

/// Weighted section spectra at `s_j = jL/s_samples`, in order of `j`.
pub fn section_spectra(
    grid: &SectionGrid,
    spec: &WaveguideSpec,
    eps: f64,
    s_samples: usize,
    n_eigs: usize,
) -> Result<Vec<(f64, SectionSpectrum)>, SectionError> {
    if s_samples == 0 {
        return Err(SectionError::InvalidRequest("need at least one s sample".into()));
    }
    (0..s_samples)
        .into_par_iter()
        .map(|j| {
            let s = j as f64 * spec.period() / s_samples as f64;
            weighted_section_eigs(grid, spec, eps, s, n_eigs).map(|sp| (s, sp))
        })
        .collect()
}

/// `γ̃ = min_s λ_ε²(s)` over `s_samples` equispaced points of the period.
pub fn uniform_gap(grid: &SectionGrid, spec: &WaveguideSpec, eps: f64, s_samples: usize) -> Result<f64, SectionError> {
    if s_samples < 8 {
        return Err(SectionError::InvalidRequest(format!("need at least 8 s samples, got {s_samples}")));
    }
    let gamma = section_spectra(grid, spec, eps, s_samples, 2)?
        .iter()
        .map(|(_, sp)| sp.values[1])
        .fold(f64::INFINITY, f64::min);
    if gamma > 0.0 {
        Ok(gamma)
    } else {
        Err(SectionError::GapViolation { gamma })
    }
}

fn solve(k: SparseMatrix<f64>, m: SparseMatrix<f64>, n_eigs: usize) -> Result<SectionSpectrum, SectionError> {
    let r = generalized_eigs(
        &PencilMatrix::Sparse(k),
        &PencilMatrix::Sparse(m),
        n_eigs,
        SolveMode::Auto { shift: SECTION_SHIFT },
    )?;
    Ok(SectionSpectrum { values: r.values, vectors: r.vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PeriodicScalar;
    use std::f64::consts::PI;

    #[test]
    fn rejects_coarse_grid() {
        assert!(SectionGrid::new(SectionShape::unit_square(), 2, 5).is_err());
    }

    #[test]
    fn stiffness_kills_constants_and_mass_integrates_area() {
        let shape = SectionShape::rectangle(2.0, 0.5, [0.3, 0.0]).unwrap();
        let grid = SectionGrid::new(shape, 5, 4).unwrap();
        let (k, m) = grid.assemble(|_| 1.0, |_| 1.0);
        let ones = vec![1.0; grid.n_nodes()];
        assert!(k.apply(&ones).iter().all(|v| v.abs() <= 1e-12));
        let area: f64 = m.apply(&ones).iter().sum();
        assert!((area - 1.0).abs() <= 1e-13);
        assert!(k.max_asymmetry() <= 1e-14);
    }

    #[test]
    fn quadrature_integrates_affine_weight_exactly() {
        let grid = SectionGrid::new(SectionShape::rectangle(1.0, 1.0, [0.5, 0.0]).unwrap(), 4, 6).unwrap();
        let integral: f64 = grid.quadrature().iter().map(|g| g.weight * (1.0 - 0.1 * g.y[0])).sum();
        assert!((integral - 0.95).abs() <= 1e-14);
    }

    #[test]
    fn unit_square_low_modes() {
        let grid = SectionGrid::new(SectionShape::unit_square(), 33, 33).unwrap();
        let sp = neumann_eigs(&grid, 4).unwrap();
        assert!(sp.values[0].abs() <= 1e-8);
        let pi2 = PI * PI;
        for (got, want) in sp.values[1..].iter().zip([pi2, pi2, 2.0 * pi2]) {
            assert!((got - want).abs() / want < 0.01, "{got} vs {want}");
        }
        let first: Vec<f64> = (0..grid.n_nodes()).map(|i| sp.vectors[(i, 0)]).collect();
        assert!(first.iter().all(|v| (v.abs() - 1.0).abs() <= 1e-6));
    }

    #[test]
    fn mass_shift_moves_every_eigenvalue() {
        let grid = SectionGrid::new(SectionShape::unit_square(), 7, 7).unwrap();
        let (k, m) = grid.assemble(|_| 1.0, |_| 1.0);
        let base = solve(k.clone(), m.clone(), 5).unwrap();
        let shifted = solve(k.add_scaled(2.5, &m), m, 5).unwrap();
        for (a, b) in base.values.iter().zip(&shifted.values) {
            assert!((b - a - 2.5).abs() <= 1e-10);
        }
    }

    #[test]
    fn straight_tube_weight_is_trivial() {
        let grid = SectionGrid::new(SectionShape::unit_square(), 9, 9).unwrap();
        let spec = WaveguideSpec::straight(2.0 * PI).unwrap();
        let plain = neumann_eigs(&grid, 4).unwrap();
        let weighted = weighted_section_eigs(&grid, &spec, 0.3, 1.0, 4).unwrap();
        for (a, b) in plain.values.iter().zip(&weighted.values) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn uniform_gap_requires_enough_samples() {
        let grid = SectionGrid::new(SectionShape::unit_square(), 5, 5).unwrap();
        let spec = WaveguideSpec::straight(1.0).unwrap();
        assert!(matches!(uniform_gap(&grid, &spec, 0.1, 4), Err(SectionError::InvalidRequest(_))));
    }

    #[test]
    fn curved_tube_keeps_gap() {
        let l = 2.0 * PI;
        let spec = WaveguideSpec::builder(l).curvature(PeriodicScalar::constant(l, 16, 1.0).unwrap()).build().unwrap();
        let grid = SectionGrid::new(SectionShape::unit_square(), 9, 9).unwrap();
        let gamma = uniform_gap(&grid, &spec, 0.1, 8).unwrap();
        assert!(gamma > 0.9 * PI * PI);
    }
}
