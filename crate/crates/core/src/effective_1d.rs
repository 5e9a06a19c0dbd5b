//! Effective fiber operator `T^θ = (−i∂_s + θ)² + h''/h + c` and its corrected
//! variant in a truncated trigonometric basis on `[0, L)`.

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};
use thiserror::Error;

use crate::eigensolve::{hermitian_eigs, EigenError};
use crate::geometry::{GeometryError, PeriodicScalar, WaveguideSpec};

/// Relative spacing below which eigenvalues are reported as one cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffectiveError {
    #[error("quasi-momentum {theta} outside the Brillouin zone [-{limit}, {limit}]")]
    ThetaOutOfZone { theta: f64, limit: f64 },
    #[error("effective eigensolve failed: {0}")]
    SolverFailure(#[from] EigenError),
    #[error("eigen residual {residual:e} exceeds tolerance")]
    InaccurateSolve { residual: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Basis `e_m(s) = exp(2πims/L)/√L` for `|m| ≤ M`; index `j` holds `m = j − M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTruncation {
    period: f64,
    max_mode: usize,
}

impl FourierTruncation {
    pub fn new(period: f64, max_mode: usize) -> Self {
        assert!(period > 0.0 && max_mode >= 1, "need L > 0 and M >= 1");
        Self { period, max_mode }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn dim(&self) -> usize {
        2 * self.max_mode + 1
    }

    pub fn mode(&self, j: usize) -> i64 {
        j as i64 - self.max_mode as i64
    }

    /// Diagonal of `−i∂_s + θ`: `2πm/L + θ`.
    pub fn momentum(&self, theta: f64) -> Vec<f64> {
        (0..self.dim()).map(|j| 2.0 * PI * self.mode(j) as f64 / self.period + theta).collect()
    }

    /// Matrix of multiplication by `f`: the Toeplitz matrix `f̂_{m_j − m_k}`.
    pub fn multiplication(&self, f: &PeriodicScalar) -> Mat<c64> {
        self.multiplication_between(self, f)
    }

    /// Multiplication by `f` from this basis into `target`.
    fn multiplication_between(&self, target: &FourierTruncation, f: &PeriodicScalar) -> Mat<c64> {
        Mat::from_fn(target.dim(), self.dim(), |i, k| f.fourier_coefficient(target.mode(i) - self.mode(k)))
    }

    /// `G = D + iθ − M_g` from this basis into the basis with twice the modes,
    /// so that `G*G` is the exact Galerkin matrix of `∫|w' + iθw − gw|²`.
    fn first_order(&self, theta: f64, g: &PeriodicScalar) -> Mat<c64> {
        let wide = FourierTruncation::new(self.period, 2 * self.max_mode);
        let mut op = self.multiplication_between(&wide, g);
        for v in op.as_mut().col_iter_mut().flat_map(|c| c.iter_mut()) {
            *v = -*v;
        }
        for k in 0..self.dim() {
            let i = k + self.max_mode;
            let p = 2.0 * PI * self.mode(k) as f64 / self.period + theta;
            op[(i, k)] += c64::new(0.0, p);
        }
        op
    }
}

/// Complex matrix equal to its adjoint; construction symmetrizes.
#[derive(Clone, Debug)]
pub struct HermitianMatrix(Mat<c64>);

impl HermitianMatrix {
    pub fn new(m: Mat<c64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "matrix must be square");
        let n = m.nrows();
        Self(Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5))
    }

    pub fn as_ref(&self) -> MatRef<'_, c64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<c64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |a_ij − b_ij|`.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim() {
            for i in 0..self.dim() {
                worst = worst.max((self.0[(i, j)] - other.0[(i, j)]).norm());
            }
        }
        worst
    }
}

fn check_theta(period: f64, theta: f64) -> Result<(), EffectiveError> {
    let limit = PI / period;
    if theta.abs() <= limit * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(EffectiveError::ThetaOutOfZone { theta, limit })
    }
}

/// `(−i∂_s + θ)² + V + c` for an arbitrary real potential `V`.
pub fn assemble_with_potential(
    trunc: &FourierTruncation,
    theta: f64,
    potential: &PeriodicScalar,
    c: f64,
) -> Result<HermitianMatrix, EffectiveError> {
    check_theta(trunc.period(), theta)?;
    let mut m = trunc.multiplication(potential);
    for (j, p) in trunc.momentum(theta).into_iter().enumerate() {
        m[(j, j)] += c64::new(p * p + c, 0.0);
    }
    Ok(HermitianMatrix::new(m))
}

/// `T^θ` with the potential `h''/h` from the geometry.
pub fn assemble_direct(
    spec: &WaveguideSpec,
    theta: f64,
    trunc: &FourierTruncation,
) -> Result<HermitianMatrix, EffectiveError> {
    assemble_with_potential(trunc, theta, &spec.potential(), spec.shift())
}

/// Matrix of the form `∫|w' + h_θ w|² + c|w|²` with `h_θ = iθ − h'/h`.
pub fn assemble_form(
    spec: &WaveguideSpec,
    theta: f64,
    trunc: &FourierTruncation,
) -> Result<HermitianMatrix, EffectiveError> {
    check_theta(trunc.period(), theta)?;
    Ok(gram_plus_shift(trunc.first_order(theta, &spec.log_derivative()), spec.shift()))
}

/// Matrix of `∫|w' + h_θ w − (a_ε'/(2a_ε)) w|² + c|w|²`.
pub fn assemble_corrected(
    spec: &WaveguideSpec,
    eps: f64,
    theta: f64,
    trunc: &FourierTruncation,
) -> Result<HermitianMatrix, EffectiveError> {
    check_theta(trunc.period(), theta)?;
    if eps != 0.0 {
        spec.validate_epsilon(eps)?;
    }
    let a = spec.averaged_weight(eps);
    let half_log_a = a.derivative(1).zip_with(&a, |da, a| da / (2.0 * a));
    let g = spec.log_derivative().zip_with(&half_log_a, |x, y| x + y);
    Ok(gram_plus_shift(trunc.first_order(theta, &g), spec.shift()))
}

fn gram_plus_shift(g: Mat<c64>, c: f64) -> HermitianMatrix {
    let mut m = g.adjoint() * &g;
    for j in 0..m.nrows() {
        m[(j, j)] += c64::new(c, 0.0);
    }
    HermitianMatrix::new(m)
}

/// Lowest `n_eigs` eigenvalues, ascending with multiplicity.
pub fn effective_eigs(matrix: &HermitianMatrix, n_eigs: usize) -> Result<Vec<f64>, EffectiveError> {
    let r = hermitian_eigs(matrix.as_ref(), n_eigs)?;
    let scale = 1.0 + r.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = r.max_residual() / scale;
    if residual > 1e-10 {
        return Err(EffectiveError::InaccurateSolve { residual });
    }
    Ok(r.values)
}

/// Groups ascending `values` into runs whose neighbours agree to
/// `CLUSTER_TOLERANCE` relative; returns index ranges.
pub fn degenerate_clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i] - values[i - 1]).abs()
                > CLUSTER_TOLERANCE * values[i].abs().max(values[i - 1].abs()).max(1.0);
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}
