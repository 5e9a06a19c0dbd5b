//! Generalized Hermitian eigenproblems `A v = λ B v` with `B` positive definite.
//!
//! Two paths are provided. The dense path factors `B = L L*`, diagonalizes the
//! reduced matrix `L⁻¹ A L⁻*` and back-transforms. The shift-invert path builds
//! a block Krylov space of `(A − σB)⁻¹ B` with full B-orthogonalization and
//! extracts the lowest eigenpairs by Rayleigh–Ritz; it only needs a sparse
//! Cholesky factorization and is the path of choice when few eigenvalues of a
//! large pencil are wanted.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, MatRef, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Above this dimension `SolveMode::Auto` switches to shift-invert.
pub const AUTO_DENSE_LIMIT: usize = 600;

/// Relative residual every accepted eigenpair must satisfy.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const KRYLOV_TARGET: f64 = 1e-9;
const BLOCK_SIZE: usize = 4;
const MAX_KRYLOV_DIM: usize = 480;
const START_SEED: u64 = 0x5eed_ba4d;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("mass matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("shifted matrix A - {shift}B is not positive definite; shift must lie below the spectrum")]
    ShiftNotBelowSpectrum { shift: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("requested {requested} eigenpairs from a pencil of dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },
    #[error("matrix dimensions do not agree ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

/// Field scalars the solvers run on: `f64` and `c64`.
pub trait Scalar:
    faer::traits::ComplexField<Real = f64>
    + Copy
    + Default
    + Send
    + Sync
    + Debug
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_real(x: f64) -> Self;
    fn conjugate(self) -> Self;
    fn modulus_sq(self) -> f64;
    fn real_part(self) -> f64;
    fn imag_part(self) -> f64;
    fn sample<R: Rng>(rng: &mut R) -> Self;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn conjugate(self) -> Self {
        self
    }
    fn modulus_sq(self) -> f64 {
        self * self
    }
    fn real_part(self) -> f64 {
        self
    }
    fn imag_part(self) -> f64 {
        0.0
    }
    fn sample<R: Rng>(rng: &mut R) -> Self {
        rng.gen_range(-1.0..1.0)
    }
}

impl Scalar for c64 {
    fn from_real(x: f64) -> Self {
        c64::new(x, 0.0)
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
    fn modulus_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn real_part(self) -> f64 {
        self.re
    }
    fn imag_part(self) -> f64 {
        self.im
    }
    fn sample<R: Rng>(rng: &mut R) -> Self {
        c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}

/// Square sparse matrix in compressed-row form. Duplicate entries are summed
/// at construction.
#[derive(Clone, Debug)]
pub struct SparseMatrix<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, T)>) -> Self {
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside {dim}x{dim}");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = T::default();
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                acc
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<T> {
        let mut m = Mat::<T>::zeros(self.dim, self.dim);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::from_real(0.5);
        let entries = self.triplets().flat_map(|(i, j, v)| [(i, j, v * half), (j, i, v.conjugate() * half)]).collect();
        Self::from_triplets(self.dim, entries)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Self) -> Self {
        let f = T::from_real(factor);
        let entries = self.triplets().chain(other.triplets().map(|(i, j, v)| (i, j, v * f))).collect();
        Self::from_triplets(self.dim, entries)
    }

    /// Largest `|a_ij − conj(a_ji)|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().map(|(i, j, v)| (v - self.get(j, i).conjugate()).modulus_sq().sqrt()).fold(0.0, f64::max)
    }

    fn to_faer(&self) -> SparseColMat<usize, T> {
        let trip: Vec<_> = self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.dim, self.dim, &trip).expect("triplets are in range by construction")
    }
}

/// Storage of one side of a pencil.
#[derive(Clone, Debug)]
pub enum PencilMatrix<T> {
    Dense(Mat<T>),
    Sparse(SparseMatrix<T>),
}

impl<T: Scalar> PencilMatrix<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(m) => m.nrows(),
            Self::Sparse(s) => s.dim(),
        }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        match self {
            Self::Dense(m) => dense_apply(m.as_ref(), x),
            Self::Sparse(s) => s.apply(x),
        }
    }

    pub fn to_dense(&self) -> Mat<T> {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Sparse(s) => s.to_dense(),
        }
    }

    fn hermitian_part(&self) -> Self {
        match self {
            Self::Dense(m) => Self::Dense(hermitian_part(m.as_ref())),
            Self::Sparse(s) => Self::Sparse(s.hermitian_part()),
        }
    }
}

impl<T> From<Mat<T>> for PencilMatrix<T> {
    fn from(m: Mat<T>) -> Self {
        Self::Dense(m)
    }
}

impl<T> From<SparseMatrix<T>> for PencilMatrix<T> {
    fn from(s: SparseMatrix<T>) -> Self {
        Self::Sparse(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMode {
    Dense,
    /// Shift-invert Krylov; `shift` must lie strictly below the spectrum.
    ShiftInvert {
        shift: f64,
    },
    /// Dense for small problems or when a large share of the spectrum is
    /// requested, shift-invert otherwise.
    Auto {
        shift: f64,
    },
}

/// Lowest eigenpairs of a pencil, ascending, with B-orthonormal vectors.
#[derive(Clone, Debug)]
pub struct EigenResult<T> {
    pub values: Vec<f64>,
    /// One eigenvector per column.
    pub vectors: Mat<T>,
    pub residuals: Vec<f64>,
}

impl<T: Scalar> EigenResult<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn generalized_eigs<T: Scalar>(
    a: &PencilMatrix<T>,
    b: &PencilMatrix<T>,
    n_eigs: usize,
    mode: SolveMode,
) -> Result<EigenResult<T>, EigenError> {
    let dim = a.dim();
    if b.dim() != dim {
        return Err(EigenError::DimensionMismatch(dim, b.dim()));
    }
    if n_eigs > dim {
        return Err(EigenError::TooManyEigenpairs { requested: n_eigs, dim });
    }
    let a = a.hermitian_part();
    let b = b.hermitian_part();
    match mode {
        SolveMode::Dense => dense_generalized(&a, &b, n_eigs),
        SolveMode::ShiftInvert { shift } => shift_invert(&a, &b, n_eigs, shift),
        SolveMode::Auto { shift } => {
            if dim <= AUTO_DENSE_LIMIT || 4 * n_eigs > dim {
                dense_generalized(&a, &b, n_eigs)
            } else {
                shift_invert(&a, &b, n_eigs, shift)
            }
        }
    }
}

/// Lowest eigenpairs of a Hermitian matrix (`B = I`).
pub fn hermitian_eigs<T: Scalar>(a: MatRef<'_, T>, n_eigs: usize) -> Result<EigenResult<T>, EigenError> {
    let dim = a.nrows();
    if a.ncols() != dim {
        return Err(EigenError::DimensionMismatch(dim, a.ncols()));
    }
    if n_eigs > dim {
        return Err(EigenError::TooManyEigenpairs { requested: n_eigs, dim });
    }
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| EigenError::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values: Vec<f64> = (0..n_eigs).map(|k| s[k].real_part()).collect();
    let vectors = Mat::from_fn(dim, n_eigs, |i, k| u[(i, k)]);
    let a_op = PencilMatrix::Dense(h);
    let residuals = (0..n_eigs)
        .map(|k| {
            let v: Vec<T> = (0..dim).map(|i| vectors[(i, k)]).collect();
            relative_residual(&a_op, None, values[k], &v)
        })
        .collect();
    Ok(EigenResult { values, vectors, residuals })
}

/// `max_i ‖A v_i − λ_i B v_i‖ / ‖B v_i‖`.
pub fn residual_check<T: Scalar>(a: &PencilMatrix<T>, b: &PencilMatrix<T>, result: &EigenResult<T>) -> f64 {
    (0..result.len()).map(|k| relative_residual(a, Some(b), result.values[k], &result.vector(k))).fold(0.0, f64::max)
}

fn relative_residual<T: Scalar>(a: &PencilMatrix<T>, b: Option<&PencilMatrix<T>>, lambda: f64, v: &[T]) -> f64 {
    let av = a.apply(v);
    let bv = match b {
        Some(b) => b.apply(v),
        None => v.to_vec(),
    };
    let l = T::from_real(lambda);
    let r = norm(&av.iter().zip(&bv).map(|(&x, &y)| x - l * y).collect::<Vec<_>>());
    r / norm(&bv)
}

fn dense_generalized<T: Scalar>(
    a: &PencilMatrix<T>,
    b: &PencilMatrix<T>,
    n_eigs: usize,
) -> Result<EigenResult<T>, EigenError> {
    let dim = a.dim();
    let (a_dense, b_dense) = (a.to_dense(), b.to_dense());
    let (all_values, all_vectors) = reduced_eigen(&a_dense, &b_dense)?;
    let values: Vec<f64> = all_values[..n_eigs].to_vec();
    let vectors = Mat::from_fn(dim, n_eigs, |i, k| all_vectors[(i, k)]);
    let result = with_residuals(a, b, values, vectors);
    if n_eigs == 0 || result.max_residual() <= 0.1 * RESIDUAL_TOLERANCE {
        return Ok(result);
    }
    // Stiff pencils leave an O(eps·‖L⁻¹AL⁻*‖) error in the reduced eigenvectors;
    // one block step of shifted inverse iteration removes it.
    let block = (n_eigs + BLOCK_SIZE).min(dim);
    let start = Mat::from_fn(dim, block, |i, k| all_vectors[(i, k)]);
    let shift = all_values[0] - 0.5 * (1.0 + all_values[0].abs());
    match polish(&a_dense, &b_dense, start, shift, n_eigs) {
        Some((values, vectors)) => {
            let polished = with_residuals(a, b, values, vectors);
            Ok(if polished.max_residual() < result.max_residual() { polished } else { result })
        }
        None => Ok(result),
    }
}

/// All eigenpairs of the dense pencil, ascending, with B-orthonormal vectors.
fn reduced_eigen<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<(Vec<f64>, Mat<T>), EigenError> {
    let llt = b.llt(Side::Lower).map_err(|_| EigenError::NotPositiveDefinite)?;
    let l = llt.L();
    // C = L⁻¹ A L⁻*, formed as L⁻¹ (L⁻¹ A)* using A = A*.
    let mut x = a.clone();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.adjoint().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    let c = hermitian_part(c.as_ref());
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| EigenError::NoConvergence { iterations: 0, residual: f64::NAN })?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..a.nrows()).map(|k| s[k].real_part()).collect();
    let mut vectors = evd.U().to_owned();
    l.adjoint().solve_upper_triangular_in_place(vectors.as_mut());
    Ok((values, vectors))
}

/// `X = (A − σB)⁻¹ B V` followed by Rayleigh–Ritz on `span X`.
fn polish<T: Scalar>(a: &Mat<T>, b: &Mat<T>, v: Mat<T>, shift: f64, n_eigs: usize) -> Option<(Vec<f64>, Mat<T>)> {
    let f = T::from_real(shift);
    let k = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - f * b[(i, j)]);
    let llt = k.llt(Side::Lower).ok()?;
    let mut x = b * &v;
    llt.solve_in_place(x.as_mut());
    let ax = hermitian_part((x.adjoint() * (a * &x)).as_ref());
    let bx = hermitian_part((x.adjoint() * (b * &x)).as_ref());
    let (values, y) = reduced_eigen(&ax, &bx).ok()?;
    let vectors = &x * y.subcols(0, n_eigs);
    Some((values[..n_eigs].to_vec(), vectors))
}

fn with_residuals<T: Scalar>(
    a: &PencilMatrix<T>,
    b: &PencilMatrix<T>,
    values: Vec<f64>,
    vectors: Mat<T>,
) -> EigenResult<T> {
    let result = EigenResult { values, vectors, residuals: Vec::new() };
    let residuals =
        (0..result.len()).map(|k| relative_residual(a, Some(b), result.values[k], &result.vector(k))).collect();
    EigenResult { residuals, ..result }
}

enum ShiftedFactor<T: Scalar> {
    Dense(faer::linalg::solvers::Llt<T>),
    Sparse(faer::sparse::linalg::solvers::Llt<usize, T>),
}

impl<T: Scalar> ShiftedFactor<T> {
    fn new(a: &PencilMatrix<T>, b: &PencilMatrix<T>, shift: f64) -> Result<Self, EigenError> {
        let err = |_| EigenError::ShiftNotBelowSpectrum { shift };
        match (a, b) {
            (PencilMatrix::Sparse(sa), PencilMatrix::Sparse(sb)) => {
                let k = sa.add_scaled(-shift, sb).to_faer();
                Ok(Self::Sparse(k.sp_cholesky(Side::Lower).map_err(|_| EigenError::ShiftNotBelowSpectrum { shift })?))
            }
            _ => {
                let mut k = a.to_dense();
                let bd = b.to_dense();
                let f = T::from_real(shift);
                for j in 0..k.ncols() {
                    for i in 0..k.nrows() {
                        let v = k[(i, j)] - f * bd[(i, j)];
                        k[(i, j)] = v;
                    }
                }
                Ok(Self::Dense(k.llt(Side::Lower).map_err(err)?))
            }
        }
    }

    fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        match self {
            Self::Dense(f) => f.solve_in_place(x.as_mut()),
            Self::Sparse(f) => f.solve_in_place(x.as_mut()),
        }
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }
}

fn shift_invert<T: Scalar>(
    a: &PencilMatrix<T>,
    b: &PencilMatrix<T>,
    n_eigs: usize,
    shift: f64,
) -> Result<EigenResult<T>, EigenError> {
    let dim = a.dim();
    if n_eigs == 0 {
        return Ok(EigenResult { values: vec![], vectors: Mat::zeros(dim, 0), residuals: vec![] });
    }
    if let PencilMatrix::Dense(bd) = b {
        bd.llt(Side::Lower).map_err(|_| EigenError::NotPositiveDefinite)?;
    }
    let factor = ShiftedFactor::new(a, b, shift)?;
    let mut basis = KrylovBasis::default();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let block = BLOCK_SIZE.min(dim);
    let random_block = |rng: &mut ChaCha8Rng| -> Vec<Vec<T>> {
        (0..block).map(|_| (0..dim).map(|_| T::sample(rng)).collect()).collect()
    };
    let mut frontier = basis.extend(random_block(&mut rng), a, b);
    let max_dim = dim.min(MAX_KRYLOV_DIM.max(4 * n_eigs + 8 * block));
    let mut history: Vec<f64> = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next: Vec<Vec<T>> = frontier.iter().map(|&k| factor.solve(&basis.bv[k])).collect();
        frontier = basis.extend(next, a, b);
        if frontier.is_empty() && basis.len() < dim {
            // Invariant subspace reached; continue from fresh directions.
            frontier = basis.extend(random_block(&mut rng), a, b);
        }
        let exhausted = frontier.is_empty() || basis.len() >= max_dim;
        if basis.len() < n_eigs + block && !exhausted {
            continue;
        }
        let result = basis.rayleigh_ritz(n_eigs)?;
        let worst = result.max_residual();
        history.push(worst);
        // Residuals bottom out at round-off in A v; accept once the contract is
        // met and further growth no longer helps.
        let stalled = history.len() > 3 && worst > 0.5 * history[history.len() - 4];
        if worst <= KRYLOV_TARGET || (worst <= RESIDUAL_TOLERANCE && (stalled || exhausted)) {
            return Ok(result);
        }
        if exhausted {
            return Err(EigenError::NoConvergence {
                iterations,
                residual: history.iter().copied().fold(f64::INFINITY, f64::min),
            });
        }
    }
}

/// B-orthonormal Krylov basis with the images `A v`, `B v` and the projected
/// matrix `V* A V`, all grown incrementally.
#[derive(Default)]
struct KrylovBasis<T> {
    v: Vec<Vec<T>>,
    bv: Vec<Vec<T>>,
    av: Vec<Vec<T>>,
    // Column j holds (V* A v_j)[0..=j].
    h: Vec<Vec<T>>,
}

impl<T: Scalar> KrylovBasis<T> {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// B-orthonormalizes the candidates against the basis (two Gram–Schmidt
    /// passes) and appends the survivors; returns their indices.
    fn extend(&mut self, candidates: Vec<Vec<T>>, a: &PencilMatrix<T>, b: &PencilMatrix<T>) -> Vec<usize> {
        let mut added = Vec::new();
        for mut x in candidates {
            let initial = b_norm(b, &x);
            if initial == 0.0 || !initial.is_finite() {
                continue;
            }
            for _ in 0..2 {
                for k in 0..self.v.len() {
                    let coef = dot(&self.bv[k], &x);
                    axpy(-coef, &self.v[k], &mut x);
                }
            }
            let bx = b.apply(&x);
            let nrm = dot(&x, &bx).real_part().max(0.0).sqrt();
            if nrm <= 1e-10 * initial {
                continue;
            }
            let inv = T::from_real(1.0 / nrm);
            let x: Vec<T> = x.into_iter().map(|e| e * inv).collect();
            let bx: Vec<T> = bx.into_iter().map(|e| e * inv).collect();
            let ax = a.apply(&x);
            let mut col: Vec<T> = self.v.iter().map(|vi| dot(vi, &ax)).collect();
            col.push(dot(&x, &ax));
            self.h.push(col);
            self.av.push(ax);
            self.v.push(x);
            self.bv.push(bx);
            added.push(self.v.len() - 1);
        }
        added
    }

    fn rayleigh_ritz(&self, n_eigs: usize) -> Result<EigenResult<T>, EigenError> {
        let k = self.len();
        let h = Mat::from_fn(k, k, |i, j| if i <= j { self.h[j][i] } else { self.h[i][j].conjugate() });
        let small = hermitian_eigs(h.as_ref(), n_eigs.min(k))?;
        let dim = self.v.first().map_or(0, Vec::len);
        let combine = |src: &[Vec<T>], c: usize| {
            let mut out = vec![T::default(); dim];
            for (j, col) in src.iter().enumerate() {
                axpy(small.vectors[(j, c)], col, &mut out);
            }
            out
        };
        let mut vectors = Mat::<T>::zeros(dim, small.len());
        let mut residuals = Vec::with_capacity(small.len());
        for c in 0..small.len() {
            let x = combine(&self.v, c);
            let ax = combine(&self.av, c);
            let bx = combine(&self.bv, c);
            let l = T::from_real(small.values[c]);
            let r: Vec<T> = ax.iter().zip(&bx).map(|(&p, &q)| p - l * q).collect();
            residuals.push(norm(&r) / norm(&bx));
            for (i, xi) in x.into_iter().enumerate() {
                vectors[(i, c)] = xi;
            }
        }
        Ok(EigenResult { values: small.values, vectors, residuals })
    }
}

pub(crate) fn dense_apply<T: Scalar>(m: MatRef<'_, T>, x: &[T]) -> Vec<T> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![T::default(); m.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += m[(i, j)] * xj;
        }
    }
    y
}

pub(crate) fn hermitian_part<T: Scalar>(m: MatRef<'_, T>) -> Mat<T> {
    let half = T::from_real(0.5);
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conjugate()) * half)
}

/// `⟨x, y⟩ = Σ conj(x_i) y_i`.
pub(crate) fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::default(), |acc, (&a, &b)| acc + a.conjugate() * b)
}

pub(crate) fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.modulus_sq()).sum::<f64>().sqrt()
}

fn b_norm<T: Scalar>(b: &PencilMatrix<T>, x: &[T]) -> f64 {
    dot(x, &b.apply(x)).real_part().max(0.0).sqrt()
}

fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
