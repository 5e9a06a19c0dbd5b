//! Full fiber operator `T_ε^θ` on the period cell `Q = [0, L) × S`.
//!
//! The discretization is a tensor product of a nodal trigonometric basis in
//! `s` with bilinear elements in `y`. Terms with `s`-derivatives are
//! integrated on a twice oversampled grid, so the Nyquist mode keeps its
//! kinetic energy; zero-order terms use the nodal trapezoid rule, which makes
//! the gauge `ψ ↦ hψ` an exact isometry between the weighted mass matrices.

use std::f64::consts::PI;

use faer::{c64, Mat, Side};
use thiserror::Error;

use crate::cross_section::{SectionError, SectionGrid};
use crate::eigensolve::{
    generalized_eigs, EigenError, EigenResult, PencilMatrix, SolveMode, SparseMatrix, RESIDUAL_TOLERANCE,
};
use crate::geometry::{GeometryError, WaveguideSpec};

/// Largest pencil handled by the dense reduction-defect diagnostic.
pub const DEFECT_DOF_LIMIT: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("fiber eigensolve failed: {0}")]
    SolverFailure(#[from] EigenError),
    #[error("fiber eigen residual {residual:e} exceeds {limit:e}")]
    InaccurateSolve { residual: f64, limit: f64 },
    #[error("{dof} degrees of freedom exceed the dense limit {limit}")]
    DimensionTooLarge { dof: usize, limit: usize },
    #[error("invalid fiber discretization: {0}")]
    InvalidDiscretization(String),
    #[error("quasi-momentum {theta} outside the Brillouin zone [-{limit}, {limit}]")]
    ThetaOutOfZone { theta: f64, limit: f64 },
}

impl From<SectionError> for FiberError {
    fn from(e: SectionError) -> Self {
        match e {
            SectionError::Geometry(g) => Self::Geometry(g),
            SectionError::SolverFailure(s) => Self::SolverFailure(s),
            other => Self::InvalidDiscretization(other.to_string()),
        }
    }
}

/// Nodal trigonometric basis on `n` equispaced nodes of `[0, L)` together with
/// its values and derivatives on the oversampled quadrature grid.
#[derive(Clone, Debug)]
struct Longitudinal {
    period: f64,
    n: usize,
    q: usize,
    interp: Mat<f64>,
    deriv: Mat<f64>,
    nodal_deriv: Mat<f64>,
}

impl Longitudinal {
    fn new(period: f64, n: usize) -> Self {
        let q = 2 * n;
        let omega = 2.0 * PI / period;
        let card = |x: f64| {
            let mut v = 1.0 + (omega * (n / 2) as f64 * x).cos();
            for m in 1..n / 2 {
                v += 2.0 * (omega * m as f64 * x).cos();
            }
            v / n as f64
        };
        let dcard = |x: f64, nyquist: bool| {
            let mut v = 0.0;
            for m in 1..n / 2 {
                let k = omega * m as f64;
                v -= 2.0 * k * (k * x).sin();
            }
            if nyquist {
                let k = omega * (n / 2) as f64;
                v -= k * (k * x).sin();
            }
            v / n as f64
        };
        let node = |i: usize| i as f64 * period / n as f64;
        let point = |j: usize| j as f64 * period / q as f64;
        let interp = Mat::from_fn(q, n, |j, i| card(point(j) - node(i)));
        let deriv = Mat::from_fn(q, n, |j, i| dcard(point(j) - node(i), true));
        // The Nyquist sine vanishes at the nodes; dropping it keeps D_s exactly antisymmetric.
        let nodal_deriv = Mat::from_fn(n, n, |j, i| if i == j { 0.0 } else { dcard(node(j) - node(i), false) });
        Self { period, n, q, interp, deriv, nodal_deriv }
    }

    fn node(&self, i: usize) -> f64 {
        i as f64 * self.period / self.n as f64
    }

    fn point(&self, j: usize) -> f64 {
        j as f64 * self.period / self.q as f64
    }

    fn node_weight(&self) -> f64 {
        self.period / self.n as f64
    }

    fn point_weight(&self) -> f64 {
        self.period / self.q as f64
    }
}

/// Tensor discretization of the period cell; dof `(i_s, node)` has index
/// `i_s · n_y + node`.
#[derive(Clone, Debug)]
pub struct FiberDiscretization {
    grid: SectionGrid,
    long: Longitudinal,
}

impl FiberDiscretization {
    pub fn new(period: f64, n_s: usize, grid: SectionGrid) -> Result<Self, FiberError> {
        if n_s < 8 || !n_s.is_multiple_of(2) {
            return Err(FiberError::InvalidDiscretization(format!("N_s must be even and >= 8, got {n_s}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(FiberError::InvalidDiscretization(format!("invalid period {period}")));
        }
        Ok(Self { grid, long: Longitudinal::new(period, n_s) })
    }

    /// `N_s = 24` and a `9 × 9` section grid (1944 dof).
    pub fn desk(spec: &WaveguideSpec) -> Result<Self, FiberError> {
        Self::new(spec.period(), 24, SectionGrid::new(*spec.section(), 9, 9)?)
    }

    /// Scales `N_s` and the number of section elements by `factor`.
    pub fn refined(&self, factor: f64) -> Result<Self, FiberError> {
        let n_s = 2 * ((self.long.n as f64 * factor / 2.0).round() as usize);
        let (n1, n2) = self.grid.dims();
        let scale = |n: usize| ((n - 1) as f64 * factor).round() as usize + 1;
        let grid = SectionGrid::new(*self.grid.shape(), scale(n1), scale(n2))?;
        Self::new(self.long.period, n_s, grid)
    }

    pub fn period(&self) -> f64 {
        self.long.period
    }

    pub fn n_s(&self) -> usize {
        self.long.n
    }

    pub fn grid(&self) -> &SectionGrid {
        &self.grid
    }

    pub fn dof(&self) -> usize {
        self.long.n * self.grid.n_nodes()
    }

    pub fn index(&self, i_s: usize, node: usize) -> usize {
        i_s * self.grid.n_nodes() + node
    }

    /// Longitudinal node `s_i = iL/N_s`.
    pub fn s_node(&self, i: usize) -> f64 {
        self.long.node(i)
    }

    /// Derivative of the nodal interpolant evaluated at the nodes.
    pub fn differentiation_matrix(&self) -> Mat<f64> {
        self.long.nodal_deriv.clone()
    }
}

/// Form matrix `A` and weighted mass `B` of one fiber.
#[derive(Clone, Debug)]
pub struct OperatorPencil {
    a: SparseMatrix<c64>,
    b: SparseMatrix<c64>,
    shift: f64,
}

impl OperatorPencil {
    pub fn a(&self) -> &SparseMatrix<c64> {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix<c64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `x* A x`.
    pub fn form(&self, x: &[c64]) -> f64 {
        quadratic(&self.a, x)
    }

    /// `x* B x`.
    pub fn mass(&self, x: &[c64]) -> f64 {
        quadratic(&self.b, x)
    }
}

fn quadratic(m: &SparseMatrix<c64>, x: &[c64]) -> f64 {
    m.apply(x).iter().zip(x).map(|(y, v)| (v.conj() * y).re).sum()
}

/// Geometry data evaluated at one arclength.
struct Frame {
    k: f64,
    cos_a: f64,
    sin_a: f64,
    twist: f64,
    h: f64,
    log_dh: f64,
}

impl Frame {
    fn at(spec: &WaveguideSpec, s: f64) -> Self {
        let a = spec.rotation().value(s);
        let h = spec.profile().value(s);
        Self {
            k: spec.curvature().value(s),
            cos_a: a.cos(),
            sin_a: a.sin(),
            twist: spec.torsion().value(s) + spec.rotation().derivative_value(s, 1),
            h,
            log_dh: spec.profile_derivative().value(s) / h,
        }
    }

    fn beta(&self, eps: f64, y: [f64; 2]) -> f64 {
        1.0 - eps * self.k * (y[0] * self.cos_a + y[1] * self.sin_a)
    }

    fn rh(&self, y: [f64; 2]) -> [f64; 2] {
        [self.twist * y[1] - self.log_dh * y[0], -self.twist * y[0] - self.log_dh * y[1]]
    }
}

fn check_inputs(spec: &WaveguideSpec, eps: f64, theta: f64, disc: &FiberDiscretization) -> Result<(), FiberError> {
    spec.validate_epsilon(eps)?;
    let limit = PI / spec.period();
    if theta.abs() > limit * (1.0 + 1e-12) {
        return Err(FiberError::ThetaOutOfZone { theta, limit });
    }
    if (disc.period() - spec.period()).abs() > 1e-12 * spec.period() {
        return Err(GeometryError::PeriodMismatch {
            name: "discretization",
            found: disc.period(),
            expected: spec.period(),
        }
        .into());
    }
    Ok(())
}

/// Pencil of the form
/// `∫ (h²/β)|∂_sψ + ⟨∇_yψ, R^h⟩ + iθψ|² + (β/ε²)|∇_yψ|² + c h²β|ψ|²`
/// against the mass `∫ h²β|ψ|²`.
pub fn assemble_fiber(
    spec: &WaveguideSpec,
    eps: f64,
    theta: f64,
    disc: &FiberDiscretization,
) -> Result<OperatorPencil, FiberError> {
    check_inputs(spec, eps, theta, disc)?;
    let long = &disc.long;
    let (n, q) = (long.n, long.q);
    let ny = disc.grid.n_nodes();
    let dim = disc.dof();
    let c = spec.shift();
    let quad = disc.grid.quadrature();
    let point_frames: Vec<Frame> = (0..q).map(|j| Frame::at(spec, long.point(j))).collect();
    let node_frames: Vec<Frame> = (0..n).map(|i| Frame::at(spec, long.node(i))).collect();

    let mut a_trip = Vec::new();
    let mut b_trip = Vec::new();
    let i_theta = c64::new(0.0, theta);
    for element in quad.chunks(4) {
        let nodes = element[0].nodes;
        debug_assert!(element.iter().all(|g| g.nodes == nodes));

        // Rows: (Gauss point, s-point) pairs scaled by the square root of the weight;
        // columns: (local node, s-node).
        let mut rows = Mat::<c64>::zeros(element.len() * q, 4 * n);
        for (gi, g) in element.iter().enumerate() {
            for (j, fr) in point_frames.iter().enumerate() {
                let beta = fr.beta(eps, g.y);
                let omega = (long.point_weight() * g.weight * fr.h * fr.h / beta).sqrt();
                let r = fr.rh(g.y);
                let row = gi * q + j;
                for la in 0..4 {
                    let chi = i_theta * g.phi[la] + c64::new(g.grad[la][0] * r[0] + g.grad[la][1] * r[1], 0.0);
                    for i in 0..n {
                        let v = chi * long.interp[(j, i)] + c64::new(long.deriv[(j, i)] * g.phi[la], 0.0);
                        rows[(row, la * n + i)] = v * omega;
                    }
                }
            }
        }
        let local = rows.adjoint() * &rows;
        for la in 0..4 {
            for lb in 0..4 {
                for i in 0..n {
                    for k in 0..n {
                        let v = local[(la * n + i, lb * n + k)];
                        a_trip.push((i * ny + nodes[la], k * ny + nodes[lb], v));
                    }
                }
            }
        }

        // Zero-order and transverse terms on the nodal trapezoid grid.
        let w = long.node_weight();
        for (i, fr) in node_frames.iter().enumerate() {
            let mut mass = [[0.0; 4]; 4];
            let mut stiff = [[0.0; 4]; 4];
            for g in element {
                let beta = fr.beta(eps, g.y);
                for la in 0..4 {
                    for lb in 0..4 {
                        mass[la][lb] += g.weight * beta * g.phi[la] * g.phi[lb];
                        stiff[la][lb] +=
                            g.weight * beta * (g.grad[la][0] * g.grad[lb][0] + g.grad[la][1] * g.grad[lb][1]);
                    }
                }
            }
            for la in 0..4 {
                for lb in 0..4 {
                    let (r, col) = (i * ny + nodes[la], i * ny + nodes[lb]);
                    let m = w * fr.h * fr.h * mass[la][lb];
                    b_trip.push((r, col, c64::new(m, 0.0)));
                    a_trip.push((r, col, c64::new(c * m + w * stiff[la][lb] / (eps * eps), 0.0)));
                }
            }
        }
    }
    Ok(OperatorPencil {
        a: SparseMatrix::from_triplets(dim, a_trip),
        b: SparseMatrix::from_triplets(dim, b_trip),
        shift: c,
    })
}

/// Lowest `n_eigs` eigenpairs of the pencil.
pub fn fiber_eigenpairs(pencil: &OperatorPencil, n_eigs: usize) -> Result<EigenResult<c64>, FiberError> {
    let r = generalized_eigs(
        &PencilMatrix::Sparse(pencil.a.clone()),
        &PencilMatrix::Sparse(pencil.b.clone()),
        n_eigs,
        SolveMode::Auto { shift: pencil.shift - 0.5 },
    )?;
    let residual = r.max_residual();
    if residual > RESIDUAL_TOLERANCE {
        return Err(FiberError::InaccurateSolve { residual, limit: RESIDUAL_TOLERANCE });
    }
    Ok(r)
}

/// `E_1(ε, θ) ≤ … ≤ E_n(ε, θ)`.
pub fn fiber_eigs(pencil: &OperatorPencil, n_eigs: usize) -> Result<Vec<f64>, FiberError> {
    Ok(fiber_eigenpairs(pencil, n_eigs)?.values)
}

/// Assembles and solves one fiber.
pub fn fiber_spectrum(
    spec: &WaveguideSpec,
    eps: f64,
    theta: f64,
    disc: &FiberDiscretization,
    n_eigs: usize,
) -> Result<Vec<f64>, FiberError> {
    fiber_eigs(&assemble_fiber(spec, eps, theta, disc)?, n_eigs)
}

/// Orthogonal projector onto functions constant in `y`, in the inner product
/// weighted by `β_ε` (equivalently `h²β_ε`, since `h` does not depend on `y`).
#[derive(Clone, Debug)]
pub struct LongitudinalProjector {
    n_s: usize,
    n_y: usize,
    // Row i: (1ᵀ M_i) / a_i with M_i the β-weighted section mass at s_i.
    means: Vec<Vec<f64>>,
    averaged_weight: Vec<f64>,
}

impl LongitudinalProjector {
    pub fn dim(&self) -> usize {
        self.n_s * self.n_y
    }

    /// Discrete `a_ε(s_i) = ∫_S β_ε(s_i, y) dy`.
    pub fn averaged_weight(&self) -> &[f64] {
        &self.averaged_weight
    }

    /// Weighted section means `w(s_i)` of `ψ`.
    pub fn means(&self, psi: &[c64]) -> Vec<c64> {
        assert_eq!(psi.len(), self.dim());
        (0..self.n_s)
            .map(|i| {
                let block = &psi[i * self.n_y..(i + 1) * self.n_y];
                block.iter().zip(&self.means[i]).map(|(v, m)| v * *m).sum()
            })
            .collect()
    }

    /// `w ↦ w(s) 1`.
    pub fn embed(&self, w: &[c64]) -> Vec<c64> {
        assert_eq!(w.len(), self.n_s);
        w.iter().flat_map(|&v| std::iter::repeat_n(v, self.n_y)).collect()
    }

    pub fn apply(&self, psi: &[c64]) -> Vec<c64> {
        self.embed(&self.means(psi))
    }

    pub fn matrix(&self) -> Mat<c64> {
        let n = self.dim();
        Mat::from_fn(n, n, |r, col| {
            let (i, j) = (r / self.n_y, col / self.n_y);
            if i == j {
                c64::new(self.means[i][col % self.n_y], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }
}

pub fn longitudinal_projector(
    spec: &WaveguideSpec,
    eps: f64,
    disc: &FiberDiscretization,
) -> Result<LongitudinalProjector, FiberError> {
    spec.validate_epsilon(eps)?;
    let n_y = disc.grid.n_nodes();
    let ones = vec![1.0; n_y];
    let mut means = Vec::with_capacity(disc.n_s());
    let mut averaged_weight = Vec::with_capacity(disc.n_s());
    for i in 0..disc.n_s() {
        let fr = Frame::at(spec, disc.s_node(i));
        let (_, m) = disc.grid.assemble(|_| 0.0, |y| fr.beta(eps, y));
        let row = m.apply(&ones);
        let a: f64 = row.iter().sum();
        means.push(row.iter().map(|v| v / a).collect());
        averaged_weight.push(a);
    }
    Ok(LongitudinalProjector { n_s: disc.n_s(), n_y, means, averaged_weight })
}

/// Discrete norm of `X_ε⁻¹ (T_ε^θ)⁻¹ X_ε − (Π_ε (T^θ)⁻¹ Π_ε⁻¹ ⊕ 0)` in the
/// `β_ε`-weighted inner product.
///
/// The one-dimensional resolvent uses the same longitudinal basis and
/// quadrature as the fiber, so the difference measures the reduction and not
/// the discretization.
pub fn reduction_defect(
    spec: &WaveguideSpec,
    eps: f64,
    theta: f64,
    disc: &FiberDiscretization,
) -> Result<f64, FiberError> {
    let dim = disc.dof();
    if dim > DEFECT_DOF_LIMIT {
        return Err(FiberError::DimensionTooLarge { dof: dim, limit: DEFECT_DOF_LIMIT });
    }
    let pencil = assemble_fiber(spec, eps, theta, disc)?;
    let proj = longitudinal_projector(spec, eps, disc)?;
    let long = &disc.long;
    let (n, ny) = (long.n, disc.grid.n_nodes());
    let w = long.node_weight();
    let h: Vec<f64> = (0..n).map(|i| spec.profile().value(long.node(i))).collect();

    // H1 = D_h⁻¹ B A⁻¹ B D_h⁻¹, the fiber resolvent in the β-weighted gauge.
    let a = pencil.a.hermitian_part().to_dense();
    let llt = a.llt(Side::Lower).map_err(|_| EigenError::NotPositiveDefinite)?;
    let mut rhs = pencil.b.to_dense();
    for col in 0..dim {
        for row in 0..dim {
            rhs[(row, col)] *= 1.0 / h[col / ny];
        }
    }
    let x = faer::linalg::solvers::Solve::solve(&llt, rhs.as_ref());
    let mut hmat = rhs.adjoint() * &x;

    // H2 = F a^{-1/2} A_T⁻¹ a^{-1/2} F*, the embedded one-dimensional resolvent,
    // with F the β-weighted section moments of the constant function.
    let i_theta = c64::new(0.0, theta);
    let hq: Vec<f64> = (0..long.q).map(|j| spec.profile().value(long.point(j))).collect();
    let root_w = long.point_weight().sqrt();
    let g = Mat::from_fn(long.q, n, |j, i| {
        (c64::new(long.deriv[(j, i)], 0.0) + i_theta * long.interp[(j, i)]) * (root_w * hq[j] / h[i])
    });
    let mut a_t = g.adjoint() * &g;
    for i in 0..n {
        a_t[(i, i)] += c64::new(spec.shift() * w, 0.0);
    }
    let a_t = crate::eigensolve::hermitian_part(a_t.as_ref());
    let llt_t = a_t.llt(Side::Lower).map_err(|_| EigenError::NotPositiveDefinite)?;
    let r_t = faer::linalg::solvers::Solve::solve(&llt_t, Mat::<c64>::identity(n, n).as_ref());
    let aw = proj.averaged_weight();
    for i in 0..n {
        let fi = proj.means[i].iter().map(|m| m * aw[i] * w).collect::<Vec<_>>();
        for k in 0..n {
            let coef = r_t[(i, k)] / (aw[i] * aw[k]).sqrt();
            let fk = proj.means[k].iter().map(|m| m * aw[k] * w).collect::<Vec<_>>();
            for (ra, &fa) in fi.iter().enumerate() {
                for (cb, &fb) in fk.iter().enumerate() {
                    hmat[(i * ny + ra, k * ny + cb)] -= coef * (fa * fb);
                }
            }
        }
    }

    // Largest |eigenvalue| of L⁻¹ H L⁻* with B̃ = LL*, the β-weighted mass.
    let mut bt = Mat::<c64>::zeros(dim, dim);
    for i in 0..n {
        let fr = Frame::at(spec, long.node(i));
        let (_, m) = disc.grid.assemble(|_| 0.0, |y| fr.beta(eps, y));
        for (r, col, v) in m.triplets() {
            bt[(i * ny + r, i * ny + col)] = c64::new(w * v, 0.0);
        }
    }
    let lb = bt.llt(Side::Lower).map_err(|_| EigenError::NotPositiveDefinite)?;
    let l = lb.L();
    l.solve_lower_triangular_in_place(hmat.as_mut());
    let mut c = hmat.adjoint().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    let c = crate::eigensolve::hermitian_part(c.as_ref());
    let eigs = c
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| EigenError::NoConvergence { iterations: 0, residual: f64::NAN })?;
    Ok(eigs.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
