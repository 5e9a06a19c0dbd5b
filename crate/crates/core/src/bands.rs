//! Brillouin-zone sweeps, band intervals, gaps and the Borg dichotomy.

use std::f64::consts::PI;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::effective_1d::{assemble_corrected, assemble_direct, effective_eigs, FourierTruncation};
use crate::fiber3d::{fiber_spectrum, FiberDiscretization};
use crate::geometry::WaveguideSpec;

/// Default number of half-zone grid points.
pub const DEFAULT_N_THETA: usize = 33;

/// Default trigonometric truncation `M`.
pub const DEFAULT_MODES: usize = 32;

/// Relative tolerance for degenerate pairs and grid comparisons.
pub const GRID_TOLERANCE: f64 = 1e-7;

const SYMMETRY_TOLERANCE: f64 = 1e-10;
const MONOTONE_TOLERANCE: f64 = 1e-9;
const MIRROR_SAMPLES: usize = 5;
const MIRROR_SEED: u64 = 0xb0c9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("band solve failed at theta = {theta}: {message}")]
    SolverFailure { theta: f64, message: String },
    #[error("invalid Brillouin grid: {0}")]
    InvalidGrid(String),
    #[error("band {n}: endpoint rule and grid extrema disagree ({detail})")]
    InconsistentBands { n: usize, detail: String },
    #[error("property violation in band {band} between theta = {theta_a} and theta = {theta_b}: {detail}")]
    PropertyViolation { band: usize, theta_a: f64, theta_b: f64, detail: String },
    #[error("{0} requires bands of the effective operator")]
    NotEffective(&'static str),
}

/// Operator whose fibers produced a band table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BandSource {
    Effective,
    Corrected { eps: f64 },
    Fiber { eps: f64 },
}

impl BandSource {
    pub fn is_effective(&self) -> bool {
        !matches!(self, Self::Fiber { .. })
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Self::Effective => None,
            Self::Corrected { eps } | Self::Fiber { eps } => Some(eps),
        }
    }
}

impl fmt::Display for BandSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Effective => "effective",
            Self::Corrected { .. } => "corrected",
            Self::Fiber { .. } => "fiber",
        })
    }
}

/// Produces the lowest eigenvalues of one fiber.
pub trait BandSolver: Sync {
    fn source(&self) -> BandSource;
    fn period(&self) -> f64;
    fn eigenvalues(&self, theta: f64, n: usize) -> Result<Vec<f64>, String>;
}

/// `T^θ` in a trigonometric basis.
pub struct EffectiveSolver<'a> {
    pub spec: &'a WaveguideSpec,
    pub trunc: FourierTruncation,
}

impl<'a> EffectiveSolver<'a> {
    pub fn new(spec: &'a WaveguideSpec, modes: usize) -> Self {
        Self { spec, trunc: FourierTruncation::new(spec.period(), modes) }
    }
}

impl BandSolver for EffectiveSolver<'_> {
    fn source(&self) -> BandSource {
        BandSource::Effective
    }
    fn period(&self) -> f64 {
        self.spec.period()
    }
    fn eigenvalues(&self, theta: f64, n: usize) -> Result<Vec<f64>, String> {
        let m = assemble_direct(self.spec, theta, &self.trunc).map_err(|e| e.to_string())?;
        effective_eigs(&m, n).map_err(|e| e.to_string())
    }
}

/// The corrected operator `O^θ_ε`.
pub struct CorrectedSolver<'a> {
    pub spec: &'a WaveguideSpec,
    pub eps: f64,
    pub trunc: FourierTruncation,
}

impl BandSolver for CorrectedSolver<'_> {
    fn source(&self) -> BandSource {
        BandSource::Corrected { eps: self.eps }
    }
    fn period(&self) -> f64 {
        self.spec.period()
    }
    fn eigenvalues(&self, theta: f64, n: usize) -> Result<Vec<f64>, String> {
        let m = assemble_corrected(self.spec, self.eps, theta, &self.trunc).map_err(|e| e.to_string())?;
        effective_eigs(&m, n).map_err(|e| e.to_string())
    }
}

/// The fiber operator `T_ε^θ` on the period cell.
pub struct FiberSolver<'a> {
    pub spec: &'a WaveguideSpec,
    pub eps: f64,
    pub disc: FiberDiscretization,
}

impl BandSolver for FiberSolver<'_> {
    fn source(&self) -> BandSource {
        BandSource::Fiber { eps: self.eps }
    }
    fn period(&self) -> f64 {
        self.spec.period()
    }
    fn eigenvalues(&self, theta: f64, n: usize) -> Result<Vec<f64>, String> {
        fiber_spectrum(self.spec, self.eps, theta, &self.disc, n).map_err(|e| e.to_string())
    }
}

/// `N_θ` uniform samples of `[0, π/L]`, both endpoints included.
pub fn brillouin_grid(period: f64, n_theta: usize) -> Result<Vec<f64>, BandError> {
    if n_theta < 9 || n_theta.is_multiple_of(2) {
        return Err(BandError::InvalidGrid(format!("N_theta must be odd and >= 9, got {n_theta}")));
    }
    let edge = PI / period;
    let mut grid: Vec<f64> = (0..n_theta).map(|j| edge * j as f64 / (n_theta - 1) as f64).collect();
    grid[n_theta - 1] = edge;
    Ok(grid)
}

/// Full-zone grid `[−π/L, π/L]` obtained by reflecting a half-zone grid.
pub fn symmetric_grid(half: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = half.iter().rev().filter(|t| **t != 0.0).map(|t| -t).collect();
    out.extend_from_slice(half);
    out
}

/// A θ where the band table was recomputed at `−θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MirrorCheck {
    pub theta: f64,
    /// `max_n |E_n(θ) − E_n(−θ)| / (1 + |E_n(θ)|)`.
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub struct BandStructure {
    pub period: f64,
    pub source: BandSource,
    /// Half-zone grid in the order the table was computed.
    pub thetas: Vec<f64>,
    /// `values[n][j]`: band `n + 1` at `thetas[j]`.
    pub values: Vec<Vec<f64>>,
    pub mirror: Vec<MirrorCheck>,
}

impl BandStructure {
    pub fn n_bands(&self) -> usize {
        self.values.len()
    }

    pub fn band_min(&self, n: usize) -> f64 {
        self.values[n].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn band_max(&self, n: usize) -> f64 {
        self.values[n].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Band `n` at the grid point closest to `theta`.
    pub fn at(&self, n: usize, theta: f64) -> f64 {
        let j = (0..self.thetas.len())
            .min_by(|&a, &b| (self.thetas[a] - theta).abs().total_cmp(&(self.thetas[b] - theta).abs()))
            .expect("grid is nonempty");
        self.values[n][j]
    }

    /// Largest `|E_n(θ_{j+1}) − E_n(θ_j)| / Δθ` per band over the sorted grid.
    pub fn lipschitz_estimates(&self) -> Vec<f64> {
        let order = sorted_order(&self.thetas);
        self.values
            .iter()
            .map(|row| {
                order
                    .windows(2)
                    .map(|w| (row[w[1]] - row[w[0]]).abs() / (self.thetas[w[1]] - self.thetas[w[0]]))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Table on the full zone, using `E_n(−θ) = E_n(θ)`.
    pub fn extended(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let order = sorted_order(&self.thetas);
        let half: Vec<f64> = order.iter().map(|&j| self.thetas[j]).collect();
        let full = symmetric_grid(&half);
        let values = self
            .values
            .iter()
            .map(|row| {
                let sorted: Vec<f64> = order.iter().map(|&j| row[j]).collect();
                let mut out: Vec<f64> =
                    half.iter().zip(&sorted).rev().filter(|(t, _)| **t != 0.0).map(|(_, v)| *v).collect();
                out.extend_from_slice(&sorted);
                out
            })
            .collect();
        (full, values)
    }
}

fn sorted_order(thetas: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].total_cmp(&thetas[b]));
    order
}

/// Band table over the half-zone grid plus mirror checks at five seeded grid
/// points.
pub fn compute_bands(solver: &dyn BandSolver, n_bands: usize, n_theta: usize) -> Result<BandStructure, BandError> {
    let thetas = brillouin_grid(solver.period(), n_theta)?;
    compute_bands_on(solver, n_bands, thetas)
}

/// Same as [`compute_bands`] on a caller-supplied half-zone grid.
pub fn compute_bands_on(solver: &dyn BandSolver, n_bands: usize, thetas: Vec<f64>) -> Result<BandStructure, BandError> {
    if thetas.is_empty() {
        return Err(BandError::InvalidGrid("empty grid".into()));
    }
    let solve =
        |theta: f64| solver.eigenvalues(theta, n_bands).map_err(|message| BandError::SolverFailure { theta, message });
    let columns = thetas.par_iter().map(|&t| solve(t)).collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(MIRROR_SEED);
    let picks = sample(&mut rng, thetas.len(), MIRROR_SAMPLES.min(thetas.len())).into_vec();
    let mirror = picks
        .par_iter()
        .map(|&j| {
            let mirrored = solve(-thetas[j])?;
            let deviation =
                columns[j].iter().zip(&mirrored).map(|(a, b)| (a - b).abs() / (1.0 + a.abs())).fold(0.0, f64::max);
            Ok(MirrorCheck { theta: thetas[j], deviation })
        })
        .collect::<Result<Vec<_>, BandError>>()?;
    let values = (0..n_bands).map(|n| columns.iter().map(|c| c[n]).collect()).collect();
    Ok(BandStructure { period: solver.period(), source: solver.source(), thetas, values, mirror })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapRule {
    /// Periodic/antiperiodic endpoint values.
    Endpoint,
    /// `min_θ E_{n+1} − max_θ E_n` over the grid.
    Extrema,
}

impl fmt::Display for GapRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Endpoint => "endpoint",
            Self::Extrema => "extrema",
        })
    }
}

/// Interval between bands `n` and `n + 1` (1-based `n`).
#[derive(Clone, Debug, PartialEq)]
pub struct Gap {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub rule: GapRule,
}

/// `E_n(0)` and `E_n(π/L)` for one band.
#[derive(Clone, Debug, PartialEq)]
pub struct BandEndpoints {
    pub n: usize,
    pub at_zero: f64,
    pub at_edge: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BorgVerdict {
    /// Every periodic and antiperiodic pair checked is degenerate.
    Constant,
    /// The first open gap `n1` with its width.
    NonConstant { n1: usize, width: f64 },
    /// No open gap found, but too few bands to test both pair types.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct GapReport {
    pub source: BandSource,
    pub gaps: Vec<Gap>,
    pub endpoints: Vec<BandEndpoints>,
    pub tolerance: f64,
    /// First gap whose width exceeds the grid tolerance.
    pub first_open_gap: Option<usize>,
    pub borg: Option<BorgVerdict>,
}

fn tol(v: f64) -> f64 {
    GRID_TOLERANCE * (1.0 + v.abs())
}

fn endpoint_index(bands: &BandStructure, theta: f64) -> Result<usize, BandError> {
    let edge = PI / bands.period;
    bands
        .thetas
        .iter()
        .position(|t| (t - theta).abs() <= 1e-12 * edge.max(1.0))
        .ok_or_else(|| BandError::InvalidGrid(format!("grid lacks theta = {theta}")))
}

/// Gap intervals between consecutive bands.
///
/// Effective sources use the endpoint rule and cross-check it against the grid
/// extrema; fiber sources use the extrema only.
pub fn analyze_gaps(bands: &BandStructure) -> Result<GapReport, BandError> {
    let i0 = endpoint_index(bands, 0.0)?;
    let i1 = endpoint_index(bands, PI / bands.period)?;
    let nb = bands.n_bands();
    let endpoints: Vec<BandEndpoints> = (0..nb)
        .map(|n| BandEndpoints { n: n + 1, at_zero: bands.values[n][i0], at_edge: bands.values[n][i1] })
        .collect();
    let scale = bands.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = tol(scale);
    let mut gaps = Vec::with_capacity(nb.saturating_sub(1));
    for n in 0..nb.saturating_sub(1) {
        let (lo_x, hi_x) = (bands.band_max(n), bands.band_min(n + 1));
        let gap = if bands.source.is_effective() {
            // 1-based band n + 1 is odd iff n is even.
            let (lo_e, hi_e) = if n % 2 == 0 {
                (endpoints[n].at_edge, endpoints[n + 1].at_edge)
            } else {
                (endpoints[n].at_zero, endpoints[n + 1].at_zero)
            };
            if (lo_e - lo_x).abs() > tol(lo_x) || (hi_e - hi_x).abs() > tol(hi_x) {
                return Err(BandError::InconsistentBands {
                    n: n + 1,
                    detail: format!("endpoint gap ({lo_e}, {hi_e}) vs extrema gap ({lo_x}, {hi_x})"),
                });
            }
            Gap { n: n + 1, lower: lo_e, upper: hi_e, width: (hi_e - lo_e).max(0.0), rule: GapRule::Endpoint }
        } else {
            Gap { n: n + 1, lower: lo_x, upper: hi_x, width: (hi_x - lo_x).max(0.0), rule: GapRule::Extrema }
        };
        gaps.push(gap);
    }
    let first_open_gap = gaps.iter().find(|g| g.width > tolerance).map(|g| g.n);
    let borg = bands.source.is_effective().then(|| borg_from_endpoints(&endpoints, GRID_TOLERANCE));
    Ok(GapReport { source: bands.source, gaps, endpoints, tolerance, first_open_gap, borg })
}

fn borg_from_endpoints(endpoints: &[BandEndpoints], rel_tol: f64) -> BorgVerdict {
    for n in 0..endpoints.len().saturating_sub(1) {
        let (a, b) = if n % 2 == 0 {
            (endpoints[n].at_edge, endpoints[n + 1].at_edge)
        } else {
            (endpoints[n].at_zero, endpoints[n + 1].at_zero)
        };
        if (b - a).abs() > rel_tol * (1.0 + a.abs()) {
            return BorgVerdict::NonConstant { n1: n + 1, width: b - a };
        }
    }
    if endpoints.len() >= 3 {
        BorgVerdict::Constant
    } else {
        BorgVerdict::Inconclusive
    }
}

/// Checks the periodic pairs (even `n`, at `θ = 0`) and antiperiodic pairs
/// (odd `n`, at `θ = π/L`) of the effective operator for `n < n_bands`.
/// `tol` is relative: a pair is degenerate when it agrees to `tol·(1 + |ν|)`.
pub fn borg_test(spec: &WaveguideSpec, n_bands: usize, tol: f64) -> Result<BorgVerdict, BandError> {
    let solver = EffectiveSolver::new(spec, DEFAULT_MODES);
    let edge = PI / spec.period();
    let at =
        |theta: f64| solver.eigenvalues(theta, n_bands).map_err(|message| BandError::SolverFailure { theta, message });
    let (zero, edge_vals) = (at(0.0)?, at(edge)?);
    let endpoints: Vec<BandEndpoints> =
        (0..n_bands).map(|n| BandEndpoints { n: n + 1, at_zero: zero[n], at_edge: edge_vals[n] }).collect();
    Ok(borg_from_endpoints(&endpoints, tol))
}

/// Outcome of the symmetry and monotonicity checks.
#[derive(Clone, Debug)]
pub struct PropertyDiagnostics {
    /// Largest relative deviation `|ν_n(θ) − ν_n(−θ)|` over the mirror checks.
    pub symmetry_deviation: f64,
    /// Smallest signed step `±(ν_n(θ_{j+1}) − ν_n(θ_j))` in the expected direction.
    pub min_monotone_step: f64,
    /// `ν_1(0), ν_1(π/L), ν_2(π/L), ν_2(0), ν_3(0), …`.
    pub chain: Vec<f64>,
}

/// Verifies `ν_n(θ) = ν_n(−θ)` and that odd (even) bands increase (decrease)
/// from `0` to `π/L`, strictly away from the zone endpoints.
pub fn symmetry_monotonicity_check(bands: &BandStructure) -> Result<PropertyDiagnostics, BandError> {
    if !bands.source.is_effective() {
        return Err(BandError::NotEffective("symmetry_monotonicity_check"));
    }
    let mut symmetry_deviation = 0.0f64;
    for m in &bands.mirror {
        symmetry_deviation = symmetry_deviation.max(m.deviation);
        if m.deviation > SYMMETRY_TOLERANCE {
            return Err(BandError::PropertyViolation {
                band: 0,
                theta_a: m.theta,
                theta_b: -m.theta,
                detail: format!("nu(theta) != nu(-theta), relative deviation {:e}", m.deviation),
            });
        }
    }
    let order = sorted_order(&bands.thetas);
    let last = order.len() - 1;
    let mut min_monotone_step = f64::INFINITY;
    for (n, row) in bands.values.iter().enumerate() {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for (k, w) in order.windows(2).enumerate() {
            let (ja, jb) = (w[0], w[1]);
            let step = sign * (row[jb] - row[ja]);
            min_monotone_step = min_monotone_step.min(step);
            let interior = k > 0 && k + 1 < last;
            let tol = MONOTONE_TOLERANCE * (1.0 + row[ja].abs());
            let ok = if interior { step > tol } else { step >= -tol };
            if !ok {
                return Err(BandError::PropertyViolation {
                    band: n + 1,
                    theta_a: bands.thetas[ja],
                    theta_b: bands.thetas[jb],
                    detail: format!(
                        "expected {} {}, step {:e}",
                        if interior { "strictly" } else { "non-strictly" },
                        if sign > 0.0 { "increasing" } else { "decreasing" },
                        sign * step
                    ),
                });
            }
        }
    }
    let i0 = endpoint_index(bands, 0.0)?;
    let i1 = endpoint_index(bands, PI / bands.period)?;
    let mut chain = Vec::with_capacity(2 * bands.n_bands());
    for (n, row) in bands.values.iter().enumerate() {
        let (first, second) = if n % 2 == 0 { (row[i0], row[i1]) } else { (row[i1], row[i0]) };
        if let Some(&prev) = chain.last() {
            if first < prev - MONOTONE_TOLERANCE * (1.0 + f64::abs(prev)) {
                return Err(BandError::PropertyViolation {
                    band: n + 1,
                    theta_a: bands.thetas[if n % 2 == 0 { i0 } else { i1 }],
                    theta_b: bands.thetas[if n % 2 == 0 { i1 } else { i0 }],
                    detail: format!("interlacing broken: {first} below previous band endpoint {prev}"),
                });
            }
        }
        chain.push(first);
        chain.push(second);
    }
    Ok(PropertyDiagnostics { symmetry_deviation, min_monotone_step, chain })
}
