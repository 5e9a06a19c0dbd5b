//! Thickness sweeps comparing fiber eigenvalues `E_n(ε, θ)` with the effective
//! eigenvalues `ν_n(θ)`, and log-log rate fits.

use rayon::prelude::*;
use thiserror::Error;

use crate::effective_1d::{assemble_direct, effective_eigs, EffectiveError, FourierTruncation};
use crate::fiber3d::{fiber_spectrum, FiberDiscretization, FiberError};
use crate::geometry::{GeometryError, WaveguideSpec};

/// Each refined eigenvalue must move by less than this share of `|E − ν|`.
pub const FLOOR_FRACTION: f64 = 0.1;

/// Refinement factor applied to `N_s` and the section elements.
pub const REFINEMENT: f64 = 1.5;

/// Entries with `|E − ν| ≤ EXACT_TOLERANCE·(1 + |ν|)` at every ε are exact.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error(
        "discretization floor too high at eps = {eps}, theta = {theta}, n = {n}: refinement moved E by {shift:e}, error is {error:e}"
    )]
    FloorTooHigh { eps: f64, theta: f64, n: usize, shift: f64, error: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("fiber solve failed at eps = {eps}, theta = {theta}: {source}")]
    Fiber { eps: f64, theta: f64, source: FiberError },
    #[error("effective solve failed at theta = {theta}: {source}")]
    Effective { theta: f64, source: EffectiveError },
    #[error("rate fit needs at least 3 thickness values, got {0}")]
    InsufficientData(usize),
    #[error("invalid sweep: {0}")]
    InvalidRequest(String),
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub thetas: Vec<f64>,
    /// `nu[t][n]`.
    pub nu: Vec<Vec<f64>>,
    /// `energies[e][t][n]` on the base discretization.
    pub energies: Vec<Vec<Vec<f64>>>,
    /// `errors[e][t][n] = |E_n − ν_n|`.
    pub errors: Vec<Vec<Vec<f64>>>,
    /// `|E_n(refined) − E_n(base)|`, same layout as `errors`.
    pub refinement_shift: Vec<Vec<Vec<f64>>>,
    /// `exact[t][n]`: agreement to round-off at every ε; excluded from gates and fits.
    pub exact: Vec<Vec<bool>>,
}

impl SweepResult {
    pub fn n_max(&self) -> usize {
        self.nu.first().map_or(0, Vec::len)
    }

    /// Largest refinement shift over the table.
    pub fn floor_estimate(&self) -> f64 {
        self.refinement_shift.iter().flatten().flatten().copied().fold(0.0, f64::max)
    }

    /// Error column `|E_n(ε, θ) − ν_n(θ)|` over the ε list.
    pub fn error_column(&self, t: usize, n: usize) -> Vec<f64> {
        self.errors.iter().map(|e| e[t][n]).collect()
    }
}

/// Fiber versus effective eigenvalues over `eps × thetas`, bands `1..=n_max`.
///
/// Every fiber solve is repeated on a discretization refined by
/// [`REFINEMENT`]; the sweep aborts when the refinement moves an eigenvalue by
/// more than [`FLOOR_FRACTION`] of its error.
pub fn eps_sweep(
    spec: &WaveguideSpec,
    eps: &[f64],
    thetas: &[f64],
    n_max: usize,
    disc: &FiberDiscretization,
    trunc: &FourierTruncation,
) -> Result<SweepResult, ConvergenceError> {
    if eps.is_empty() || thetas.is_empty() || n_max == 0 {
        return Err(ConvergenceError::InvalidRequest("need at least one eps, theta and band".into()));
    }
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    if eps.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConvergenceError::InvalidRequest("duplicate eps values".into()));
    }
    for &e in &eps {
        spec.validate_epsilon(e)?;
    }
    let fine =
        disc.refined(REFINEMENT).map_err(|source| ConvergenceError::Fiber { eps: eps[0], theta: thetas[0], source })?;

    let nu = thetas
        .par_iter()
        .map(|&theta| {
            let m =
                assemble_direct(spec, theta, trunc).map_err(|source| ConvergenceError::Effective { theta, source })?;
            effective_eigs(&m, n_max).map_err(|source| ConvergenceError::Effective { theta, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..eps.len()).flat_map(|e| (0..thetas.len()).map(move |t| (e, t))).collect();
    let solved = jobs
        .par_iter()
        .map(|&(e, t)| {
            let (eps, theta) = (eps[e], thetas[t]);
            let wrap = |source| ConvergenceError::Fiber { eps, theta, source };
            let base = fiber_spectrum(spec, eps, theta, disc, n_max).map_err(wrap)?;
            let refined = fiber_spectrum(spec, eps, theta, &fine, n_max).map_err(wrap)?;
            Ok((base, refined))
        })
        .collect::<Result<Vec<_>, ConvergenceError>>()?;

    let (ne, nt) = (eps.len(), thetas.len());
    let mut energies = vec![vec![Vec::new(); nt]; ne];
    let mut errors = vec![vec![Vec::new(); nt]; ne];
    let mut refinement_shift = vec![vec![Vec::new(); nt]; ne];
    for (&(e, t), (base, refined)) in jobs.iter().zip(solved) {
        errors[e][t] = base.iter().zip(&nu[t]).map(|(a, b)| (a - b).abs()).collect();
        refinement_shift[e][t] = base.iter().zip(&refined).map(|(a, b)| (a - b).abs()).collect();
        energies[e][t] = base;
    }
    let exact: Vec<Vec<bool>> = (0..nt)
        .map(|t| {
            (0..n_max).map(|n| (0..ne).all(|e| errors[e][t][n] <= EXACT_TOLERANCE * (1.0 + nu[t][n].abs()))).collect()
        })
        .collect();

    for e in 0..ne {
        for t in 0..nt {
            for n in 0..n_max {
                let (shift, error) = (refinement_shift[e][t][n], errors[e][t][n]);
                if !exact[t][n] && shift > FLOOR_FRACTION * error {
                    return Err(ConvergenceError::FloorTooHigh {
                        eps: eps[e],
                        theta: thetas[t],
                        n: n + 1,
                        shift,
                        error,
                    });
                }
            }
        }
    }
    Ok(SweepResult { eps, thetas: thetas.to_vec(), nu, energies, errors, refinement_shift, exact })
}

/// Least-squares slope of `log(err)` against `log(eps)`.
pub fn fit_log_slope(eps: &[f64], errors: &[f64]) -> f64 {
    assert_eq!(eps.len(), errors.len());
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug)]
pub struct RateFit {
    /// `slopes[t][n]`; `None` for exact entries.
    pub slopes: Vec<Vec<Option<f64>>>,
    /// Minimum over all fitted entries; `None` when every entry is exact.
    pub min_slope: Option<f64>,
}

/// Per-entry convergence rates of a sweep.
pub fn fit_rate(sweep: &SweepResult) -> Result<RateFit, ConvergenceError> {
    if sweep.eps.len() < 3 {
        return Err(ConvergenceError::InsufficientData(sweep.eps.len()));
    }
    let slopes: Vec<Vec<Option<f64>>> = (0..sweep.thetas.len())
        .map(|t| {
            (0..sweep.n_max())
                .map(|n| (!sweep.exact[t][n]).then(|| fit_log_slope(&sweep.eps, &sweep.error_column(t, n))))
                .collect()
        })
        .collect();
    let min_slope = slopes.iter().flatten().flatten().copied().reduce(f64::min);
    Ok(RateFit { slopes, min_slope })
}
