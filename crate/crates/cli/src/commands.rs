//! The five subcommands.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wavebands::bands::{
    analyze_gaps, borg_test, compute_bands, symmetry_monotonicity_check, BandSolver, BandStructure, BorgVerdict,
    EffectiveSolver, FiberSolver,
};
use wavebands::convergence::{eps_sweep, fit_rate};
use wavebands::cross_section::{section_spectra, uniform_gap};
use wavebands::effective_1d::{assemble_direct, assemble_form, effective_eigs};
use wavebands::fiber3d::fiber_spectrum;
use wavebands::geometry::WaveguideSpec;

use crate::config::{geometry_error, RunConfig};
use crate::output::{write_csv, write_json, Cell, Header};
use crate::{CliError, Command};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    PropertyViolation,
}

#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn module_error(module: &'static str) -> impl Fn(String) -> CliError {
    move |message| CliError::Module { module, message }
}

/// Runs `command` and writes its artifacts into `out`.
pub fn run(command: &Command, config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
    let spec = config.spec()?;
    let hash = config.hash();
    match command {
        Command::Bands { epsilon, n_bands } => {
            bands(config, &spec, &hash, out, epsilon, n_bands.unwrap_or(config.task.n_bands))
        }
        Command::Gaps => gaps(config, &spec, &hash, out),
        Command::Converge { epsilons } => {
            converge(config, &spec, &hash, out, epsilons.clone().unwrap_or_else(|| config.task.epsilons.clone()))
        }
        Command::Crosssec { epsilon, s_samples } => {
            let eps = epsilon.unwrap_or_else(|| config.task.epsilons.iter().copied().fold(0.0, f64::max));
            crosssec(config, &spec, &hash, out, eps, s_samples.unwrap_or(config.task.s_samples))
        }
        Command::Validate => validate(config, &spec, &hash, out),
    }
}

fn band_rows(bands: &BandStructure) -> Vec<Vec<Cell>> {
    let eps = bands.source.epsilon();
    let mut rows = Vec::new();
    for (j, &theta) in bands.thetas.iter().enumerate() {
        for (n, row) in bands.values.iter().enumerate() {
            rows.push(vec![
                Cell::Float(theta),
                Cell::Int(n + 1),
                Cell::Float(row[j]),
                Cell::Text(bands.source.to_string()),
                eps.map_or(Cell::Empty, Cell::Float),
            ]);
        }
    }
    rows
}

fn bands(
    config: &RunConfig,
    spec: &WaveguideSpec,
    hash: &str,
    out: &Path,
    epsilon: &str,
    n_bands: usize,
) -> Result<Outcome, CliError> {
    let err = module_error("bands");
    let header = Header::new("bands", hash, format!("epsilon={epsilon} n_bands={n_bands}"));
    let effective = EffectiveSolver::new(spec, config.discretization.modes);
    let fiber;
    let solver: &dyn BandSolver = if epsilon == "effective" {
        &effective
    } else {
        let eps: f64 =
            epsilon.parse().map_err(|_| err(format!("--epsilon must be a number or 'effective', got {epsilon:?}")))?;
        spec.validate_epsilon(eps).map_err(geometry_error)?;
        fiber = FiberSolver { spec, eps, disc: config.fiber_discretization(spec)? };
        &fiber
    };
    let table = compute_bands(solver, n_bands, config.discretization.n_theta).map_err(|e| err(e.to_string()))?;
    let file = write_csv(
        &out.join("bands.csv"),
        &header,
        &["theta", "band_index", "value", "source", "epsilon"],
        band_rows(&table),
    )?;
    let (status, summary) = if table.source.is_effective() {
        match symmetry_monotonicity_check(&table) {
            Ok(d) => {
                (Status::Ok, format!("{n_bands} effective bands; symmetry deviation {:.1e}", d.symmetry_deviation))
            }
            Err(e) => (Status::PropertyViolation, e.to_string()),
        }
    } else {
        (Status::Ok, format!("{n_bands} fiber bands at eps = {epsilon}"))
    };
    Ok(Outcome { status, files: vec![file], summary })
}

#[derive(Serialize)]
struct GapJson {
    n: usize,
    lower: f64,
    upper: f64,
    width: f64,
    rule: String,
}

#[derive(Serialize)]
struct EndpointJson {
    n: usize,
    at_zero: f64,
    at_edge: f64,
}

#[derive(Serialize)]
struct BorgJson {
    verdict: &'static str,
    n1: Option<usize>,
    width: Option<f64>,
    tolerance: f64,
}

#[derive(Serialize)]
struct GapReportJson {
    source: String,
    tolerance: f64,
    first_open_gap: Option<usize>,
    borg: BorgJson,
    gaps: Vec<GapJson>,
    endpoints: Vec<EndpointJson>,
}

fn gaps(config: &RunConfig, spec: &WaveguideSpec, hash: &str, out: &Path) -> Result<Outcome, CliError> {
    let err = module_error("bands");
    let header = Header::new("gaps", hash, String::new());
    let n_bands = config.task.n_bands;
    let table =
        compute_bands(&EffectiveSolver::new(spec, config.discretization.modes), n_bands, config.discretization.n_theta)
            .map_err(|e| err(e.to_string()))?;
    let tol = config.task.degeneracy_tolerance;
    let verdict = borg_test(spec, n_bands, tol).map_err(|e| err(e.to_string()))?;
    let report = match analyze_gaps(&table) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome { status: Status::PropertyViolation, files: vec![], summary: e.to_string() }),
    };
    let borg = match verdict {
        BorgVerdict::Constant => BorgJson { verdict: "constant", n1: None, width: None, tolerance: tol },
        BorgVerdict::NonConstant { n1, width } => {
            BorgJson { verdict: "nonconstant", n1: Some(n1), width: Some(width), tolerance: tol }
        }
        BorgVerdict::Inconclusive => BorgJson { verdict: "inconclusive", n1: None, width: None, tolerance: tol },
    };
    let open = report.gaps.iter().filter(|g| g.width > report.tolerance).count();
    let body = GapReportJson {
        source: report.source.to_string(),
        tolerance: report.tolerance,
        first_open_gap: report.first_open_gap,
        borg,
        gaps: report
            .gaps
            .iter()
            .map(|g| GapJson { n: g.n, lower: g.lower, upper: g.upper, width: g.width, rule: g.rule.to_string() })
            .collect(),
        endpoints: report
            .endpoints
            .iter()
            .map(|e| EndpointJson { n: e.n, at_zero: e.at_zero, at_edge: e.at_edge })
            .collect(),
    };
    let file = write_json(&out.join("gaps.json"), &header, &body)?;
    let summary = format!("{open} open gap(s) among the first {n_bands} bands; Borg verdict {}", body.borg.verdict);
    Ok(Outcome { status: Status::Ok, files: vec![file], summary })
}

#[derive(Serialize)]
struct SlopeJson {
    theta: f64,
    band: usize,
    slope: Option<f64>,
    exact: bool,
}

#[derive(Serialize)]
struct ConvergeJson {
    epsilons: Vec<f64>,
    thetas: Vec<f64>,
    floor_estimate: f64,
    min_slope: Option<f64>,
    threshold: f64,
    slopes: Vec<SlopeJson>,
}

fn converge(
    config: &RunConfig,
    spec: &WaveguideSpec,
    hash: &str,
    out: &Path,
    epsilons: Vec<f64>,
) -> Result<Outcome, CliError> {
    let err = module_error("convergence");
    let list: Vec<String> = epsilons.iter().map(f64::to_string).collect();
    let header = Header::new("converge", hash, format!("epsilons={}", list.join(",")));
    for &eps in &epsilons {
        spec.validate_epsilon(eps).map_err(geometry_error)?;
    }
    let l = spec.period();
    let thetas = [0.0, PI / (2.0 * l), PI / l];
    let n_max = config.task.n_bands;
    let disc = config.fiber_discretization(spec)?;
    let sweep =
        eps_sweep(spec, &epsilons, &thetas, n_max, &disc, &config.truncation()).map_err(|e| err(e.to_string()))?;
    let fit = fit_rate(&sweep).map_err(|e| err(e.to_string()))?;
    let mut rows = Vec::new();
    for (e, &eps) in sweep.eps.iter().enumerate() {
        for (t, &theta) in sweep.thetas.iter().enumerate() {
            for n in 0..n_max {
                rows.push(vec![
                    Cell::Float(eps),
                    Cell::Float(theta),
                    Cell::Int(n + 1),
                    Cell::Float(sweep.nu[t][n]),
                    Cell::Float(sweep.energies[e][t][n]),
                    Cell::Float(sweep.errors[e][t][n]),
                ]);
            }
        }
    }
    let csv =
        write_csv(&out.join("converge.csv"), &header, &["epsilon", "theta", "band", "nu", "E", "abs_error"], rows)?;
    let threshold = config.task.min_slope;
    let body = ConvergeJson {
        epsilons: sweep.eps.clone(),
        thetas: sweep.thetas.clone(),
        floor_estimate: sweep.floor_estimate(),
        min_slope: fit.min_slope,
        threshold,
        slopes: (0..thetas.len())
            .flat_map(|t| (0..n_max).map(move |n| (t, n)))
            .map(|(t, n)| SlopeJson {
                theta: thetas[t],
                band: n + 1,
                slope: fit.slopes[t][n],
                exact: sweep.exact[t][n],
            })
            .collect(),
    };
    let json = write_json(&out.join("converge.json"), &header, &body)?;
    let (status, summary) = match fit.min_slope {
        Some(s) if s < threshold => (Status::PropertyViolation, format!("minimum slope {s:.3} is below {threshold}")),
        Some(s) => (Status::Ok, format!("minimum slope {s:.3}")),
        None => (Status::Ok, "every entry is exact; no slope to fit".to_string()),
    };
    Ok(Outcome { status, files: vec![csv, json], summary })
}

#[derive(Serialize)]
struct CrosssecJson {
    epsilon: f64,
    s_samples: usize,
    min_lambda2: f64,
    s_at_min: f64,
}

fn crosssec(
    config: &RunConfig,
    spec: &WaveguideSpec,
    hash: &str,
    out: &Path,
    eps: f64,
    s_samples: usize,
) -> Result<Outcome, CliError> {
    let err = module_error("cross_section");
    let header = Header::new("crosssec", hash, format!("epsilon={eps} s_samples={s_samples}"));
    spec.validate_epsilon(eps).map_err(geometry_error)?;
    let grid = config.section_grid(spec)?;
    let spectra = section_spectra(&grid, spec, eps, s_samples, 4).map_err(|e| err(e.to_string()))?;
    let rows = spectra.iter().flat_map(|(s, sp)| {
        sp.values.iter().enumerate().map(move |(k, v)| vec![Cell::Float(*s), Cell::Int(k + 1), Cell::Float(*v)])
    });
    let csv = write_csv(&out.join("crosssec.csv"), &header, &["s", "index", "lambda"], rows)?;
    let (s_at_min, min_lambda2) = spectra
        .iter()
        .map(|(s, sp)| (*s, sp.values[1]))
        .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let json = write_json(
        &out.join("crosssec.json"),
        &header,
        &CrosssecJson { epsilon: eps, s_samples, min_lambda2, s_at_min },
    )?;
    let status = if min_lambda2 > 0.0 { Status::Ok } else { Status::PropertyViolation };
    Ok(Outcome {
        status,
        files: vec![csv, json],
        summary: format!("min_s lambda_2 = {min_lambda2:.6} at s = {s_at_min:.4}"),
    })
}

#[derive(Serialize)]
struct CheckJson {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct ValidateJson {
    passed: bool,
    checks: Vec<CheckJson>,
}

fn check(name: &'static str, result: Result<String, String>) -> CheckJson {
    match result {
        Ok(detail) => CheckJson { name, passed: true, detail },
        Err(detail) => CheckJson { name, passed: false, detail },
    }
}

fn validate(config: &RunConfig, spec: &WaveguideSpec, hash: &str, out: &Path) -> Result<Outcome, CliError> {
    let header = Header::new("validate", hash, String::new());
    let l = spec.period();
    let thetas = [0.0, PI / (2.0 * l), PI / l];
    let trunc = config.truncation();
    let eps_max = config.task.epsilons.iter().copied().fold(0.0, f64::max);
    let mut checks = vec![
        check("h positivity", {
            let m = spec.profile().min();
            if m > 0.0 {
                Ok(format!("min h = {m}"))
            } else {
                Err(format!("min h = {m}"))
            }
        }),
        check("alpha(0) = 0", {
            let a = spec.rotation().value(0.0);
            if a.abs() <= 1e-12 {
                Ok(format!("alpha(0) = {a:e}"))
            } else {
                Err(format!("alpha(0) = {a}"))
            }
        }),
        check(
            "tube admissible",
            config
                .task
                .epsilons
                .iter()
                .try_for_each(|&e| spec.validate_epsilon(e))
                .map(|_| {
                    format!(
                        "all {} thickness values below eps limit {:.4}",
                        config.task.epsilons.len(),
                        spec.epsilon_limit()
                    )
                })
                .map_err(|e| e.to_string()),
        ),
    ];
    checks.push(check("effective operator hermitian and form identity", {
        let mut worst_asym = 0.0f64;
        let mut worst_gap = 0.0f64;
        let mut failure = None;
        for &theta in &thetas {
            match (assemble_direct(spec, theta, &trunc), assemble_form(spec, theta, &trunc)) {
                (Ok(d), Ok(f)) => {
                    worst_asym = worst_asym.max(d.asymmetry());
                    let n = config.task.n_bands;
                    match (effective_eigs(&d, n), effective_eigs(&f, n)) {
                        (Ok(a), Ok(b)) => {
                            worst_gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(worst_gap, f64::max);
                        }
                        (Err(e), _) | (_, Err(e)) => failure = Some(e.to_string()),
                    }
                }
                (Err(e), _) | (_, Err(e)) => failure = Some(e.to_string()),
            }
        }
        match failure {
            Some(f) => Err(f),
            None if worst_asym <= 1e-12 && worst_gap <= 1e-8 => {
                Ok(format!("asymmetry {worst_asym:.1e}, direct vs form {worst_gap:.1e}"))
            }
            None => Err(format!("asymmetry {worst_asym:.1e}, direct vs form {worst_gap:.1e}")),
        }
    }));
    checks.push(check(
        "band symmetry and monotonicity",
        compute_bands(
            &EffectiveSolver::new(spec, config.discretization.modes),
            config.task.n_bands,
            config.discretization.n_theta,
        )
        .and_then(|b| symmetry_monotonicity_check(&b))
        .map(|d| {
            format!(
                "symmetry deviation {:.1e}, smallest monotone step {:.2e}",
                d.symmetry_deviation, d.min_monotone_step
            )
        })
        .map_err(|e| e.to_string()),
    ));
    checks.push(check(
        "uniform section gap",
        config
            .section_grid(spec)
            .map_err(|e| e.to_string())
            .and_then(|g| uniform_gap(&g, spec, eps_max, config.task.s_samples).map_err(|e| e.to_string()))
            .map(|g| format!("min_s lambda_2 = {g:.6} at eps = {eps_max}")),
    ));
    checks.push(check(
        "fiber bottom equals c",
        config
            .fiber_discretization(spec)
            .map_err(|e| e.to_string())
            .and_then(|d| fiber_spectrum(spec, eps_max, 0.0, &d, 1).map_err(|e| e.to_string()))
            .and_then(|e| {
                let dev = (e[0] - spec.shift()).abs();
                let msg = format!("E_1(eps, 0) - c = {dev:.1e} at eps = {eps_max}");
                if dev <= 1e-8 {
                    Ok(msg)
                } else {
                    Err(msg)
                }
            }),
    ));
    let passed = checks.iter().all(|c| c.passed);
    let summary = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "ok" } else { "FAILED" }, c.name, c.detail))
        .collect::<Vec<_>>()
        .join("\n");
    let file = write_json(&out.join("validate.json"), &header, &ValidateJson { passed, checks })?;
    Ok(Outcome { status: if passed { Status::Ok } else { Status::PropertyViolation }, files: vec![file], summary })
}
