//! Run configuration: TOML schema, defaults and validation.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use wavebands::cross_section::SectionGrid;
use wavebands::effective_1d::FourierTruncation;
use wavebands::fiber3d::FiberDiscretization;
use wavebands::geometry::{GeometryError, PeriodicScalar, SectionShape, WaveguideSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: &'static str, detail: String },
}

impl ConfigError {
    /// Name of the violated invariant, if this is a validation error.
    pub fn invariant(&self) -> Option<&'static str> {
        match self {
            Self::Validation { invariant, .. } => Some(invariant),
            _ => None,
        }
    }
}

fn invalid(invariant: &'static str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Validation { invariant, detail: detail.into() }
}

/// A periodic coefficient: `{ constant = v }` or `{ series = [[m, amp, phase], …] }`
/// meaning `Σ amp·cos(2πms/L + phase)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Coefficient {
    Constant(f64),
    Series(Vec<(u32, f64, f64)>),
}

impl Coefficient {
    fn build(&self, period: f64, samples: usize) -> Result<PeriodicScalar, GeometryError> {
        match self {
            Self::Constant(v) => PeriodicScalar::constant(period, samples, *v),
            Self::Series(terms) => PeriodicScalar::from_cosine_series(period, samples, terms),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    pub width: f64,
    pub height: f64,
    pub offset: [f64; 2],
}

impl Default for SectionConfig {
    fn default() -> Self {
        Self { width: 1.0, height: 1.0, offset: [0.0, 0.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub period: f64,
    pub shift: f64,
    pub samples: usize,
    pub curvature: Coefficient,
    pub torsion: Coefficient,
    pub rotation: Coefficient,
    pub profile: Coefficient,
    pub section: SectionConfig,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            period: 2.0 * PI,
            shift: 1.0,
            samples: 256,
            curvature: Coefficient::Constant(0.0),
            torsion: Coefficient::Constant(0.0),
            rotation: Coefficient::Constant(0.0),
            profile: Coefficient::Constant(1.0),
            section: SectionConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Fourier modes `M` of the effective operator (`2M + 1` unknowns).
    pub modes: usize,
    /// Longitudinal nodes of the fiber discretization.
    pub n_s: usize,
    /// Section grid nodes per direction.
    pub section_nodes: [usize; 2],
    /// Half-zone θ samples.
    pub n_theta: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self { modes: 32, n_s: 24, section_nodes: [9, 9], n_theta: 33 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub epsilons: Vec<f64>,
    pub n_bands: usize,
    pub s_samples: usize,
    /// Relative degeneracy tolerance of the Borg test.
    pub degeneracy_tolerance: f64,
    /// Smallest acceptable fitted convergence slope.
    pub min_slope: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            n_bands: 4,
            s_samples: 16,
            degeneracy_tolerance: 1e-7,
            min_slope: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub geometry: GeometryConfig,
    pub discretization: DiscretizationConfig,
    pub task: TaskConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("wavebands-out"),
            geometry: GeometryConfig::default(),
            discretization: DiscretizationConfig::default(),
            task: TaskConfig::default(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical TOML; parsing it back yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// SHA-256 of the canonical TOML, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn spec(&self) -> Result<WaveguideSpec, ConfigError> {
        let g = &self.geometry;
        let build = |c: &Coefficient| c.build(g.period, g.samples).map_err(geometry_error);
        let section =
            SectionShape::rectangle(g.section.width, g.section.height, g.section.offset).map_err(geometry_error)?;
        WaveguideSpec::builder(g.period)
            .samples(g.samples)
            .curvature(build(&g.curvature)?)
            .torsion(build(&g.torsion)?)
            .rotation(build(&g.rotation)?)
            .profile(build(&g.profile)?)
            .section(section)
            .shift(g.shift)
            .build()
            .map_err(geometry_error)
    }

    pub fn truncation(&self) -> FourierTruncation {
        FourierTruncation::new(self.geometry.period, self.discretization.modes)
    }

    pub fn section_grid(&self, spec: &WaveguideSpec) -> Result<SectionGrid, ConfigError> {
        let [n1, n2] = self.discretization.section_nodes;
        SectionGrid::new(*spec.section(), n1, n2).map_err(|e| invalid("section grid", e.to_string()))
    }

    pub fn fiber_discretization(&self, spec: &WaveguideSpec) -> Result<FiberDiscretization, ConfigError> {
        FiberDiscretization::new(spec.period(), self.discretization.n_s, self.section_grid(spec)?)
            .map_err(|e| invalid("fiber discretization", e.to_string()))
    }

    /// Checks numeric ranges and the geometry invariants, including
    /// admissibility of every configured thickness.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.discretization;
        let t = &self.task;
        if !(1..=512).contains(&d.modes) {
            return Err(invalid("modes range", format!("modes must lie in 1..=512, got {}", d.modes)));
        }
        if d.n_s < 8 || !d.n_s.is_multiple_of(2) {
            return Err(invalid("n_s range", format!("n_s must be even and >= 8, got {}", d.n_s)));
        }
        if d.section_nodes.iter().any(|&n| n < 3) {
            return Err(invalid(
                "section_nodes range",
                format!("need at least 3 nodes per direction, got {:?}", d.section_nodes),
            ));
        }
        if d.n_theta < 9 || d.n_theta.is_multiple_of(2) {
            return Err(invalid("n_theta range", format!("n_theta must be odd and >= 9, got {}", d.n_theta)));
        }
        if t.n_bands == 0 || t.n_bands > 2 * d.modes + 1 {
            return Err(invalid(
                "n_bands range",
                format!("n_bands must lie in 1..={}, got {}", 2 * d.modes + 1, t.n_bands),
            ));
        }
        if t.s_samples < 8 {
            return Err(invalid("s_samples range", format!("s_samples must be >= 8, got {}", t.s_samples)));
        }
        if t.epsilons.is_empty() || t.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("epsilon range", format!("epsilons must be positive, got {:?}", t.epsilons)));
        }
        if !(t.degeneracy_tolerance > 0.0 && t.min_slope.is_finite()) {
            return Err(invalid("tolerance range", "degeneracy_tolerance must be positive and min_slope finite"));
        }
        let spec = self.spec()?;
        for &eps in &t.epsilons {
            spec.validate_epsilon(eps).map_err(geometry_error)?;
        }
        Ok(())
    }
}

pub fn geometry_error(e: GeometryError) -> ConfigError {
    let invariant = match e {
        GeometryError::TubeSelfIntersecting { .. } => "tube self-intersecting",
        GeometryError::HPositivity { .. } => "h positivity",
        GeometryError::AlphaNotZero { .. } => "alpha(0) = 0",
        GeometryError::NonPositiveShift(_) => "c positivity",
        GeometryError::NonPositiveEpsilon(_) => "epsilon range",
        GeometryError::InvalidSamples(_) => "samples range",
        GeometryError::InvalidSection(_) => "section shape",
        GeometryError::PeriodMismatch { .. } => "period",
    };
    invalid(invariant, e.to_string())
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    RunConfig::from_toml(&text)
}
