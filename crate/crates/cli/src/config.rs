//! Run configuration: JSON schema, loading and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use cofrag::grid::{GridKind, InitialData, VolumeGrid};
use cofrag::kernels::{hypothesis_report, CoagulationKernel, FragmentationKernel, Hypothesis, HypothesisReport, ReportSampling};
use cofrag::solver::SolverConfig;
use cofrag::truncation::TruncationParams;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A configuration error, tagged with the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { field: field.into(), message: message.to_string() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub coagulation: CoagulationKernel<f64>,
    pub fragmentation: FragmentationKernel<f64>,
    /// Truncation level `n`; the grid spans `[xmin, n]`.
    pub truncation_n: f64,
    pub grid: GridConfig,
    pub initial: InitialData<f64>,
    pub solver: SolverConfig<f64>,
    /// Snapshot times; defaults to `[solver.t_end]`.
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    /// Relative paths resolve against the config file's directory.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConfig {
    pub xmin: f64,
    #[serde(flatten)]
    pub kind: GridKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// `ε` ladder for the tail radii `R_ε = ‖f0‖/ε`.
    pub eps: Vec<f64>,
    /// `δ` ladder for `p(δ)`, checked in decreasing order.
    pub deltas: Vec<f64>,
    /// Upper end `R` of the sets in `p(δ)`.
    pub p_radius: f64,
    /// Radii `R >= 1` at which the hypothesis constants are reported.
    pub radii: Vec<f64>,
    /// `δ` values for the (H5) modulus.
    pub omega_deltas: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.01],
            deltas: vec![0.5, 0.25, 0.125, 0.0625],
            p_radius: 1.0,
            radii: vec![1.0, 10.0],
            omega_deltas: vec![1e-3, 1e-2, 0.1],
        }
    }
}

/// Invariant checks that decide the exit status of `run`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub conservation: bool,
    pub non_negativity: bool,
    pub volume_bound: bool,
    pub moment_bound: bool,
    pub tails: bool,
    pub integrability: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { conservation: true, non_negativity: true, volume_bound: true, moment_bound: true, tails: true, integrability: true }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_owned() } else { path };
            ConfigError::new(field, e.into_inner())
        })
    }

    /// Output times, defaulting to `[t_end]`.
    pub fn resolved_output_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.solver.t_end]
        } else {
            self.output_times.clone()
        }
    }

    /// Checks every module precondition. Hypothesis verdicts are not consulted.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.coagulation.validate().map_err(|e| ConfigError::new("coagulation", e))?;
        self.fragmentation.validate().map_err(|e| ConfigError::new("fragmentation", e))?;
        TruncationParams::new(self.truncation_n).map_err(|e| ConfigError::new("truncation_n", e))?;
        if !(self.grid.xmin > 0.0 && self.grid.xmin < self.truncation_n) {
            return Err(ConfigError::new("grid.xmin", format!("xmin = {} must lie in ]0, n = {}[", self.grid.xmin, self.truncation_n)));
        }
        self.build_grid()?;
        self.initial.validate().map_err(|e| ConfigError::new("initial", e))?;
        self.solver.validate().map_err(|e| ConfigError::new("solver", e))?;

        let times = self.resolved_output_times();
        if times.iter().any(|&t| !(t > 0.0 && t <= self.solver.t_end)) {
            return Err(ConfigError::new("output_times", format!("times must lie in ]0, t_end = {}]", self.solver.t_end)));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new("output_times", "times must be strictly increasing"));
        }

        let d = &self.diagnostics;
        if d.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(ConfigError::new("diagnostics.eps", "every ε must be positive and finite"));
        }
        if !(d.p_radius > 0.0 && d.p_radius.is_finite()) {
            return Err(ConfigError::new("diagnostics.p_radius", "R must be positive and finite"));
        }
        if d.deltas.iter().any(|&x| !(x > 0.0 && x <= d.p_radius)) {
            return Err(ConfigError::new("diagnostics.deltas", format!("every δ must lie in ]0, p_radius = {}]", d.p_radius)));
        }
        if d.radii.is_empty() || d.radii.iter().any(|&r| !(r >= 1.0 && r.is_finite())) || d.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new("diagnostics.radii", "need a non-empty increasing list of radii >= 1"));
        }
        let (r_lo, r_hi) = (d.radii[0], d.radii[d.radii.len() - 1]);
        let bad_delta = |x: f64| !(x > 0.0 && x <= r_lo);
        if d.omega_deltas.is_empty() || d.omega_deltas.iter().any(|&x| bad_delta(x)) || d.omega_deltas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(
                "diagnostics.omega_deltas",
                format!("need a non-empty increasing list in ]0, {r_lo}] (up to {r_hi} for the largest radius)"),
            ));
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<VolumeGrid<f64>, ConfigError> {
        VolumeGrid::build(self.grid.xmin, self.truncation_n, self.grid.kind).map_err(|e| ConfigError::new("grid", e))
    }

    pub fn hypothesis_report(&self) -> HypothesisReport<f64> {
        let d = &self.diagnostics;
        hypothesis_report(&self.coagulation, &self.fragmentation, &d.radii, &d.omega_deltas, &ReportSampling::default())
    }

    /// Rejects configurations violating (H1)–(H4). (H5) and (H6) failures
    /// are allowed: they mark the shattering regime, which is what such runs measure.
    pub fn hypothesis_gate(report: &HypothesisReport<f64>) -> Result<(), ConfigError> {
        for v in report.failures() {
            let field = match v.hypothesis {
                Hypothesis::H1 | Hypothesis::H2 => "coagulation",
                Hypothesis::H3 | Hypothesis::H4 => "fragmentation",
                Hypothesis::H5 | Hypothesis::H6 => continue,
            };
            let why = v.witness.as_deref().unwrap_or("violated");
            return Err(ConfigError::new(field, format!("({}) violated: {why}", v.hypothesis)));
        }
        Ok(())
    }
}

/// Output directory: the override if given, else the config's, relative to the config file.
pub fn output_dir(cfg: &RunConfig, config_path: &Path, override_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = override_dir {
        return dir.to_path_buf();
    }
    if cfg.output_dir.is_absolute() {
        return cfg.output_dir.clone();
    }
    config_path.parent().unwrap_or(Path::new(".")).join(&cfg.output_dir)
}
