use std::path::{Path, PathBuf};

use gabor_core::lattice::{Lattice2D, SL2Matrix};
use gabor_core::metaplectic::SamplingGrid;
use gabor_core::window::{GridParams, WindowSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    DoubleSum,
    Eigen,
    #[default]
    Both,
}

impl std::str::FromStr for MethodChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "double_sum" => Ok(MethodChoice::DoubleSum),
            "eigen" => Ok(MethodChoice::Eigen),
            "both" => Ok(MethodChoice::Both),
            _ => Err(format!("unknown method `{s}` (expected double_sum, eigen or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Tail tolerance of the kernel table.
    pub kernel: f64,
    pub tightness: f64,
    pub norm: f64,
    pub frame_identity: f64,
    /// Relative agreement of the two PF methods.
    pub method_agreement: f64,
    /// Relative agreement of transported pairs.
    pub invariance: f64,
    pub covariance: f64,
    /// Relative distance of the extrapolated limit from the reference.
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel: 1e-10,
            tightness: 1e-6,
            norm: 1e-6,
            frame_identity: 1e-6,
            method_agreement: 1e-6,
            invariance: 1e-8,
            covariance: 1e-6,
            limit: 0.02,
        }
    }
}

impl Tolerances {
    fn all(&self) -> [(&'static str, f64); 8] {
        [
            ("kernel", self.kernel),
            ("tightness", self.tightness),
            ("norm", self.norm),
            ("frame_identity", self.frame_identity),
            ("method_agreement", self.method_agreement),
            ("invariance", self.invariance),
            ("covariance", self.covariance),
            ("limit", self.limit),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceSettings {
    /// Explicit matrices `[[a, b], [c, d]]`.
    pub matrices: Vec<SL2Matrix>,
    /// Additional seeded random matrices.
    pub random: usize,
    pub seed: u64,
    pub max_log_stretch: f64,
    /// Dilations at which PF rows are compared.
    pub rs: Vec<i64>,
    /// Lattice points used for the covariance check.
    pub covariance_points: usize,
    pub grid: SamplingGrid,
    /// Deliberately leaves boundary normals untransported; for testing the checker.
    pub inject_fault: bool,
}

impl Default for InvarianceSettings {
    fn default() -> Self {
        InvarianceSettings {
            matrices: Vec::new(),
            random: 20,
            seed: 1,
            max_log_stretch: 0.5,
            rs: vec![4, 8],
            covariance_points: 25,
            grid: SamplingGrid::default(),
            inject_fault: false,
        }
    }
}

fn default_rs() -> Vec<i64> {
    gabor_core::asymptotics::DEFAULT_RS.to_vec()
}

fn default_cap() -> usize {
    gabor_core::localization::DEFAULT_MATRIX_CAP
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_tests() -> usize {
    20
}

fn default_radius() -> f64 {
    400.0
}

/// Single-file JSON run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub window: WindowSpec,
    /// Generators `[g1, g2]` of the lattice.
    pub lattice: Lattice2D,
    /// Domain file, relative to the configuration file; the unit cell square if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<PathBuf>,
    #[serde(default = "default_rs")]
    pub rs: Vec<i64>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Largest kernel radius tried before giving up on condition Phi.
    #[serde(default = "default_radius")]
    pub max_radius: f64,
    #[serde(default = "default_cap")]
    pub matrix_cap: usize,
    /// Random probes used by `frame-verify`.
    #[serde(default = "default_tests")]
    pub tightness_tests: usize,
    /// Replace the window by its canonical tight version on this grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tighten: Option<GridParams>,
    #[serde(default)]
    pub invariance: InvarianceSettings,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in self.tolerances.all() {
            if !(v > 0.0) {
                return Err(CliError::Input(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if self.rs.is_empty() || self.rs.iter().any(|&r| r < 1) {
            return Err(CliError::Input("rs must be a nonempty list of positive integers".into()));
        }
        if !(self.max_radius > 0.0) {
            return Err(CliError::Input("max_radius must be positive".into()));
        }
        Ok(())
    }
}

/// A configuration together with the directory relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let config = RunConfig::parse(&text)?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    pub fn domain_path(&self) -> Option<PathBuf> {
        self.config.domain.as_ref().map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }
}

/// Command-line flags that override configuration values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub method: Option<MethodChoice>,
    /// Replaces the primary tolerance of the command being run.
    pub tol: Option<f64>,
    pub radius: Option<f64>,
    pub rs: Option<Vec<i64>>,
}
