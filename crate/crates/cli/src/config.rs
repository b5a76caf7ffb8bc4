//! Pipeline configuration file (TOML). Every field is optional and defaults
//! to the standard setting.
//!
//! ```toml
//! seed = 7
//!
//! [grid]
//! interval = 5.0
//! latitudes = [-75, -45, -30, -20, -10, 0, 10, 20, 30, 45, 75]
//! longitudes = [0, 20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 220, 240, 260, 280, 300, 320, 340]
//!
//! [camera]
//! hfov = 65.5
//! aspect = 1.3333333333333333
//! width = 640
//!
//! [solver]
//! epsilon = 30.0
//! k = 20
//!
//! [baseline]
//! sigma = 10.0
//! temperature = 1.0
//!
//! [scoring]
//! c = 1.0
//! alpha = 10.0
//! beta = 20.0
//! frame_stride = 1
//!
//! [metrics]
//! fps = 1.0
//! overlap_fov = 65.5
//! folds = 5
//! hi = 0.95
//! lo = 0.05
//! ```

use std::path::Path;

use anyhow::{bail, Context, Result};
use autocam_core::baselines::{DEFAULT_SIGMA, DEFAULT_TEMPERATURE};
use autocam_core::geom::{CameraModel, NFOV_ASPECT, NFOV_HFOV_DEG};
use autocam_core::grid::GridSpec;
use autocam_core::metrics::{DEFAULT_COMPARISON_FPS, DEFAULT_FOLDS};
use autocam_core::scoring::{StandinScorer, DEFAULT_C};
use autocam_core::solver::{DEFAULT_EPSILON, DEFAULT_K};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSpec {
    pub hfov: f64,
    pub aspect: f64,
    /// Output raster width; height follows from the aspect ratio.
    pub width: u32,
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec {
            hfov: NFOV_HFOV_DEG,
            aspect: NFOV_ASPECT,
            width: 640,
        }
    }
}

impl CameraSpec {
    pub fn build(&self) -> Result<CameraModel> {
        let height = (self.width as f64 / self.aspect).round() as u32;
        Ok(CameraModel::new(self.hfov, self.aspect, self.width, height)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub epsilon: f64,
    pub k: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            epsilon: DEFAULT_EPSILON,
            k: DEFAULT_K,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSpec {
    pub sigma: f64,
    pub temperature: f64,
}

impl Default for BaselineSpec {
    fn default() -> Self {
        BaselineSpec {
            sigma: DEFAULT_SIGMA,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringSpec {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub frame_stride: usize,
}

impl Default for ScoringSpec {
    fn default() -> Self {
        let s = StandinScorer::default();
        ScoringSpec {
            c: DEFAULT_C,
            alpha: s.alpha,
            beta: s.beta,
            frame_stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSpec {
    pub fps: f64,
    pub overlap_fov: f64,
    pub folds: usize,
    pub hi: f64,
    pub lo: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        MetricsSpec {
            fps: DEFAULT_COMPARISON_FPS,
            overlap_fov: NFOV_HFOV_DEG,
            folds: DEFAULT_FOLDS,
            hi: 0.95,
            lo: 0.05,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: Option<u64>,
    pub grid: GridSpec,
    pub camera: CameraSpec,
    pub solver: SolverSpec,
    pub baseline: BaselineSpec,
    pub scoring: ScoringSpec,
    pub metrics: MetricsSpec,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The seed for a randomized command: the command-line value, else the
    /// config value. There is no implicit default.
    pub fn seed(&self, cli: Option<u64>, command: &str) -> Result<u64> {
        match cli.or(self.seed) {
            Some(s) => Ok(s),
            None => bail!("`{command}` is randomized and needs an explicit seed (--seed or `seed` in the config)"),
        }
    }
}
