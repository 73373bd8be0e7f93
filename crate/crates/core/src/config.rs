//! Run configuration: built-in defaults, an optional TOML or JSON file, then
//! command-line overrides, in increasing precedence.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::PlantParams;
use crate::game::{GameConfig, DEFAULT_UC_RADIUS};
use crate::harness::{Scenario, DEFAULT_HISTOGRAM_BINS};
use crate::seeker::{SeekerParams, Variant};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

/// Which iteration the baseline variant is evaluated at in an ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineTStar {
    /// The full variant's `t*`.
    #[default]
    Shared,
    /// The baseline's own `t*`.
    Own,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub gamma_r: f64,
    pub a_r: f64,
    pub gamma_eta: f64,
    pub a_eta: f64,
    pub rho: f64,
    pub beta: f64,
    pub b: f64,
    pub epsilon: f64,
    /// `None` selects `1 / uc_radius²`.
    pub w: Option<f64>,
    pub uc_radius: f64,
    pub tau_c: f64,
    pub tau_g: f64,
    pub n_realizations: usize,
    pub iterations: usize,
    pub base_seed: u64,
    pub variant: Variant,
    pub output_dir: PathBuf,
    pub threshold_murad: f64,
    /// 0 uses every available core.
    pub worker_count: usize,
    pub ideal_tracking: bool,
    pub histogram_bins: usize,
    pub baseline_t_star: BaselineTStar,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seeker = SeekerParams::default();
        let plant = PlantParams::default();
        Self {
            gamma_r: seeker.gamma_r,
            a_r: seeker.a_r,
            gamma_eta: seeker.gamma_eta,
            a_eta: seeker.a_eta,
            rho: seeker.rho,
            beta: seeker.beta,
            b: seeker.b_final,
            epsilon: seeker.epsilon,
            w: None,
            uc_radius: DEFAULT_UC_RADIUS,
            tau_c: plant.tau_c,
            tau_g: plant.tau_g,
            n_realizations: 1000,
            iterations: 5000,
            base_seed: 2023,
            variant: Variant::Full,
            output_dir: PathBuf::from("out"),
            threshold_murad: 1.0,
            worker_count: 0,
            ideal_tracking: false,
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            baseline_t_star: BaselineTStar::Shared,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n_realizations: Option<usize>,
    pub iterations: Option<usize>,
    pub base_seed: Option<u64>,
    pub variant: Option<Variant>,
    pub worker_count: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub threshold_murad: Option<f64>,
    pub ideal_tracking: bool,
}

impl RunConfig {
    /// Parses a config document; `.json` files are read as JSON, anything
    /// else as TOML. An empty document yields the defaults.
    pub fn from_str_for(path: &Path, text: &str) -> Result<Self, ConfigError> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            if text.trim().is_empty() {
                Ok(Self::default())
            } else {
                serde_json::from_str(text).map_err(|e| e.to_string())
            }
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        };
        parsed.map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.n_realizations {
            self.n_realizations = v;
        }
        if let Some(v) = o.iterations {
            self.iterations = v;
        }
        if let Some(v) = o.base_seed {
            self.base_seed = v;
        }
        if let Some(v) = o.variant {
            self.variant = v;
        }
        if let Some(v) = o.worker_count {
            self.worker_count = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.threshold_murad {
            self.threshold_murad = v;
        }
        if o.ideal_tracking {
            self.ideal_tracking = true;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
            ConfigError::Invalid {
                key,
                message: message.into(),
            }
        }
        let positive = [
            ("gamma_r", self.gamma_r),
            ("a_r", self.a_r),
            ("gamma_eta", self.gamma_eta),
            ("a_eta", self.a_eta),
            ("b", self.b),
            ("epsilon", self.epsilon),
            ("uc_radius", self.uc_radius),
            ("tau_c", self.tau_c),
            ("tau_g", self.tau_g),
            ("threshold_murad", self.threshold_murad),
        ];
        for (key, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(invalid(key, format!("{key} must be strictly positive, got {value}")));
            }
        }
        for (key, value) in [("rho", self.rho), ("beta", self.beta)] {
            if !(0.0..1.0).contains(&value) {
                return Err(invalid(key, format!("{key} must lie in [0,1), got {value}")));
            }
        }
        if let Some(w) = self.w {
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid("w", format!("w must be strictly positive, got {w}")));
            }
        }
        if self.n_realizations == 0 {
            return Err(invalid("n_realizations", "n_realizations must be at least 1"));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "iterations must be at least 1"));
        }
        if self.histogram_bins == 0 {
            return Err(invalid("histogram_bins", "histogram_bins must be at least 1"));
        }
        self.plant_params()
            .validate()
            .map_err(|e| invalid("tau_g", e.to_string()))?;
        Ok(())
    }

    pub fn game_config(&self) -> GameConfig {
        GameConfig {
            w: self.w.unwrap_or(1.0 / (self.uc_radius * self.uc_radius)),
            b: self.b,
            uc_radius: self.uc_radius,
        }
    }

    pub fn plant_params(&self) -> PlantParams {
        PlantParams {
            tau_c: self.tau_c,
            tau_g: self.tau_g,
        }
    }

    pub fn seeker_params(&self, variant: Variant) -> SeekerParams {
        SeekerParams {
            gamma_r: self.gamma_r,
            a_r: self.a_r,
            gamma_eta: self.gamma_eta,
            a_eta: self.a_eta,
            rho: self.rho,
            beta: self.beta,
            b_final: self.b,
            b0: 0.0,
            epsilon: self.epsilon,
            variant,
        }
    }

    pub fn scenario(&self, variant: Variant) -> Scenario {
        Scenario {
            seeker: self.seeker_params(variant),
            game: self.game_config(),
            plant: self.plant_params(),
            iterations: self.iterations,
            threshold: self.threshold_murad,
            ideal_tracking: self.ideal_tracking,
            histogram_bins: self.histogram_bins,
        }
    }
}

/// Loads defaults, then `path` if given, then `overrides`, and validates.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut cfg = match path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            RunConfig::from_str_for(path, &text)?
        }
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    cfg.validate()?;
    Ok(cfg)
}
