use std::fs;
use std::path::{Path, PathBuf};

use cavity_discord::scan::{DiscordMode, DEFAULT_DISCORD_THRESHOLD};
use cavity_discord::Family;
use serde::{Deserialize, Serialize};

/// Flat JSON config file. Every field is optional; flags win over the file,
/// the file wins over built-in defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<f64>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub gamma_over_omega: Option<f64>,
    pub family: Option<Family>,
    pub t_max_omega: Option<f64>,
    pub steps: Option<usize>,
    pub discord_mode: Option<String>,
    pub discord_death_threshold: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Invalid(String),
    Io(String),
}

/// Fully resolved run parameters, as recorded in the metadata file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: f64,
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub gamma_over_omega: f64,
    pub family: Family,
    pub t_max_omega: f64,
    pub steps: usize,
    pub discord_mode: DiscordMode,
    pub discord_death_threshold: f64,
    pub output_path: PathBuf,
}

pub struct Defaults {
    pub p: Option<f64>,
    pub alpha_re: f64,
    pub gamma_over_omega: f64,
    pub t_max_omega: f64,
    pub steps: usize,
    pub output_path: &'static str,
}

pub const DYNAMICS_DEFAULTS: Defaults = Defaults {
    p: None,
    alpha_re: 0.5,
    gamma_over_omega: 0.01,
    t_max_omega: 20.0,
    steps: 2000,
    output_path: "dynamics.csv",
};

pub const SWEEP_DEFAULTS: Defaults = Defaults {
    p: Some(0.8),
    alpha_re: 1.0,
    gamma_over_omega: 0.01,
    t_max_omega: 20.0,
    steps: 400,
    output_path: "sweep.csv",
};

impl RunConfig {
    pub fn resolve(
        flags: &FileConfig,
        file: &FileConfig,
        defaults: &Defaults,
    ) -> Result<Self, ConfigError> {
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or_else(|| file.$field.clone())
            };
        }
        let p = pick!(p).or(defaults.p).ok_or_else(|| {
            ConfigError::Invalid("missing required parameter p (use --p or a config file)".into())
        })?;
        let discord_mode = match pick!(discord_mode) {
            Some(s) => s
                .parse()
                .map_err(|e: cavity_discord::Error| ConfigError::Invalid(e.to_string()))?,
            None => DiscordMode::ClosedForm,
        };
        let cfg = RunConfig {
            p,
            alpha_re: pick!(alpha_re).unwrap_or(defaults.alpha_re),
            alpha_im: pick!(alpha_im).unwrap_or(0.0),
            gamma_over_omega: pick!(gamma_over_omega).unwrap_or(defaults.gamma_over_omega),
            family: pick!(family).unwrap_or(Family::Phi),
            t_max_omega: pick!(t_max_omega).unwrap_or(defaults.t_max_omega),
            steps: pick!(steps).unwrap_or(defaults.steps),
            discord_mode,
            discord_death_threshold: pick!(discord_death_threshold)
                .unwrap_or(DEFAULT_DISCORD_THRESHOLD),
            output_path: pick!(output_path).unwrap_or_else(|| PathBuf::from(defaults.output_path)),
        };
        if cfg.steps < 2 {
            return Err(ConfigError::Invalid(format!(
                "steps must be at least 2, got {}",
                cfg.steps
            )));
        }
        if !(cfg.t_max_omega > 0.0) || !cfg.t_max_omega.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "t_max_omega must be positive, got {}",
                cfg.t_max_omega
            )));
        }
        if !(cfg.discord_death_threshold > 0.0) {
            return Err(ConfigError::Invalid(
                "discord_death_threshold must be positive".into(),
            ));
        }
        Ok(cfg)
    }
}
