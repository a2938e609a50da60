//! Run configuration: a flat `key = value` text file with every key also
//! overridable from the command line.
//!
//! The format is deliberately plain — one key per line, `#` comments, dotted
//! names for the panel group — so configs diff cleanly and can be written by
//! anything.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDateTime;
use thiserror::Error;

use crate::features::{synth::Relation, TargetMode};
use crate::ingest::TIME_FORMAT;
use crate::models::Activation;
use crate::physics::{PanelArray, PanelSpec, PhysicsError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    BadLine { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("invalid panel: {0}")]
    Panel(#[from] PhysicsError),
}

/// Which predictor to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linreg,
    Mlp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Linreg => f.write_str("linreg"),
            ModelKind::Mlp => f.write_str("mlp"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linreg" => Ok(ModelKind::Linreg),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(format!("model must be `linreg` or `mlp`, got `{other}`")),
        }
    }
}

/// Full pipeline configuration with defaults for every key.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_csv: Option<PathBuf>,
    pub cache: PathBuf,
    pub artifact: PathBuf,
    pub predictions: PathBuf,
    pub report_dir: PathBuf,

    pub target_mode: TargetMode,
    pub split_boundary: NaiveDateTime,
    pub all_features: bool,
    pub drop_cleaning_rows: bool,
    pub strict_range: bool,

    pub model: ModelKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
    pub validation_fraction: f64,
    pub early_stop_patience: Option<usize>,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub ridge_lambda: f64,

    pub panel_p_max_w: f64,
    pub panel_length_m: f64,
    pub panel_width_m: f64,
    pub panel_v_mp_v: f64,
    pub panel_i_mp_a: f64,
    pub panel_count: u32,
    pub panel_performance_ratio: f64,

    pub ape_epsilon: f64,

    pub synth_days: u32,
    pub synth_noise_sigma: f64,
    pub synth_relation: Relation,
}

impl Default for RunConfig {
    fn default() -> Self {
        let nameplate = PanelSpec::ex150_36p();
        Self {
            input_csv: None,
            cache: PathBuf::from("artifacts/records.csv"),
            artifact: PathBuf::from("artifacts/model.json"),
            predictions: PathBuf::from("reports/predictions.csv"),
            report_dir: PathBuf::from("reports"),
            target_mode: TargetMode::Irradiance,
            split_boundary: crate::features::default_boundary(),
            all_features: false,
            drop_cleaning_rows: false,
            strict_range: false,
            model: ModelKind::Mlp,
            epochs: 200,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 0,
            validation_fraction: 0.0,
            early_stop_patience: None,
            hidden_layers: vec![32, 16],
            activation: Activation::Tanh,
            ridge_lambda: 0.0,
            panel_p_max_w: nameplate.p_max_w,
            panel_length_m: nameplate.length_m,
            panel_width_m: nameplate.width_m,
            panel_v_mp_v: nameplate.v_mp_v,
            panel_i_mp_a: nameplate.i_mp_a,
            panel_count: 4,
            panel_performance_ratio: 0.75,
            ape_epsilon: 1.0,
            synth_days: 1461, // 2014-01-01 through 2017-12-31
            synth_noise_sigma: 0.05,
            synth_relation: Relation::Nonlinear,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        reason: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("expected true/false, got `{other}`"),
        }),
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |reason: &str| ConfigError::BadValue {
            key: key.to_string(),
            reason: reason.to_string(),
        };
        match key {
            "input_csv" => self.input_csv = Some(PathBuf::from(value.trim())),
            "cache" => self.cache = PathBuf::from(value.trim()),
            "artifact" => self.artifact = PathBuf::from(value.trim()),
            "predictions" => self.predictions = PathBuf::from(value.trim()),
            "report_dir" => self.report_dir = PathBuf::from(value.trim()),
            "target_mode" => {
                self.target_mode = value.trim().parse().map_err(|_| bad("irradiance|power"))?
            }
            "split_boundary" => {
                self.split_boundary = NaiveDateTime::parse_from_str(value.trim(), TIME_FORMAT)
                    .map_err(|_| bad("expected `yyyy-mm-dd HH:MM`"))?
            }
            "all_features" => self.all_features = parse_bool(key, value)?,
            "drop_cleaning_rows" => self.drop_cleaning_rows = parse_bool(key, value)?,
            "strict_range" => self.strict_range = parse_bool(key, value)?,
            "model" => self.model = value.trim().parse().map_err(|e: String| bad(&e))?,
            "epochs" => self.epochs = parse_value(key, value)?,
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "momentum" => self.momentum = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "validation_fraction" => self.validation_fraction = parse_value(key, value)?,
            "early_stop_patience" => {
                let v = value.trim();
                self.early_stop_patience = if v.is_empty() || v == "none" {
                    None
                } else {
                    Some(parse_value(key, value)?)
                };
            }
            "hidden_layers" => {
                let v = value.trim();
                if v.is_empty() {
                    self.hidden_layers = Vec::new();
                } else {
                    self.hidden_layers = v
                        .split(',')
                        .map(|s| s.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("comma-separated layer widths, e.g. `32,16`"))?;
                }
            }
            "activation" => {
                self.activation = match value.trim() {
                    "tanh" => Activation::Tanh,
                    "relu" => Activation::Relu,
                    _ => return Err(bad("tanh|relu")),
                }
            }
            "ridge_lambda" => self.ridge_lambda = parse_value(key, value)?,
            "panel.p_max_w" => self.panel_p_max_w = parse_value(key, value)?,
            "panel.length_m" => self.panel_length_m = parse_value(key, value)?,
            "panel.width_m" => self.panel_width_m = parse_value(key, value)?,
            "panel.v_mp_v" => self.panel_v_mp_v = parse_value(key, value)?,
            "panel.i_mp_a" => self.panel_i_mp_a = parse_value(key, value)?,
            "panel.count" => self.panel_count = parse_value(key, value)?,
            "panel.performance_ratio" => self.panel_performance_ratio = parse_value(key, value)?,
            "ape_epsilon" => self.ape_epsilon = parse_value(key, value)?,
            "synth.days" => self.synth_days = parse_value(key, value)?,
            "synth.noise_sigma" => self.synth_noise_sigma = parse_value(key, value)?,
            "synth.relation" => {
                self.synth_relation = value.trim().parse().map_err(|_| bad("linear|nonlinear"))?
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parse a config file and fold it over the defaults.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Apply `key=value` override strings (the CLI `--set` form).
    pub fn apply_overrides<'a>(
        &mut self,
        overrides: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), ConfigError> {
        for pair in overrides {
            let Some((key, value)) = pair.split_once('=') else {
                return Err(ConfigError::BadLine {
                    line: 0,
                    text: pair.to_string(),
                });
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Assemble the panel array from the `panel.*` keys.
    pub fn panel_array(&self) -> Result<PanelArray, ConfigError> {
        let panel = PanelSpec {
            p_max_w: self.panel_p_max_w,
            length_m: self.panel_length_m,
            width_m: self.panel_width_m,
            v_mp_v: self.panel_v_mp_v,
            i_mp_a: self.panel_i_mp_a,
            operating_temp_c: 47.0,
            operating_temp_tol_c: 2.0,
        };
        Ok(PanelArray::new(
            panel,
            self.panel_count,
            self.panel_performance_ratio,
        )?)
    }

    /// Network shape as `[inputs, hidden..., 1]`.
    pub fn layer_sizes(&self, input_dim: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden_layers.len() + 2);
        sizes.push(input_dim);
        sizes.extend(&self.hidden_layers);
        sizes.push(1);
        sizes
    }
}
