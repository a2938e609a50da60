//! Feature selection, normalization, dataset assembly, and the
//! chronological train/test split.
//!
//! Model inputs are min-max scaled to [0, 1] against published physical
//! bounds rather than per-split statistics, so normalization is reproducible
//! and leaks nothing from test to train. Wind direction is circular and is
//! encoded as `(sin θ, cos θ)` instead of raw degrees.

pub mod synth;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::WeatherRecord;
use crate::physics::PanelArray;

/// Encoded wind-direction column names.
pub const COL_WIND_DIR_SIN: &str = "wind_dir_sin";
pub const COL_WIND_DIR_COS: &str = "wind_dir_cos";

/// Name of the power target bound.
pub const TARGET_POWER: &str = "power";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("invalid feature spec: {0}")]
    InvalidSpec(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("normalized value {value} for `{name}` outside [0, 1]")]
    OutOfUnitRange { name: String, value: f64 },
    #[error("column `{0}` needs its paired wind-direction column")]
    MissingWindPair(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

/// One feature's physical bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBound {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub unit: String,
}

/// The set of feature bounds used for scaling and range flagging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    bounds: Vec<FeatureBound>,
}

impl FeatureSpec {
    /// The published bounds: air temperature 0.8–43.3 °C, wind speed
    /// 0–17.6 m/s, wind direction 0–360°, irradiance 0–1140 W/m²,
    /// relative humidity 9.1–100 %, and power output 0–600 W.
    pub fn table2_default() -> Self {
        let bound = |name: &str, min: f64, max: f64, unit: &str| FeatureBound {
            name: name.to_string(),
            min,
            max,
            unit: unit.to_string(),
        };
        Self {
            bounds: vec![
                bound("air_temperature", 0.8, 43.3, "°C"),
                bound("wind_speed", 0.0, 17.6, "m/s"),
                bound("wind_from_direction", 0.0, 360.0, "degrees"),
                bound("ghi_pyr", 0.0, 1140.0, "W/m²"),
                bound("relative_humidity", 9.1, 100.0, "%"),
                bound(TARGET_POWER, 0.0, 600.0, "W"),
            ],
        }
    }

    pub fn from_bounds(bounds: Vec<FeatureBound>) -> Result<Self, FeatureError> {
        let spec = Self { bounds };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let mut seen = BTreeSet::new();
        for b in &self.bounds {
            if !(b.min < b.max) {
                return Err(FeatureError::InvalidSpec(format!(
                    "`{}` needs min < max, got [{}, {}]",
                    b.name, b.min, b.max
                )));
            }
            if !b.min.is_finite() || !b.max.is_finite() {
                return Err(FeatureError::InvalidSpec(format!(
                    "`{}` has non-finite bounds",
                    b.name
                )));
            }
            if !seen.insert(b.name.clone()) {
                return Err(FeatureError::InvalidSpec(format!("duplicate entry `{}`", b.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&FeatureBound> {
        self.bounds.iter().find(|b| b.name == name)
    }

    pub fn bounds(&self) -> &[FeatureBound] {
        &self.bounds
    }

    /// Entries that map onto `WeatherRecord` fields (everything except the
    /// power target).
    pub fn record_features(&self) -> impl Iterator<Item = &FeatureBound> {
        self.bounds.iter().filter(|b| b.name != TARGET_POWER)
    }

    /// Extend the spec with bounds inferred from data for fields outside the
    /// published set (used by all-features mode). Constant columns are
    /// widened by ±0.5 so min < max always holds.
    pub fn with_inferred(
        mut self,
        records: &[WeatherRecord],
        names: &[&str],
        units: &[&str],
    ) -> Result<Self, FeatureError> {
        for (name, unit) in names.iter().zip(units) {
            if self.get(name).is_some() {
                continue;
            }
            let values: Vec<f64> = records.iter().filter_map(|r| r.field(name)).collect();
            if values.is_empty() {
                return Err(FeatureError::UnknownFeature((*name).to_string()));
            }
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for v in values {
                min = min.min(v);
                max = max.max(v);
            }
            if min == max {
                min -= 0.5;
                max += 0.5;
            }
            self.bounds.push(FeatureBound {
                name: name.to_string(),
                min,
                max,
                unit: unit.to_string(),
            });
        }
        self.validate()?;
        Ok(self)
    }
}

/// Extra record fields available to all-features mode, with units.
pub const EXTRA_FEATURES: [(&str, &str); 4] = [
    ("dni", "W/m²"),
    ("wind_speed_of_gust", "m/s"),
    ("wind_from_direction_st_dev", "degrees"),
    ("barometric_pressure", "hPa"),
];

/// Ordered model input columns. The default set is temperature, wind speed,
/// humidity, and the encoded wind direction pair; all-features mode appends
/// the remaining measured fields.
pub fn input_columns(all_features: bool) -> Vec<String> {
    let mut cols = vec![
        "air_temperature".to_string(),
        "wind_speed".to_string(),
        "relative_humidity".to_string(),
        COL_WIND_DIR_SIN.to_string(),
        COL_WIND_DIR_COS.to_string(),
    ];
    if all_features {
        cols.extend(EXTRA_FEATURES.iter().map(|(n, _)| n.to_string()));
    }
    cols
}

fn minmax(value: f64, bound: &FeatureBound) -> f64 {
    ((value - bound.min) / (bound.max - bound.min)).clamp(0.0, 1.0)
}

fn inv_minmax(norm: f64, bound: &FeatureBound) -> f64 {
    bound.min + norm * (bound.max - bound.min)
}

/// Linear inverse of min-max scaling for a single value, without clamping.
pub fn denormalize_scalar(norm: f64, bound: &FeatureBound) -> f64 {
    inv_minmax(norm, bound)
}

/// Normalize one record into the ordered feature vector for `columns`.
///
/// Min-max features are scaled and clamped to [0, 1]; `wind_dir_sin` /
/// `wind_dir_cos` carry the unit-circle encoding of the direction.
pub fn normalize_record(
    record: &WeatherRecord,
    spec: &FeatureSpec,
    columns: &[String],
) -> Result<Vec<f64>, FeatureError> {
    columns
        .iter()
        .map(|col| match col.as_str() {
            COL_WIND_DIR_SIN => Ok(record.wind_from_direction.to_radians().sin()),
            COL_WIND_DIR_COS => Ok(record.wind_from_direction.to_radians().cos()),
            name => {
                let bound = spec
                    .get(name)
                    .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
                let value = record
                    .field(name)
                    .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
                Ok(minmax(value, bound))
            }
        })
        .collect()
}

/// Invert [`normalize_record`]: recover raw values, decoding the
/// wind-direction pair back to degrees in [0, 360) via `atan2`.
///
/// In strict mode, min-max dimensions outside [0, 1] are an error; otherwise
/// the linear inverse is applied as-is.
pub fn denormalize(
    values: &[f64],
    columns: &[String],
    spec: &FeatureSpec,
    strict: bool,
) -> Result<Vec<(String, f64)>, FeatureError> {
    if values.len() != columns.len() {
        return Err(FeatureError::InvalidParam(format!(
            "{} values for {} columns",
            values.len(),
            columns.len()
        )));
    }
    let find = |name: &str| columns.iter().position(|c| c == name);
    let mut out = Vec::with_capacity(columns.len());
    for (idx, col) in columns.iter().enumerate() {
        match col.as_str() {
            COL_WIND_DIR_SIN => {
                let cos_idx = find(COL_WIND_DIR_COS)
                    .ok_or_else(|| FeatureError::MissingWindPair(col.clone()))?;
                let mut deg = values[idx].atan2(values[cos_idx]).to_degrees();
                if deg < 0.0 {
                    deg += 360.0;
                }
                out.push(("wind_from_direction".to_string(), deg));
            }
            COL_WIND_DIR_COS => {
                if find(COL_WIND_DIR_SIN).is_none() {
                    return Err(FeatureError::MissingWindPair(col.clone()));
                }
                // handled alongside the sin column
            }
            name => {
                let bound = spec
                    .get(name)
                    .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))?;
                let v = values[idx];
                if strict && !(0.0..=1.0).contains(&v) {
                    return Err(FeatureError::OutOfUnitRange {
                        name: name.to_string(),
                        value: v,
                    });
                }
                out.push((name.to_string(), inv_minmax(v, bound)));
            }
        }
    }
    Ok(out)
}

/// What the models are trained to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    /// Predict normalized irradiance; power comes from the physics formula.
    Irradiance,
    /// Predict normalized array power computed at dataset-build time.
    Power,
}

impl fmt::Display for TargetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetMode::Irradiance => f.write_str("irradiance"),
            TargetMode::Power => f.write_str("power"),
        }
    }
}

impl FromStr for TargetMode {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "irradiance" => Ok(TargetMode::Irradiance),
            "power" => Ok(TargetMode::Power),
            other => Err(FeatureError::InvalidParam(format!(
                "target mode must be `irradiance` or `power`, got `{other}`"
            ))),
        }
    }
}

/// Normalized supervised dataset: one row of inputs, one target, and one
/// timestamp per accepted record.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub timestamps: Vec<NaiveDateTime>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Check the structural invariants: consistent shapes, finite entries,
    /// min-max dims in [0, 1], encodings in [-1, 1], strictly increasing
    /// timestamps.
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.rows.len() != self.targets.len() || self.rows.len() != self.timestamps.len() {
            return Err(FeatureError::InvalidSpec("row/target/timestamp length mismatch".into()));
        }
        for (row, target) in self.rows.iter().zip(&self.targets) {
            if row.len() != self.columns.len() {
                return Err(FeatureError::InvalidSpec("ragged row".into()));
            }
            if !target.is_finite() {
                return Err(FeatureError::InvalidSpec("non-finite target".into()));
            }
            for (col, v) in self.columns.iter().zip(row) {
                let ok = if col == COL_WIND_DIR_SIN || col == COL_WIND_DIR_COS {
                    (-1.0..=1.0).contains(v)
                } else {
                    (0.0..=1.0).contains(v)
                };
                if !ok {
                    return Err(FeatureError::InvalidSpec(format!(
                        "`{col}` value {v} out of range"
                    )));
                }
            }
        }
        for pair in self.timestamps.windows(2) {
            if pair[1] <= pair[0] {
                return Err(FeatureError::InvalidSpec("timestamps not strictly increasing".into()));
            }
        }
        Ok(())
    }

    /// CSV rendering: feature columns, then `target`, then `time`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for col in &self.columns {
            out.push_str(col);
            out.push(',');
        }
        out.push_str("target,time\n");
        for i in 0..self.n_rows() {
            for v in &self.rows[i] {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!(
                "{},{}\n",
                self.targets[i],
                self.timestamps[i].format(crate::ingest::TIME_FORMAT)
            ));
        }
        out
    }
}

/// Options for [`build_dataset`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Drop rows taken during sensor cleaning.
    pub drop_cleaning_rows: bool,
    /// Use the extended input column set.
    pub all_features: bool,
}

/// Outcome of [`build_dataset`]: the matrix plus the dropped-row tally.
#[derive(Debug, Clone)]
pub struct BuiltDataset {
    pub matrix: FeatureMatrix,
    pub dropped_rows: usize,
}

/// Assemble the supervised dataset from validated records.
///
/// Inputs never include `ghi_pyr`: it determines the target in both modes.
/// In irradiance mode the target is normalized `ghi_pyr`; in power mode it is
/// the normalized array power computed from `ghi_pyr` via `panel`. Dropped
/// rows (sensor cleaning, or a failed conversion) are tallied, and
/// `matrix.n_rows() + dropped_rows` always equals the input record count.
pub fn build_dataset(
    records: &[WeatherRecord],
    spec: &FeatureSpec,
    target_mode: TargetMode,
    panel: &PanelArray,
    options: BuildOptions,
) -> Result<BuiltDataset, FeatureError> {
    if records.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    let columns = input_columns(options.all_features);
    let target_bound_name = match target_mode {
        TargetMode::Irradiance => "ghi_pyr",
        TargetMode::Power => TARGET_POWER,
    };
    let target_bound = spec
        .get(target_bound_name)
        .ok_or_else(|| FeatureError::UnknownFeature(target_bound_name.to_string()))?;

    let mut matrix = FeatureMatrix {
        columns: columns.clone(),
        rows: Vec::with_capacity(records.len()),
        targets: Vec::with_capacity(records.len()),
        timestamps: Vec::with_capacity(records.len()),
    };
    let mut dropped = 0usize;
    for rec in records {
        if options.drop_cleaning_rows && rec.sensor_cleaning {
            dropped += 1;
            continue;
        }
        let raw_target = match target_mode {
            TargetMode::Irradiance => rec.ghi_pyr,
            TargetMode::Power => match panel.instantaneous_power(rec.ghi_pyr) {
                Ok(p) => p,
                Err(_) => {
                    dropped += 1;
                    continue;
                }
            },
        };
        let row = normalize_record(rec, spec, &columns)?;
        matrix.rows.push(row);
        matrix.targets.push(minmax(raw_target, target_bound));
        matrix.timestamps.push(rec.time);
    }
    if matrix.rows.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    Ok(BuiltDataset {
        matrix,
        dropped_rows: dropped,
    })
}

/// A chronological train/test partition.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub boundary: NaiveDateTime,
}

impl SplitDataset {
    /// Which side ended up empty, if any — callers usually warn on this.
    pub fn empty_side(&self) -> Option<&'static str> {
        if self.train.n_rows() == 0 {
            Some("train")
        } else if self.test.n_rows() == 0 {
            Some("test")
        } else {
            None
        }
    }
}

/// Partition rows at `boundary`: strictly earlier timestamps train, the rest
/// test. Training never sees data at or after the boundary.
pub fn chronological_split(matrix: &FeatureMatrix, boundary: NaiveDateTime) -> SplitDataset {
    let pivot = matrix.timestamps.partition_point(|t| *t < boundary);
    let take = |range: std::ops::Range<usize>| FeatureMatrix {
        columns: matrix.columns.clone(),
        rows: matrix.rows[range.clone()].to_vec(),
        targets: matrix.targets[range.clone()].to_vec(),
        timestamps: matrix.timestamps[range].to_vec(),
    };
    SplitDataset {
        train: take(0..pivot),
        test: take(pivot..matrix.n_rows()),
        boundary,
    }
}

/// Default split boundary: midnight opening the held-out final year.
pub fn default_boundary() -> NaiveDateTime {
    NaiveDateTime::parse_from_str("2017-01-01 00:00", crate::ingest::TIME_FORMAT).unwrap()
}
