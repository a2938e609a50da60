//! Ingestion of the 10-minute weather CSV.
//!
//! Parsing is total: any byte stream yields either a schema error (header
//! problems) or a `(records, report)` pair in which every dropped row is
//! tallied by reason. Row-level problems never abort the stream.
//!
//! Expected layout: comma-delimited, `.` decimal separator, header row with
//! the exact lowercase-underscore column names in [`TABLE1_COLUMNS`], and
//! timestamps in `yyyy-mm-dd HH:MM`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use chrono::{Duration, NaiveDateTime};
use thiserror::Error;

use crate::features::FeatureSpec;

/// Timestamp layout used across the toolkit.
pub const TIME_FORMAT: &str = "%Y-%m-%d %H:%M";

/// Observation cadence of the dataset.
pub fn default_cadence() -> Duration {
    Duration::minutes(10)
}

/// Canonical column names, in file order.
pub const TABLE1_COLUMNS: [&str; 11] = [
    "time",
    "ghi_pyr",
    "dni",
    "air_temperature",
    "relative_humidity",
    "wind_speed",
    "wind_speed_of_gust",
    "wind_from_direction_st_dev",
    "wind_from_direction",
    "barometric_pressure",
    "sensor_cleaning",
];

/// One 10-minute weather observation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherRecord {
    pub time: NaiveDateTime,
    /// Global horizontal irradiance, W/m².
    pub ghi_pyr: f64,
    /// Direct normal irradiance, W/m².
    pub dni: f64,
    /// Air temperature at 2 m, °C.
    pub air_temperature: f64,
    /// Relative humidity at 2 m, %.
    pub relative_humidity: f64,
    /// Wind speed at 10 m, m/s.
    pub wind_speed: f64,
    /// Maximum wind speed in the integration interval, m/s.
    pub wind_speed_of_gust: f64,
    /// Standard deviation of the wind direction, degrees.
    pub wind_from_direction_st_dev: f64,
    /// Wind direction, degrees clockwise from north, [0, 360].
    pub wind_from_direction: f64,
    /// Ambient air pressure, hPa.
    pub barometric_pressure: f64,
    /// Sensor-cleaning flag for the interval.
    pub sensor_cleaning: bool,
}

impl WeatherRecord {
    /// Numeric field lookup by column name; `time` and `sensor_cleaning`
    /// yield `None`.
    pub fn field(&self, name: &str) -> Option<f64> {
        match name {
            "ghi_pyr" => Some(self.ghi_pyr),
            "dni" => Some(self.dni),
            "air_temperature" => Some(self.air_temperature),
            "relative_humidity" => Some(self.relative_humidity),
            "wind_speed" => Some(self.wind_speed),
            "wind_speed_of_gust" => Some(self.wind_speed_of_gust),
            "wind_from_direction_st_dev" => Some(self.wind_from_direction_st_dev),
            "wind_from_direction" => Some(self.wind_from_direction),
            "barometric_pressure" => Some(self.barometric_pressure),
            _ => None,
        }
    }
}

/// Why a row was dropped during parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    /// CSV-level problem: wrong field count, bad UTF-8, unreadable row.
    MalformedRow,
    /// Timestamp does not parse as `yyyy-mm-dd HH:MM`.
    BadTimestamp,
    /// A numeric field failed to parse.
    NonNumeric,
    /// A numeric field parsed to NaN or ±Inf.
    NonFinite,
    /// Humidity outside [0, 100], direction outside [0, 360], or
    /// sensor_cleaning not 0/1.
    OutOfPhysicalRange,
    /// Same timestamp as the previously accepted row; the later row loses.
    DuplicateTimestamp,
    /// Timestamp earlier than the previously accepted row.
    OutOfOrderTimestamp,
    /// Outside the configured feature bounds (strict-range mode only).
    OutOfFeatureBounds,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::MalformedRow => "malformed row",
            RejectReason::BadTimestamp => "bad timestamp",
            RejectReason::NonNumeric => "non-numeric field",
            RejectReason::NonFinite => "non-finite field",
            RejectReason::OutOfPhysicalRange => "out of physical range",
            RejectReason::DuplicateTimestamp => "duplicate timestamp",
            RejectReason::OutOfOrderTimestamp => "out-of-order timestamp",
            RejectReason::OutOfFeatureBounds => "out of feature bounds",
        };
        f.write_str(s)
    }
}

/// A maximal run of missing 10-minute slots between two accepted records.
///
/// `start` and `end` are the first and last missing slot instants. The slot
/// ending at the next record's timestamp belongs to that record (each row
/// integrates its trailing interval), so it is never reported missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub missing_intervals: usize,
}

/// Outcome summary for an ingestion pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub rows_accepted: usize,
    pub rows_rejected: usize,
    pub reject_reasons: BTreeMap<RejectReason, usize>,
    pub gaps: Vec<Gap>,
    /// Per-field counts of values outside the feature bounds (kept, not dropped).
    pub out_of_range_flags: BTreeMap<String, usize>,
}

impl IngestReport {
    pub fn total_rows(&self) -> usize {
        self.rows_accepted + self.rows_rejected
    }

    fn reject(&mut self, reason: RejectReason) {
        self.rows_rejected += 1;
        *self.reject_reasons.entry(reason).or_insert(0) += 1;
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("unknown column `{0}` in header")]
    UnknownColumn(String),
    #[error("missing or unreadable header row")]
    MissingHeader,
    #[error("records are not sorted ascending at index {0}")]
    UnsortedInput(usize),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

struct ColumnIndex {
    by_name: [usize; 11],
    width: usize,
}

fn index_columns(header: &csv::StringRecord, schema: &[&str]) -> Result<ColumnIndex, IngestError> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    for name in &names {
        if !schema.contains(name) {
            return Err(IngestError::UnknownColumn((*name).to_string()));
        }
    }
    let mut by_name = [0usize; 11];
    for (slot, want) in schema.iter().enumerate() {
        match names.iter().position(|n| n == want) {
            Some(idx) => by_name[slot] = idx,
            None => return Err(IngestError::MissingColumn((*want).to_string())),
        }
    }
    Ok(ColumnIndex {
        by_name,
        width: names.len(),
    })
}

fn parse_finite(field: &str) -> Result<f64, RejectReason> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| RejectReason::NonNumeric)?;
    if !v.is_finite() {
        return Err(RejectReason::NonFinite);
    }
    Ok(v)
}

fn parse_row(record: &csv::StringRecord, cols: &ColumnIndex) -> Result<WeatherRecord, RejectReason> {
    if record.len() != cols.width {
        return Err(RejectReason::MalformedRow);
    }
    let field = |slot: usize| record.get(cols.by_name[slot]).unwrap_or("");

    let time = NaiveDateTime::parse_from_str(field(0).trim(), TIME_FORMAT)
        .map_err(|_| RejectReason::BadTimestamp)?;

    let ghi_pyr = parse_finite(field(1))?;
    let dni = parse_finite(field(2))?;
    let air_temperature = parse_finite(field(3))?;
    let relative_humidity = parse_finite(field(4))?;
    let wind_speed = parse_finite(field(5))?;
    let wind_speed_of_gust = parse_finite(field(6))?;
    let wind_from_direction_st_dev = parse_finite(field(7))?;
    let wind_from_direction = parse_finite(field(8))?;
    let barometric_pressure = parse_finite(field(9))?;
    let cleaning_raw = parse_finite(field(10))?;

    if !(0.0..=100.0).contains(&relative_humidity)
        || !(0.0..=360.0).contains(&wind_from_direction)
    {
        return Err(RejectReason::OutOfPhysicalRange);
    }
    let sensor_cleaning = if cleaning_raw == 0.0 {
        false
    } else if cleaning_raw == 1.0 {
        true
    } else {
        return Err(RejectReason::OutOfPhysicalRange);
    };

    Ok(WeatherRecord {
        time,
        ghi_pyr,
        dni,
        air_temperature,
        relative_humidity,
        wind_speed,
        wind_speed_of_gust,
        wind_from_direction_st_dev,
        wind_from_direction,
        barometric_pressure,
        sensor_cleaning,
    })
}

/// Parse a weather CSV into validated records plus a rejection tally.
///
/// Header problems (missing or unknown columns, unreadable header) are schema
/// errors. Everything else is handled row by row: rows that fail to parse,
/// carry non-finite or physically impossible values, or repeat/precede the
/// previous timestamp are counted under their [`RejectReason`] and skipped.
/// Accepted records come back in strictly increasing time order.
pub fn parse_csv(
    source: impl Read,
    schema: &[&str],
) -> Result<(Vec<WeatherRecord>, IngestReport), IngestError> {
    // The format is plain comma-delimited numeric text; quote characters
    // carry no meaning, so one physical line is always one row.
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .quoting(false)
        .from_reader(source);

    let header = reader.headers().map_err(|_| IngestError::MissingHeader)?.clone();
    if header.is_empty() || (header.len() == 1 && header.get(0) == Some("")) {
        return Err(IngestError::MissingHeader);
    }
    let cols = index_columns(&header, schema)?;

    let mut records = Vec::new();
    let mut report = IngestReport::default();

    for row in reader.into_records() {
        let row = match row {
            Ok(r) => r,
            Err(_) => {
                report.reject(RejectReason::MalformedRow);
                continue;
            }
        };
        match parse_row(&row, &cols) {
            Ok(rec) => {
                if let Some(last) = records.last() {
                    let last: &WeatherRecord = last;
                    if rec.time == last.time {
                        report.reject(RejectReason::DuplicateTimestamp);
                        continue;
                    }
                    if rec.time < last.time {
                        report.reject(RejectReason::OutOfOrderTimestamp);
                        continue;
                    }
                }
                records.push(rec);
                report.rows_accepted += 1;
            }
            Err(reason) => report.reject(reason),
        }
    }

    Ok((records, report))
}

/// Report every maximal run of missing cadence slots between consecutive
/// records.
///
/// Missing slots for a pair `(t0, t1)` are the grid instants
/// `t0 + k·cadence` whose trailing interval ends strictly before `t1`; the
/// slot ending at `t1` itself is attested by the `t1` record. Records `00:00`
/// then `00:40` therefore yield one gap of two missing intervals (`00:10`,
/// `00:20`).
///
/// Input must be sorted strictly ascending.
pub fn audit_gaps(records: &[WeatherRecord], cadence: Duration) -> Result<Vec<Gap>, IngestError> {
    let mut gaps = Vec::new();
    for (i, pair) in records.windows(2).enumerate() {
        let (t0, t1) = (pair[0].time, pair[1].time);
        if t1 <= t0 {
            return Err(IngestError::UnsortedInput(i + 1));
        }
        let mut tick = t0 + cadence;
        let mut missing = Vec::new();
        while tick + cadence < t1 {
            missing.push(tick);
            tick += cadence;
        }
        if let (Some(&start), Some(&end)) = (missing.first(), missing.last()) {
            gaps.push(Gap {
                start,
                end,
                missing_intervals: missing.len(),
            });
        }
    }
    Ok(gaps)
}

/// Per-field tallies of records outside the feature bounds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RangeFlags {
    pub per_field: BTreeMap<String, usize>,
    /// Indices into the record slice of rows with at least one flagged field.
    pub flagged_rows: Vec<usize>,
}

impl RangeFlags {
    pub fn total(&self) -> usize {
        self.per_field.values().sum()
    }
}

/// Count records whose fields fall outside `bounds` (inclusive on both ends).
///
/// Records are only counted, never dropped; strict-range rejection is a
/// pipeline choice layered on top of [`RangeFlags::flagged_rows`].
pub fn flag_range(records: &[WeatherRecord], bounds: &FeatureSpec) -> RangeFlags {
    let mut flags = RangeFlags::default();
    for (idx, rec) in records.iter().enumerate() {
        let mut row_flagged = false;
        for feature in bounds.record_features() {
            let Some(value) = rec.field(&feature.name) else {
                continue;
            };
            if value < feature.min || value > feature.max {
                *flags.per_field.entry(feature.name.clone()).or_insert(0) += 1;
                row_flagged = true;
            }
        }
        if row_flagged {
            flags.flagged_rows.push(idx);
        }
    }
    flags
}

fn fmt_f64(v: f64) -> String {
    // `Display` for f64 is shortest-round-trip, so re-parsing is lossless.
    format!("{v}")
}

/// Serialize records back to the canonical CSV layout.
///
/// Output re-parses to an identical record list.
pub fn records_to_csv(records: &[WeatherRecord]) -> String {
    let mut out = String::new();
    out.push_str(&TABLE1_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.time.format(TIME_FORMAT),
            fmt_f64(r.ghi_pyr),
            fmt_f64(r.dni),
            fmt_f64(r.air_temperature),
            fmt_f64(r.relative_humidity),
            fmt_f64(r.wind_speed),
            fmt_f64(r.wind_speed_of_gust),
            fmt_f64(r.wind_from_direction_st_dev),
            fmt_f64(r.wind_from_direction),
            fmt_f64(r.barometric_pressure),
            if r.sensor_cleaning { 1 } else { 0 },
        ));
    }
    out
}
