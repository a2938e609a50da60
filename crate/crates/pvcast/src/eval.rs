//! Forecast accuracy: absolute percentage error per interval, per day, and
//! the MAPE summary.
//!
//! APE is `|V_f − V_a| / V_a × 100` with the *actual* value in the
//! denominator — it is deliberately asymmetric. Intervals whose actual power
//! is at or below a small threshold (nighttime) are excluded and counted
//! rather than treated as 0 % or 100 %. Daily APE compares daily *energy*
//! sums, not the mean of interval APEs, so nights cannot dominate it.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use thiserror::Error;

use crate::ingest::TIME_FORMAT;
use crate::physics::daily_energy;

/// Default denominator threshold: 1 W for intervals, 1 Wh for days.
pub const DEFAULT_APE_EPSILON: f64 = 1.0;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no overlapping timestamps between predicted and actual series")]
    NoOverlap,
    #[error("malformed series csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
}

/// Absolute percentage error, or `None` when the denominator is at or below
/// `epsilon` (undefined rather than infinite).
pub fn ape(v_f: f64, v_a: f64, epsilon: f64) -> Option<f64> {
    if v_a <= epsilon {
        None
    } else {
        Some((v_f - v_a).abs() / v_a * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub time: NaiveDateTime,
    pub forecast_w: f64,
    pub actual_w: f64,
    pub ape_percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayRow {
    pub date: NaiveDate,
    pub forecast_wh: f64,
    pub actual_wh: f64,
    pub ape_percent: Option<f64>,
}

/// Per-interval and per-day comparison of a forecast against measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub per_interval: Vec<IntervalRow>,
    pub per_day: Vec<DayRow>,
    /// Mean of the defined daily APEs; `None` when no day is defined.
    pub mape_percent: Option<f64>,
    /// Intervals excluded because actual power was at or below the threshold.
    pub undefined_count: usize,
    /// Timestamps present on only one side of the join.
    pub unmatched_timestamps: usize,
}

/// Join the two series on time and score the forecast.
///
/// Timestamps present on only one side are tallied, never silently dropped.
/// Daily rows cover exactly the dates that appear in the joined intervals.
pub fn evaluate(
    predicted: &[(NaiveDateTime, f64)],
    actual: &[(NaiveDateTime, f64)],
    cadence: Duration,
    epsilon: f64,
) -> Result<EvaluationReport, EvalError> {
    // Canonicalize both sides to time order so the result depends only on
    // the joined set, not on input ordering.
    let predicted_by_time: BTreeMap<NaiveDateTime, f64> = predicted.iter().copied().collect();
    let actual_by_time: BTreeMap<NaiveDateTime, f64> = actual.iter().copied().collect();
    let mut matched_pred = Vec::new();
    let mut matched_act = Vec::new();
    let mut per_interval = Vec::new();
    let mut undefined_count = 0usize;

    for (&time, &v_f) in &predicted_by_time {
        let Some(&v_a) = actual_by_time.get(&time) else {
            continue;
        };
        let interval_ape = ape(v_f, v_a, epsilon);
        if interval_ape.is_none() {
            undefined_count += 1;
        }
        per_interval.push(IntervalRow {
            time,
            forecast_w: v_f,
            actual_w: v_a,
            ape_percent: interval_ape,
        });
        matched_pred.push((time, v_f));
        matched_act.push((time, v_a));
    }
    if per_interval.is_empty() {
        return Err(EvalError::NoOverlap);
    }
    let unmatched_timestamps =
        predicted_by_time.len() + actual_by_time.len() - 2 * per_interval.len();

    let forecast_energy = daily_energy(&matched_pred, cadence);
    let actual_energy = daily_energy(&matched_act, cadence);
    let per_day: Vec<DayRow> = forecast_energy
        .iter()
        .map(|(&date, &e_f)| {
            let e_a = actual_energy[&date];
            DayRow {
                date,
                forecast_wh: e_f,
                actual_wh: e_a,
                ape_percent: ape(e_f, e_a, epsilon),
            }
        })
        .collect();

    let defined: Vec<f64> = per_day.iter().filter_map(|d| d.ape_percent).collect();
    let mape_percent = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };

    Ok(EvaluationReport {
        per_interval,
        per_day,
        mape_percent,
        undefined_count,
        unmatched_timestamps,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// `time,forecast_w,actual_w,ape_percent` rows; undefined APE is empty.
    pub fn per_interval_csv(&self) -> String {
        let mut out = String::from("time,forecast_w,actual_w,ape_percent\n");
        for r in &self.per_interval {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.time.format(TIME_FORMAT),
                r.forecast_w,
                r.actual_w,
                fmt_opt(r.ape_percent)
            ));
        }
        out
    }

    /// `date,forecast_wh,actual_wh,ape_percent` rows; undefined APE is empty.
    pub fn per_day_csv(&self) -> String {
        let mut out = String::from("date,forecast_wh,actual_wh,ape_percent\n");
        for r in &self.per_day {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.date.format(DATE_FORMAT),
                r.forecast_wh,
                r.actual_wh,
                fmt_opt(r.ape_percent)
            ));
        }
        out
    }
}

fn split_fields(line: &str, want: usize, line_no: usize) -> Result<Vec<&str>, EvalError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(EvalError::MalformedCsv {
            line: line_no,
            reason: format!("expected {want} fields, got {}", fields.len()),
        });
    }
    Ok(fields)
}

fn parse_num(field: &str, line_no: usize) -> Result<f64, EvalError> {
    field.trim().parse().map_err(|_| EvalError::MalformedCsv {
        line: line_no,
        reason: format!("bad number `{field}`"),
    })
}

fn parse_opt_num(field: &str, line_no: usize) -> Result<Option<f64>, EvalError> {
    if field.trim().is_empty() {
        Ok(None)
    } else {
        parse_num(field, line_no).map(Some)
    }
}

/// Parse a `time,power_w` series (the prediction/measurement exchange format).
pub fn parse_power_csv(text: &str) -> Result<Vec<(NaiveDateTime, f64)>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line.trim() != "time,power_w" {
                return Err(EvalError::MalformedCsv {
                    line: 1,
                    reason: format!("expected header `time,power_w`, got `{line}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, 2, i + 1)?;
        let time = NaiveDateTime::parse_from_str(fields[0].trim(), TIME_FORMAT).map_err(|_| {
            EvalError::MalformedCsv {
                line: i + 1,
                reason: format!("bad timestamp `{}`", fields[0]),
            }
        })?;
        out.push((time, parse_num(fields[1], i + 1)?));
    }
    Ok(out)
}

/// Render a `time,power_w` series.
pub fn power_series_csv(series: &[(NaiveDateTime, f64)]) -> String {
    let mut out = String::from("time,power_w\n");
    for (time, power) in series {
        out.push_str(&format!("{},{}\n", time.format(TIME_FORMAT), power));
    }
    out
}

/// Parse the per-interval report CSV back into rows (used by the chart
/// renderer).
pub fn parse_per_interval_csv(text: &str) -> Result<Vec<IntervalRow>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, 4, i + 1)?;
        let time = NaiveDateTime::parse_from_str(fields[0].trim(), TIME_FORMAT).map_err(|_| {
            EvalError::MalformedCsv {
                line: i + 1,
                reason: format!("bad timestamp `{}`", fields[0]),
            }
        })?;
        out.push(IntervalRow {
            time,
            forecast_w: parse_num(fields[1], i + 1)?,
            actual_w: parse_num(fields[2], i + 1)?,
            ape_percent: parse_opt_num(fields[3], i + 1)?,
        });
    }
    Ok(out)
}

/// Parse the per-day report CSV back into rows.
pub fn parse_per_day_csv(text: &str) -> Result<Vec<DayRow>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields = split_fields(line, 4, i + 1)?;
        let date = NaiveDate::parse_from_str(fields[0].trim(), DATE_FORMAT).map_err(|_| {
            EvalError::MalformedCsv {
                line: i + 1,
                reason: format!("bad date `{}`", fields[0]),
            }
        })?;
        out.push(DayRow {
            date,
            forecast_wh: parse_num(fields[1], i + 1)?,
            actual_wh: parse_num(fields[2], i + 1)?,
            ape_percent: parse_opt_num(fields[3], i + 1)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::default_cadence;
    use proptest::prelude::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, TIME_FORMAT).unwrap()
    }

    fn daytime_series(days: usize) -> Vec<(NaiveDateTime, f64)> {
        // A simple arc: 36 daytime slots per day, peak 500 W.
        let mut out = Vec::new();
        for d in 0..days {
            for slot in 0..144 {
                let t = ts("2022-06-01 00:00")
                    + Duration::days(d as i64)
                    + Duration::minutes(10 * slot);
                let power = if (54..90).contains(&slot) {
                    let x = (slot - 54) as f64 / 36.0;
                    500.0 * (std::f64::consts::PI * x).sin().max(0.0)
                } else {
                    0.0
                };
                out.push((t, power));
            }
        }
        out
    }

    #[test]
    fn ape_is_exact_for_the_worst_day_figures() {
        assert_eq!(ape(70.0, 100.0, DEFAULT_APE_EPSILON), Some(30.0));
    }

    #[test]
    fn exact_forecast_has_zero_ape() {
        assert_eq!(ape(250.0, 250.0, DEFAULT_APE_EPSILON), Some(0.0));
    }

    #[test]
    fn zero_actual_is_undefined_not_infinite() {
        assert_eq!(ape(50.0, 0.0, DEFAULT_APE_EPSILON), None);
        assert_eq!(ape(50.0, 1.0, DEFAULT_APE_EPSILON), None, "at-threshold is undefined");
    }

    #[test]
    fn ape_is_asymmetric_in_its_arguments() {
        // The denominator is the actual value only.
        assert_eq!(ape(50.0, 100.0, DEFAULT_APE_EPSILON), Some(50.0));
        assert_eq!(ape(100.0, 50.0, DEFAULT_APE_EPSILON), Some(100.0));
    }

    #[test]
    fn identical_series_score_zero_mape() {
        let series = daytime_series(3);
        let report = evaluate(&series, &series, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        assert_eq!(report.mape_percent, Some(0.0));
        assert!(report
            .per_day
            .iter()
            .all(|d| d.ape_percent == Some(0.0)));
        assert_eq!(report.unmatched_timestamps, 0);
    }

    #[test]
    fn constant_scale_factor_shows_up_as_daily_ape() {
        let actual = daytime_series(4);
        let predicted: Vec<_> = actual.iter().map(|&(t, p)| (t, 1.3 * p)).collect();
        let report = evaluate(&predicted, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        assert_eq!(report.per_day.len(), 4);
        for day in &report.per_day {
            let ape = day.ape_percent.expect("daytime energy is defined");
            assert!((ape - 30.0).abs() < 1e-9, "daily APE {ape}");
        }
        // Defined interval APEs are all 30 % too.
        for row in report.per_interval.iter().filter(|r| r.ape_percent.is_some()) {
            assert!((row.ape_percent.unwrap() - 30.0).abs() < 1e-9);
        }
    }

    #[test]
    fn month_long_run_has_one_day_row_per_day() {
        let series = daytime_series(31);
        let report = evaluate(&series, &series, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        assert_eq!(report.per_day.len(), 31);
        // Day rows cover exactly the dates present in the intervals.
        let interval_dates: std::collections::BTreeSet<_> =
            report.per_interval.iter().map(|r| r.time.date()).collect();
        let day_dates: std::collections::BTreeSet<_> =
            report.per_day.iter().map(|d| d.date).collect();
        assert_eq!(interval_dates, day_dates);
    }

    #[test]
    fn disjoint_series_are_a_no_overlap_error() {
        let a = daytime_series(1);
        let b: Vec<_> = a
            .iter()
            .map(|&(t, p)| (t + Duration::days(400), p))
            .collect();
        assert!(matches!(
            evaluate(&a, &b, default_cadence(), DEFAULT_APE_EPSILON),
            Err(EvalError::NoOverlap)
        ));
    }

    #[test]
    fn partial_overlap_is_tallied() {
        let actual = daytime_series(2);
        let predicted = &actual[..200];
        let report = evaluate(predicted, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        assert_eq!(report.per_interval.len(), 200);
        assert_eq!(report.unmatched_timestamps, actual.len() - 200);
    }

    #[test]
    fn nights_are_counted_not_scored() {
        let series = daytime_series(1);
        let report = evaluate(&series, &series, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        let undefined_in_rows = report
            .per_interval
            .iter()
            .filter(|r| r.ape_percent.is_none())
            .count();
        assert_eq!(report.undefined_count, undefined_in_rows);
        assert!(report.undefined_count > 100, "most of a day is night");
    }

    #[test]
    fn mape_ignores_interval_order() {
        let actual = daytime_series(3);
        let predicted: Vec<_> = actual.iter().map(|&(t, p)| (t, 1.1 * p)).collect();
        let a = evaluate(&predicted, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        let mut shuffled = predicted.clone();
        shuffled.reverse();
        let b = evaluate(&shuffled, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
        assert_eq!(a.mape_percent, b.mape_percent);
    }

    proptest! {
        // evaluate(k·actual, actual) has daily APE |k − 1|·100 on every
        // day with defined energy, for any scale k ≥ 0.
        #[test]
        fn scale_property(k in 0.0f64..5.0) {
            let actual = daytime_series(2);
            let predicted: Vec<_> = actual.iter().map(|&(t, p)| (t, k * p)).collect();
            let report = evaluate(&predicted, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();
            for day in &report.per_day {
                let ape = day.ape_percent.expect("daytime energy well above threshold");
                prop_assert!((ape - (k - 1.0).abs() * 100.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn report_csvs_roundtrip() {
        let actual = daytime_series(2);
        let predicted: Vec<_> = actual.iter().map(|&(t, p)| (t, 0.9 * p)).collect();
        let report = evaluate(&predicted, &actual, default_cadence(), DEFAULT_APE_EPSILON).unwrap();

        let intervals = parse_per_interval_csv(&report.per_interval_csv()).unwrap();
        assert_eq!(intervals, report.per_interval);
        let days = parse_per_day_csv(&report.per_day_csv()).unwrap();
        assert_eq!(days, report.per_day);
    }

    #[test]
    fn power_csv_roundtrip_and_validation() {
        let series = daytime_series(1);
        let text = power_series_csv(&series);
        assert_eq!(parse_power_csv(&text).unwrap(), series);

        assert!(parse_power_csv("wrong,header\n").is_err());
        assert!(parse_power_csv("time,power_w\n2022-06-01 00:00\n").is_err());
        assert!(parse_power_csv("time,power_w\n2022-06-01 00:00,abc\n").is_err());
    }
}
