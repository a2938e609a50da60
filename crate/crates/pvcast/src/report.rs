//! SVG renderings of the evaluation CSVs: a one-day overlay of forecast and
//! actual power, a month of daily energies, and a bar-per-day APE chart.
//!
//! Charts are emitted by hand onto a fixed 960×540 canvas with two-decimal
//! coordinates, so identical inputs produce byte-identical files.

use chrono::{NaiveDate, Timelike};
use thiserror::Error;

use crate::eval::{DayRow, IntervalRow};

pub const CANVAS_W: f64 = 960.0;
pub const CANVAS_H: f64 = 540.0;

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

const FORECAST_COLOR: &str = "#d95f02";
const ACTUAL_COLOR: &str = "#1b9e77";
const BAR_COLOR: &str = "#7570b3";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no rows to plot")]
    EmptyInput,
    #[error("no intervals found for {0}")]
    DayNotFound(NaiveDate),
}

struct Plot {
    body: String,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Plot {
    fn new(title: &str, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut p = Self {
            body: String::new(),
            x_lo: x_range.0,
            x_hi: x_range.1,
            y_lo: y_range.0,
            y_hi: y_range.1,
        };
        p.body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS_W}\" height=\"{CANVAS_H}\" viewBox=\"0 0 {CANVAS_W} {CANVAS_H}\" font-family=\"sans-serif\">\n"
        ));
        p.body.push_str(&format!(
            "<rect width=\"{CANVAS_W}\" height=\"{CANVAS_H}\" fill=\"white\"/>\n"
        ));
        p.body.push_str(&format!(
            "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" font-weight=\"bold\">{}</text>\n",
            CANVAS_W / 2.0,
            title
        ));
        // Axis lines.
        p.body.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            CANVAS_H - MARGIN_B,
            CANVAS_W - MARGIN_R,
            CANVAS_H - MARGIN_B
        ));
        p.body.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            CANVAS_H - MARGIN_B
        ));
        // Axis labels (units included).
        p.body.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            MARGIN_L + p.plot_w() / 2.0,
            CANVAS_H - 14.0,
            x_label
        ));
        p.body.push_str(&format!(
            "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            MARGIN_T + p.plot_h() / 2.0,
            MARGIN_T + p.plot_h() / 2.0,
            y_label
        ));
        p
    }

    fn plot_w(&self) -> f64 {
        CANVAS_W - MARGIN_L - MARGIN_R
    }

    fn plot_h(&self) -> f64 {
        CANVAS_H - MARGIN_T - MARGIN_B
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_L + (v - self.x_lo) / (self.x_hi - self.x_lo) * self.plot_w()
    }

    fn y(&self, v: f64) -> f64 {
        CANVAS_H - MARGIN_B - (v - self.y_lo) / (self.y_hi - self.y_lo) * self.plot_h()
    }

    fn y_ticks(&mut self, format_int: bool) {
        for i in 0..=4 {
            let v = self.y_lo + (self.y_hi - self.y_lo) * i as f64 / 4.0;
            let y = self.y(v);
            let label = if format_int {
                format!("{v:.0}")
            } else {
                format!("{v:.1}")
            };
            self.body.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
                MARGIN_L - 5.0
            ));
            self.body.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{label}</text>\n",
                MARGIN_L - 8.0,
                y + 4.0
            ));
        }
    }

    fn x_tick(&mut self, v: f64, label: &str) {
        let x = self.x(v);
        self.body.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            CANVAS_H - MARGIN_B,
            CANVAS_H - MARGIN_B + 5.0
        ));
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{label}</text>\n",
            CANVAS_H - MARGIN_B + 18.0
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.x(x), self.y(y)))
            .collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let mut x = MARGIN_L + 12.0;
        let y = MARGIN_T + 14.0;
        for (label, color) in entries {
            self.body.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"14\" height=\"4\" fill=\"{color}\"/>\n",
                y - 4.0
            ));
            self.body.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{y:.2}\" font-size=\"12\">{label}</text>\n",
                x + 18.0
            ));
            x += 18.0 + 8.0 * label.len() as f64 + 24.0;
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn y_ceiling(values: impl Iterator<Item = f64>) -> f64 {
    let max = values.fold(0.0f64, f64::max);
    if max > 0.0 {
        max * 1.05
    } else {
        1.0
    }
}

/// Forecast and actual power overlaid across one day (the summer/winter
/// single-day comparison).
pub fn comparison_day_svg(intervals: &[IntervalRow], day: NaiveDate) -> Result<String, ReportError> {
    if intervals.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let day_rows: Vec<&IntervalRow> = intervals.iter().filter(|r| r.time.date() == day).collect();
    if day_rows.is_empty() {
        return Err(ReportError::DayNotFound(day));
    }
    let y_hi = y_ceiling(day_rows.iter().flat_map(|r| [r.forecast_w, r.actual_w]));
    let mut plot = Plot::new(
        &format!("Forecast vs actual power, {day}"),
        "hour of day",
        "power (W)",
        (0.0, 24.0),
        (0.0, y_hi),
    );
    plot.y_ticks(y_hi >= 10.0);
    for h in (0..=24).step_by(3) {
        plot.x_tick(h as f64, &format!("{h:02}"));
    }
    let hour_of = |r: &IntervalRow| r.time.hour() as f64 + r.time.minute() as f64 / 60.0;
    let forecast: Vec<(f64, f64)> = day_rows.iter().map(|r| (hour_of(r), r.forecast_w)).collect();
    let actual: Vec<(f64, f64)> = day_rows.iter().map(|r| (hour_of(r), r.actual_w)).collect();
    plot.polyline(&actual, ACTUAL_COLOR);
    plot.polyline(&forecast, FORECAST_COLOR);
    plot.legend(&[("actual", ACTUAL_COLOR), ("forecast", FORECAST_COLOR)]);
    Ok(plot.finish())
}

/// Daily forecast and actual energy across the evaluated period (the
/// month-long comparison).
pub fn comparison_month_svg(days: &[DayRow]) -> Result<String, ReportError> {
    if days.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let y_hi = y_ceiling(days.iter().flat_map(|d| [d.forecast_wh, d.actual_wh]));
    let x_hi = days.len() as f64;
    let mut plot = Plot::new(
        &format!("Daily energy, {} – {}", days[0].date, days[days.len() - 1].date),
        "day",
        "energy (Wh)",
        (0.5, x_hi + 0.5),
        (0.0, y_hi),
    );
    plot.y_ticks(y_hi >= 10.0);
    let step = (days.len() / 10).max(1);
    for (i, day) in days.iter().enumerate().step_by(step) {
        plot.x_tick(i as f64 + 1.0, &format!("{}", day.date.format("%m-%d")));
    }
    let forecast: Vec<(f64, f64)> = days
        .iter()
        .enumerate()
        .map(|(i, d)| (i as f64 + 1.0, d.forecast_wh))
        .collect();
    let actual: Vec<(f64, f64)> = days
        .iter()
        .enumerate()
        .map(|(i, d)| (i as f64 + 1.0, d.actual_wh))
        .collect();
    plot.polyline(&actual, ACTUAL_COLOR);
    plot.polyline(&forecast, FORECAST_COLOR);
    plot.legend(&[("actual", ACTUAL_COLOR), ("forecast", FORECAST_COLOR)]);
    Ok(plot.finish())
}

/// One bar per day of absolute percentage error. Days with undefined APE
/// (no measured energy) render as zero-height bars, so the bar count always
/// equals the day count.
pub fn ape_daily_svg(days: &[DayRow]) -> Result<String, ReportError> {
    if days.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    let y_hi = y_ceiling(days.iter().filter_map(|d| d.ape_percent));
    let x_hi = days.len() as f64;
    let mut plot = Plot::new(
        &format!(
            "Daily absolute percentage error, {} – {}",
            days[0].date,
            days[days.len() - 1].date
        ),
        "day",
        "APE (%)",
        (0.0, x_hi),
        (0.0, y_hi),
    );
    plot.y_ticks(y_hi >= 10.0);
    let step = (days.len() / 10).max(1);
    for (i, day) in days.iter().enumerate().step_by(step) {
        plot.x_tick(i as f64 + 0.5, &format!("{}", day.date.format("%m-%d")));
    }
    let slot_w = plot.plot_w() / days.len() as f64;
    let bar_w = slot_w * 0.7;
    let base_y = plot.y(0.0);
    for (i, day) in days.iter().enumerate() {
        let value = day.ape_percent.unwrap_or(0.0);
        let top = plot.y(value);
        let x = plot.x(i as f64 + 0.5) - bar_w / 2.0;
        plot.body.push_str(&format!(
            "<rect class=\"bar\" x=\"{x:.2}\" y=\"{top:.2}\" width=\"{bar_w:.2}\" height=\"{:.2}\" fill=\"{BAR_COLOR}\"/>\n",
            base_y - top
        ));
    }
    Ok(plot.finish())
}
