//! Synthetic weather generator for tests and benchmarks.
//!
//! Real measured panel output is not bundled, so the toolkit ships a
//! generator whose ground truth is known by construction. Records follow the
//! 10-minute cadence with a seasonal diurnal irradiance arc
//! `G = G_peak · max(0, sin(π·(τ − sunrise)/daylength))`; temperature tracks
//! the arc exactly, humidity and wind carry seeded day-to-day variation.
//!
//! Two target relations are available:
//!
//! - `linear`: `G = G_peak · s` with temperature `T = T_base + T_amp · s`,
//!   so the normalized target is exactly affine in normalized temperature —
//!   a linear fit can recover the construction coefficients.
//! - `nonlinear`: the arc is modulated by a smooth product of sigmoids in
//!   temperature and humidity (plus a mild wind term), which a linear model
//!   cannot represent but a small MLP can.
//!
//! Everything is a pure function of `(seed, days, noise_sigma, relation)`.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDateTime};

use super::FeatureError;
use crate::ingest::WeatherRecord;
use crate::rng::SplitMix64;

/// Slots per day at the 10-minute cadence.
pub const SLOTS_PER_DAY: usize = 144;

/// Nighttime temperature floor, °C.
pub const T_BASE_C: f64 = 8.0;

/// Diurnal temperature swing, °C: `T = T_BASE_C + T_AMP_C · s`.
pub const T_AMP_C: f64 = 28.0;

/// Clear-sky peak irradiance, W/m².
pub const G_PEAK_W_M2: f64 = 1000.0;

/// First generated timestamp.
pub fn start_time() -> NaiveDateTime {
    NaiveDateTime::parse_from_str("2014-01-01 00:00", crate::ingest::TIME_FORMAT).unwrap()
}

/// Shape of the irradiance/weather relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Linear,
    Nonlinear,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Linear => f.write_str("linear"),
            Relation::Nonlinear => f.write_str("nonlinear"),
        }
    }
}

impl FromStr for Relation {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Relation::Linear),
            "nonlinear" => Ok(Relation::Nonlinear),
            other => Err(FeatureError::InvalidParam(format!(
                "relation must be `linear` or `nonlinear`, got `{other}`"
            ))),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Nonlinear modulation of the clear-sky arc, in roughly [0.3, 1.0]:
/// warm days brighten, humid days dim, wind nudges either way.
pub fn nonlinear_modulation(temp_c: f64, rh_pct: f64, wind_ms: f64) -> f64 {
    (0.55 + 0.45 * sigmoid((temp_c - 22.0) / 5.0))
        * (1.0 - 0.45 * sigmoid((rh_pct - 70.0) / 8.0))
        * (1.0 + 0.08 * (wind_ms / 17.6 - 0.5))
}

/// Generate `days` days of 10-minute records, fully determined by `seed`.
///
/// `noise_sigma` is the relative standard deviation of the multiplicative
/// Gaussian noise on irradiance; zero means an exact construction.
pub fn generate_synthetic(
    seed: u64,
    days: u32,
    noise_sigma: f64,
    relation: Relation,
) -> Result<Vec<WeatherRecord>, FeatureError> {
    if noise_sigma < 0.0 || !noise_sigma.is_finite() {
        return Err(FeatureError::InvalidParam(format!(
            "noise_sigma must be ≥ 0, got {noise_sigma}"
        )));
    }
    if days < 1 {
        return Err(FeatureError::InvalidParam("days must be ≥ 1".into()));
    }

    let mut rng = SplitMix64::new(seed);
    let start = start_time();
    let mut records = Vec::with_capacity(days as usize * SLOTS_PER_DAY);

    for day in 0..days as i64 {
        // Per-day draws, in a fixed order so the stream layout is stable.
        let rh_level = rng.uniform(30.0, 85.0);
        let rh_phase = rng.uniform(0.0, std::f64::consts::TAU);
        let wind_level = rng.next_f64();
        let wind_phase = rng.uniform(0.0, std::f64::consts::TAU);
        let dir_base = rng.uniform(0.0, 360.0);
        let dir_phase = rng.uniform(0.0, std::f64::consts::TAU);

        let midnight = start + Duration::days(day);
        let doy = midnight.date().ordinal() as f64;
        let daylength_h = 12.0 + 2.2 * (std::f64::consts::TAU * (doy - 80.0) / 365.25).sin();
        let sunrise_h = 12.0 - daylength_h / 2.0;

        for slot in 0..SLOTS_PER_DAY {
            let time = midnight + Duration::minutes(10 * slot as i64);
            let tau_h = slot as f64 / 6.0;
            let x = (tau_h - sunrise_h) / daylength_h;
            let s = if (0.0..=1.0).contains(&x) {
                (std::f64::consts::PI * x).sin()
            } else {
                0.0
            };

            let temp = T_BASE_C + T_AMP_C * s;
            let rh = (rh_level
                + 8.0 * (1.0 - s)
                + 2.0 * (std::f64::consts::TAU * 3.0 * tau_h / 24.0 + rh_phase).sin())
            .clamp(10.0, 99.5);
            let wind = (1.5
                + 9.0 * wind_level
                + 2.5 * (std::f64::consts::TAU * tau_h / 24.0 + wind_phase).sin())
            .clamp(0.0, 17.5);
            let dir = (dir_base
                + 25.0 * (std::f64::consts::TAU * tau_h / 24.0 + dir_phase).sin())
            .rem_euclid(360.0);

            let clear = match relation {
                Relation::Linear => G_PEAK_W_M2 * s,
                Relation::Nonlinear => G_PEAK_W_M2 * s * nonlinear_modulation(temp, rh, wind),
            };
            // One normal draw per slot, applied multiplicatively; with
            // noise_sigma = 0 the factor is exactly 1.
            let eps = rng.normal();
            let ghi = (clear * (1.0 + noise_sigma * eps)).clamp(0.0, 1140.0);

            records.push(WeatherRecord {
                time,
                ghi_pyr: ghi,
                dni: (ghi * (0.9 - 0.3 * rh / 100.0)).max(0.0),
                air_temperature: temp,
                relative_humidity: rh,
                wind_speed: wind,
                wind_speed_of_gust: wind * 1.35 + 0.5,
                wind_from_direction_st_dev: 8.0 + 4.0 * (1.0 - s),
                wind_from_direction: dir,
                barometric_pressure: 1012.0
                    + 6.0 * (std::f64::consts::TAU * (doy - 20.0) / 365.25).sin()
                    + 1.5 * (std::f64::consts::TAU * tau_h / 24.0 + 0.9).sin(),
                sensor_cleaning: (day as usize * SLOTS_PER_DAY + slot) % 977 == 577,
            });
        }
    }
    Ok(records)
}
