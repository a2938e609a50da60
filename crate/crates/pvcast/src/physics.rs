//! Irradiance-to-power conversion for a nameplate-rated panel array.
//!
//! The conversion is `P = A · r · G · PR` where `A` is the total module area,
//! `r` the module yield at standard test conditions (1000 W/m²), `G` the
//! global horizontal irradiance, and `PR` the performance ratio. Because `r`
//! is derived from the nameplate (`r = p_max / (area · 1000)`), the product
//! `A · r` collapses to `count · p_max / 1000`, so the array delivers exactly
//! its rated power at 1000 W/m² and `PR = 1`.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use thiserror::Error;

/// Irradiance at standard test conditions, the reference for nameplate p_max.
pub const STC_IRRADIANCE_W_M2: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("negative irradiance {0} W/m²")]
    NegativeIrradiance(f64),
    #[error("invalid panel spec: {0}")]
    InvalidPanel(String),
    #[error("invalid array: {0}")]
    InvalidArray(String),
}

/// Nameplate data for a single module.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub p_max_w: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub v_mp_v: f64,
    pub i_mp_a: f64,
    pub operating_temp_c: f64,
    pub operating_temp_tol_c: f64,
}

impl PanelSpec {
    /// The EverExceed EX150-36P module this toolkit was sized for:
    /// 150 W, 1480 × 680 × 30 mm, 18.4 V / 8.16 A at max power, 47 ± 2 °C.
    pub fn ex150_36p() -> Self {
        Self {
            p_max_w: 150.0,
            length_m: 1.48,
            width_m: 0.68,
            v_mp_v: 18.4,
            i_mp_a: 8.16,
            operating_temp_c: 47.0,
            operating_temp_tol_c: 2.0,
        }
    }

    pub fn area_m2(&self) -> f64 {
        self.length_m * self.width_m
    }

    /// Check nameplate self-consistency: positive power and area, and
    /// `V_mp · I_mp` within 2 % of `p_max`.
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !self.p_max_w.is_finite() || self.p_max_w <= 0.0 {
            return Err(PhysicsError::InvalidPanel(format!(
                "p_max must be positive, got {}",
                self.p_max_w
            )));
        }
        if !self.area_m2().is_finite() || self.area_m2() <= 0.0 {
            return Err(PhysicsError::InvalidPanel(format!(
                "area must be positive, got {} m × {} m",
                self.length_m, self.width_m
            )));
        }
        let vi = self.v_mp_v * self.i_mp_a;
        if ((vi - self.p_max_w) / self.p_max_w).abs() >= 0.02 {
            return Err(PhysicsError::InvalidPanel(format!(
                "V_mp × I_mp = {vi:.3} W disagrees with p_max = {} W by more than 2 %",
                self.p_max_w
            )));
        }
        Ok(())
    }
}

/// A bank of identical modules plus the performance ratio that scales
/// nameplate output down to real-world output.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelArray {
    pub panel: PanelSpec,
    pub count: u32,
    pub performance_ratio: f64,
}

impl PanelArray {
    /// Build and validate an array. `performance_ratio` must lie in (0, 1].
    pub fn new(panel: PanelSpec, count: u32, performance_ratio: f64) -> Result<Self, PhysicsError> {
        panel.validate()?;
        if count < 1 {
            return Err(PhysicsError::InvalidArray("count must be ≥ 1".into()));
        }
        if !(performance_ratio > 0.0 && performance_ratio <= 1.0) {
            return Err(PhysicsError::InvalidArray(format!(
                "performance ratio must lie in (0, 1], got {performance_ratio}"
            )));
        }
        Ok(Self {
            panel,
            count,
            performance_ratio,
        })
    }

    /// Total module area `A` in m².
    pub fn total_area_m2(&self) -> f64 {
        self.count as f64 * self.panel.area_m2()
    }

    /// Module yield `r = p_max / (area · 1000 W/m²)`, dimensionless.
    pub fn yield_r(&self) -> f64 {
        self.panel.p_max_w / (self.panel.area_m2() * STC_IRRADIANCE_W_M2)
    }

    /// Combined nameplate rating `count · p_max` in W.
    pub fn rated_power_w(&self) -> f64 {
        self.count as f64 * self.panel.p_max_w
    }

    /// Array power in W for instantaneous irradiance `g` in W/m²:
    /// `P = A · r · G · PR`.
    pub fn instantaneous_power(&self, g: f64) -> Result<f64, PhysicsError> {
        if g < 0.0 || g.is_nan() {
            return Err(PhysicsError::NegativeIrradiance(g));
        }
        Ok(self.total_area_m2() * self.yield_r() * g * self.performance_ratio)
    }
}

/// Integrate a power series at fixed cadence into Wh per calendar day:
/// `E_day = Σ P_i · cadence` with cadence expressed in hours.
///
/// Empty input yields an empty map.
pub fn daily_energy(
    powers: &[(NaiveDateTime, f64)],
    cadence: Duration,
) -> BTreeMap<NaiveDate, f64> {
    let slot_hours = cadence.num_seconds() as f64 / 3600.0;
    let mut per_day: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for (time, power_w) in powers {
        *per_day.entry(time.date()).or_insert(0.0) += power_w * slot_hours;
    }
    per_day
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn four_panel_array(pr: f64) -> PanelArray {
        PanelArray::new(PanelSpec::ex150_36p(), 4, pr).unwrap()
    }

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M").unwrap()
    }

    #[test]
    fn nameplate_consistency_at_stc() {
        // 4 × 150 W at 1000 W/m², PR = 1 → rated power exactly.
        let array = four_panel_array(1.0);
        let p = array.instantaneous_power(1000.0).unwrap();
        assert!(
            (p - 600.0).abs() / 600.0 < 1e-9,
            "expected 600 W, got {p}"
        );
    }

    #[test]
    fn zero_irradiance_gives_zero_power() {
        let array = four_panel_array(1.0);
        assert_eq!(array.instantaneous_power(0.0).unwrap(), 0.0);
    }

    #[test]
    fn midrange_irradiance_with_derating() {
        // A·r collapses to 0.6, so P = 0.6 · 570 · 0.8 = 273.6 W.
        let array = four_panel_array(0.8);
        let p = array.instantaneous_power(570.0).unwrap();
        assert!((p - 273.6).abs() < 1e-9, "got {p}");
    }

    #[test]
    fn negative_irradiance_is_an_error() {
        let array = four_panel_array(1.0);
        assert!(matches!(
            array.instantaneous_power(-1.0),
            Err(PhysicsError::NegativeIrradiance(_))
        ));
    }

    #[test]
    fn linearity_in_irradiance() {
        let array = four_panel_array(0.75);
        let base = array.instantaneous_power(100.0).unwrap();
        for a in [0.0, 0.5, 1.0, 2.0, 7.25] {
            let scaled = array.instantaneous_power(a * 100.0).unwrap();
            assert!((scaled - a * base).abs() <= 1e-9 * base.max(1.0));
        }
    }

    #[test]
    fn inconsistent_nameplate_rejected() {
        let mut panel = PanelSpec::ex150_36p();
        panel.v_mp_v = 24.0; // 24 × 8.16 = 195.8 W, way off 150 W
        assert!(matches!(
            PanelArray::new(panel, 4, 1.0),
            Err(PhysicsError::InvalidPanel(_))
        ));
    }

    #[test]
    fn performance_ratio_bounds_enforced() {
        assert!(PanelArray::new(PanelSpec::ex150_36p(), 4, 0.0).is_err());
        assert!(PanelArray::new(PanelSpec::ex150_36p(), 4, 1.01).is_err());
        assert!(PanelArray::new(PanelSpec::ex150_36p(), 0, 0.75).is_err());
    }

    #[test]
    fn constant_power_day_integrates_to_product() {
        // 144 ten-minute slots of 600 W = 24 h · 600 W = 14 400 Wh.
        let start = ts("2017-06-01 00:00");
        let series: Vec<_> = (0..144)
            .map(|i| (start + Duration::minutes(10 * i), 600.0))
            .collect();
        let energy = daily_energy(&series, Duration::minutes(10));
        assert_eq!(energy.len(), 1);
        let e = energy[&NaiveDate::from_ymd_opt(2017, 6, 1).unwrap()];
        assert!((e - 14_400.0).abs() < 1e-9, "got {e}");
    }

    #[test]
    fn single_slot_energy() {
        let series = vec![(ts("2017-06-01 12:00"), 300.0)];
        let energy = daily_energy(&series, Duration::minutes(10));
        let e = energy[&NaiveDate::from_ymd_opt(2017, 6, 1).unwrap()];
        assert!((e - 50.0).abs() < 1e-12, "300 W for 1/6 h should be 50 Wh, got {e}");
    }

    #[test]
    fn empty_series_gives_empty_map() {
        assert!(daily_energy(&[], Duration::minutes(10)).is_empty());
    }

    #[test]
    fn diurnal_curve_matches_riemann_sum_oracle() {
        // Two days of a sine arc; oracle sums each day independently.
        let start = ts("2017-06-01 00:00");
        let mut series = Vec::new();
        for i in 0..288 {
            let t = start + Duration::minutes(10 * i);
            let minute_of_day = (i % 144) as f64 * 10.0;
            let x = (minute_of_day - 360.0) / 720.0; // sunrise 06:00, 12 h of light
            let power = if (0.0..=1.0).contains(&x) {
                450.0 * (std::f64::consts::PI * x).sin()
            } else {
                0.0
            };
            series.push((t, power));
        }
        let energy = daily_energy(&series, Duration::minutes(10));
        for (day_idx, date) in [
            NaiveDate::from_ymd_opt(2017, 6, 1).unwrap(),
            NaiveDate::from_ymd_opt(2017, 6, 2).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            let oracle: f64 = series
                [day_idx * 144..(day_idx + 1) * 144]
                .iter()
                .map(|(_, p)| p / 6.0)
                .sum();
            assert_eq!(energy[date], oracle, "day {day_idx} mismatch");
        }
    }

    #[test]
    fn concatenated_days_sum_to_per_day_energies() {
        let d1 = vec![(ts("2017-06-01 10:00"), 100.0), (ts("2017-06-01 10:10"), 200.0)];
        let d2 = vec![(ts("2017-06-02 10:00"), 300.0)];
        let combined: Vec<_> = d1.iter().chain(d2.iter()).cloned().collect();
        let combined_energy = daily_energy(&combined, Duration::minutes(10));
        let e1 = daily_energy(&d1, Duration::minutes(10));
        let e2 = daily_energy(&d2, Duration::minutes(10));
        let total: f64 = combined_energy.values().sum();
        let split_total: f64 = e1.values().chain(e2.values()).sum();
        assert!((total - split_total).abs() < 1e-12);
    }
}
