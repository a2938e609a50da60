//! End-to-end tests of the `pvcast` binary: exit codes, file outputs, and
//! the compositional behavior of `predict`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::NaiveDateTime;
use tempfile::TempDir;

use pvcast::eval::parse_power_csv;
use pvcast::features::{
    denormalize_scalar, normalize_record, synth::{G_PEAK_W_M2, T_AMP_C, T_BASE_C}, FeatureMatrix,
    FeatureSpec, TargetMode,
};
use pvcast::ingest::{parse_csv, TABLE1_COLUMNS};
use pvcast::models::{load_model, Model};
use pvcast::physics::{PanelArray, PanelSpec};

fn pvcast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvcast"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should run")
}

fn expect_ok(dir: &Path, args: &[&str]) -> String {
    let out = pvcast(dir, args);
    assert!(
        out.status.success(),
        "pvcast {args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn expect_code(dir: &Path, args: &[&str], code: i32) -> String {
    let out = pvcast(dir, args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "pvcast {args:?}: stdout={} stderr={}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// synth → ingest → train(linreg) on the small linear construction.
fn linear_fixture(dir: &Path) -> PathBuf {
    expect_ok(dir, &["synth", "--seed", "11", "--days", "35", "--noise-sigma", "0",
                     "--relation", "linear", "--out", "weather.csv"]);
    expect_ok(dir, &["ingest", "--input", "weather.csv", "--cache", "cache.csv"]);
    dir.join("cache.csv")
}

#[test]
fn synth_is_deterministic_at_the_file_level() {
    let dir = TempDir::new().unwrap();
    expect_ok(dir.path(), &["synth", "--seed", "5", "--days", "3", "--out", "a.csv"]);
    expect_ok(dir.path(), &["synth", "--seed", "5", "--days", "3", "--out", "b.csv"]);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ingest_reports_gaps_and_flags_on_stdout() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    let stdout = expect_ok(dir.path(), &["ingest", "--input", "weather.csv", "--cache", "c2.csv"]);
    assert!(stdout.contains("rows accepted: 5040"), "{stdout}");
    assert!(stdout.contains("gaps: 0"), "{stdout}");
    assert!(stdout.contains("out-of-range flags: none"), "{stdout}");
}

#[test]
fn ingest_missing_column_exits_2_naming_it() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("bad.csv"),
        "time,ghi_pyr,dni,air_temperature,relative_humidity,wind_speed,wind_speed_of_gust,wind_from_direction_st_dev,wind_from_direction,sensor_cleaning\n",
    )
    .unwrap();
    let stderr = expect_code(dir.path(), &["ingest", "--input", "bad.csv", "--cache", "c.csv"], 2);
    assert!(stderr.contains("barometric_pressure"), "{stderr}");
}

#[test]
fn ingest_strict_range_rejects_flagged_rows() {
    let dir = TempDir::new().unwrap();
    let header = TABLE1_COLUMNS.join(",");
    let good = "2014-01-01 00:00,500,250,20,50,3,4,10,180,1005,0";
    let hot = "2014-01-01 00:10,1200,250,20,50,3,4,10,180,1005,0"; // ghi above 1140
    let good2 = "2014-01-01 00:20,400,250,20,50,3,4,10,180,1005,0";
    std::fs::write(dir.path().join("w.csv"), format!("{header}\n{good}\n{hot}\n{good2}\n")).unwrap();

    let stdout = expect_ok(
        dir.path(),
        &["ingest", "--input", "w.csv", "--cache", "strict.csv", "--strict-range"],
    );
    assert!(stdout.contains("rows accepted: 2"), "{stdout}");
    assert!(stdout.contains("out of feature bounds: 1"), "{stdout}");

    let cache = std::fs::read_to_string(dir.path().join("strict.csv")).unwrap();
    assert!(!cache.contains("1200"), "flagged row must be gone: {cache}");

    // Default mode keeps the row and only flags it.
    let stdout = expect_ok(dir.path(), &["ingest", "--input", "w.csv", "--cache", "lax.csv"]);
    assert!(stdout.contains("rows accepted: 3"), "{stdout}");
    assert!(stdout.contains("ghi_pyr: 1"), "{stdout}");
}

#[test]
fn train_linreg_recovers_the_linear_construction() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    expect_ok(dir.path(), &["train", "--cache", "cache.csv", "--model", "linreg",
                            "--boundary", "2014-02-01 00:00", "--artifact", "lin.json"]);

    let loaded = load_model(&dir.path().join("lin.json")).unwrap();
    let Model::Linear(model) = &loaded.model else {
        panic!("expected a linear artifact");
    };

    let spec = FeatureSpec::table2_default();
    let t = spec.get("air_temperature").unwrap();
    let g = spec.get("ghi_pyr").unwrap();
    let alpha = G_PEAK_W_M2 * (t.max - t.min) / (g.max * T_AMP_C);
    let beta = G_PEAK_W_M2 * (t.min - T_BASE_C) / (g.max * T_AMP_C);

    let t_idx = model
        .feature_order
        .iter()
        .position(|c| c == "air_temperature")
        .unwrap();
    for (i, w) in model.weights.iter().enumerate() {
        let expected = if i == t_idx { alpha } else { 0.0 };
        assert!(
            (w - expected).abs() < 1e-6,
            "weight {} = {w}, expected {expected}",
            model.feature_order[i]
        );
    }
    assert!((model.bias - beta).abs() < 1e-6, "bias {} vs {beta}", model.bias);
}

#[test]
fn train_same_seed_writes_identical_artifacts() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    for out in ["m1.json", "m2.json"] {
        expect_ok(dir.path(), &[
            "train", "--cache", "cache.csv", "--model", "mlp", "--seed", "7",
            "--epochs", "5", "--boundary", "2014-02-01 00:00", "--artifact", out,
        ]);
    }
    let a = std::fs::read(dir.path().join("m1.json")).unwrap();
    let b = std::fs::read(dir.path().join("m2.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn train_with_boundary_before_data_exits_3() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    let stderr = expect_code(
        dir.path(),
        &["train", "--cache", "cache.csv", "--model", "linreg",
          "--boundary", "2010-01-01 00:00", "--artifact", "x.json"],
        3,
    );
    assert!(stderr.contains("empty train set"), "{stderr}");
}

#[test]
fn train_divergence_exits_4_with_epoch() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    let stderr = expect_code(
        dir.path(),
        &["train", "--cache", "cache.csv", "--model", "mlp", "--epochs", "30",
          "--learning-rate", "1e12", "--boundary", "2014-02-01 00:00",
          "--artifact", "x.json"],
        4,
    );
    assert!(stderr.contains("diverged at epoch"), "{stderr}");
}

fn trained_fixture(dir: &Path) {
    linear_fixture(dir);
    expect_ok(dir, &["train", "--cache", "cache.csv", "--model", "mlp", "--seed", "3",
                     "--epochs", "15", "--boundary", "2014-02-01 00:00",
                     "--artifact", "model.json"]);
}

#[test]
fn predict_one_day_range_is_144_nonnegative_rows() {
    let dir = TempDir::new().unwrap();
    trained_fixture(dir.path());
    expect_ok(dir.path(), &["predict", "--artifact", "model.json", "--cache", "cache.csv",
                            "--from", "2014-02-01", "--to", "2014-02-02",
                            "--out", "day.csv"]);
    let series = parse_power_csv(&std::fs::read_to_string(dir.path().join("day.csv")).unwrap()).unwrap();
    assert_eq!(series.len(), 144);
    assert!(series.iter().all(|(_, p)| *p >= 0.0), "negative power in output");
    assert!(series.iter().any(|(_, p)| *p > 1.0), "all-zero prediction is suspicious");
}

#[test]
fn predict_matches_physics_applied_to_raw_model_output() {
    let dir = TempDir::new().unwrap();
    trained_fixture(dir.path());
    expect_ok(dir.path(), &["predict", "--artifact", "model.json", "--cache", "cache.csv",
                            "--from", "2014-02-02", "--to", "2014-02-04",
                            "--out", "two_days.csv"]);
    let written =
        parse_power_csv(&std::fs::read_to_string(dir.path().join("two_days.csv")).unwrap()).unwrap();

    // Compositional oracle: run the saved model by hand and push its raw
    // irradiance output through the panel formula.
    let loaded = load_model(&dir.path().join("model.json")).unwrap();
    assert_eq!(loaded.target_mode, TargetMode::Irradiance);
    let cache = std::fs::read_to_string(dir.path().join("cache.csv")).unwrap();
    let (records, _) = parse_csv(cache.as_bytes(), &TABLE1_COLUMNS).unwrap();
    let lo = NaiveDateTime::parse_from_str("2014-02-02 00:00", "%Y-%m-%d %H:%M").unwrap();
    let hi = NaiveDateTime::parse_from_str("2014-02-04 00:00", "%Y-%m-%d %H:%M").unwrap();
    let selected: Vec<_> = records.iter().filter(|r| r.time >= lo && r.time < hi).collect();
    assert_eq!(selected.len(), written.len());

    let columns = loaded.model.feature_order().to_vec();
    let matrix = FeatureMatrix {
        rows: selected
            .iter()
            .map(|r| normalize_record(r, &loaded.bounds, &columns).unwrap())
            .collect(),
        targets: vec![0.0; selected.len()],
        timestamps: selected.iter().map(|r| r.time).collect(),
        columns,
    };
    let raw = loaded.model.predict(&matrix).unwrap();

    let array = PanelArray::new(PanelSpec::ex150_36p(), 4, 0.75).unwrap();
    let g_bound = loaded.bounds.get("ghi_pyr").unwrap();
    for ((time, power_written), (rec, value)) in written.iter().zip(selected.iter().zip(&raw)) {
        assert_eq!(*time, rec.time);
        let g = denormalize_scalar(*value, g_bound).max(0.0);
        let expected = array
            .instantaneous_power(g)
            .unwrap()
            .clamp(0.0, array.rated_power_w());
        assert_eq!(
            *power_written, expected,
            "at {time}: file has {power_written}, physics gives {expected}"
        );
    }
}

#[test]
fn predict_empty_range_exits_3() {
    let dir = TempDir::new().unwrap();
    trained_fixture(dir.path());
    expect_code(
        dir.path(),
        &["predict", "--artifact", "model.json", "--cache", "cache.csv",
          "--from", "2030-01-01", "--out", "nothing.csv"],
        3,
    );
}

fn evaluated_fixture(dir: &Path) {
    trained_fixture(dir);
    expect_ok(dir, &["predict", "--artifact", "model.json", "--cache", "cache.csv",
                     "--from", "2014-02-01", "--out", "predicted.csv"]);
    // Measured stand-in: irradiance through the panel formula at the same PR.
    let cache = std::fs::read_to_string(dir.join("cache.csv")).unwrap();
    let (records, _) = parse_csv(cache.as_bytes(), &TABLE1_COLUMNS).unwrap();
    let array = PanelArray::new(PanelSpec::ex150_36p(), 4, 0.75).unwrap();
    let actual: Vec<(NaiveDateTime, f64)> = records
        .iter()
        .map(|r| (r.time, array.instantaneous_power(r.ghi_pyr).unwrap()))
        .collect();
    std::fs::write(dir.join("actual.csv"), pvcast::eval::power_series_csv(&actual)).unwrap();
}

#[test]
fn evaluate_identical_files_score_zero_mape() {
    let dir = TempDir::new().unwrap();
    evaluated_fixture(dir.path());
    let stdout = expect_ok(
        dir.path(),
        &["evaluate", "--predicted", "actual.csv", "--actual", "actual.csv",
          "--out-dir", "zero"],
    );
    assert!(stdout.contains("MAPE over 35 days: 0.000 %"), "{stdout}");
}

#[test]
fn evaluate_writes_one_day_row_per_day() {
    let dir = TempDir::new().unwrap();
    evaluated_fixture(dir.path());
    expect_ok(
        dir.path(),
        &["evaluate", "--predicted", "predicted.csv", "--actual", "actual.csv",
          "--out-dir", "reports"],
    );
    let per_day = std::fs::read_to_string(dir.path().join("reports/per_day.csv")).unwrap();
    // 2014-02-01 through 2014-02-04 (35-day fixture ends Feb 4): 4 days.
    assert_eq!(per_day.lines().count() - 1, 4, "{per_day}");
}

#[test]
fn evaluate_disjoint_ranges_exits_6() {
    let dir = TempDir::new().unwrap();
    evaluated_fixture(dir.path());
    let shifted: Vec<(NaiveDateTime, f64)> = parse_power_csv(
        &std::fs::read_to_string(dir.path().join("actual.csv")).unwrap(),
    )
    .unwrap()
    .into_iter()
    .map(|(t, p)| (t + chrono::Duration::days(5000), p))
    .collect();
    std::fs::write(dir.path().join("far.csv"), pvcast::eval::power_series_csv(&shifted)).unwrap();
    let stderr = expect_code(
        dir.path(),
        &["evaluate", "--predicted", "far.csv", "--actual", "actual.csv", "--out-dir", "x"],
        6,
    );
    assert!(stderr.contains("no overlap"), "{stderr}");
}

#[test]
fn report_emits_three_charts_with_one_bar_per_day() {
    let dir = TempDir::new().unwrap();
    evaluated_fixture(dir.path());
    expect_ok(
        dir.path(),
        &["evaluate", "--predicted", "predicted.csv", "--actual", "actual.csv",
          "--out-dir", "reports"],
    );
    expect_ok(dir.path(), &["report", "--report-dir", "reports"]);

    let ape = std::fs::read_to_string(dir.path().join("reports/ape_daily.svg")).unwrap();
    assert_eq!(ape.matches("<rect class=\"bar\"").count(), 4);
    for chart in ["comparison_day.svg", "comparison_month.svg"] {
        assert!(dir.path().join("reports").join(chart).exists(), "{chart} missing");
    }

    // Re-running produces byte-identical charts.
    let before = std::fs::read(dir.path().join("reports/ape_daily.svg")).unwrap();
    expect_ok(dir.path(), &["report", "--report-dir", "reports"]);
    let after = std::fs::read(dir.path().join("reports/ape_daily.svg")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn report_without_evaluation_csvs_exits_3() {
    let dir = TempDir::new().unwrap();
    std::fs::create_dir_all(dir.path().join("empty")).unwrap();
    expect_code(dir.path(), &["report", "--report-dir", "empty"], 3);

    // Present but row-less per_interval.csv is also exit 3.
    std::fs::write(
        dir.path().join("empty/per_interval.csv"),
        "time,forecast_w,actual_w,ape_percent\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("empty/per_day.csv"),
        "date,forecast_wh,actual_wh,ape_percent\n",
    )
    .unwrap();
    let stderr = expect_code(dir.path(), &["report", "--report-dir", "empty"], 3);
    assert!(stderr.contains("no rows"), "{stderr}");
}

#[test]
fn colliding_paths_are_refused() {
    let dir = TempDir::new().unwrap();
    linear_fixture(dir.path());
    let stderr = expect_code(
        dir.path(),
        &["ingest", "--input", "weather.csv", "--cache", "weather.csv"],
        1,
    );
    assert!(stderr.contains("distinct"), "{stderr}");
}

#[test]
fn config_file_and_set_overrides_feed_the_pipeline() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# test config\nseed = 9\nsynth.days = 2\nsynth.noise_sigma = 0\nsynth.relation = linear\n",
    )
    .unwrap();
    expect_ok(dir.path(), &["synth", "--config", "run.conf", "--out", "from_config.csv"]);
    expect_ok(dir.path(), &["synth", "--seed", "9", "--days", "2", "--noise-sigma", "0",
                            "--relation", "linear", "--out", "from_flags.csv"]);
    let a = std::fs::read(dir.path().join("from_config.csv")).unwrap();
    let b = std::fs::read(dir.path().join("from_flags.csv")).unwrap();
    assert_eq!(a, b, "config keys and flags must agree");

    // --set wins over the file.
    expect_ok(dir.path(), &["synth", "--config", "run.conf", "--set", "seed=10",
                            "--out", "overridden.csv"]);
    let c = std::fs::read(dir.path().join("overridden.csv")).unwrap();
    assert_ne!(a, c, "--set seed=10 must change the output");
}
