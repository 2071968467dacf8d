use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oris_sim::cli::{EXIT_IO, EXIT_PARSE, EXIT_SCHEMA, EXIT_USAGE};
use oris_sim::config::RunConfig;

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn default_config() -> PathBuf {
    workspace().join("configs/default.json")
}

fn oris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oris")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn schema() -> serde_json::Value {
    let text = std::fs::read_to_string(workspace().join("docs/config.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn shipped_config_is_the_default() {
    let text = std::fs::read_to_string(default_config()).unwrap();
    assert_eq!(text, RunConfig::default().to_json());
}

#[test]
fn validate_config_accepts_shipped_config_and_prints_it_back() {
    let path = default_config();
    let o = oris(&["validate-config", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(o.stdout, std::fs::read(&path).unwrap());
}

#[test]
fn schema_accepts_default_and_rejects_mutations() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let good: serde_json::Value = serde_json::from_str(&RunConfig::default().to_json()).unwrap();
    assert!(validator.is_valid(&good));

    let mut extra = good.clone();
    extra["radio"]["gain"] = 1.0.into();
    assert!(!validator.is_valid(&extra));
    let mut negative = good.clone();
    negative["radio"]["bandwidth_hz"] = (-1.0).into();
    assert!(!validator.is_valid(&negative));
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("seed");
    assert!(!validator.is_valid(&missing));
    let mut wall = good;
    wall["scene"]["wall_grid"] = serde_json::json!({"cols": 30, "rows": 10});
    assert!(validator.is_valid(&wall));
}

#[test]
fn exit_codes_are_distinct_per_failure() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let broken = write("broken.json", "{\"seed\": ");
    assert_eq!(code(&oris(&["validate-config", "--config", &broken])), EXIT_PARSE);

    let unknown = write("unknown.json", "{\"colour\": 1}");
    assert_eq!(code(&oris(&["validate-config", "--config", &unknown])), EXIT_SCHEMA);

    let mut cfg = RunConfig::default();
    cfg.experiment.trials = 0;
    let zero = write("zero.json", &cfg.to_json());
    assert_eq!(code(&oris(&["validate-config", "--config", &zero])), EXIT_SCHEMA);

    let mut cfg = RunConfig::default();
    cfg.scene.oris_grid.rows = 7;
    cfg.scene.wall_grid = Some(oris_sim::config::Grid { cols: 30, rows: 0 });
    let grid = write("grid.json", &cfg.to_json());
    assert_eq!(code(&oris(&["validate-config", "--config", &grid])), EXIT_SCHEMA);

    let absent = dir.path().join("absent.json");
    assert_eq!(code(&oris(&["validate-config", "--config", absent.to_str().unwrap()])), EXIT_IO);

    assert_eq!(code(&oris(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&oris(&["fig2", "--trials", "many"])), EXIT_USAGE);
    assert_eq!(code(&oris(&["solve", "--users", "1,2"])), EXIT_USAGE);
    assert_eq!(code(&oris(&["--version"])), 0);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let out = file.join("sub");
    let o = oris(&["fig3", "--trials", "1", "--users", "1", "--gamma-th-db", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_IO);
}

#[test]
fn solve_is_deterministic() {
    let a = oris(&["solve", "--users", "1", "--seed", "7"]);
    let b = oris(&["solve", "--users", "1", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let algs: Vec<&str> =
        v["allocations"].as_array().unwrap().iter().map(|x| x["algorithm"].as_str().unwrap()).collect();
    assert_eq!(algs, ["no-oris", "single-shot", "algorithm1"]);
    assert_eq!(v["allocations"][0]["oris_used"], 0);
    let c = oris(&["solve", "--users", "1", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn fig2_rows_cover_thresholds_users_and_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = oris(&["fig2", "--trials", "2", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("fig2.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let plan = &RunConfig::default().experiment.fig2;
    assert_eq!(rows.len(), plan.gamma_th_db.len() * plan.users.len() * 3);

    // The manifest carries the full configuration of the run.
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2.manifest.json")).unwrap()).unwrap();
    let cfg: RunConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(cfg.experiment.trials, 2);
    assert_eq!(m["rows"], rows.len());

    // Regenerating the plot from the CSV reproduces the campaign's SVG.
    let svg = dir.path().join("again.svg");
    let p = oris(&["plot", dir.path().join("fig2.csv").to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_eq!(code(&p), 0);
    assert_eq!(std::fs::read(&svg).unwrap(), std::fs::read(dir.path().join("fig2.svg")).unwrap());
}

#[test]
fn plot_of_empty_csv_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "experiment,algorithm,users\n").unwrap();
    let svg = dir.path().join("empty.svg");
    let o = oris(&["plot", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    assert!(!svg.exists());
}

#[test]
fn cli_overrides_reach_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = oris(&[
        "fig4",
        "--trials",
        "2",
        "--oris-grid",
        "15x2",
        "--users",
        "2,3",
        "--gamma-th-db",
        "10,20",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(&r[2], "2-3");
        assert_eq!(&r[3], "10-20");
        assert_eq!(&r[4], "15x2");
    }
}

#[test]
fn dump_channel_writes_every_gain() {
    let dir = tempfile::tempdir().unwrap();
    let o = oris(&["dump-channel", "--users", "2", "--oris-grid", "15x2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = RunConfig::default();
    let leds = cfg.scene.led_positions_m.len();
    let mirrors = 4 * 15 * 2;
    let patches = 4 * 15 * 4;
    let gains = std::fs::read_to_string(dir.path().join("channel_gains.csv")).unwrap();
    assert_eq!(gains.lines().count(), 1 + leds * (1 + mirrors + patches) * 2);
    let coeffs = std::fs::read_to_string(dir.path().join("channel_coefficients.csv")).unwrap();
    assert_eq!(coeffs.lines().filter(|l| l.starts_with("c,")).count(), 2);
    for line in gains.lines().skip(1) {
        let gain: f64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert!(gain.is_finite() && gain >= 0.0);
    }
}
