use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_magtrans"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn magnet_config() -> String {
    configs_dir().join("magnet.toml").display().to_string()
}

fn bare_config() -> String {
    configs_dir().join("bare.toml").display().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

#[test]
fn missing_config_fails_with_a_readable_error() {
    let out = run(&["rate", "--config", "/no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "stderr was: {err}");
    assert!(err.contains("/no/such/file.toml"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = run(&["rate", "--config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_tables_passes_on_the_shipped_device() {
    let out = run(&["check-tables", "--config", &magnet_config()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.matches(": PASS").count(), 3);
    assert!(!text.contains("FAIL"));
}

#[test]
fn check_tables_fails_on_a_detuned_device() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("weak.toml");
    let text = std::fs::read_to_string(magnet_config()).unwrap();
    std::fs::write(&path, text.replace("g_a = 52.0", "g_a = 5.0")).unwrap();
    let out = run(&["check-tables", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    let out = run(&[
        "check-tables",
        "--config",
        path.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["pass"], serde_json::json!(false));
}

#[test]
fn bare_names_resolve_through_the_config_dir() {
    let out = bin()
        .args(["check-tables", "--config", "magnet"])
        .env("MAGTRANS_CONFIG_DIR", configs_dir())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn sweeps_are_reproducible_across_thread_counts_and_sinks() {
    let args = [
        "sweep",
        "--config",
        &magnet_config(),
        "--x",
        "delta:-2.5e9:2.5e9:13:linear",
        "--y",
        "delta_tilde:-2.5e9:2.5e9:11:linear",
        "--quantity",
        "s_over_omega",
    ];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let three = run(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(one.status.code(), Some(0), "stderr: {}", stderr(&one));
    assert_eq!(stdout(&one), stdout(&three));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    let filed = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(filed.status.code(), Some(0));
    assert!(stdout(&filed).is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&one));
}

#[test]
fn ratio_sweeps_can_derive_their_own_baseline() {
    let out = run(&[
        "sweep",
        "--config",
        &magnet_config(),
        "--x",
        "delta:-2.5e9:2.5e9:5:linear",
        "--y",
        "j_perp:1e9:1e12:4:log",
        "--quantity",
        "ratio_to_baseline",
        "--tie-delta-tilde",
        "--auto-baseline",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# quantity=ratio_to_baseline"));
    assert!(text.contains("baseline="));
    assert!(stderr(&out).contains("note: baseline rate"));

    let out = run(&[
        "sweep",
        "--config",
        &magnet_config(),
        "--x",
        "delta:-2.5e9:2.5e9:5:linear",
        "--y",
        "delta_tilde:-2.5e9:2.5e9:5:linear",
        "--quantity",
        "ratio_to_baseline",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--auto-baseline"));
}

#[test]
fn figure_presets_emit_their_csv_shapes() {
    let out = run(&[
        "figure",
        "--config",
        &magnet_config(),
        "--name",
        "levels",
        "--x-count",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# curves=levels"));
    assert!(text.contains("crossing_bz=0.033142276046541255"));
    assert_eq!(text.lines().count(), 22);

    let out = run(&[
        "figure",
        "--config",
        &magnet_config(),
        "--name",
        "detuning-map-magnet",
        "--x-count",
        "6",
        "--y-count",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("# quantity=s_over_omega"));

    let out = run(&["figure", "--config", &magnet_config(), "--name", "wat"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("valid names"));
}

#[test]
fn oracle_reports_a_clean_short_run() {
    let out = run(&[
        "oracle",
        "--config",
        &bare_config(),
        "--delta",
        "5e7",
        "--delta-tilde",
        "5e7",
        "--delta-cap",
        "5e7",
        "--t-end",
        "2e-6",
        "--dt",
        "2e-10",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["n_steps"], serde_json::json!(10000));
    assert!(doc["norm_drift"].as_f64().unwrap() < 1e-10);
    assert!(doc["effective_model_divergence"].as_f64().unwrap() < 1e-6);
    let total: f64 = ["microwave", "magnon", "spin", "excited", "optical"]
        .iter()
        .map(|k| doc["final_populations"][k].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn oracle_refuses_an_oversized_step_with_advice() {
    let out = run(&[
        "oracle",
        "--config",
        &magnet_config(),
        "--t-end",
        "1e-6",
        "--dt",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("too coarse"), "stderr was: {err}");
    assert!(err.contains("or smaller"));
}

#[test]
fn dropping_the_magnet_matches_the_bare_config() {
    let with_flag = run(&[
        "rate",
        "--config",
        &magnet_config(),
        "--no-magnet",
        "--delta",
        "1e9",
        "--delta-tilde",
        "1e9",
        "--delta-cap",
        "1e10",
    ]);
    let bare = run(&[
        "rate",
        "--config",
        &bare_config(),
        "--delta",
        "1e9",
        "--delta-tilde",
        "1e9",
        "--delta-cap",
        "1e10",
    ]);
    assert_eq!(with_flag.status.code(), Some(0));
    assert_eq!(stdout(&with_flag), stdout(&bare));
}
