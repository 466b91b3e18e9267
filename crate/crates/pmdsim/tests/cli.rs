//! End-to-end tests of the `pmdsim` binary: exit codes, schema tags,
//! determinism of outputs, config-file precedence, and the seed fallback.

use std::path::PathBuf;
use std::process::{Command, Output};

fn pmdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmdsim"))
        .args(args)
        .env_remove("PMDSIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_str(out)).expect("JSON output")
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("pmdsim_cli_{}_{name}", std::process::id()));
    p
}

#[test]
fn info_reports_memory_costs() {
    let out = pmdsim(&["info", "--gamma", "0.5", "--v", "0.4", "--n", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "report-v1");
    assert_eq!(v["d_mu"], 2.0);
    assert_eq!(v["d_q"], 1.0);
    assert_eq!(v["machine"]["schema"], "em-v1");
    assert_eq!(v["survival"].as_array().unwrap().len(), 17);

    let geometric = pmdsim(&["info", "--gamma", "0.5", "--v", "0", "--n", "1"]);
    let v = json(&geometric);
    assert_eq!(v["d_mu"], 0.0);
    assert_eq!(v["d_q"], 0.0);
}

#[test]
fn validation_failures_exit_2() {
    let out = pmdsim(&["info", "--gamma", "0.99", "--v", "0.95", "--n", "50"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("strictly decreasing"), "stderr: {err}");

    let out = pmdsim(&["bound", "--n", "4", "--k", "9"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pmdsim(&["exact", "--n", "4", "--horizon", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_dump_carries_qm_schema() {
    let out = pmdsim(&["model", "--gamma", "0.5", "--v", "0.4", "--n", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "qm-v1");
    assert!((v["params"]["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["completeness_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn exact_matches_between_models() {
    let out = pmdsim(&["exact", "--n", "4", "--horizon", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "initial_state,word,classical,quantum,abs_diff"
    );
    assert_eq!(text.lines().count(), 1 + 4 * 8);
    for line in text.lines().skip(1) {
        let diff: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(diff < 1e-10);
    }
}

#[test]
fn sample_is_deterministic_per_seed() {
    let args = [
        "sample", "--n", "4", "--horizon", "2", "--shots", "200", "--seed", "7",
    ];
    let a = pmdsim(&args);
    let b = pmdsim(&args);
    assert!(a.status.success());
    assert_eq!(stdout_str(&a), stdout_str(&b));

    let c = pmdsim(&[
        "sample", "--n", "4", "--horizon", "2", "--shots", "200", "--seed", "8",
    ]);
    assert_ne!(stdout_str(&a), stdout_str(&c));
}

#[test]
fn seed_env_fallback() {
    let with_flag = pmdsim(&["sample", "--n", "4", "--shots", "50", "--seed", "9"]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_pmdsim"))
        .args(["sample", "--n", "4", "--shots", "50"])
        .env("PMDSIM_SEED", "9")
        .output()
        .expect("binary runs");
    assert_eq!(stdout_str(&with_flag), stdout_str(&with_env));
}

#[test]
fn config_file_fills_defaults_flags_win() {
    let config_path = temp_path("config.txt");
    std::fs::write(&config_path, "# test config\nn = 8\ngamma = 0.5\nv = 0.4\n").unwrap();
    let config = config_path.to_str().unwrap();

    let from_config = pmdsim(&["info", "--config", config]);
    assert!(from_config.status.success());
    assert_eq!(json(&from_config)["n_period"], 8);

    let overridden = pmdsim(&["info", "--config", config, "--n", "4"]);
    assert_eq!(json(&overridden)["n_period"], 4);
    std::fs::remove_file(&config_path).ok();
}

#[test]
fn output_flag_writes_identical_bytes() {
    let path = temp_path("sweep.csv");
    let args = [
        "sweep",
        "--grid",
        "custom",
        "--n-list",
        "3,4",
        "--gamma-from",
        "0.5",
        "--gamma-to",
        "0.52",
        "--gamma-step",
        "0.01",
        "--shots",
        "20000",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let stdout_run = pmdsim(&args);
    assert!(stdout_run.status.success());
    let mut file_args: Vec<&str> = args.to_vec();
    file_args.push("--output");
    let path_str = path.to_str().unwrap();
    file_args.push(path_str);
    let file_run = pmdsim(&file_args);
    assert!(file_run.status.success());
    let file_bytes = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stdout_str(&stdout_run), file_bytes);
    assert!(file_bytes.starts_with("n_period,gamma,v,horizon,shots,noise_p,seed,"));
    assert_eq!(file_bytes.lines().count(), 1 + 6);
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_reports_row_errors_without_failing() {
    // Period 2 at gamma 0.62 with v=0.4 is unphysical; period 4 is fine.
    let out = pmdsim(&[
        "sweep",
        "--grid",
        "custom",
        "--n-list",
        "2,4",
        "--gamma-from",
        "0.62",
        "--gamma-to",
        "0.62",
        "--gamma-step",
        "0.01",
        "--shots",
        "1000",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "report-v1");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["error"].as_str().unwrap().contains("strictly decreasing"));
    assert!(rows[1]["error"].is_null());

    // All rows failing is a hard error.
    let total = pmdsim(&[
        "sweep",
        "--grid",
        "custom",
        "--n-list",
        "2",
        "--gamma-from",
        "0.62",
        "--gamma-to",
        "0.62",
        "--gamma-step",
        "0.01",
        "--shots",
        "1000",
    ]);
    assert_eq!(total.status.code(), Some(3));
}

#[test]
fn tomo_defaults_match_flagship_point() {
    let out = pmdsim(&["tomo"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "report-v1");
    assert_eq!(v["n_period"], 4);
    assert_eq!(v["gamma"], 0.49);
    assert_eq!(v["v"], 0.4);
    assert!(v["max_infidelity"].as_f64().unwrap() <= 1e-10);

    let noisy = pmdsim(&["tomo", "--noise-p", "1"]);
    let v = json(&noisy);
    for c in v["conditions"].as_array().unwrap() {
        assert!((c["infidelity"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn walk_emits_five_coins_and_waveplates() {
    let out = pmdsim(&["walk", "--gamma", "0.5", "--v", "0.4", "--n", "4"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema"], "walk-v1");
    assert_eq!(v["coins"].as_array().unwrap().len(), 5);
    assert!(v["verification_deviation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["waveplates_deg"].as_array().unwrap().len(), 5);

    let csv = pmdsim(&["walk", "--n", "4", "--format", "csv"]);
    let text = stdout_str(&csv);
    assert!(text.starts_with("position,step,q1_deg,h_deg,q2_deg\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn bound_csv_row_schema() {
    let out = pmdsim(&["bound", "--n", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "n_period,gamma,v,k,L,bound_bits,argmin_partition"
    );
    // Two causal states fit in one bit: the bound is exactly zero.
    assert!(text.lines().nth(1).unwrap().contains(",0,"));
}
