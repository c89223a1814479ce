use std::process::{Command, Output};

use serde_json::Value;

fn cewave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cewave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn ce_check_labels() {
    let out = cewave(&["ce", "check", "--builtin", "born-infeld"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = json(&out);
    assert_eq!(rep["label"], "StronglyCE");
    assert_eq!(rep["schema"], "cewave-report/1");

    let out = cewave(&["ce", "check", "--expr", "-a/2 + 0.1*a^2", "--kind", "alpha"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["label"], "NotCE");
}

#[test]
fn ce_check_parse_error() {
    let out = cewave(&["ce", "check", "--expr", "sqrt(", "--kind", "alpha"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("at byte 5"), "{err}");
}

#[test]
fn ce_check_input_errors() {
    assert_eq!(cewave(&["ce", "check", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(
        cewave(&["ce", "check", "--builtin", "maxwell", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cewave(&["ce", "check", "--builtin", "maxwell", "--grid", "q:0:1:3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cewave(&["ce", "check", "--builtin", "maxwell", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn fresnel_born_infeld_never_birefringent() {
    let out = cewave(&["fresnel", "--builtin", "born-infeld", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4 * 51);
    assert!(rows.iter().all(|r| &r[14] == "false"));
    let vacuum: Vec<f64> = rows[..4].iter().map(|r| r[11].parse().unwrap()).collect();
    assert_eq!(vacuum, vec![-1.0, -1.0, 1.0, 1.0]);
}

#[test]
fn fresnel_perturbed_maxwell_birefringent() {
    let out = cewave(&[
        "fresnel",
        "--builtin",
        "perturbed-maxwell",
        "--params",
        "0.1",
        "--samples",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert!(rows[..4].iter().all(|r| &r[14] == "false"));
    assert!(rows[4..].iter().all(|r| &r[14] == "true"));
    assert_eq!(cewave(&["fresnel", "--builtin", "scalar-bi"]).status.code(), Some(2));
}

#[test]
fn shock_summaries() {
    let out = cewave(&["shock"]);
    assert_eq!(out.status.code(), Some(0));
    let t = json(&out)["burgers_shock_time"].as_f64().unwrap();
    assert!((t - 1.0).abs() < 0.02);

    let out = cewave(&["shock", "--builtin", "scalar-bi"]);
    let s = json(&out);
    assert!(s["wave_crossing_time"].is_null());
    assert!(s["message"].as_str().unwrap().contains("no crossing up to t_max"));

    let out = cewave(&["shock", "--profile", "tanh"]);
    assert!(json(&out)["burgers_shock_time"].is_null());
}

#[test]
fn shock_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = cewave(&["shock", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let fan = std::fs::read_to_string(dir.path().join("fan.csv")).unwrap();
    assert!(fan.starts_with("t,family,phi,x,lambda\n"));
    let snap = std::fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    assert!(snap.starts_with("t,x,u\n"));
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn gravity_histograms() {
    let out = cewave(&["gravity", "--theory", "einstein", "--trials", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["nonnull_kernel_dims"], serde_json::json!({"0": 200}));
    let null = r["null_kernel_dims"].as_object().unwrap();
    assert!(null.keys().all(|k| k.parse::<usize>().unwrap() >= 1));

    let out = cewave(&["gravity", "--theory", "fr", "--fpp", "1", "--D", "5", "--trials", "50"]);
    let r = json(&out);
    let max_nonnull = r["nonnull_kernel_dims"]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.parse::<usize>().unwrap())
        .max();
    let min_null = r["null_kernel_dims"]
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.parse::<usize>().unwrap())
        .min();
    assert!(min_null > max_nonnull);
}

#[test]
fn gravity_input_errors() {
    assert_eq!(cewave(&["gravity", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(
        cewave(&["gravity", "--theory", "fr", "--fpp", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(cewave(&["gravity", "--D", "3"]).status.code(), Some(2));
}

#[test]
fn rays() {
    let out = cewave(&[
        "rays",
        "--builtin",
        "maxwell",
        "--n",
        "0,1,0",
        "--s-max",
        "1",
        "--step",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    let x: Vec<[f64; 4]> = rows
        .iter()
        .map(|r| [1, 2, 3, 4].map(|i| r[i].parse().unwrap()))
        .collect();
    // Straight line through the origin.
    for (a, b) in x[2].iter().zip(&x[1]) {
        assert!((a - 2.0 * b).abs() < 1e-12);
    }

    let out = cewave(&["rays", "--builtin", "born-infeld", "--e", "0.3,0,0", "--b", "0,0.4,0"]);
    let rows = csv_rows(&out);
    let h0: f64 = rows[0][9].parse().unwrap();
    assert!(rows.iter().all(|r| (r[9].parse::<f64>().unwrap() - h0).abs() < 1e-12));

    assert_eq!(
        cewave(&["rays", "--builtin", "maxwell", "--p0", "2"]).status.code(),
        Some(3)
    );
    assert_eq!(
        cewave(&["rays", "--builtin", "maxwell", "--root", "9"]).status.code(),
        Some(2)
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(cewave(&["--help"]).status.code(), Some(0));
    assert_eq!(cewave(&[]).status.code(), Some(2));
}
