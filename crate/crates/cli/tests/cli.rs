use std::fs;
use std::process::{Command, Output};

use coexist_cli::OUT_DIR_ENV;

fn coexist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coexist"))
        .args(args)
        .env_remove(OUT_DIR_ENV)
        .output()
        .unwrap()
}

/// Data rows of CSV output as `(header, rows)`.
fn table(stdout: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(stdout.to_vec()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# coexist "));
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

const CASE3: &str = "n_wifi = 1\nn_laa = 1\ncomparison_mode = true\n[wifi]\nw0 = 16\nm = 2\ndata_rate_mbps = 9.0\n[laa]\nclass = 3\ndata_rate_mbps = 7.8\n";

#[test]
fn case3_file_reproduces_table_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case3.toml");
    fs::write(&path, CASE3).unwrap();
    let out = coexist(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 1);
    let (w, l) = (col(&h, &rows[0], "tput_wifi_mbps"), col(&h, &rows[0], "tput_laa_mbps"));
    assert!((w - 1.49).abs() / 1.49 < 0.05, "{w}");
    assert!((l - 5.26).abs() / 5.26 < 0.05, "{l}");
    assert_eq!(format!("{w:.2}"), "1.49");
}

#[test]
fn both_engines_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("case3.toml");
    fs::write(&path, CASE3).unwrap();
    let out = coexist(&["run", path.to_str().unwrap(), "--engine", "both", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 2);
    for c in ["tput_wifi_mbps", "tput_laa_mbps", "tput_total_mbps"] {
        let (a, s) = (col(&h, &rows[0], c), col(&h, &rows[1], c));
        assert!((a - s).abs() / a < 0.02, "{c}: {a} vs {s}");
    }
}

#[test]
fn negative_txop_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "n_wifi = 1\nn_laa = 1\n[laa]\ntxop_us = -8000.0\n").unwrap();
    let out = coexist(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("txop_us"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_and_wrong_preset_kind() {
    assert_eq!(coexist(&["run", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(coexist(&["run", "--preset", "fig7"]).status.code(), Some(2));
    assert_eq!(coexist(&["sweep", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(coexist(&["run"]).status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_three() {
    let out = coexist(&["run", "--preset", "table4_case3", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    let (h, rows) = table(&out.stdout);
    let status = h.iter().position(|c| c == "status").unwrap();
    assert!(rows.iter().all(|r| r[status] == "no_convergence"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("residual"));
}

#[test]
fn comparison_mode_is_echoed() {
    let out = coexist(&["run", "--preset", "table4_case2"]);
    let (h, rows) = table(&out.stdout);
    for r in &rows {
        assert_eq!(col(&h, r, "laa_retry_limit"), 0.0);
        assert_eq!(col(&h, r, "laa_next_tx_delay_us"), 34.0);
    }
}

#[test]
fn node_split_maximum_at_one_wifi_node() {
    let out = coexist(&["sweep", "--preset", "fig10"]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 19);
    let best = rows
        .iter()
        .max_by(|a, b| col(&h, a, "coex_total_mbps").total_cmp(&col(&h, b, "coex_total_mbps")))
        .unwrap();
    assert_eq!(col(&h, best, "n_wifi"), 1.0);
    assert_eq!(col(&h, best, "n_laa"), 19.0);
}

#[test]
fn total_nodes_sweep_below_wifi_only() {
    let out = coexist(&["sweep", "--preset", "fig7"]);
    let (h, rows) = table(&out.stdout);
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(col(&h, r, "coex_total_mbps") < col(&h, r, "wifi_only_total_mbps"));
        assert_eq!(col(&h, r, "n_wifi"), col(&h, r, "n_laa"));
    }
}

#[test]
fn wifi_throughput_falls_with_wifi_detection() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("det.toml");
    fs::write(
        &path,
        "[[sweep]]\nlabel = \"det\"\naxis = \"detection_wifi\"\nvalues = [0.0, 0.546, 1.0]\n[sweep.base]\nn_wifi = 5\nn_laa = 5\n[sweep.base.wifi]\nw0 = 16\nm = 6\n[sweep.base.laa]\nclass = 4\ndata_rate_mbps = 8.4\n",
    )
    .unwrap();
    let out = coexist(&["sweep", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (h, rows) = table(&out.stdout);
    let w: Vec<f64> = rows.iter().map(|r| col(&h, r, "coex_wifi_mbps")).collect();
    assert!(w[0] > w[1] && w[1] > w[2], "{w:?}");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_coexist"))
        .args(["sweep", "--preset", "fig12"])
        .env(OUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(dir.path().join("fig12.csv")).unwrap();
    assert_eq!(text.lines().count(), 2 + 16);

    let explicit = dir.path().join("sub/t.csv");
    let out = coexist(&["run", "--preset", "table7", "--out", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(explicit).unwrap().contains("ed-72"));
}

#[test]
fn trace_has_one_line_per_measured_event() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.toml");
    fs::write(&scen, CASE3).unwrap();
    let trace = dir.path().join("trace.csv");
    let out = coexist(&[
        "run",
        scen.to_str().unwrap(),
        "--engine",
        "simulate",
        "--horizon",
        "3000",
        "--warmup",
        "1000",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(trace).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("event,class,duration_us"));
    assert_eq!(lines.count(), 2000);

    let out = coexist(&["run", "--preset", "table5", "--engine", "both", "--trace", "/tmp/x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn detect_and_presets() {
    let out = coexist(&["detect", "--threshold-dbm", "-62", "-72", "-82"]);
    let (h, rows) = table(&out.stdout);
    let p: Vec<f64> = rows.iter().map(|r| col(&h, r, "detection_probability")).collect();
    assert!(p[0] < 0.005 && (p[1] - 0.546).abs() < 0.005 && p[2] > 0.995);

    let list = String::from_utf8(coexist(&["presets"]).stdout).unwrap();
    for name in ["fig7", "fig12", "table4_case3", "table7"] {
        assert!(list.contains(name));
    }
    let shown = coexist(&["presets", "table4_case3"]);
    assert!(String::from_utf8(shown.stdout).unwrap().contains("class = 3"));
}
