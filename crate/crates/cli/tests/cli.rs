//! End-to-end runs of the compiled binary: exit codes, exact output bytes,
//! format switches, and the frozen regression file.

use std::collections::HashMap;
use std::io::Write;
use std::process::{Command, Output, Stdio};

fn qdarwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdarwin"))
        .args(args)
        .env_remove("THREADS")
        .output()
        .expect("binary runs")
}

fn qdarwin_with(args: &[&str], stdin: Option<&str>, threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qdarwin"));
    cmd.args(args).env_remove("THREADS");
    if let Some(n) = threads {
        cmd.env("THREADS", n);
    }
    if let Some(text) = stdin {
        cmd.stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        let mut child = cmd.spawn().expect("binary spawns");
        child
            .stdin
            .take()
            .expect("stdin piped")
            .write_all(text.as_bytes())
            .expect("config written");
        child.wait_with_output().expect("binary runs")
    } else {
        cmd.output().expect("binary runs")
    }
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 output")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 output")
}

/// Parse CSV output into columns, skipping `#` metadata lines.
fn columns(text: &str) -> HashMap<String, Vec<String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().expect("header row").split(',').collect();
    let mut cols: HashMap<String, Vec<String>> =
        header.iter().map(|h| (h.to_string(), Vec::new())).collect();
    for line in lines {
        for (h, cell) in header.iter().zip(line.split(',')) {
            cols.get_mut(*h)
                .expect("known column")
                .push(cell.to_string());
        }
    }
    cols
}

fn floats(cols: &HashMap<String, Vec<String>>, name: &str) -> Vec<f64> {
    cols[name]
        .iter()
        .map(|s| s.parse::<f64>().expect("numeric cell"))
        .collect()
}

#[test]
fn default_info_curve_matches_the_frozen_file() {
    let out = qdarwin(&["info-curve"]);
    assert!(out.status.success());
    assert_eq!(
        stdout_str(&out),
        include_str!("golden/info_curve_default.csv"),
        "default curve drifted from the frozen regression file"
    );
}

#[test]
fn identical_configs_give_byte_identical_output() {
    let cfg = r#"{"p1": 0.3, "components": {"gamma": 0.6, "count": 7}, "fragment_sizes": {"start": 1, "end": 7}}"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    std::fs::write(&path, cfg).unwrap();
    let p = path.to_str().unwrap();

    let first = qdarwin(&["info-curve", "--config", p]);
    let second = qdarwin(&["info-curve", "--config", p]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    // Same document over standard input: same bytes again.
    let piped = qdarwin_with(&["info-curve", "--config", "-"], Some(cfg), None);
    assert!(piped.status.success());
    assert_eq!(first.stdout, piped.stdout);

    // More workers reorder nothing.
    let threaded = qdarwin_with(&["info-curve", "--config", p], None, Some("4"));
    assert_eq!(first.stdout, threaded.stdout);
}

#[test]
fn info_curve_header_row_is_exact() {
    let out = qdarwin(&["info-curve", "--frag-max", "1"]);
    let text = stdout_str(&out);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "fragment_size,gamma_eff,holevo_pointer,accessible_info,qcb_info,pe_helstrom,\
         pe_qcb,deficit_holevo,deficit_accessible,deficit_qcb"
    );
    let hash_line = text.lines().next().unwrap();
    assert!(hash_line.starts_with("# config_sha256 = "));
    assert_eq!(hash_line.len(), "# config_sha256 = ".len() + 64);
}

#[test]
fn perfect_records_reach_the_plateau_at_one_component() {
    let out = qdarwin(&["info-curve", "--gamma", "0", "--frag-max", "3"]);
    let cols = columns(&stdout_str(&out));
    let hs = 0.8112781244591328;
    for name in ["holevo_pointer", "accessible_info", "qcb_info"] {
        for v in floats(&cols, name) {
            assert!((v - hs).abs() < 1e-11, "{name} = {v}");
        }
    }
    for v in floats(&cols, "pe_helstrom") {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn identical_records_carry_nothing() {
    let out = qdarwin(&["info-curve", "--gamma", "1", "--frag-max", "3"]);
    let cols = columns(&stdout_str(&out));
    for name in ["holevo_pointer", "accessible_info", "qcb_info"] {
        for v in floats(&cols, name) {
            assert_eq!(v, 0.0, "{name}");
        }
    }
    for v in floats(&cols, "pe_helstrom") {
        assert!((v - 0.25).abs() < 1e-12);
    }
}

#[test]
fn numeric_and_oracle_modes_agree_with_closed_forms() {
    let base = [
        "info-curve",
        "--p1",
        "0.25",
        "--gamma",
        "0.8",
        "--env-size",
        "6",
        "--frag-max",
        "6",
    ];
    let runs: Vec<HashMap<String, Vec<String>>> = ["closed-form", "numeric", "oracle"]
        .iter()
        .map(|mode| {
            let mut args = base.to_vec();
            args.extend_from_slice(&["--mode", mode]);
            let out = qdarwin(&args);
            assert!(out.status.success(), "{mode}: {}", stderr_str(&out));
            columns(&stdout_str(&out))
        })
        .collect();
    for name in [
        "gamma_eff",
        "holevo_pointer",
        "accessible_info",
        "qcb_info",
        "pe_helstrom",
        "pe_qcb",
    ] {
        let closed = floats(&runs[0], name);
        for (mode, cols) in ["numeric", "oracle"].iter().zip(&runs[1..]) {
            let got = floats(cols, name);
            for (a, b) in closed.iter().zip(&got) {
                assert!((a - b).abs() < 1e-9, "{mode} {name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn malformed_or_invalid_configs_exit_one_with_precise_messages() {
    let out = qdarwin_with(&["info-curve", "--config", "-"], Some("{ broken"), None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("line 1"), "{}", stderr_str(&out));

    let out = qdarwin(&["info-curve", "--p1", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("p1"));

    let out = qdarwin_with(
        &["info-curve", "--config", "-"],
        Some(r#"{"components": {"gamma": 0.5, "angle": 0.5, "count": 3}}"#),
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("exactly one"));

    let out = qdarwin(&["info-curve", "--env-size", "3", "--frag-max", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("exceeds"));

    let out = qdarwin(&["info-curve", "--config", "/nonexistent/sweep.json"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qdarwin(&["info-curve", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qdarwin(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn redundancy_scan_converges_on_the_asymptotic_law() {
    let out = qdarwin(&["redundancy", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let cols = &v["columns"];
    let measures: Vec<&str> = cols["measure"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap())
        .collect();
    assert_eq!(measures.len(), 12, "3 measures x 4 deltas");

    // delta = 0.01 rows carry the reference asymptotic redundancy.
    for (i, d) in cols["delta"].as_array().unwrap().iter().enumerate() {
        if (d.as_f64().unwrap() - 0.01).abs() < 1e-15 {
            let ra = cols["r_asymptotic"][i].as_f64().unwrap();
            assert!((ra - 579.9).abs() <= 0.1, "{ra}");
        }
        assert_eq!(cols["status"][i], "ok");
    }

    // Default deltas descend. The integer threshold size makes the gap jumpy
    // for the entropy-based measures, but the qcb rows shrink monotonically.
    let gaps: Vec<f64> = cols["relative_gap"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(i, _)| measures[*i] == "qcb_info")
        .map(|(_, g)| g.as_f64().unwrap())
        .collect();
    assert_eq!(gaps.len(), 4);
    for pair in gaps.windows(2) {
        assert!(pair[1] < pair[0], "gap rose: {pair:?}");
    }
    assert!(gaps[3] < 0.2, "{gaps:?}");
}

#[test]
fn unreachable_threshold_marks_the_row_and_exits_zero() {
    let out = qdarwin(&[
        "redundancy",
        "--gamma",
        "0.99",
        "--env-size",
        "5",
        "--delta",
        "1e-6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let cols = columns(&text);
    assert!(cols["status"]
        .iter()
        .all(|s| s == "insufficient_environment"));
    assert!(cols["f_delta"].iter().all(String::is_empty));
}

#[test]
fn oracle_check_passes_at_the_reference_parameters() {
    let out = qdarwin(&["oracle-check", "--angle", "0.7853981633974483"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let cols = columns(&stdout_str(&out));
    assert!(cols["status"].iter().all(|s| s == "pass"));
    assert!(cols["check"]
        .iter()
        .any(|c| c == "residual_vs_record_overlap_law"));
}

#[test]
fn oracle_check_without_remaining_environment_skips_convergence() {
    let out = qdarwin(&["oracle-check", "--env-size", "1", "--frag-max", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let cols = columns(&text);
    let skipped: Vec<usize> = cols["status"]
        .iter()
        .enumerate()
        .filter(|(_, s)| *s == "skip_expected_fail")
        .map(|(i, _)| i)
        .collect();
    assert_eq!(skipped.len(), 1);
    assert_eq!(cols["check"][skipped[0]], "mutual_information_convergence");
    assert!(cols["status"].iter().filter(|s| *s == "pass").count() >= 5);
}

#[test]
fn oracle_check_cap_violation_exits_one() {
    let out = qdarwin(&["oracle-check", "--env-size", "13"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("12"));
}

#[test]
fn fitted_exponents_match_the_analytic_value() {
    let out = qdarwin(&["fit-exponent"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("# fit_window = 18..68"), "{text}");
    let cols = columns(&text);
    let analytic = floats(&cols, "analytic_exponent");
    for a in &analytic {
        assert!((a - 0.2670628).abs() < 1e-7, "{a}");
    }
    let diffs = floats(&cols, "abs_difference");
    let by_measure: HashMap<&str, f64> = cols["measure"]
        .iter()
        .map(String::as_str)
        .zip(diffs.iter().copied())
        .collect();
    assert!(by_measure["holevo_pointer"] < 1e-3);
    assert!(by_measure["accessible_info"] < 5e-3);
    assert!(by_measure["qcb_info"] < 5e-3);
}

#[test]
fn fit_window_override_outside_validity_warns_but_runs() {
    let out = qdarwin_with(
        &["fit-exponent", "--config", "-"],
        Some(r#"{"window": [1, 8]}"#),
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr_str(&out).contains("warning"), "{}", stderr_str(&out));
    assert!(stdout_str(&out).contains("# fit_window = 1..8"));
}

#[test]
fn fit_exponent_with_no_valid_window_exits_one() {
    let out = qdarwin(&["fit-exponent", "--env-size", "5", "--frag-max", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_str(&out).contains("window"));
}

#[test]
fn json_format_mirrors_columns_as_arrays() {
    let out = qdarwin(&["info-curve", "--frag-max", "4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);
    let cols = v["columns"].as_object().unwrap();
    assert_eq!(cols.len(), 10);
    for (name, values) in cols {
        assert_eq!(values.as_array().unwrap().len(), 4, "{name}");
    }
    assert_eq!(cols["fragment_size"][2], 3);
}

#[test]
fn output_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let to_stdout = qdarwin(&["info-curve", "--frag-max", "3"]);
    let to_file = qdarwin(&[
        "info-curve",
        "--frag-max",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}
