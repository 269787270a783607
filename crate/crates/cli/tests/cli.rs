use std::path::Path;
use std::process::{Command, Output};

use clap::Parser;
use serde_json::Value;

use otm_cli::{run, ExitStatus, RunConfig};
use otm_core::collinfo::{collision_mi, conditional_collision_mi, JointDistribution, Variable};

fn otm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otm")).args(args).env_remove("OTM_WORKERS").output().expect("binary runs")
}

fn config(args: &[&str]) -> RunConfig {
    RunConfig::try_parse_from(std::iter::once("otm").chain(args.iter().copied())).expect("valid arguments")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn qrac_table_lists_eight_entries() {
    let out = otm(&["qrac-table"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    let entries = doc["result"]["data"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 8);
    let want = (std::f64::consts::PI / 8.0).cos().powi(2);
    for e in entries {
        assert!((e["probability"].as_f64().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn feasibility_witness_and_reproducibility() {
    let args = ["feasibility", "--D", "2", "--ell", "2", "--d", "2", "--eps1", "2^-20", "--eps2", "2^-20"];
    let out = otm(&args);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    let w = &doc["result"]["data"];
    assert!(w["size_residual"].as_f64().unwrap() >= 0.0);
    assert!(w["shell_residual"].as_f64().unwrap() >= 0.0);
    assert_eq!(w["log_inv_eps1"].as_f64(), Some(20.0));
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("size residual") && summary.contains("shell residual"));

    let a = run(&config(&args)).unwrap();
    let b = run(&config(&args)).unwrap();
    assert_eq!(a.reproducible_document(), b.reproducible_document());
    assert!(a.document().contains("\"metadata\""));
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn entropy_matches_library_on_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let vars = vec![Variable::new("X", 2), Variable::new("Y", 3), Variable::new("Z", 2)];
    let d = JointDistribution::from_weights(vars, (1..=12).map(f64::from).collect()).unwrap();
    let csv = write(dir.path(), "d.csv", &d.to_csv());
    let json = write(dir.path(), "d.json", &d.to_json());
    let direct = collision_mi(&d, &["X"], &["Y"]).unwrap();
    for path in [&csv, &json] {
        let out = otm(&["entropy", "--in", path, "--mi", "X", "Y"]);
        assert_eq!(out.status.code(), Some(0));
        let v = json_of(&out)["result"]["data"]["value"].as_f64().unwrap();
        assert!((v - direct).abs() < 1e-12, "{v} vs {direct}");
    }
    let out = otm(&["entropy", "--in", &csv, "--mi", "X", "Y,Z", "--given", "Z"]);
    let want = conditional_collision_mi(&d, &["X"], &["Y", "Z"], &["Z"]).unwrap();
    assert!((json_of(&out)["result"]["data"]["value"].as_f64().unwrap() - want).abs() < 1e-12);

    // Header without the trailing prob column.
    let bare = write(dir.path(), "bare.csv", "X,Y\n0,0,0.5\n1,1,0.5\n");
    let out = otm(&["entropy", "--in", &bare, "--mi", "X", "Y"]);
    assert_eq!(json_of(&out)["result"]["data"]["value"].as_f64(), Some(1.0));
}

#[test]
fn input_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "X,prob\n0,zero\n");
    assert_eq!(otm(&["entropy", "--in", &bad, "--h", "X"]).status.code(), Some(4));
    assert_eq!(otm(&["entropy", "--in", "/nonexistent/d.csv", "--h", "X"]).status.code(), Some(4));
    assert_eq!(otm(&["bounds", "--quantity", "total", "--bogus"]).status.code(), Some(4));
    assert_eq!(otm(&["bounds", "--quantity", "total", "--coarse", "2^"]).status.code(), Some(4));
    assert_eq!(otm(&["bounds", "--quantity", "total", "--coarse", "0.01", "--fine", "0.05"]).status.code(), Some(4));
    assert_eq!(otm(&["simulate", "--n", "15", "--rate", "0.3"]).status.code(), Some(4));
    assert_eq!(otm(&["simulate", "--n", "15", "--k", "3", "--m0", "101"]).status.code(), Some(4));
    assert_eq!(otm(&["qrac-table", "--workers", "0"]).status.code(), Some(4));
    assert_eq!(otm(&["nonsense"]).status.code(), Some(4));
    assert_eq!(otm(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_exhaustion_exits_with_three() {
    let out = otm(&["bounds", "--quantity", "greater", "--coarse", "0.25", "--fine", "0.01", "--no-dual", "--max-cells", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = json_of(&out);
    assert_eq!(doc["result"]["status"], "budget-exhausted");
    assert_eq!(doc["result"]["data"]["complete"], false);
    // Exact enumeration too large for the simulator.
    let out = otm(&["simulate", "--n", "16", "--k", "2", "--trials", "1", "--strategy", "mu0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bounds_report_carries_the_argmax_povm() {
    let a = run(&config(&["bounds", "--quantity", "total", "--coarse", "0.25", "--fine", "0.125"])).unwrap();
    assert_eq!(a.status, ExitStatus::Success);
    let d = &a.result["data"];
    let raw = d["raw_max"].as_f64().unwrap();
    assert!((0.6438..=0.67).contains(&raw), "{raw}");
    assert!(d["corrected_bound"].as_f64().unwrap() >= raw);
    let elements = d["argmax_povm"]["elements"].as_array().unwrap();
    assert!(elements.len() >= 2);
    assert!(elements.iter().all(|m| m.as_array().is_some_and(|rows| rows.len() == 2)));
    assert!(d["stats"].get("elapsed_seconds").is_none());
    assert!(a.metadata["search_seconds"].as_f64().is_some());
}

#[test]
fn simulation_is_independent_of_worker_count() {
    let base = ["simulate", "--n", "15", "--rate", "0.2", "--lambda", "8", "--trials", "400", "--seed", "11"];
    let one = run(&config(&[&base[..], &["--workers", "1"]].concat())).unwrap();
    let three = run(&config(&[&base[..], &["--workers", "3"]].concat())).unwrap();
    assert_eq!(one.status, ExitStatus::Success);
    assert_eq!(one.result, three.result);
    let data = &one.result["data"];
    assert_eq!(data["round_trip_mismatches"], 0);
    assert_eq!(data["transcript"].as_array().unwrap().len(), 5);
    for s in data["statistics"].as_array().unwrap() {
        assert!(s["exact_failure_prob"].as_f64().is_some());
    }
    let other_seed = run(&config(&[&base[..3], &["--k", "3", "--trials", "400", "--seed", "12"]].concat())).unwrap();
    assert_ne!(one.result["data"]["transcript"], other_seed.result["data"]["transcript"]);
}

#[test]
fn simulator_comparison_within_hash_bound() {
    let a = run(&config(&["simulate", "--n", "6", "--k", "2", "--lambda", "8", "--trials", "50", "--strategy", "mu0", "--m0", "1", "--m1", "0"])).unwrap();
    assert_eq!(a.status, ExitStatus::Success);
    let r = &a.result["data"]["simulator"]["report"];
    assert!(r["sd"].as_f64().unwrap() <= r["lhl_bound"].as_f64().unwrap());
}

#[test]
fn leakage_emits_csv_table() {
    let out = otm(&["leakage", "--m", "2", "--exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 82);
    assert!(lines[0].starts_with("strategy,angles,m,ic_c0"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let out = otm(&["leakage", "--m", "3", "--angles", "0,pi/8,pi/4", "--csv", csv.to_str().unwrap(), "--out", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 4);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc["result"]["data"]["strategies"], 3);
    assert_eq!(doc["result"]["data"]["all_within_bounds"], true);
}

#[test]
fn replay_reproduces_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = otm(&["simulate", "--n", "10", "--k", "2", "--trials", "100", "--seed", "4", "--out", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = otm(&["replay", "--config", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let read = |p: &Path| serde_json::from_str::<Value>(&std::fs::read_to_string(p).unwrap()).unwrap();
    assert_eq!(read(&first)["result"], read(&second)["result"]);

    let cfg = config(&["simulate", "--n", "10", "--k", "2", "--trials", "100", "--seed", "4"]);
    assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    let nested = write(dir.path(), "nested.json", &config(&["replay", "--config", "x.json"]).to_json());
    assert_eq!(otm(&["replay", "--config", &nested]).status.code(), Some(4));
}
