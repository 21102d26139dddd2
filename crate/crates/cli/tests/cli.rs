use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LINE: &str = r#"{
  "points": ["a", "b", "c", "d"],
  "distances": [[0, 1, 3, 9], [1, 0, 2, 8], [3, 2, 0, 6], [9, 8, 6, 0]],
  "initial": "a",
  "requests": [
    {"domain": ["c"], "image": ["c"]},
    {"domain": ["a", "d"], "image": ["d", "a"]},
    {"domain": ["b", "c"], "image": ["b", "b"]}
  ]
}"#;

const SWAPS: &str = r#"{
  "points": ["a", "b", "c"],
  "distances": [[0, 1, 1], [1, 0, 2], [1, 2, 0]],
  "initial": "a",
  "requests": [
    {"domain": ["b", "c"], "image": ["c", "b"]},
    {"domain": ["a", "b"], "image": ["b", "a"]},
    {"domain": ["c"], "image": ["c"]},
    {"domain": ["a", "c"], "image": ["c", "a"]}
  ]
}"#;

const TAXI: &str = r#"{
  "vertices": ["r", "x", "y", "z"],
  "parent": [null, "r", "r", "r"],
  "weights": [0, 1, 1, "3/2"],
  "k": 2,
  "start": ["x", "y"],
  "requests": [{"s": "x", "d": "z"}, {"s": "z", "d": "x"}, {"s": "y", "d": "z"}]
}"#;

fn tmss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmss")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("summary JSON on stdout")
}

fn assert_summary_fields(v: &Value) {
    for key in ["online_cost", "offline_cost", "ratio", "rounds", "seed", "parameters", "version"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
}

#[test]
fn run_writes_steps_and_summary() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "line.json", LINE);
    let out_dir = dir.path().join("out");
    let out = tmss(&["run", &inst, "--algo", "wfa", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = summary(&out);
    assert_summary_fields(&v);
    assert_eq!(v["online_cost"], 14.0);
    assert_eq!(v["offline_cost"], 10.0);
    let csv = fs::read_to_string(out_dir.join("steps.csv")).unwrap();
    assert_eq!(csv, "t,a_t,b_t,step_cost,min_work\n1,c,c,3,3\n2,a,d,3,6\n3,b,b,8,10\n");
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, v);
}

#[test]
fn greedy_is_selectable() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "line.json", LINE);
    let out = tmss(&["run", &inst, "--algo", "greedy"]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    assert_eq!(v["parameters"]["algo"], "greedy");
    assert!(v["online_cost"].as_f64().unwrap() >= v["offline_cost"].as_f64().unwrap());
}

#[test]
fn float_distance_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "bad.json", r#"{"points": ["a", "b"], "distances": [[0, 0.5], [0.5, 0]]}"#);
    for cmd in ["run", "validate"] {
        let out = tmss(&[cmd, &inst]);
        assert_eq!(out.status.code(), Some(1));
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("distances[0][1]"), "{err}");
    }
}

#[test]
fn unknown_label_and_missing_file_exit_one() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        dir.path(),
        "u.json",
        r#"{"points": ["a", "b"], "distances": [[0, 1], [1, 0]], "requests": [{"domain": ["q"], "image": ["a"]}]}"#,
    );
    let out = tmss(&["run", &inst]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requests[0].domain[0]"));
    assert_eq!(tmss(&["run", dir.path().join("absent.json").to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn swap_potential_holds_on_swap_requests() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "swaps.json", SWAPS);
    let out = tmss(&["run", &inst, "--potential", "swap"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = summary(&out);
    assert_eq!(v["potential"]["rho"], 4);
    for i in ["1", "2", "3"] {
        assert_eq!(v["potential"]["violations"][i], 0);
    }
    let line = write(dir.path(), "line.json", LINE);
    assert_eq!(tmss(&["run", &line, "--potential", "swap"]).status.code(), Some(1));
}

#[test]
fn lipschitz_lb_experiment_reports_ratio() {
    let out =
        tmss(&["experiment", "--name", "lipschitz-lb", "--n", "4", "--alpha", "2", "--rounds", "2000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    assert_summary_fields(&v);
    assert!(v["ratio"].as_f64().unwrap() >= 8.5, "{v}");
    assert_eq!(v["predicted"]["ratio"], 9.0);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["rounds"], 2000);
}

#[test]
fn experiments_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let d = dir.path().join(format!("r{i}"));
        let out = tmss(&[
            "experiment",
            "--name",
            "lipschitz-lb",
            "--n",
            "5",
            "--alpha",
            "3/2",
            "--rounds",
            "200",
            "--seed",
            "11",
            "--seeds",
            "4",
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push((fs::read(d.join("rounds.csv")).unwrap(), fs::read(d.join("summary.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(csv.lines().next(), Some("seed,round,online_cost,offline_cost,final_request"));
    let seeds: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds.len(), 800);
    assert!(seeds.windows(2).all(|w| w[0].parse::<u64>().unwrap() <= w[1].parse::<u64>().unwrap()));
}

#[test]
fn swap_and_superlinear_experiments() {
    let v = summary(&tmss(&["experiment", "--name", "swap-lb", "--n", "4", "--rounds", "20"]));
    assert_eq!(v["ratio"], 5.0);
    let out = tmss(&["experiment", "--name", "superlinear-wfa", "--h", "1", "--alpha", "20", "--rounds", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    assert_eq!(v["mean_online_cost"], 100.0);
    assert_eq!(v["deviations"], 0);
    assert_eq!(tmss(&["experiment", "--name", "superlinear-wfa", "--alpha", "3"]).status.code(), Some(1));
}

#[test]
fn pipeline_on_instance_and_adversary() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "line.json", LINE);
    let out_dir = dir.path().join("p");
    let out = tmss(&["pipeline", &inst, "--alpha", "2", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_summary_fields(&summary(&out));
    let csv = fs::read_to_string(out_dir.join("steps.csv")).unwrap();
    assert!(csv.starts_with("t,a_t,b_t,step_cost_d,step_cost_hat,min_work_d\n"));

    let v = summary(&tmss(&["pipeline", "--n", "4", "--alpha", "2", "--rounds", "300", "--seed", "5"]));
    let ratio = v["ratio"].as_f64().unwrap();
    assert!(ratio <= v["ratio_bound"].as_f64().unwrap());
    assert!(v["online_cost"].as_f64().unwrap() <= v["hat_online_cost"].as_f64().unwrap());
}

#[test]
fn pipeline_rejects_requests_above_alpha() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        dir.path(),
        "stretch.json",
        r#"{"points": ["a", "b", "c"], "distances": [[0, 1, 10], [1, 0, 10], [10, 10, 0]],
            "requests": [{"domain": ["a", "b"], "image": ["a", "c"]}]}"#,
    );
    let out = tmss(&["pipeline", &inst, "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extend_writes_certificates() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "line.json", LINE);
    let out_dir = dir.path().join("e");
    let out = tmss(&["extend", &inst, "--family", "swaps", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    assert_eq!(v["extension_size"], 8);
    assert_eq!(v["certified"], true);
    let cert: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["entries"].as_array().unwrap().len(), 6);
    let ext = fs::read_to_string(out_dir.join("extension.json")).unwrap();
    let out = tmss(&["validate", write(dir.path(), "ext.json", &ext).as_str()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(&out)["points"], 8);

    assert_eq!(tmss(&["extend", &inst, "--family", "all"]).status.code(), Some(1));
    let v = summary(&tmss(&["extend", "--family", "translations", "--k", "2", "--D", "2", "--weights", "1,3/2"]));
    assert_eq!(v["extension_size"], 16);
    assert_eq!(v["certified"], true);
    let v = summary(&tmss(&["extend", "--family", "translations", "--n", "6"]));
    assert_eq!(v["extension_size"], 10);
}

#[test]
fn extend_symmetric_tree_for_ultrametric() {
    let dir = TempDir::new().unwrap();
    let inst =
        write(dir.path(), "u.json", r#"{"points": ["a", "b", "c"], "distances": [[0, 1, 2], [1, 0, 2], [2, 2, 0]]}"#);
    let v = summary(&tmss(&["extend", &inst, "--family", "all", "--max-domain-size", "3"]));
    assert_eq!(v["extension_size"], 4);
    assert_eq!(v["certified"], true);
}

#[test]
fn ktaxi_from_file_and_random() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "taxi.json", TAXI);
    let out_dir = dir.path().join("k");
    let out = tmss(&["ktaxi", &inst, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = summary(&out);
    assert_summary_fields(&v);
    assert_eq!(v["torus_size"], 64);
    assert_eq!(v["rounds"], 3);
    let csv = fs::read_to_string(out_dir.join("steps.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("t,s,d,empty_cost,before,served_from,after\n"));

    let a = tmss(&["ktaxi", "--n", "3", "--k", "2", "--rounds", "12", "--seed", "9"]);
    let b = tmss(&["ktaxi", "--n", "3", "--k", "2", "--rounds", "12", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn embed_dominates() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "line.json", LINE);
    let out_dir = dir.path().join("m");
    let out = tmss(&["embed", &inst, "--seed", "3", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = summary(&out);
    assert_eq!(v["non_contracting"], true);
    assert!(v["max_stretch"].as_f64().unwrap() >= 1.0);
    assert_eq!(fs::read_to_string(out_dir.join("stretch.csv")).unwrap().lines().count(), 7);
}
