use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn gcmds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcmds"))
        .args(args)
        .env_remove("MDS_MEASURE_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const FOUR_POINT: &str = "0,1,1,1\n1,0,2,2\n1,2,0,2\n1,2,2,0\n";

#[test]
fn embed_reports_four_point_spectrum() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "x.csv", FOUR_POINT);
    let doc = json(&gcmds(&["embed", "--input", &input, "--k", "2"]));
    let ev: Vec<f64> = doc["eigenvalues"].as_array().unwrap().iter().map(f).collect();
    for (a, b) in ev.iter().zip([2.0, 2.0, 0.0, -0.25]) {
        assert!((a - b).abs() < 1e-9, "{ev:?}");
    }
    assert!((f(&doc["tr_neg"]) - 0.25).abs() < 1e-12);
    assert_eq!(doc["schoenberg"]["embeddable"], false);
    assert_eq!(doc["schema_version"], 1);
}

#[test]
fn embed_square_is_exact() {
    let dir = TempDir::new().unwrap();
    let r = 2f64.sqrt();
    let input = write(dir.path(), "sq.csv", &format!("0,1,{r},1\n1,0,1,{r}\n{r},1,0,1\n1,{r},1,0\n"));
    let out = dir.path().join("out");
    let o = gcmds(&["embed", "--input", &input, "--k", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(f(&doc["dis_k"]).powi(2) < 1e-14);
    assert_eq!(doc["schoenberg"]["embeddable"], true);
    let coords = fs::read_to_string(out.join("coords.csv")).unwrap();
    assert_eq!(coords.lines().count(), 4);
    assert!(out.join("spectrum.json").exists());
}

#[test]
fn embed_rejects_large_k() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "x.csv", FOUR_POINT);
    let o = gcmds(&["embed", "--input", &input, "--k", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the positive rank"));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let ragged = write(dir.path(), "r.csv", "0,1\n1\n");
    assert_eq!(gcmds(&["spectrum", "--input", &ragged]).status.code(), Some(2));
    let nonmetric = write(dir.path(), "t.csv", "0,1,5\n1,0,1\n5,1,0\n");
    let o = gcmds(&["spectrum", "--input", &nonmetric]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("triangle"));
    let missing = dir.path().join("nope.csv");
    assert_eq!(gcmds(&["spectrum", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(gcmds(&["oracle", "paley", "--q", "7"]).status.code(), Some(2));
    assert_eq!(gcmds(&["embed"]).status.code(), Some(2));
}

#[test]
fn oracle_sphere_starts_with_known_values() {
    let doc = json(&gcmds(&["oracle", "sphere", "--d", "3", "--max-order", "50"]));
    let e = doc["spectrum"]["entries"].as_array().unwrap();
    assert_eq!(e[1]["n"], 1);
    assert!((f(&e[1]["value"]) - PI * PI / 16.0).abs() < 1e-12);
    assert!((f(&e[2]["value"]) + 1.0 / 9.0).abs() < 1e-12);
    assert_eq!(e[1]["multiplicity"], 3);
    assert!(doc["summaries"]["pos_sum"].is_number());
    assert_eq!(doc["summaries"]["trace_norm_partials"].as_array().unwrap().len(), 51);
    assert!(doc["metric_identity_max_error"].is_number());
}

#[test]
fn oracle_circle_first_orders() {
    let doc = json(&gcmds(&["oracle", "circle", "--max-order", "3"]));
    let e = doc["spectrum"]["entries"].as_array().unwrap();
    let nonzero: Vec<(f64, u64)> = e
        .iter()
        .filter(|x| f(&x["value"]) != 0.0)
        .map(|x| (f(&x["value"]), x["multiplicity"].as_u64().unwrap()))
        .collect();
    let want = [1.0, -0.25, 1.0 / 9.0];
    assert_eq!(nonzero.len(), 3);
    for ((v, m), w) in nonzero.iter().zip(want) {
        assert!((v - w).abs() < 1e-15);
        assert_eq!(*m, 2);
    }
}

#[test]
fn oracle_polygon_hexagon() {
    let doc = json(&gcmds(&["oracle", "polygon", "--m", "1"]));
    let count: u64 = doc["spectrum"]["entries"].as_array().unwrap().iter().map(|x| x["multiplicity"].as_u64().unwrap()).sum();
    assert_eq!(count, 6);
    assert!((f(&doc["negative_trace"]) - 4.0 * PI * PI / 9.0).abs() < 1e-12);
}

#[test]
fn oracle_s2f_and_torus_run() {
    let doc = json(&gcmds(&["oracle", "s2f", "--profile", "sqrt-euclidean", "--max-order", "5"]));
    assert!((f(&doc["spectrum"]["entries"][1]["value"]) - 2.0 / 15.0).abs() < 1e-12);
    let doc = json(&gcmds(&["oracle", "torus", "--factors", "2", "--max-order", "3"]));
    assert_eq!(doc["factors"], 2);
}

#[test]
fn stability_identical_inputs_have_zero_gaps() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.csv", FOUR_POINT);
    let out = dir.path().join("o");
    let o = gcmds(&["stability", "--left", &x, "--right", &x, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("checks.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[1], "optimal_permutation");
    for cell in &row[2..8] {
        assert_eq!(cell.parse::<f64>().unwrap(), 0.0, "{csv}");
    }
}

#[test]
fn stability_random_pairs_hold() {
    let o = gcmds(&["stability", "--trials", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["holds_all"], true);
    assert_eq!(doc["rows"], 200);
    assert_eq!(doc["seed"], 7);
}

#[test]
fn stability_broken_projection_exits_4() {
    let o = gcmds(&["stability", "--trials", "10", "--projection", "double"]);
    assert_eq!(o.status.code(), Some(4));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["holds_all"], false);
    assert!(f(&doc["worst_slack"]) < 0.0);
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn consistency_circle_grid_gaps_shrink() {
    let o = gcmds(&["consistency", "--target", "circle-grid", "--sizes", "22,46,94", "--orders", "3"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let n = column(&csv, "n");
    let gap = column(&csv, "rel_gap");
    for order in 0..3 {
        let g: Vec<f64> = (0..3).map(|s| gap[3 * s + order].parse().unwrap()).collect();
        assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    }
    assert_eq!(n[0], "22");
}

#[test]
fn consistency_sphere_has_metric_column() {
    let o = gcmds(&["consistency", "--target", "sphere", "--d", "3", "--sizes", "60", "--seed", "3", "--orders", "2"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("# seed=3\n"));
    let med = column(&csv, "median_metric_error");
    assert!(med.iter().all(|m| m.parse::<f64>().is_ok()));
}

#[test]
fn consistency_without_sizes_exits_2() {
    assert_eq!(gcmds(&["consistency", "--target", "circle"]).status.code(), Some(2));
    assert_eq!(gcmds(&["consistency", "--target", "circle", "--sizes", "10,5"]).status.code(), Some(2));
}

#[test]
fn sample_round_trips_through_spectrum() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s");
    assert!(gcmds(&["sample", "--out", out.to_str().unwrap(), "polygon", "--n", "6"]).status.success());
    let dist = out.join("dist.csv");
    let doc = json(&gcmds(&["spectrum", "--input", dist.to_str().unwrap()]));
    assert!((f(&doc["negative_trace"]) - 4.0 * PI * PI / 9.0).abs() < 1e-9);
}

#[test]
fn graph_product_and_thickness() {
    let dir = TempDir::new().unwrap();
    let edges = write(dir.path(), "g.txt", "# path\n0 1 1\n1 2 2\n");
    let o = gcmds(&["graph", "--input", &edges]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next().unwrap().split(',').nth(2).unwrap().parse::<f64>().unwrap(), 3.0);

    let x = write(dir.path(), "x.csv", "0,1\n1,0\n");
    let o = gcmds(&["product", "--left", &x, "--right", &x]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let last: f64 = csv.lines().next().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((last - 2f64.sqrt()).abs() < 1e-15);

    let pts = write(dir.path(), "p.csv", "-2,0\n2,0\n0,-1\n0,1\n");
    let doc = json(&gcmds(&["thickness", "--input", &pts, "--k", "1"]));
    assert!((f(&doc["thickness"]) - 0.5f64.sqrt()).abs() < 1e-12);
    let cov: Vec<f64> = doc["covariance_eigenvalues"].as_array().unwrap().iter().map(f).collect();
    assert!((cov[0] - 2.0).abs() < 1e-12 && (cov[1] - 0.5).abs() < 1e-12);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let runs: Vec<Vec<String>> = (0..2)
        .map(|r| {
            let out = dir.path().join(format!("run{r}"));
            let out = out.to_str().unwrap();
            assert!(gcmds(&["sample", "--out", out, "sphere", "--d", "3", "--n", "30", "--seed", "11"]).status.success());
            let dist = format!("{out}/dist.csv");
            let emb = format!("{out}/emb");
            assert!(gcmds(&["embed", "--input", &dist, "--k", "3", "--mode", "measure", "--out", &emb]).status.success());
            let threads = if r == 0 { "1" } else { "3" };
            let st = format!("{out}/st");
            assert!(gcmds(&["--threads", threads, "stability", "--left", &dist, "--right", &dist, "--strategy", "product", "--out", &st]).status.success());
            ["dist.csv", "weights.csv", "meta.json", "emb/report.json", "emb/coords.csv", "st/checks.csv", "st/summary.json"]
                .iter()
                .map(|f| fs::read_to_string(format!("{out}/{f}")).unwrap())
                .collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(runs[0][0].starts_with("# seed=11\n"));
    assert!(runs[0][2].contains("\"seed\": 11"));
}

#[test]
fn thread_env_var_is_honoured() {
    let a = Command::new(env!("CARGO_BIN_EXE_gcmds")).args(["stability", "--trials", "3"]).env("MDS_MEASURE_THREADS", "2").output().unwrap();
    let b = gcmds(&["stability", "--trials", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_gcmds")).args(["stability", "--trials", "3"]).env("MDS_MEASURE_THREADS", "x").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
