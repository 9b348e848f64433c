use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-bc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn path_graph(dir: &TempDir, n: usize) -> PathBuf {
    let body: String = (0..n - 1).map(|v| format!("{v} {}\n", v + 1)).collect();
    write(dir, &format!("p{n}.txt"), &body)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn compute(graph: &Path, out: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["compute", "--graph", s(graph), "--out", s(out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap()
}

fn bc(report: &Value) -> Vec<f64> {
    report["bc"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn events(report: &Value) -> u64 {
    let t = &report["comm_totals"];
    t["forward_events"].as_u64().unwrap() + t["backward_events"].as_u64().unwrap()
}

#[test]
fn compute_path_of_four() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let out = dir.path().join("r.json");
    let r = compute(&g, &out, &["--sources", "4", "--mode", "hybir"]);
    assert_eq!(bc(&r), vec![0.0, 4.0, 4.0, 0.0]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["graph_stats"]["n"], 4);
    assert_eq!(r["per_source"].as_array().unwrap().len(), 4);
    assert_eq!(r["per_source"][0]["forward"]["iterations"], 1);
    let top: Vec<u64> = r["bc_top_k"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["vertex"].as_u64().unwrap())
        .collect();
    assert_eq!(top, vec![1, 2, 0, 3]);
    assert!(r["timing"]["mteps"].is_number());
}

#[test]
fn bsp_matches_with_more_communication() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let h = compute(&g, &dir.path().join("h.json"), &["--sources", "4"]);
    let b = compute(&g, &dir.path().join("b.json"), &["--sources", "4", "--mode", "bsp"]);
    assert_eq!(bc(&h), bc(&b));
    assert_eq!(b["mode"], "bsp");
    assert!(events(&b) > events(&h));
}

#[test]
fn summary_line_reports_mteps_and_comm() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let o = run(&["compute", "--graph", s(&g), "--sources", "2", "--top-k", "1"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let mut lines = stdout.lines();
    let summary = lines.next().unwrap();
    assert!(summary.contains("mteps=") && summary.contains("comm_events="));
    assert_eq!(lines.count(), 1);
}

#[test]
fn missing_file_is_an_input_error() {
    let o = run(&["compute", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/graph.txt"));
}

#[test]
fn malformed_graph_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bad.txt", "0 1\n1 x\n");
    let o = run(&["compute", "--graph", s(&g)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let body: String = (0..30)
        .flat_map(|v| [format!("{v} {}\n", (v + 1) % 30), format!("{v} {}\n", (v * 7 + 3) % 30)])
        .filter(|l| {
            let mut it = l.split_whitespace();
            it.next() != it.next()
        })
        .collect();
    let g = write(&dir, "g.txt", &body);
    let args = ["--sources", "7", "--seed", "42", "--ratio", "0.6"];
    let mut a = compute(&g, &dir.path().join("a.json"), &args);
    let mut b = compute(&g, &dir.path().join("b.json"), &args);
    for r in [&mut a, &mut b] {
        let obj = r.as_object_mut().unwrap();
        obj.remove("generated_at");
        obj.remove("timing");
    }
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn csv_has_a_row_per_source_and_totals() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let csv = dir.path().join("r.csv");
    let o = run(&["compute", "--graph", s(&g), "--sources", "4", "--csv", s(&csv)]);
    assert!(o.status.success());
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("source,"));
    assert!(lines[5].starts_with("total,,,,12,"));
}

#[test]
fn partition_file_is_honoured() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let part = write(&dir, "p.txt", "0\n1\n1\n1\n");
    let r = compute(
        &g,
        &dir.path().join("r.json"),
        &["--sources", "4", "--partition-file", s(&part)],
    );
    assert_eq!(r["partition_stats"]["sizes"], serde_json::json!([1, 3]));
    assert_eq!(bc(&r), vec![0.0, 4.0, 4.0, 0.0]);
}

#[test]
fn estimate_mem_prints_both_layouts() {
    let o = run(&["estimate-mem", "--n", "27093600", "--m", "514179537", "--b", "40", "--elem-bytes", "4"]);
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("unpartitioned: 2165092548 elems"));
    assert!(out.contains("hybrid: 1082548034 elems"));

    let out = String::from_utf8(run(&["estimate-mem", "--n", "4", "--m", "3", "--b", "1"]).stdout).unwrap();
    assert!(out.contains("unpartitioned: 28 elems, 112 bytes"));
    assert!(out.contains("hybrid: 19 elems, 76 bytes"));

    let out = String::from_utf8(run(&["estimate-mem", "--n", "0", "--m", "0", "--b", "0"]).stdout).unwrap();
    assert!(out.contains("unpartitioned: 0 elems") && out.contains("hybrid: 0 elems"));
}

#[test]
fn compare_diamond_has_no_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "d.txt", "0 1\n0 2\n1 3\n2 3\n");
    let o = run(&["compare", "--graph", s(&g), "--sources", "4"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.matches("max_bc_error=0e0 ok").count(), 2);
}

#[test]
fn compare_path_shows_superstep_gap() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 64);
    let o = run(&["compare", "--graph", s(&g), "--sources", "1", "--seed", "3"]);
    assert!(o.status.success());
    let out = String::from_utf8(o.stdout).unwrap();
    let field = |line: &str, key: &str| -> f64 {
        let tail = &line[line.find(key).unwrap() + key.len()..];
        tail.split_whitespace().next().unwrap().parse().unwrap()
    };
    let hy = out.lines().find(|l| l.starts_with("hybir")).unwrap();
    let bsp = out.lines().find(|l| l.starts_with("bsp")).unwrap();
    assert!(field(hy, "forward_events=") <= 3.0);
    assert!(field(bsp, "forward_events=") >= 2.0 * 32.0);
}

#[test]
fn compare_empty_graph_exits_two() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "empty.txt", "");
    assert_eq!(run(&["compare", "--graph", s(&g)]).status.code(), Some(2));
}

#[test]
fn stats_prints_json() {
    let dir = TempDir::new().unwrap();
    let g = path_graph(&dir, 4);
    let o = run(&["stats", "--graph", s(&g)]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 3);
    assert_eq!(v["max_degree"], 2);
}

#[test]
fn dimacs_input() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "g.gr", "c tiny\np sp 4 6\na 1 2 1\na 2 1 1\na 2 3 1\na 3 2 1\na 3 4 1\na 4 3 1\n");
    let r = compute(&g, &dir.path().join("r.json"), &["--format", "dimacs", "--sources", "4"]);
    assert_eq!(bc(&r), vec![0.0, 4.0, 4.0, 0.0]);
}
