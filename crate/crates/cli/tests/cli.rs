use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flexnet::fixtures::{GRID3X3_JSON, TOY2X5_JSON};
use tempfile::TempDir;

fn flexnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn design_cost(path: &Path) -> f64 {
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    doc["total_cost_reported"].as_f64().unwrap()
}

#[test]
fn design_reports_toy_costs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.json", TOY2X5_JSON);
    let mut costs = Vec::new();
    for alg in ["optimal", "legacy"] {
        let out = dir.path().join(format!("{alg}.json"));
        let o = flexnet(&["design", s(&input), "--algorithm", alg, "--out", s(&out)]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        costs.push(design_cost(&out));
    }
    assert_eq!(costs[0], 6.0);
    assert!(costs[1] > 6.0, "legacy cost {}", costs[1]);
}

#[test]
fn empty_demand_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(TOY2X5_JSON).unwrap();
    doc["demands"] = serde_json::json!([]);
    let input = write(&dir, "empty.json", &doc.to_string());
    let out = dir.path().join("d.json");
    let o = flexnet(&["design", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(design_cost(&out), 0.0);
}

#[test]
fn design_to_stdout_is_valid_json() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.json", TOY2X5_JSON);
    let o = flexnet(&["design", s(&input), "--algorithm", "greedy"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["algorithm"], "greedy");
}

#[test]
fn transient_writes_one_row_per_scenario() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.json", TOY2X5_JSON);
    let design = dir.path().join("d.json");
    assert!(flexnet(&["design", s(&input), "--out", s(&design)])
        .status
        .success());
    let csv = dir.path().join("t.csv");
    let o = flexnet(&["transient", s(&input), s(&design), "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scenario_kind,scenario_id,offered,delivered,fraction"
    );
    assert_eq!(lines.len(), 14);
    assert!(lines[1].starts_with("no_failure,none,"));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("min fraction 0.0000"), "{stdout}");
    assert!(stdout.contains("median fraction"), "{stdout}");

    let o = flexnet(&["transient", s(&input), s(&design), "--max-concurrent"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 14);
}

#[test]
fn compare_orders_toy_costs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.json", TOY2X5_JSON);
    let csv = dir.path().join("c.csv");
    let o = flexnet(&["compare", s(&input), "--time-limit", "30", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let cost = |alg: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{alg},")))
            .unwrap();
        line.split(',').nth(4).unwrap().parse().unwrap()
    };
    assert!(cost("optimal") <= cost("greedy"));
    assert!(cost("greedy") <= cost("legacy"));
    assert!(cost("optimal") <= cost("simple"));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("regens") && table.contains("legacy"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{ \"ip_nodes\": [");
    assert_eq!(flexnet(&["design", s(&bad)]).status.code(), Some(2));
    let unknown = write(
        &dir,
        "unknown.json",
        &TOY2X5_JSON.replace("\"regen_dist\"", "\"regen_distance\""),
    );
    assert_eq!(flexnet(&["design", s(&unknown)]).status.code(), Some(2));
    assert_eq!(
        flexnet(&["design", s(&bad), "--algorithm", "best"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn infeasible_exits_3() {
    // one span between the two IP nodes: cutting it strands the demand
    let doc = r#"{
        "ip_nodes": ["A", "B"], "optical_nodes": [],
        "routers": [{ "id": "RA", "home": "A" }, { "id": "RB", "home": "B" }],
        "spans": [{ "u": "A", "v": "B", "miles": 100 }],
        "regen_dist": 1000,
        "demands": [{ "src": "A", "dst": "B", "units": 0.5 }],
        "costs": { "tail": 1, "regen": 1, "port": 1 }
    }"#;
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "cut.json", doc);
    let out = dir.path().join("d.json");
    let o = flexnet(&["design", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("A-B"));
    assert!(!out.exists());
}

#[test]
fn time_limit_without_incumbent_exits_4() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "grid.json", GRID3X3_JSON);
    let out = dir.path().join("d.json");
    let o = flexnet(&[
        "design",
        s(&input),
        "--time-limit",
        "0.000000001",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn missing_design_file_leaves_no_output() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.json", TOY2X5_JSON);
    let csv = dir.path().join("t.csv");
    let o = flexnet(&[
        "transient",
        s(&input),
        s(&dir.path().join("nope.json")),
        "--out",
        s(&csv),
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(!csv.exists());
}
