use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn rotor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_graph(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn fixture(dir: &TempDir, name: &str) -> String {
    let p = dir.path().join(name);
    let o = rotor(&["gen", "-o", p.to_str().unwrap(), "fixture", name]);
    assert!(o.status.success());
    p.to_str().unwrap().to_string()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn invariants_of_the_triangle() {
    let dir = TempDir::new().unwrap();
    let g4 = fixture(&dir, "G4");
    let o = rotor(&["invariants", &g4]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["per"], serde_json::json!(["1", "1", "1"]));
    assert_eq!(v["arborescences"], serde_json::json!(["3", "3", "3"]));
    assert_eq!(v["picard_order"], "3");
    assert_eq!(v["picard_invariant_factors"], serde_json::json!(["3"]));
    assert_eq!(v["orbit_length"], "6");
    assert_eq!(v["orbit_count"], "3");
}

#[test]
fn invariants_of_the_unbalanced_graph() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let v = json(&rotor(&["invariants", &g3]));
    assert_eq!(v["per"], serde_json::json!(["2", "1", "1"]));
    assert_eq!(v["arborescences"], serde_json::json!(["2", "1", "1"]));
    assert_eq!(v["pham_index"], "1");
    assert_eq!(v["orbit_length"], "5");
}

#[test]
fn invariants_output_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let a = rotor(&["invariants", &g3]);
    let b = rotor(&["invariants", &g3]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_until_return() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let o = rotor(&["simulate", &g3, "--chip", "0", "--rotors", "0,1,0", "--until-return"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("0 0 0,1,0\n"));
    assert!(out.contains("\n5 0 0,1,0\n"));
    assert!(out.contains("returned after 5 steps"));
    assert!(out.contains("visits [2, 2, 1]"));
}

#[test]
fn simulate_fixed_steps_on_a_cycle() {
    let dir = TempDir::new().unwrap();
    let g2 = fixture(&dir, "G2");
    let o = rotor(&["simulate", &g2, "--chip", "0", "--rotors", "0,0,0", "--steps", "3"]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines, ["0 0 0,0,0", "1 1 0,0,0", "2 2 0,0,0", "3 0 0,0,0"]);
}

#[test]
fn until_return_rejects_transient_start() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let o = rotor(&["simulate", &g3, "--chip", "2", "--rotors", "0,0,0", "--until-return"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("not a unicycle") && err.contains("recurrent"), "{err}");
}

#[test]
fn simulate_writes_dot() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let dot = dir.path().join("s.dot");
    let o = rotor(&[
        "simulate", &g3, "--chip", "0", "--rotors", "0,0,0", "--steps", "2", "--dot",
        dot.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("2 [shape=doublecircle]"));
}

#[test]
fn orbits_match_the_expected_count() {
    let dir = TempDir::new().unwrap();
    let g4 = fixture(&dir, "G4");
    let o = rotor(&["orbits", &g4]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("orbit ")).count(), 3);
    assert!(out.contains("orbits=3 expected=3"));
}

#[test]
fn verify_fixture_passes() {
    let dir = TempDir::new().unwrap();
    for name in ["G1", "G2", "G3", "G4"] {
        let g = fixture(&dir, name);
        let o = rotor(&["verify", &g]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains("0 failed"));
    }
}

#[test]
fn verify_random_corpus_echoes_seed() {
    let o = rotor(&["verify", "--random", "4", "20", "7", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["source"]["random"]["seed"], "7");
    assert_eq!(v["failed"], "0");
    let again = rotor(&["verify", "--random", "4", "20", "7", "--json"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn verify_reports_skip_when_capped() {
    let dir = TempDir::new().unwrap();
    let g4 = fixture(&dir, "G4");
    let o = rotor(&["--cap", "2", "verify", &g4]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("SKIP "));
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let bad = write_graph(&dir, "bad.txt", "n 3\n0: 1\n1: 2\n");
    let o = rotor(&["invariants", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let loop_graph = write_graph(&dir, "loop.txt", "n 2\n0: 0 1\n1: 0\n");
    assert_eq!(rotor(&["invariants", loop_graph.to_str().unwrap()]).status.code(), Some(2));
    let weak = write_graph(&dir, "weak.txt", "n 2\n0: 1\n1: 1\n");
    assert_eq!(rotor(&["orbits", weak.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(rotor(&["invariants", "/nonexistent/graph"]).status.code(), Some(2));
}

#[test]
fn divisor_queries() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let v = json(&rotor(&["divisor", &g3, "--divisor", "-1 1 0", "--root", "0", "--reduced"]));
    assert_eq!(v["reduced"], true);
    let v = json(&rotor(&["divisor", &g3, "--divisor", "1 -1 0", "--root", "0", "--reduced"]));
    assert_eq!(v["reduced"], false);
    let v = json(&rotor(&["divisor", &g3, "--divisor", "-1 1 0", "--equiv", "0 0 0"]));
    assert_eq!(v["equivalent"], true);
    assert!(v["witness"].is_array());

    let g4 = fixture(&dir, "G4");
    let v = json(&rotor(&["divisor", &g4, "--divisor", "1 -1 0", "--equiv", "0 0 0", "--canonical"]));
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["witness"], Value::Null);
    let zero = json(&rotor(&["divisor", &g4, "--divisor", "0 0 0", "--canonical"]));
    assert_ne!(v["canonical"], zero["canonical"]);
}

#[test]
fn divisor_length_mismatch_is_input_error() {
    let dir = TempDir::new().unwrap();
    let g3 = fixture(&dir, "G3");
    let o = rotor(&["divisor", &g3, "--divisor", "1 -1", "--canonical"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_output_round_trips_through_invariants() {
    let dir = TempDir::new().unwrap();
    let o = rotor(&["gen", "random", "5", "3", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# random n=5 extra=3 seed=11\n"));
    assert_eq!(text, stdout(&rotor(&["gen", "random", "5", "3", "11"])));
    let p = write_graph(&dir, "r.txt", &text);
    assert_eq!(rotor(&["verify", p.to_str().unwrap()]).status.code(), Some(0));

    let tri = stdout(&rotor(&["gen", "bidirected", "3", "0-1,1-2,2-0"]));
    let g4 = std::fs::read_to_string(fixture(&dir, "G4")).unwrap();
    assert_eq!(tri, g4);
    assert_eq!(stdout(&rotor(&["gen", "cycle", "3"])), std::fs::read_to_string(fixture(&dir, "G2")).unwrap());
}
