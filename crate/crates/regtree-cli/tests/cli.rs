use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn regtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regtree")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn unfold_eq_on_identical_files_exits_zero() {
    let a = scratch("same.txt", "a2(x1, a2(b, x2))");
    let out = regtree(&["decide", "unfold-eq", "--lhs", &a, "--rhs", &a]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "regtree.report/1");
    assert_eq!(r["verdict"], true);
}

#[test]
fn different_systems_exit_one_with_a_witness() {
    let a = scratch("a.txt", "a1(c0)");
    let b = scratch("b.txt", "a1(b1(c0))");
    let w = scratch("w.json", "");
    let out = regtree(&["decide", "unfold-eq", "--lhs", &a, "--rhs", &b, "--witness", &w]);
    assert_eq!(out.status.code(), Some(1));
    let witness: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert!(witness["path"].is_array());
}

#[test]
fn corpus_is_deterministic() {
    let args = ["corpus", "--seed", "7", "--count", "100"];
    let first = regtree(&args);
    let second = regtree(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let serial = Command::new(env!("CARGO_BIN_EXE_regtree")).args(args).env("REGTREE_WORKERS", "1").output().unwrap();
    assert_eq!(first.stdout, serial.stdout);
    let other = regtree(&["corpus", "--seed", "8", "--count", "100"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn malformed_input_exits_two_with_location() {
    let bad = scratch("bad.json", "{\"rank\": 0,\n \"vertices\": [\n");
    let out = regtree(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");

    let expr = scratch("bad.txt", "a2(x1,");
    assert_eq!(regtree(&["validate", &expr]).status.code(), Some(2));
}

#[test]
fn bad_worker_setting_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_regtree")).args(["corpus", "--count", "3"]).env("REGTREE_WORKERS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_examples_pass() {
    let out = regtree(&["suite", "--examples"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert!(r["result"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn bisimilar_transition_systems() {
    let two_cycle = scratch("cycle.json", r#"{"states":[{"id":"s"},{"id":"t"}],"initial":"s","transitions":[["s","t"],["t","s"]]}"#);
    let this_loop = scratch("loop.json", r#"{"states":[{"id":"u"}],"initial":"u","transitions":[["u","u"]]}"#);
    let dead = scratch("dead.json", r#"{"states":[{"id":"u"}],"initial":"u","transitions":[]}"#);
    assert_eq!(regtree(&["decide", "bisim", "--lhs", &two_cycle, "--rhs", &this_loop]).status.code(), Some(0));
    assert_eq!(regtree(&["decide", "bisim", "--lhs", &two_cycle, "--rhs", &dead]).status.code(), Some(1));
}

#[test]
fn automaton_membership_batch() {
    let good = scratch("good.txt", "a2(a1(c0), c0)");
    let bad = scratch("badleaf.txt", "a2(a1(c0), b1(c0))");
    let out = regtree(&["aut", "accept", "--automaton", "avoid", &good, &bad]);
    assert_eq!(out.status.code(), Some(1));
    let items = report(&out)["result"].clone();
    assert_eq!(items[0]["accepted"], true);
    assert_eq!(items[1]["accepted"], false);
    assert_eq!(regtree(&["aut", "accept", "--automaton", "avoid", &good]).status.code(), Some(0));
}

#[test]
fn emitted_formula_matches_golden_file() {
    let out = regtree(&["--raw", "aut", "emit-formula", "--automaton", "avoid-ts"]);
    assert_eq!(out.status.code(), Some(0));
    let lines: Vec<String> = serde_json::from_slice(&out.stdout).unwrap();
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../regtree/tests/golden/avoid_ts_formula.txt")).unwrap();
    assert_eq!(lines, golden.lines().collect::<Vec<_>>());
}

#[test]
fn plug_then_resolve() {
    let c = scratch("ctx.txt", "hole(b + c)");
    let s = scratch("s.txt", "a2(x1, x1)");
    let plugged = regtree(&["--raw", "plug", "--context", &c, "--system", &s]);
    assert_eq!(plugged.status.code(), Some(0));
    let cs = scratch("cs.json", &String::from_utf8(plugged.stdout).unwrap());
    let out = regtree(&["yields", &cs, "--memory", "0"]);
    assert_eq!(report(&out)["result"]["init"].as_array().unwrap().len(), 4);
}

#[test]
fn morphism_check_and_find() {
    let two = scratch(
        "two.json",
        r#"{"rank":0,"vertices":[{"id":"p","label":"a1","initial":true},{"id":"q","label":"a1"}],"edges":[{"src":"p","dir":1,"dst":"q"},{"src":"q","dir":1,"dst":"p"}]}"#,
    );
    let one = scratch("one.json", r#"{"rank":0,"vertices":[{"id":"f","label":"a1","initial":true}],"edges":[{"src":"f","dir":1,"dst":"f"}]}"#);
    let out = regtree(&["morphism", "check", "--lhs", &two, "--rhs", &one, "--map", "f,f"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(regtree(&["morphism", "find", "--lhs", &one, "--rhs", &two]).status.code(), Some(1));
    assert_eq!(regtree(&["morphism", "check", "--lhs", &two, "--rhs", &one, "--map", "f,g"]).status.code(), Some(2));
}

#[test]
fn delta_in_rank_one_is_the_letter() {
    let out = regtree(&["ya", "delta", "--presentation", "avoid", "--letter", "a1", "--context", "ok,ok"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["delta"], "(ok)/1");
}
