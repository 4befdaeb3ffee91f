use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const T0: &str = "symbol l 2\nsymbol r 2\nsymbol m 2\naxiom [2] l(x1,x2) = r(x2,x1)\n";
const COMM: &str = "alphabet a b\nrel ab = ba\ngoal ab = ba\n";

fn run(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_rigidlab"))
        .current_dir(dir)
        .env_remove("RIGIDLAB_NODE_BUDGET")
        .args(args)
        .output()
        .expect("binary runs");
    let code = out.status.code().expect("exit code");
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, doc)
}

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("t0.thy"), T0).unwrap();
    fs::write(dir.path().join("comm.wp"), COMM).unwrap();
    dir
}

#[test]
fn prove_axiom_instance() {
    let dir = workspace();
    let (code, doc) = run(dir.path(), &["prove", "t0.thy", "[2] l(x1,x2) = r(x2,x1)", "--depth", "1"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"], "proved");
    assert_eq!(doc["derivation"]["steps"].as_array().unwrap().len(), 1);
    assert_eq!(doc["bounds"]["depth"], 1);
}

#[test]
fn prove_certified_negative() {
    let dir = workspace();
    let (code, doc) = run(dir.path(), &["prove", "t0.thy", "[2] l(x1,x2) = r(x1,x2)", "--depth", "10"]);
    assert_eq!(code, 1);
    assert_eq!(doc["reason"], "frontier_exhausted");
    assert_eq!(doc["certified_unprovable"], true);
}

#[test]
fn prove_indeterminate_on_tiny_budget() {
    let dir = workspace();
    fs::write(dir.path().join("inv.thy"), "symbol g 1\nsymbol h 1\naxiom [1] g(x1) = g(g(x1))\n").unwrap();
    let (code, doc) = run(dir.path(), &["prove", "inv.thy", "[1] g(x1) = h(x1)", "--depth", "3"]);
    assert_eq!(code, 2);
    assert_eq!(doc["result"], "not_found");
}

#[test]
fn node_budget_from_environment() {
    let dir = workspace();
    fs::write(dir.path().join("inv.thy"), "symbol g 1\nsymbol h 1\naxiom [1] g(x1) = g(g(x1))\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rigidlab"))
        .current_dir(dir.path())
        .env("RIGIDLAB_NODE_BUDGET", "2")
        .args(["prove", "inv.thy", "[1] g(x1) = h(x1)", "--depth", "50"])
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["bounds"]["node_budget"], 2);
    assert_eq!(doc["reason"], "budget_exhausted");
}

#[test]
fn malformed_input_exits_3() {
    let dir = workspace();
    let (code, doc) = run(dir.path(), &["prove", "t0.thy", "[2] l(x1,x2 = r(x2,x1)"]);
    assert_eq!(code, 3);
    assert_eq!(doc, Value::Null);
    let (code, _) = run(dir.path(), &["prove", "missing.thy", "[1] x1 = x1"]);
    assert_eq!(code, 3);
    let (code, _) = run(dir.path(), &["frobnicate"]);
    assert_eq!(code, 3);
}

#[test]
fn proofs_replay_and_census() {
    let dir = workspace();
    let (_, doc) = run(dir.path(), &["prove", "t0.thy", "[3] m(l(x1,x2),x3) = m(r(x2,x1),x3)"]);
    fs::write(dir.path().join("d.json"), doc["derivation"].to_string()).unwrap();
    let (code, doc) = run(dir.path(), &["replay", "t0.thy", "d.json"]);
    assert_eq!(code, 0);
    assert_eq!(doc["valid"], true);
    let (code, doc) = run(dir.path(), &["census", "t0.thy", "d.json", "m"]);
    assert_eq!(code, 0);
    assert_eq!(doc["counts"], serde_json::json!([1, 1]));
    assert_eq!(doc["constant"], true);

    let mut tampered: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    tampered["end"] = Value::from("m(r(x1,x2),x3)");
    fs::write(dir.path().join("bad.json"), tampered.to_string()).unwrap();
    let (code, doc) = run(dir.path(), &["replay", "t0.thy", "bad.json"]);
    assert_eq!(code, 1);
    assert_eq!(doc["valid"], false);
}

#[test]
fn reduce_writes_parsable_files() {
    let dir = workspace();
    let (code, doc) = run(dir.path(), &["reduce", "comm.wp", "--out-dir", "out"]);
    assert_eq!(code, 0);
    assert_eq!(doc["axioms"], 2);
    let thy = fs::read_to_string(dir.path().join("out/comm.thy")).unwrap();
    let th = rigidlab::Theory::parse(&thy).unwrap();
    let inst = rigidlab::WordProblemInstance::parse(COMM).unwrap();
    assert_eq!(th, rigidlab::compile_reduction(&inst));
    let itp = rigidlab::load_interpretation(&dir.path().join("out/comm.itp")).unwrap();
    assert_eq!(itp.assignment().count(), 3);
    assert_eq!(itp, rigidlab::build_interpretation(&inst));
    let t0 = rigidlab::Theory::parse(&fs::read_to_string(dir.path().join("out/t0.thy")).unwrap()).unwrap();
    assert_eq!(t0, rigidlab::build_t0());
}

#[test]
fn reduce_without_relations() {
    let dir = workspace();
    fs::write(dir.path().join("free.wp"), "alphabet a b\ngoal a = b\n").unwrap();
    let (code, doc) = run(dir.path(), &["reduce", "free.wp"]);
    assert_eq!(code, 0);
    assert_eq!(doc["axioms"], 1);
}

#[test]
fn rigidity_search_outcomes() {
    let dir = workspace();
    run(dir.path(), &["reduce", "comm.wp"]);
    let (code, doc) = run(
        dir.path(),
        &["rigidity", "search", "comm.thy", "--max-size", "7", "--max-context", "2"],
    );
    assert_eq!(code, 0);
    assert_eq!(doc["result"], "flabby");
    assert_eq!(doc["report"]["term"], "m(a(b(alpha(x1))),x2)");
    fs::write(dir.path().join("w.json"), doc["report"]["derivation"].to_string()).unwrap();
    let (code, _) = run(dir.path(), &["replay", "comm.thy", "w.json"]);
    assert_eq!(code, 0);

    let (code, doc) = run(
        dir.path(),
        &["--jobs", "2", "rigidity", "search", "t0.thy", "--max-size", "5", "--max-context", "3"],
    );
    assert_eq!(code, 1);
    assert_eq!(doc["result"], "exhausted");
    assert_eq!(doc["certificate"]["cap_hit"], false);
}

#[test]
fn word_queries() {
    let dir = workspace();
    fs::write(dir.path().join("free.wp"), "alphabet a b\ngoal a = b\n").unwrap();
    let (code, doc) = run(dir.path(), &["word", "free.wp", "a", "b"]);
    assert_eq!(code, 1);
    assert_eq!(doc["answer"], "not_derivable");
    let (code, doc) = run(dir.path(), &["word", "comm.wp", "abb", "bba", "--direct"]);
    assert_eq!(code, 0);
    assert_eq!(doc["derivation"]["steps"].as_array().unwrap().len(), 2);
    let (code, _) = run(dir.path(), &["word", "comm.wp", "ab", "ac"]);
    assert_eq!(code, 3);
}

#[test]
fn hat_reports_preimage_and_certificates() {
    let dir = workspace();
    let (code, doc) = run(dir.path(), &["hat", "comm.wp", "m(b(a(alpha(x1))),a(x2))"]);
    assert_eq!(code, 0);
    assert_eq!(doc["hat"], "[2] m(a(b(alpha(x1))),x2)");
    assert_eq!(doc["preimage"], "[2] l(x1,x2)");
    assert_eq!(doc["decisions"][0]["queries"][0]["outcome"]["answer"], "derivable");
    let (code, doc) = run(dir.path(), &["hat", "comm.wp", "m(b(alpha(x1)),x2)", "--depth", "0"]);
    assert_eq!(code, 2);
    assert_eq!(doc["warnings"], 1);
}

#[test]
fn conservativity_probe() {
    let dir = workspace();
    run(dir.path(), &["reduce", "comm.wp"]);
    let (code, doc) = run(dir.path(), &["conservativity", "comm.itp", "--max-size", "3", "--depth", "4"]);
    assert_eq!(code, 1);
    assert_eq!(doc["confirmed"][0]["lhs"], "l(x1,x2)");
    assert_eq!(doc["confirmed"][0]["rhs"], "r(x1,x2)");

    fs::write(dir.path().join("free.wp"), "alphabet a b\ngoal a = b\n").unwrap();
    run(dir.path(), &["reduce", "free.wp"]);
    let (code, doc) = run(dir.path(), &["conservativity", "free.itp", "--max-size", "3", "--depth", "4"]);
    assert_eq!(code, 0);
    assert!(doc["confirmed"].as_array().unwrap().is_empty());
}
