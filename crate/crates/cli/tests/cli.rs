use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const DIAMOND: &str = r#"{"id":"diamond","elements":["⊥","a","b","⊤"],
  "le":[["⊥","a"],["⊥","b"],["a","⊤"],["b","⊤"]]}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: TempDir::new().unwrap(),
        };
        ws.write("diamond.json", DIAMOND);
        ws.write("single.json", r#"{"elements":["x"]}"#);
        ws
    }

    fn write(&self, name: &str, body: &str) -> &Self {
        fs::write(self.dir.path().join(name), body).unwrap();
        self
    }

    fn valuation(&self, name: &str, mass: Value) -> &Self {
        self.write(name, &json!({ "space": "diamond.json", "mass": mass }).to_string())
    }

    fn run(&self, args: &[&str]) -> (i32, Value) {
        run_in(self.dir.path(), args)
    }
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_powerspace"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let body = serde_json::from_str(text.trim()).unwrap_or(Value::Null);
    (out.status.code().unwrap(), body)
}

#[test]
fn check_space_reports_counts() {
    let ws = Workspace::new();
    let (code, body) = ws.run(&["check-space", "diamond.json"]);
    assert_eq!(code, 0);
    assert_eq!(body["elements"], 4);
    assert_eq!(body["upper_sets"], 6);
    assert_eq!(body["closed_under_union_and_intersection"], true);
    assert_eq!(body["hasse_edges"].as_array().unwrap().len(), 4);

    let (code, body) = ws.run(&["check-space", "single.json"]);
    assert_eq!((code, &body["elements"], &body["upper_sets"]), (0, &json!(1), &json!(2)));
}

#[test]
fn check_space_errors() {
    let ws = Workspace::new();
    ws.write("cycle.json", r#"{"elements":["x","y"],"le":[["x","y"],["y","x"]]}"#);
    let (code, body) = ws.run(&["check-space", "cycle.json"]);
    assert_eq!((code, &body["error"]), (2, &json!("CycleError")));

    let (code, body) = ws.run(&["check-space", "missing.json"]);
    assert_eq!((code, &body["error"]), (2, &json!("DocumentError")));
    ws.write("bad.json", "{");
    assert_eq!(ws.run(&["check-space", "bad.json"]).0, 2);
}

#[test]
fn enum_cap_from_environment() {
    let ws = Workspace::new();
    let out = Command::new(env!("CARGO_BIN_EXE_powerspace"))
        .args(["check-space", "diamond.json"])
        .env("POWERSPACE_ENUM_CAP", "3")
        .current_dir(ws.dir.path())
        .output()
        .unwrap();
    let body: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(body["upper_sets"], Value::Null);
}

#[test]
fn order_verdicts_and_exit_codes() {
    let ws = Workspace::new();
    ws.valuation("half.json", json!({ "a": "1/2", "b": "1/2" }))
        .valuation("top.json", json!({ "⊤": "1" }));
    ws.write("x.json", r#"{"space":"single.json","mass":{"x":"1"}}"#);

    let (code, body) = ws.run(&["order", "half.json", "top.json"]);
    assert_eq!(code, 0);
    assert_eq!(body, json!({ "verdict": true, "witness": { "a⇒⊤": "1/2", "b⇒⊤": "1/2" } }));

    let (code, body) = ws.run(&["order", "top.json", "top.json", "--relation", "llcurly"]);
    assert_eq!(code, 1);
    assert_eq!(body, json!({ "verdict": false, "hall_subset": ["⊤"] }));

    let (code, body) = ws.run(&["order", "top.json", "half.json"]);
    assert_eq!(code, 1);
    assert_eq!(body["separating_upper_set"], json!(["⊤"]));

    let (code, body) = ws.run(&["order", "half.json", "x.json"]);
    assert_eq!((code, &body["error"]), (2, &json!("SpaceMismatch")));

    assert_eq!(ws.run(&["order", "half.json", "top.json", "--relation", "nope"]).0, 2);
}

#[test]
fn order_accepts_inline_spaces() {
    let ws = Workspace::new();
    let inline = format!(r#"{{"space":{DIAMOND},"mass":{{"⊥":"1/2"}}}}"#);
    ws.write("inline.json", &inline).valuation("top.json", json!({ "⊤": "1" }));
    let (code, body) = ws.run(&["order", "inline.json", "top.json", "--relation", "prec"]);
    assert_eq!((code, &body["verdict"]), (0, &json!(true)));
}

#[test]
fn extend_into_rationals_and_posets() {
    let ws = Workspace::new();
    ws.valuation("half.json", json!({ "a": "1/2", "b": "1/2" }))
        .valuation("a.json", json!({ "a": "1" }))
        .valuation("zero.json", json!({}));
    ws.write(
        "f.json",
        r#"{"source":"diamond.json","target":"rational-cone","graph":{"⊥":"0","a":"1","b":"2","⊤":"3"}}"#,
    );
    assert_eq!(ws.run(&["extend", "f.json", "half.json"]), (0, json!("3/2")));
    assert_eq!(ws.run(&["extend", "f.json", "a.json"]), (0, json!("1")));
    assert_eq!(ws.run(&["extend", "f.json", "zero.json"]), (0, json!("0")));

    ws.write("two.json", r#"{"elements":["lo","hi"],"le":[["lo","hi"]]}"#);
    ws.write(
        "g.json",
        r#"{"source":"diamond.json","target":"two.json","graph":{"⊥":"lo","a":"hi","b":"hi","⊤":"hi"}}"#,
    );
    assert_eq!(ws.run(&["extend", "g.json", "half.json"]), (0, json!({ "mass": { "hi": "1" } })));

    ws.write(
        "bad.json",
        r#"{"source":"diamond.json","target":"rational-cone","graph":{"⊥":"1","a":"0","b":"2","⊤":"3"}}"#,
    );
    let (code, body) = ws.run(&["extend", "bad.json", "half.json"]);
    assert_eq!((code, &body["error"]), (2, &json!("NonMonotoneMap")));
}

#[test]
fn converge_decisions() {
    let ws = Workspace::new();
    ws.valuation("a.json", json!({ "a": "1" })).valuation("top.json", json!({ "⊤": "1" }));
    ws.write("up.json", r#"{"space":"diamond.json","members":[{"⊤":"1"}]}"#);
    ws.write("half.json", r#"{"space":"diamond.json","members":[{"⊤":"1/2"}]}"#);
    ws.write("self.json", r#"{"space":"diamond.json","members":[{"a":"1"}]}"#);
    ws.write("split.json", r#"{"space":"diamond.json","members":[{"a":"1"},{"b":"1"}]}"#);

    assert_eq!(ws.run(&["converge", "up.json", "a.json"]), (0, json!({ "verdict": true, "assignment": { "a": "⊤" } })));
    let (code, body) = ws.run(&["converge", "half.json", "top.json"]);
    assert_eq!(code, 1);
    assert_eq!(body["obstruction"], json!({ "upper_set": ["⊤"], "required": "1", "available": "1/2" }));
    assert_eq!(ws.run(&["converge", "self.json", "a.json"]).0, 0);
    let (code, body) = ws.run(&["converge", "split.json", "a.json"]);
    assert_eq!((code, &body["error"]), (2, &json!("NotDirected")));
}

#[test]
fn denote_programs() {
    let ws = Workspace::new();
    ws.write("choice.txt", "choice 1/2 (ret a) (ret b)\n");
    ws.write("ret.txt", "ret a");
    ws.write("bad.txt", "bind (ret a) {a -> ret ⊥, ⊥ -> ret ⊤}");
    ws.write("typo.txt", "choice 2 (ret a) (ret b)");
    ws.write("unknown.txt", "ret z");
    assert_eq!(
        ws.run(&["denote", "choice.txt", "diamond.json"]),
        (0, json!({ "mass": { "a": "1/2", "b": "1/2" } }))
    );
    assert_eq!(ws.run(&["denote", "ret.txt", "diamond.json"]), (0, json!({ "mass": { "a": "1" } })));
    for (file, kind) in [("bad.txt", "NonMonotoneBinder"), ("typo.txt", "SyntaxError"), ("unknown.txt", "UnknownState")] {
        let (code, body) = ws.run(&["denote", file, "diamond.json"]);
        assert_eq!((code, &body["error"]), (2, &json!(kind)), "{file}");
    }
}

#[test]
fn proptest_runs() {
    let ws = Workspace::new();
    let (code, body) = ws.run(&["proptest", "--suite", "cone", "--seed", "7", "--cases", "200"]);
    assert_eq!(code, 0);
    assert_eq!(body["passed"], true);
    assert_eq!(body["suites"][0]["cases"], 200);

    let (code, body) = ws.run(&["proptest", "--suite", "all", "--cases", "0"]);
    assert_eq!((code, &body["passed"]), (0, &json!(true)));
    assert_eq!(body["suites"].as_array().unwrap().len(), 6);

    let (code, body) =
        ws.run(&["proptest", "--suite", "order", "--exhaustive", "--max-elements", "4", "--cases", "3"]);
    assert_eq!(code, 0);
    assert_eq!(body["suites"][0]["cases"], 3 * (1 + 2 + 5 + 16));

    let (code, body) = ws.run(&["proptest", "--suite", "bogus"]);
    assert_eq!((code, &body["error"]), (2, &json!("UnknownSuite")));
}

#[test]
fn proptest_is_deterministic() {
    let ws = Workspace::new();
    let args = ["proptest", "--suite", "all", "--seed", "42", "--cases", "20"];
    let first = ws.run(&args);
    assert_eq!(first.0, 0);
    assert_eq!(first, ws.run(&args));
}

#[test]
fn emitted_json_round_trips() {
    use powerspace_core::json::{ConvergenceDoc, DecisionDoc};

    let ws = Workspace::new();
    ws.valuation("half.json", json!({ "a": "1/2", "b": "1/2" }))
        .valuation("top.json", json!({ "⊤": "1" }));
    ws.write("up.json", r#"{"space":"diamond.json","members":[{"⊤":"1/2"}]}"#);
    for args in [
        ["order", "half.json", "top.json"],
        ["order", "top.json", "half.json"],
        ["order", "top.json", "top.json"],
    ] {
        let (_, body) = ws.run(&args);
        let doc: DecisionDoc = serde_json::from_value(body.clone()).unwrap();
        assert_eq!(serde_json::to_value(doc).unwrap(), body);
    }
    let (_, body) = ws.run(&["converge", "up.json", "top.json"]);
    let doc: ConvergenceDoc = serde_json::from_value(body.clone()).unwrap();
    assert_eq!(serde_json::to_value(doc).unwrap(), body);
}
