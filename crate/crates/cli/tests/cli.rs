use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtl_core::corpus::{random_global, random_word, rng, FormulaShape};
use dtl_core::export::JsonAutomaton;
use dtl_core::semantics::{derive_structure, sat_global};
use dtl_core::signature::Signature;
use dtl_core::word::LassoWord;
use serde_json::{json, Map, Value};
use tempfile::TempDir;

fn dtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtl")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shipped(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn two_agent_spec(dir: &TempDir, formula: &str) -> String {
    file(dir, "s.dtl", &format!("agents: i, j\nprops i: p\nprops j: q\nformula: {formula}\n"))
}

#[test]
fn negated_tautology_is_unsat() {
    let o = dtl(&["sat", &shipped("tautology.dtl"), "--negate"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "UNSAT");
}

#[test]
fn communication_at_the_first_event_is_unsat() {
    let d = TempDir::new().unwrap();
    let o = dtl(&["sat", &two_agent_spec(&d, "@i[C j[q]]")]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

#[test]
fn witness_for_always_p() {
    let d = TempDir::new().unwrap();
    let w = d.path().join("w.json");
    let o = dtl(&["sat", &two_agent_spec(&d, "@i[G p]"), "--verify", "--witness", w.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("SAT\n"));
    assert!(stdout(&o).contains("verified"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let letters: Vec<&Value> = ["prefix", "loop"]
        .iter()
        .flat_map(|k| v[k].as_array().unwrap())
        .collect();
    assert!(letters.iter().any(|l| l.get("i").is_some()));
    for l in letters {
        if let Some(i) = l.get("i") {
            assert_eq!(i["p"], Value::Bool(true), "{l}");
        }
    }
    // the witness is a valid input to `check`
    let o = dtl(&["check", &d.path().join("s.dtl").to_string_lossy(), "--word", w.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn worked_example_word_is_accepted() {
    let o = dtl(&["check", &shipped("pair_props.dtl"), "--word", &shipped("pair_word.json"), "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v, json!({ "semantics": true, "automaton": true, "agree": true }));
}

#[test]
fn unfair_word_names_the_starved_agent() {
    let o = dtl(&["check", &shipped("pair_props.dtl"), "--word", &shipped("starved.json")]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("not fair") && e.contains(" j "), "{e}");
}

#[test]
fn parse_errors_carry_positions() {
    let d = TempDir::new().unwrap();
    let o = dtl(&["sat", &file(&d, "bad.dtl", "agents: i\nprops i: p\nformula: @i[p ->]\n")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("3:17"), "{}", stderr(&o));
}

#[test]
fn state_cap_has_its_own_exit_code() {
    let o = dtl(&["sat", &shipped("handshake.dtl"), "--max-states", "3"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

fn export(spec: &str, stage: &str, format: &str, out: &Path) -> String {
    let o = dtl(&["export", spec, "--stage", stage, "--format", format, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn local_automaton_of_always_p() {
    let d = TempDir::new().unwrap();
    let text = export(&two_agent_spec(&d, "@i[G p]"), "local:i", "json", &d.path().join("l.json"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 3);
    let dot = export(&d.path().join("s.dtl").to_string_lossy(), "local:i", "dot", &d.path().join("l.dot"));
    assert_eq!(dot.matches(" [label=").count(), 3 + v["edges"].as_array().unwrap().len());
}

#[test]
fn product_of_the_worked_pair() {
    let d = TempDir::new().unwrap();
    let text = export(&shipped("pair.dtl"), "product", "json", &d.path().join("p.json"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 4);
    assert_eq!(v["alphabet"].as_array().unwrap().len(), 8);
}

#[test]
fn json_export_reloads_to_the_same_bytes() {
    let d = TempDir::new().unwrap();
    for (spec, stage) in [
        (shipped("pair.dtl"), "product"),
        (shipped("pair_props.dtl"), "constrained"),
        (shipped("pair_props.dtl"), "product"),
        (shipped("handshake.dtl"), "local:j"),
    ] {
        let text = export(&spec, stage, "json", &d.path().join("a.json"));
        let g = JsonAutomaton::from_json(&text).unwrap().to_gnba().unwrap();
        assert_eq!(JsonAutomaton::from_gnba(&g, |s| s.clone()).to_json(), text, "{stage}");
    }
}

#[test]
fn unknown_stage_is_a_usage_error() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("x");
    for stage in ["local:k", "products", "local"] {
        let o = dtl(&["export", &shipped("pair_props.dtl"), "--stage", stage, "--format", "dot", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{stage}");
    }
}

fn word_json(sig: &Signature, w: &LassoWord) -> String {
    let letters = |xs: &[dtl_core::word::GlobalLetter]| -> Value {
        xs.iter()
            .map(|a| {
                let mut m = Map::new();
                for i in sig.agents() {
                    if let Some(v) = a.get(i) {
                        let vals: Map<String, Value> = sig.props(i).map(|p| (sig.prop_name(p).into(), v.holds(p).into())).collect();
                        m.insert(sig.agent_name(i).into(), vals.into());
                    }
                }
                Value::Object(m)
            })
            .collect()
    };
    json!({ "prefix": letters(&w.prefix), "loop": letters(&w.cycle) }).to_string()
}

/// Exit status of `check` follows the trace semantics on random inputs.
#[test]
fn check_follows_the_semantics() {
    let sig = Signature::new([("i", vec!["p", "r"]), ("j", vec!["q"])]).unwrap();
    let d = TempDir::new().unwrap();
    let mut r = rng(0xC11);
    let (mut yes, mut no) = (0, 0);
    for n in 0..40 {
        let alpha = random_global(&sig, &FormulaShape::default(), &mut r);
        let spec = file(&d, "r.dtl", &format!("agents: i, j\nprops i: p, r\nprops j: q\nformula: {}\n", alpha.display(&sig)));
        let w = random_word(&sig, 3, 3, &mut r);
        let word = file(&d, "w.json", &word_json(&sig, &w));
        let expected = sat_global(&derive_structure(&w, 2).unwrap(), &alpha);
        let o = dtl(&["check", &spec, "--word", &word]);
        assert_eq!(code(&o), if expected { 0 } else { 1 }, "case {n}: {}\n{}", alpha.display(&sig), stderr(&o));
        if expected { yes += 1 } else { no += 1 }
    }
    assert!(yes > 0 && no > 0);
}
