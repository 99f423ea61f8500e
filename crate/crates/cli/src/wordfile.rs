//! Lasso words as JSON. Each letter maps the participating agents to a total
//! valuation of their propositions:
//!
//! ```json
//! { "prefix": [ { "i": { "p": true } } ],
//!   "loop":   [ { "i": { "p": false }, "j": { "q": true } } ] }
//! ```

use serde_json::{json, Map, Value};

use dtl_core::signature::{Signature, Valuation};
use dtl_core::word::{GlobalLetter, Lasso, LassoWord};
use dtl_core::{DtlError, Result};

fn bad(msg: impl Into<String>) -> DtlError {
    DtlError::MalformedWord(msg.into())
}

fn letter(sig: &Signature, v: &Value, where_: &str) -> Result<GlobalLetter> {
    let obj = v.as_object().ok_or_else(|| bad(format!("{where_}: a letter is an object of agents")))?;
    let mut parts = vec![None; sig.num_agents()];
    for (name, val) in obj {
        let a = sig.agent(name)?;
        let props = val
            .as_object()
            .ok_or_else(|| bad(format!("{where_}: agent `{name}` maps to an object of booleans")))?;
        let mut v = Valuation::default();
        for (p, b) in props {
            let prop = sig.prop(p)?;
            if prop.owner() != a {
                return Err(bad(format!("{where_}: proposition `{p}` does not belong to agent `{name}`")));
            }
            let b = b
                .as_bool()
                .ok_or_else(|| bad(format!("{where_}: value of `{p}` is not a boolean")))?;
            v = v.with(prop, b);
        }
        if let Some(missing) = sig.props(a).find(|&p| !props.contains_key(sig.prop_name(p))) {
            return Err(bad(format!(
                "{where_}: valuation of agent `{name}` does not give `{}`",
                sig.prop_name(missing)
            )));
        }
        parts[a.index()] = Some(v);
    }
    GlobalLetter::new(parts).map_err(|_| bad(format!("{where_}: a letter needs at least one agent")))
}

pub fn parse_word_file(text: &str, sig: &Signature) -> Result<LassoWord> {
    let v: Value = serde_json::from_str(text).map_err(|e| bad(format!("word file: {e}")))?;
    let obj = v.as_object().ok_or_else(|| bad("word file: expected an object"))?;
    if let Some(k) = obj.keys().find(|k| *k != "prefix" && *k != "loop") {
        return Err(bad(format!("word file: unknown key `{k}`")));
    }
    let seq = |key: &str| -> Result<Vec<GlobalLetter>> {
        match obj.get(key) {
            None if key == "prefix" => Ok(Vec::new()),
            None => Err(bad(format!("word file: missing `{key}`"))),
            Some(Value::Array(xs)) => xs
                .iter()
                .enumerate()
                .map(|(k, x)| letter(sig, x, &format!("{key}[{k}]")))
                .collect(),
            Some(_) => Err(bad(format!("word file: `{key}` is a list of letters"))),
        }
    };
    Lasso::new(seq("prefix")?, seq("loop")?)
}

pub fn word_to_json(w: &LassoWord, sig: &Signature) -> String {
    let letters = |xs: &[GlobalLetter]| -> Vec<Value> {
        xs.iter()
            .map(|a| {
                let mut m = Map::new();
                for i in sig.agents() {
                    if let Some(v) = a.get(i) {
                        let vals: Map<String, Value> =
                            sig.props(i).map(|p| (sig.prop_name(p).to_string(), Value::Bool(v.holds(p)))).collect();
                        m.insert(sig.agent_name(i).to_string(), Value::Object(vals));
                    }
                }
                Value::Object(m)
            })
            .collect()
    };
    let mut s = serde_json::to_string_pretty(&json!({
        "prefix": letters(&w.prefix),
        "loop": letters(&w.cycle),
    }))
    .expect("plain data serializes");
    s.push('\n');
    s
}
