//! DOT and JSON renderings of explicit automata, and a JSON loader.
//!
//! JSON is canonical: states in index order, edges sorted by source, letter
//! and target, letters rendered as strings. Loading and writing again gives
//! the same bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automata::{Gnba, Letter, TransitionSystem};
use crate::error::{DtlError, Result};
use crate::signature::Signature;
use crate::word::{fmt_letter, GlobalLetter};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonState {
    pub id: usize,
    pub label: String,
    pub initial: bool,
    pub accepting: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonEdge {
    pub from: usize,
    pub letter: String,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonAutomaton {
    pub states: Vec<JsonState>,
    pub edges: Vec<JsonEdge>,
    pub alphabet: Vec<String>,
    /// Names of the acceptance sets in order; kept so that empty sets survive.
    #[serde(default)]
    pub acceptance: Vec<String>,
}

impl JsonAutomaton {
    pub fn from_gnba<L: Letter>(g: &Gnba<L>, letter: impl Fn(&L) -> String) -> Self {
        let ts = &g.ts;
        let alphabet: Vec<String> = ts.alphabet().iter().map(&letter).collect();
        let states = (0..ts.num_states())
            .map(|q| JsonState {
                id: q,
                label: ts.name(q).to_string(),
                initial: ts.is_initial(q),
                accepting: g.family().iter().filter(|(_, s)| s[q]).map(|(n, _)| n.clone()).collect(),
            })
            .collect();
        let edges = ts
            .edges()
            .map(|(from, a, to)| JsonEdge {
                from,
                letter: alphabet[a].clone(),
                to,
            })
            .collect();
        JsonAutomaton {
            states,
            edges,
            alphabet,
            acceptance: g.family().iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// Back to an automaton over string letters.
    pub fn to_gnba(&self) -> Result<Gnba<String>> {
        let n = self.states.len();
        if self.states.iter().enumerate().any(|(k, s)| s.id != k) {
            return Err(DtlError::Format("state ids must be 0, 1, … in order".into()));
        }
        let mut ts = TransitionSystem::new(self.alphabet.clone(), self.states.iter().map(|s| s.label.clone()).collect());
        for s in &self.states {
            if s.initial {
                ts.add_initial(s.id);
            }
        }
        for e in &self.edges {
            let a = ts
                .letter_index(&e.letter)
                .ok_or_else(|| DtlError::Format(format!("edge letter `{}` is not in the alphabet", e.letter)))?;
            if e.from >= n || e.to >= n {
                return Err(DtlError::Format(format!("edge {} -> {} names a missing state", e.from, e.to)));
            }
            ts.add_edge(e.from, a, e.to);
        }
        let mut names = self.acceptance.clone();
        for s in &self.states {
            for a in &s.accepting {
                if !names.contains(a) {
                    names.push(a.clone());
                }
            }
        }
        let family = names
            .into_iter()
            .map(|name| {
                let members = self.states.iter().map(|s| s.accepting.contains(&name)).collect();
                (name, members)
            })
            .collect();
        Ok(Gnba::new(ts, family))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DtlError::Format(format!("automaton JSON: {e}")))
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Structure-only DOT: no layout attributes beyond shapes.
pub fn to_dot<L: Letter>(g: &Gnba<L>, letter: impl Fn(&L) -> String) -> String {
    let ts = &g.ts;
    let mut out = String::from("digraph automaton {\n");
    for q in 0..ts.num_states() {
        let sets: Vec<&str> = g.family().iter().filter(|(_, s)| s[q]).map(|(n, _)| n.as_str()).collect();
        let mut label = dot_escape(ts.name(q));
        if !sets.is_empty() {
            label = format!("{label}\\n{}", dot_escape(&sets.join(" ")));
        }
        let shape = if sets.is_empty() { "circle" } else { "doublecircle" };
        let _ = writeln!(out, "  s{q} [label=\"{label}\", shape={shape}];");
    }
    for &q in ts.initial() {
        let _ = writeln!(out, "  init{q} [shape=point];");
        let _ = writeln!(out, "  init{q} -> s{q};");
    }
    for (from, a, to) in ts.edges() {
        let _ = writeln!(out, "  s{from} -> s{to} [label=\"{}\"];", dot_escape(&letter(&ts.alphabet()[a])));
    }
    out.push_str("}\n");
    out
}

/// `{i:{p} j:{!q}}` style names for valuation letters.
pub fn valuation_letter(sig: &Signature) -> impl Fn(&GlobalLetter) -> String + '_ {
    move |a| fmt_letter(sig, a)
}

/// `{0,b}` style names for letters over named symbols.
pub fn symbol_letter<S: AsRef<str>>(a: &GlobalLetter<S>) -> String {
    let parts: Vec<&str> = a.parts().iter().flatten().map(|s| s.as_ref()).collect();
    format!("{{{}}}", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::{a1, a2};
    use crate::product::Dnba;

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let d = Dnba::build(vec![a1(), a2()]).unwrap();
        let g = d.as_gnba();
        let j = JsonAutomaton::from_gnba(g, |a| {
            let parts: Vec<String> = a.parts().iter().flatten().map(|c| c.to_string()).collect();
            format!("{{{}}}", parts.join(","))
        });
        let text = j.to_json();
        let back = JsonAutomaton::from_json(&text).unwrap().to_gnba().unwrap();
        assert_eq!(JsonAutomaton::from_gnba(&back, |s| s.clone()).to_json(), text);
        assert_eq!(back.ts.num_states(), 4);
        assert_eq!(back.ts.alphabet().len(), 8);
    }

    #[test]
    fn dot_lists_every_edge() {
        let g = a1().as_gnba();
        let dot = to_dot(&g, |c| c.to_string());
        assert!(dot.starts_with("digraph automaton {"));
        assert_eq!(dot.matches(" -> s").count(), g.ts.edges().count() + g.ts.initial().len());
        assert!(dot.contains("doublecircle"));
    }

    #[test]
    fn loader_rejects_unknown_letters() {
        let text = r#"{"states":[{"id":0,"label":"a","initial":true,"accepting":[]}],"edges":[{"from":0,"letter":"z","to":0}],"alphabet":["x"]}"#;
        assert!(JsonAutomaton::from_json(text).unwrap().to_gnba().is_err());
    }
}
