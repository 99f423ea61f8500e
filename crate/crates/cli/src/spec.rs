//! Spec files: a signature, an optional formula and optional per-agent
//! Büchi automata.
//!
//! ```text
//! agents: i, j
//! props i: p, r
//! props j: q
//! formula: @i[G (p -> F C j[q])]
//!   & @j[G F q]            # indented lines continue the formula
//!
//! alphabet i: 0, 1         # automaton declarations, one agent at a time
//! states i: q0, q1
//! initial i: q0
//! accepting i: q1
//! edge i: q0 0 q1
//! ```

use std::collections::BTreeMap;

use dtl_core::automata::{Nba, TransitionSystem};
use dtl_core::error::Position;
use dtl_core::formula::GlobalFormula;
use dtl_core::parse::parse_global_at;
use dtl_core::signature::Signature;
use dtl_core::{DtlError, Result};

#[derive(Debug)]
pub struct Spec {
    pub sig: Signature,
    pub formula: Option<GlobalFormula>,
    /// One automaton per agent, in agent order, or none at all.
    pub automata: Vec<Nba<String>>,
}

impl Spec {
    pub fn formula(&self) -> Result<&GlobalFormula> {
        self.formula
            .as_ref()
            .ok_or_else(|| DtlError::Format("the spec file has no `formula:` line".into()))
    }
}

#[derive(Default)]
struct NbaDecl {
    at: Option<Position>,
    alphabet: Vec<String>,
    states: Vec<String>,
    initial: Vec<(Position, String)>,
    accepting: Vec<(Position, String)>,
    edges: Vec<(Position, [String; 3])>,
}

fn err(pos: Position, msg: impl Into<String>) -> DtlError {
    DtlError::Syntax { pos, msg: msg.into() }
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

pub fn parse_spec(text: &str) -> Result<Spec> {
    let mut agents: Option<(Position, Vec<String>)> = None;
    let mut props: Vec<(Position, String, Vec<String>)> = Vec::new();
    let mut formula: Option<(Position, String)> = None;
    let mut nbas: BTreeMap<String, NbaDecl> = BTreeMap::new();
    let mut in_formula = false;

    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let at = |col: usize| Position { line: n + 1, column: col + 1 };
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match (&mut formula, in_formula) {
                (Some((_, f)), true) => {
                    f.push('\n');
                    f.push_str(line);
                    continue;
                }
                _ => return Err(err(at(0), "indented line outside a formula")),
            }
        }
        in_formula = false;
        let (head, rest) = line
            .split_once(':')
            .ok_or_else(|| err(at(0), "expected `key: value`"))?;
        let rest_col = head.len() + 1;
        let mut words = head.split_whitespace();
        let key = words.next().unwrap_or("");
        let agent = words.next();
        if words.next().is_some() {
            return Err(err(at(0), format!("unexpected words before `:` in `{}`", head.trim())));
        }
        let need_agent = || agent.map(String::from).ok_or_else(|| err(at(0), format!("`{key}` needs an agent name")));
        match key {
            "agents" | "formula" if agent.is_some() => {
                return Err(err(at(0), format!("`{key}` takes no agent name")));
            }
            "agents" => {
                if agents.is_some() {
                    return Err(err(at(0), "duplicate `agents:` line"));
                }
                agents = Some((at(0), list(rest)));
            }
            "props" => props.push((at(0), need_agent()?, list(rest))),
            "formula" => {
                if formula.is_some() {
                    return Err(err(at(0), "duplicate `formula:` line"));
                }
                formula = Some((at(rest_col), rest.to_string()));
                in_formula = true;
            }
            "alphabet" | "states" | "initial" | "accepting" | "edge" => {
                let d = nbas.entry(need_agent()?).or_default();
                d.at.get_or_insert(at(0));
                match key {
                    "alphabet" => d.alphabet.extend(list(rest)),
                    "states" => d.states.extend(list(rest)),
                    "initial" => d.initial.extend(list(rest).into_iter().map(|s| (at(rest_col), s))),
                    "accepting" => d.accepting.extend(list(rest).into_iter().map(|s| (at(rest_col), s))),
                    _ => {
                        let parts: Vec<String> = rest.split_whitespace().map(String::from).collect();
                        let triple: [String; 3] = parts
                            .try_into()
                            .map_err(|_| err(at(rest_col), "an edge is `from symbol to`"))?;
                        d.edges.push((at(rest_col), triple));
                    }
                }
            }
            other => return Err(err(at(0), format!("unknown key `{other}`"))),
        }
    }

    let (_, names) = agents.ok_or_else(|| err(Position { line: 1, column: 1 }, "missing `agents:` line"))?;
    let mut decl: Vec<(String, Vec<String>)> = names.iter().map(|a| (a.clone(), Vec::new())).collect();
    for (pos, a, ps) in props {
        let slot = decl
            .iter_mut()
            .find(|(n, _)| *n == a)
            .ok_or_else(|| err(pos, format!("`props {a}` names an undeclared agent")))?;
        slot.1.extend(ps);
    }
    let sig = Signature::new(decl)?;
    let formula = formula.map(|(pos, f)| parse_global_at(&f, &sig, pos)).transpose()?;

    let mut automata = Vec::new();
    if !nbas.is_empty() {
        for a in &names {
            let d = nbas
                .remove(a)
                .ok_or_else(|| err(Position { line: 1, column: 1 }, format!("agent `{a}` has no automaton but others do")))?;
            automata.push(build_nba(a, d)?);
        }
        if let Some((a, d)) = nbas.into_iter().next() {
            return Err(err(d.at.expect("set on insert"), format!("automaton for undeclared agent `{a}`")));
        }
    }
    Ok(Spec { sig, formula, automata })
}

fn build_nba(agent: &str, d: NbaDecl) -> Result<Nba<String>> {
    let at = d.at.expect("set on insert");
    if d.states.is_empty() || d.alphabet.is_empty() {
        return Err(err(at, format!("automaton of `{agent}` needs `states` and `alphabet`")));
    }
    let state = |pos: Position, s: &str| {
        d.states
            .iter()
            .position(|x| x == s)
            .ok_or_else(|| err(pos, format!("unknown state `{s}` of agent `{agent}`")))
    };
    let mut ts = TransitionSystem::new(d.alphabet.clone(), d.states.clone());
    for (pos, s) in &d.initial {
        ts.add_initial(state(*pos, s)?);
    }
    for (pos, [from, sym, to]) in &d.edges {
        let a = ts
            .letter_index(sym)
            .ok_or_else(|| err(*pos, format!("symbol `{sym}` is not in the alphabet of `{agent}`")))?;
        let (from, to) = (state(*pos, from)?, state(*pos, to)?);
        ts.add_edge(from, a, to);
    }
    let mut accepting = vec![false; d.states.len()];
    for (pos, s) in &d.accepting {
        accepting[state(*pos, s)?] = true;
    }
    Ok(Nba::new(ts, accepting))
}
