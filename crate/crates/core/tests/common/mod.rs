//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! the automaton side of the library.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dtl_core::automata::{Nba, TransitionSystem};
use dtl_core::corpus::{all_lassos, letters};
use dtl_core::formula::{props_of, GlobalFormula, LocalFormula, LocalNode};
use dtl_core::semantics::{derive_structure, GlobalProgram, LassoStructure, Table};
use dtl_core::signature::{AgentSet, Signature, Valuation};
use dtl_core::word::{GlobalLetter, Lasso, LassoWord};

/// The two component automata of the worked product example.
pub fn example_pair() -> (Nba<char>, Nba<char>) {
    let mut t1 = TransitionSystem::new(vec!['0', '1'], vec!["q0".into(), "q1".into()]);
    t1.add_initial(0);
    for (s, a, t) in [(0, 0, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0)] {
        t1.add_edge(s, a, t);
    }
    let mut t2 = TransitionSystem::new(vec!['a', 'b'], vec!["p0".into(), "p1".into()]);
    t2.add_initial(0);
    for (s, a, t) in [(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 1)] {
        t2.add_edge(s, a, t);
    }
    (Nba::new(t1, vec![false, true]), Nba::new(t2, vec![false, true]))
}

/// Letters of the example written as `0b`, `1`, `a`.
pub fn char_letter(s: &str) -> GlobalLetter<char> {
    let mut parts = vec![None, None];
    for c in s.chars() {
        parts[usize::from(!c.is_ascii_digit())] = Some(c);
    }
    GlobalLetter::new(parts).unwrap()
}

pub fn char_word(prefix: &str, cycle: &str) -> LassoWord<char> {
    Lasso::new(
        prefix.split_whitespace().map(char_letter).collect(),
        cycle.split_whitespace().map(char_letter).collect(),
    )
    .unwrap()
}

/// LTL over a lasso of valuations, by direct fixpoint on positions.
/// `C i[φ]` of the only agent reads `φ` at the same position, except at 0.
pub fn ltl_holds(f: &LocalFormula, w: &Lasso<Valuation>) -> bool {
    // keep position 0 out of the loop so that "first position" is unambiguous
    let w = if w.prefix.is_empty() {
        Lasso { prefix: w.cycle.clone(), cycle: w.cycle.clone() }
    } else {
        w.clone()
    };
    ltl_table(f, &w)[0]
}

fn ltl_table(f: &LocalFormula, w: &Lasso<Valuation>) -> Vec<bool> {
    let n = w.span();
    let next = |k: usize| w.next_position(k);
    match f.node() {
        LocalNode::True => vec![true; n],
        LocalNode::Prop(p) => (0..n).map(|k| w.get(k).holds(*p)).collect(),
        LocalNode::Not(a) => ltl_table(a, w).into_iter().map(|b| !b).collect(),
        LocalNode::Imp(a, b) => {
            let (a, b) = (ltl_table(a, w), ltl_table(b, w));
            (0..n).map(|k| !a[k] || b[k]).collect()
        }
        LocalNode::Next(a) => {
            let a = ltl_table(a, w);
            (0..n).map(|k| a[next(k)]).collect()
        }
        LocalNode::Always(a) => {
            let a = ltl_table(a, w);
            let p = w.prefix.len();
            let on_loop = (p..n).all(|k| a[k]);
            let mut out = vec![on_loop; n];
            for k in (0..p).rev() {
                out[k] = a[k] && if k + 1 < n { out[k + 1] } else { on_loop };
            }
            out
        }
        LocalNode::Comm(_, a) => {
            let a = ltl_table(a, w);
            (0..n).map(|k| k > 0 && a[k]).collect()
        }
    }
}

/// Outcome of [`bounded_model_search`].
#[derive(Debug)]
pub enum Bounded {
    Model(LassoWord),
    NoModel { checked: usize },
}

/// Lassos that are not a shorter lasso in disguise: the prefix does not end
/// with the loop's last letter and the loop is not a power.
pub fn is_reduced<T: PartialEq>(w: &Lasso<T>) -> bool {
    if let (Some(a), Some(b)) = (w.prefix.last(), w.cycle.last()) {
        if a == b {
            return false;
        }
    }
    let l = w.cycle.len();
    (1..l).filter(|d| l.is_multiple_of(*d)).all(|d| (d..l).any(|k| w.cycle[k] != w.cycle[k - d]))
}

/// Every fair lasso within the bounds whose letters only set propositions of
/// `α`, checked against the trace semantics. Stops at the first model.
pub fn bounded_model_search(sig: &Signature, alpha: &GlobalFormula, max_prefix: usize, max_loop: usize) -> Bounded {
    let props = props_of(alpha);
    let alphabet = letters(sig, &props);
    let prog = GlobalProgram::new(alpha);
    let mut scratch = Table::default();
    let mut checked = 0;
    for w in all_lassos(&alphabet, sig.num_agents(), max_prefix, max_loop) {
        if !is_reduced(&w) {
            continue;
        }
        checked += 1;
        let mu = derive_structure(&w, sig.num_agents()).expect("fair by construction");
        if prog.holds(&mu, &mut scratch) {
            return Bounded::Model(w);
        }
    }
    Bounded::NoModel { checked }
}

/// Participation from agent-name strings such as `ij`.
pub fn events(sig: &Signature, text: &str) -> Vec<AgentSet> {
    text.split_whitespace()
        .map(|tok| {
            let mut s = AgentSet::EMPTY;
            for c in tok.chars() {
                s.insert(sig.agent(&c.to_string()).unwrap());
            }
            s
        })
        .collect()
}

/// Valuations from tokens such as `p,!r` (unlisted false) or `-`.
pub fn labels(sig: &Signature, text: &str) -> Vec<Valuation> {
    text.split_whitespace()
        .map(|tok| {
            tok.split(',')
                .filter(|l| !l.is_empty() && *l != "-")
                .fold(Valuation::default(), |v, l| match l.strip_prefix('!') {
                    Some(n) => v.with(sig.prop(n).unwrap(), false),
                    None => v.with(sig.prop(l).unwrap(), true),
                })
        })
        .collect()
}

/// A structure from textual events and per-agent `(prefix, loop)` labels.
pub fn structure(sig: &Signature, ev: (&str, &str), labs: &[(&str, &str)]) -> LassoStructure {
    let events = Lasso::new(events(sig, ev.0), events(sig, ev.1)).unwrap();
    let labs = labs
        .iter()
        .map(|(p, l)| Lasso::new(labels(sig, p), labels(sig, l)).unwrap())
        .collect();
    LassoStructure::new(sig.num_agents(), events, labs).unwrap()
}

pub fn props_used(alpha: &GlobalFormula) -> usize {
    props_of(alpha).len()
}

pub fn agent_props(sig: &Signature) -> BTreeSet<dtl_core::signature::Prop> {
    sig.agents().flat_map(|i| sig.props(i).collect::<Vec<_>>()).collect()
}
