//! The distributed automaton `D_α` of a global formula and satisfiability.
//!
//! Components are the degeneralized tableau automata `A_i`; a component
//! state packs an elementary set index and a counter. Product states are
//! tuples of component states, explored on the fly.

use std::time::{Duration, Instant};

use crate::automata::graph::{generalized_lasso, nested_dfs, Budget, Exhausted};
use crate::automata::{advance_counter, counter_range, Gnba, TransitionSystem};
use crate::error::{DtlError, Result};
use crate::exec::Execution;
use crate::formula::{check_global, FormulaSet, GlobalFormula};
use crate::product::global_alphabet;
use crate::semantics::{derive_structure, sat_global};
use crate::signature::{Agent, AgentSet, Signature, Valuation};
use crate::tableau::{Bits, Closure, Lit, LocalTableau};
use crate::word::{is_fair, GlobalLetter, Lasso, LassoWord};

/// Where the local-communication condition is enforced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcScope {
    /// On the target of every transition in which the owner participates.
    Transition,
    /// On every product state.
    State,
}

/// Which side conditions shape `D_α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DtlConstraints {
    /// Initial components agree on every global formula.
    pub global_agreement: bool,
    pub lc: LcScope,
    pub sc1: bool,
    pub sc2: bool,
    /// Build components over the closure extended with communication bodies.
    pub communication_bodies: bool,
}

impl Default for DtlConstraints {
    fn default() -> Self {
        DtlConstraints {
            global_agreement: true,
            lc: LcScope::Transition,
            sc1: true,
            sc2: true,
            communication_bodies: true,
        }
    }
}

impl DtlConstraints {
    /// The conditions exactly as first written down: plain closure, LC on
    /// states, no agreement between initial components. Kept to exhibit why
    /// the default differs.
    pub fn literal() -> Self {
        DtlConstraints {
            global_agreement: false,
            lc: LcScope::State,
            sc1: true,
            sc2: true,
            communication_bodies: false,
        }
    }

    /// No side conditions at all: the bare product of the components.
    pub fn none() -> Self {
        DtlConstraints {
            global_agreement: false,
            lc: LcScope::Transition,
            sc1: false,
            sc2: false,
            communication_bodies: true,
        }
    }

    fn lc_on_transitions(&self) -> bool {
        self.sc1 && self.lc == LcScope::Transition
    }
}

/// A product state: one packed component state per agent.
pub type PState = Box<[u32]>;

/// `D_α`, implicitly.
#[derive(Clone, Debug)]
pub struct DtlAutomaton {
    sig: Signature,
    alpha: GlobalFormula,
    closure: Closure,
    locals: Vec<LocalTableau>,
    ranges: Vec<usize>,
    comms: Vec<Vec<(usize, Agent, Option<Lit>)>>,
    globals: Bits,
    constraints: DtlConstraints,
}

/// A letter choice: participating agents and their valuations.
type Move = (AgentSet, Vec<Option<Valuation>>);

impl DtlAutomaton {
    pub fn new(sig: &Signature, alpha: &GlobalFormula, constraints: DtlConstraints) -> Result<Self> {
        Self::with_execution(sig, alpha, constraints, Execution::Sequential)
    }

    pub fn with_execution(sig: &Signature, alpha: &GlobalFormula, constraints: DtlConstraints, exec: Execution) -> Result<Self> {
        check_global(sig, alpha)?;
        let closure = if constraints.communication_bodies {
            Closure::new(alpha)?
        } else {
            Closure::plain(alpha)?
        };
        let agents: Vec<Agent> = sig.agents().collect();
        let locals = exec
            .map(&agents, |&i| LocalTableau::build(&closure, i, Execution::Sequential))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let ranges = locals.iter().map(|t| counter_range(t.acceptance.len())).collect();
        let comms = agents.iter().map(|&i| closure.comms_of(i)).collect();
        let globals = closure.globals().iter().fold(0, |m: Bits, &k| m | 1 << k);
        Ok(DtlAutomaton {
            sig: sig.clone(),
            alpha: alpha.clone(),
            closure,
            locals,
            ranges,
            comms,
            globals,
            constraints,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn alpha(&self) -> &GlobalFormula {
        &self.alpha
    }

    pub fn closure(&self) -> &Closure {
        &self.closure
    }

    pub fn constraints(&self) -> DtlConstraints {
        self.constraints
    }

    pub fn local(&self, i: Agent) -> &LocalTableau {
        &self.locals[i.index()]
    }

    pub fn num_agents(&self) -> usize {
        self.locals.len()
    }

    /// Elementary set index and counter of a packed component state.
    #[inline]
    pub fn unpack(&self, i: usize, x: u32) -> (usize, usize) {
        let r = self.ranges[i];
        (x as usize / r, x as usize % r)
    }

    #[inline]
    pub(crate) fn pack(&self, i: usize, b: usize, c: usize) -> u32 {
        (b * self.ranges[i] + c) as u32
    }

    #[inline]
    fn bits(&self, i: usize, x: u32) -> Bits {
        self.locals[i].states[self.unpack(i, x).0]
    }

    /// Component `i` of `q` is accepting in `A_i`.
    pub fn component_accepting(&self, i: usize, x: u32) -> bool {
        let t = &self.locals[i];
        let (b, c) = self.unpack(i, x);
        t.acceptance.is_empty() || (c == 0 && t.marks[b] & 1 == 1)
    }

    /// The formula sets `q↓i` of a product state.
    pub fn state_sets(&self, q: &[u32]) -> Vec<FormulaSet> {
        (0..self.num_agents())
            .map(|i| self.locals[i].state_set(&self.closure, self.unpack(i, q[i]).0))
            .collect()
    }

    pub fn state_name(&self, q: &[u32]) -> String {
        let parts: Vec<String> = (0..self.num_agents())
            .map(|i| {
                let (b, c) = self.unpack(i, q[i]);
                let set = self.locals[i].state_set(&self.closure, b).display(&self.sig).to_string();
                if self.ranges[i] > 1 {
                    format!("{set}/{c}")
                } else {
                    set
                }
            })
            .collect();
        format!("<{}>", parts.join(", "))
    }

    fn state_lc_ok(&self, q: &[u32]) -> bool {
        (0..self.num_agents()).all(|i| {
            let bi = self.bits(i, q[i]);
            self.comms[i].iter().all(|&(k, j, body)| {
                bi >> k & 1 == 0 || body.is_some_and(|l| l.holds(self.bits(j.index(), q[j.index()])))
            })
        })
    }

    /// LC (transition form), SC1 and SC2 for a step by `movers` into `q2`.
    fn transition_ok(&self, movers: AgentSet, q2: &[u32]) -> bool {
        let c = &self.constraints;
        for i in movers.iter() {
            let bi = self.bits(i.index(), q2[i.index()]);
            for &(k, j, body) in &self.comms[i.index()] {
                let has = bi >> k & 1 == 1;
                let j_moves = movers.contains(j);
                if has && c.sc1 && !j_moves {
                    return false;
                }
                if has && j_moves && c.lc_on_transitions() && !body.is_some_and(|l| l.holds(self.bits(j.index(), q2[j.index()]))) {
                    return false;
                }
                if !has && j_moves && c.sc2 && body.is_some_and(|l| l.holds(self.bits(j.index(), q2[j.index()]))) {
                    return false;
                }
            }
        }
        c.lc != LcScope::State || self.state_lc_ok(q2)
    }

    /// `Q_0` of `D_α`, in component order.
    pub fn initial_states(&self) -> Vec<PState> {
        let mut out: Vec<Vec<u32>> = vec![Vec::new()];
        for i in 0..self.num_agents() {
            let opts: Vec<u32> = self.locals[i].initial.iter().map(|&b| self.pack(i, b, 0)).collect();
            out = out
                .into_iter()
                .flat_map(|p| {
                    opts.iter().map(move |&x| {
                        let mut p = p.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out.into_iter()
            .filter(|q| {
                let agree = !self.constraints.global_agreement || {
                    let g0 = self.bits(0, q[0]) & self.globals;
                    (1..q.len()).all(|i| self.bits(i, q[i]) & self.globals == g0)
                };
                agree && (self.constraints.lc != LcScope::State || self.state_lc_ok(q))
            })
            .map(Vec::into_boxed_slice)
            .collect()
    }

    /// Successors of `q` on a move; valuations must be given for movers.
    pub fn successors(&self, q: &[u32], mv: &Move) -> Vec<PState> {
        let (movers, vals) = mv;
        let mut out: Vec<Vec<u32>> = vec![q.to_vec()];
        for i in movers.iter() {
            let ii = i.index();
            let t = &self.locals[ii];
            let (b, c) = self.unpack(ii, q[ii]);
            let v = vals[ii].expect("mover has a valuation");
            let c2 = advance_counter(c, t.marks[b], t.acceptance.len());
            let opts: Vec<u32> = t
                .delta(b, v)
                .iter()
                .copied()
                .filter(|&b2| {
                    // SC1 only depends on this component and the movers
                    !self.constraints.sc1
                        || self.comms[ii]
                            .iter()
                            .all(|&(k, j, _)| t.states[b2] >> k & 1 == 0 || movers.contains(j))
                })
                .map(|b2| self.pack(ii, b2, c2))
                .collect();
            if opts.is_empty() {
                return Vec::new();
            }
            out = out
                .into_iter()
                .flat_map(|p| {
                    opts.iter().map(move |&x| {
                        let mut p = p.clone();
                        p[ii] = x;
                        p
                    })
                })
                .collect();
        }
        out.into_iter()
            .filter(|q2| self.transition_ok(*movers, q2))
            .map(Vec::into_boxed_slice)
            .collect()
    }

    fn letter_move(&self, a: &GlobalLetter) -> Move {
        (a.participants(), a.parts().to_vec())
    }

    /// Letters that can move `q`, one per participation set: the movers read
    /// the valuation recorded in their elementary set (other propositions false).
    fn canonical_moves(&self, q: &[u32]) -> Vec<Move> {
        let n = self.num_agents();
        let mut subsets: Vec<u64> = (1u64..1 << n).collect();
        subsets.sort_by_key(|m| (m.count_ones(), (0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>()));
        subsets
            .into_iter()
            .map(|m| {
                let movers = AgentSet::from_bits(m);
                let vals = (0..n)
                    .map(|i| movers.contains(Agent::from_index(i)).then(|| self.locals[i].valuation[self.unpack(i, q[i]).0]))
                    .collect();
                (movers, vals)
            })
            .collect()
    }

    fn move_letter(mv: &Move) -> GlobalLetter {
        GlobalLetter::new(mv.1.clone()).expect("moves have a participant")
    }

    /// An accepting lasso run of `D_α` on a fair word, as product states.
    pub fn lasso_accepts(&self, w: &LassoWord) -> Option<Lasso<PState>> {
        if !is_fair(w, self.num_agents()) {
            return None;
        }
        let moves: Vec<Move> = w.iter_positions().map(|a| self.letter_move(a)).collect();
        let n = self.num_agents();
        let succ = |(q, pos): &(PState, usize)| -> Vec<((), (PState, usize))> {
            self.successors(q, &moves[*pos])
                .into_iter()
                .map(|q2| ((), (q2, w.next_position(*pos))))
                .collect()
        };
        let marks = |(q, _): &(PState, usize)| -> u64 {
            (0..n).filter(|&i| self.component_accepting(i, q[i])).fold(0, |m, i| m | 1 << i)
        };
        let init: Vec<(PState, usize)> = self.initial_states().into_iter().map(|q| (q, 0)).collect();
        let path = generalized_lasso(init, succ, marks, (1u64 << n) - 1)?;
        Some(Lasso {
            prefix: path.stem.into_iter().map(|((q, _), _)| q).collect(),
            cycle: path.cycle.into_iter().map(|((q, _), _)| q).collect(),
        })
    }

    pub fn accepts(&self, w: &LassoWord) -> bool {
        self.lasso_accepts(w).is_some()
    }

    /// Checks that `run` is an accepting run of `D_α` on the fair word `w`.
    pub fn is_accepting_run(&self, w: &LassoWord, run: &Lasso<PState>) -> bool {
        if !is_fair(w, self.num_agents()) || run.cycle.is_empty() {
            return false;
        }
        if !self.initial_states().contains(run.get(0)) {
            return false;
        }
        let horizon = w.prefix.len().max(run.prefix.len()) + crate::word::lcm(w.cycle.len(), run.cycle.len());
        let steps_ok = (0..horizon).all(|k| {
            self.successors(run.get(k), &self.letter_move(w.get(k)))
                .contains(run.get(k + 1))
        });
        steps_ok && (0..self.num_agents()).all(|i| run.cycle.iter().any(|q| self.component_accepting(i, q[i])))
    }

    /// The explicit automaton over all global letters, restricted to states
    /// reachable from `Q_0`; with `prune`, also to states from which a fair
    /// accepting cycle is reachable. Acceptance sets are the `ℱ_i`.
    pub fn explicit(&self, prune: bool, max_states: usize) -> Result<Gnba<GlobalLetter>> {
        let alphabets: Vec<Vec<Valuation>> = self.sig.agents().map(|i| self.sig.valuations(i)).collect();
        let alphabet = global_alphabet(&alphabets);
        let moves: Vec<Move> = alphabet.iter().map(|a| self.letter_move(a)).collect();
        let mut index = std::collections::HashMap::new();
        let mut states: Vec<PState> = Vec::new();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        let initial = self.initial_states();
        for q in &initial {
            index.insert(q.clone(), states.len());
            states.push(q.clone());
        }
        let mut k = 0;
        while k < states.len() {
            if states.len() > max_states {
                return Err(DtlError::ResourceExhausted(format!("more than {max_states} product states")));
            }
            let q = states[k].clone();
            for (a, mv) in moves.iter().enumerate() {
                for q2 in self.successors(&q, mv) {
                    let t = *index.entry(q2.clone()).or_insert_with(|| {
                        states.push(q2);
                        states.len() - 1
                    });
                    edges.push((k, a, t));
                }
            }
            k += 1;
        }
        let n = self.num_agents();
        let keep: Vec<bool> = if prune {
            productive(states.len(), &edges, &alphabet, n, |s, i| self.component_accepting(i, states[s][i]))
        } else {
            vec![true; states.len()]
        };
        let renum: Vec<Option<usize>> = keep
            .iter()
            .scan(0usize, |next, &k| {
                Some(if k {
                    *next += 1;
                    Some(*next - 1)
                } else {
                    None
                })
            })
            .collect();
        let kept: Vec<usize> = (0..states.len()).filter(|&s| keep[s]).collect();
        let names = kept.iter().map(|&s| self.state_name(&states[s])).collect();
        let mut ts = TransitionSystem::new(alphabet, names);
        for q in &initial {
            if let Some(s) = renum[index[q]] {
                ts.add_initial(s);
            }
        }
        for (s, a, t) in edges {
            if let (Some(s), Some(t)) = (renum[s], renum[t]) {
                ts.add_edge(s, a, t);
            }
        }
        let family = (0..n)
            .map(|i| {
                (
                    format!("F_{}", self.sig.agent_name(Agent::from_index(i))),
                    kept.iter().map(|&s| self.component_accepting(i, states[s][i])).collect(),
                )
            })
            .collect();
        Ok(Gnba::new(ts, family))
    }
}

/// States that can reach a strongly connected set whose internal edges
/// visit every acceptance set and let every agent move.
fn productive(n_states: usize, edges: &[(usize, usize, usize)], alphabet: &[GlobalLetter], n_agents: usize, acc: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut adj: Vec<Vec<((), usize)>> = vec![Vec::new(); n_states];
    for &(s, _, t) in edges {
        adj[s].push(((), t));
    }
    // each state's own good-cycle test is delegated to the SCC engine
    let full_acc = (1u64 << n_agents) - 1;
    let mut good = vec![false; n_states];
    let comp = crate::automata::graph::tarjan(&adj);
    let n_comps = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut marks = vec![0u64; n_comps];
    let mut moved = vec![0u64; n_comps];
    let mut internal = vec![false; n_comps];
    for s in 0..n_states {
        for i in 0..n_agents {
            if acc(s, i) {
                marks[comp[s]] |= 1 << i;
            }
        }
    }
    for &(s, a, t) in edges {
        if comp[s] == comp[t] {
            internal[comp[s]] = true;
            moved[comp[s]] |= alphabet[a].participants().bits();
        }
    }
    for s in 0..n_states {
        let c = comp[s];
        good[s] = internal[c] && marks[c] == full_acc && moved[c] == full_acc;
    }
    // backward reachability to good states
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n_states];
    for &(s, _, t) in edges {
        rev[t].push(s);
    }
    let mut stack: Vec<usize> = (0..n_states).filter(|&s| good[s]).collect();
    let mut keep = good.clone();
    while let Some(t) = stack.pop() {
        for &s in &rev[t] {
            if !keep[s] {
                keep[s] = true;
                stack.push(s);
            }
        }
    }
    keep
}

/// Options for [`satisfiable`].
#[derive(Clone, Copy, Debug)]
pub struct SatOptions {
    pub constraints: DtlConstraints,
    pub max_states: usize,
    pub timeout: Option<Duration>,
    /// Re-check the witness against the automaton and the semantics.
    pub verify: bool,
    pub exec: Execution,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions {
            constraints: DtlConstraints::default(),
            max_states: 2_000_000,
            timeout: None,
            verify: true,
            exec: Execution::Sequential,
        }
    }
}

/// A model of `α` as a fair word, with an accepting run of `D_α`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub word: LassoWord,
    pub run: Lasso<PState>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node {
    q: PState,
    /// Participants of the letter that led here.
    last: u64,
    counter: u16,
}

/// Decides `Mod(α) ≠ ∅` by emptiness of `D_α` with fairness as extra
/// obligations: `ℱ_1 … ℱ_n` then "agent `k` moved last", cycled through one
/// counter. Returns a verified witness when satisfiable.
pub fn satisfiable(sig: &Signature, alpha: &GlobalFormula, opts: &SatOptions) -> Result<Option<Witness>> {
    let d = DtlAutomaton::with_execution(sig, alpha, opts.constraints, opts.exec)?;
    satisfiable_in(&d, opts)
}

pub fn satisfiable_in(d: &DtlAutomaton, opts: &SatOptions) -> Result<Option<Witness>> {
    let n = d.num_agents();
    let obligations = 2 * n;
    let holds = |node: &Node, k: usize| -> bool {
        if k < n {
            d.component_accepting(k, node.q[k])
        } else {
            node.last >> (k - n) & 1 == 1
        }
    };
    let succ = |node: &Node| -> Vec<(GlobalLetter, Node)> {
        let c2 = if holds(node, node.counter as usize) {
            (node.counter as usize + 1) % obligations
        } else {
            node.counter as usize
        } as u16;
        let mut out = Vec::new();
        for mv in d.canonical_moves(&node.q) {
            let succs = d.successors(&node.q, &mv);
            if succs.is_empty() {
                continue;
            }
            let letter = DtlAutomaton::move_letter(&mv);
            for q2 in succs {
                out.push((
                    letter.clone(),
                    Node {
                        q: q2,
                        last: mv.0.bits(),
                        counter: c2,
                    },
                ));
            }
        }
        out
    };
    let accepting = |node: &Node| node.counter == 0 && holds(node, 0);
    let init = d.initial_states().into_iter().map(|q| Node { q, last: 0, counter: 0 });
    let budget = Budget {
        max_states: opts.max_states,
        deadline: opts.timeout.map(|t| Instant::now() + t),
    };
    let path = match nested_dfs(init, succ, accepting, budget) {
        Ok(Some(p)) => p,
        Ok(None) => return Ok(None),
        Err(Exhausted::States(m)) => return Err(DtlError::ResourceExhausted(format!("state limit of {m} reached"))),
        Err(Exhausted::Time) => return Err(DtlError::ResourceExhausted("time limit reached".into())),
    };
    let word = Lasso {
        prefix: path.stem.iter().map(|(_, l)| l.clone()).collect(),
        cycle: path.cycle.iter().map(|(_, l)| l.clone()).collect(),
    };
    let run = Lasso {
        prefix: path.stem.into_iter().map(|(v, _)| v.q).collect(),
        cycle: path.cycle.into_iter().map(|(v, _)| v.q).collect(),
    };
    let w = Witness { word, run };
    if opts.verify {
        verify_witness(d, &w)?;
    }
    Ok(Some(w))
}

/// [`satisfiable`] over many formulas, one task per formula.
pub fn satisfiable_batch(sig: &Signature, alphas: &[GlobalFormula], opts: &SatOptions, exec: Execution) -> Vec<Result<Option<Witness>>> {
    let inner = SatOptions {
        exec: Execution::Sequential,
        ..*opts
    };
    exec.map(alphas, |a| satisfiable(sig, a, &inner))
}

/// The three soundness checks every witness must pass.
pub fn verify_witness(d: &DtlAutomaton, w: &Witness) -> Result<()> {
    if !is_fair(&w.word, d.num_agents()) {
        return Err(DtlError::Internal("witness word is not fair".into()));
    }
    if !d.is_accepting_run(&w.word, &w.run) {
        return Err(DtlError::Internal("witness run is not an accepting run of the automaton".into()));
    }
    let mu = derive_structure(&w.word, d.num_agents())?;
    if !sat_global(&mu, d.alpha()) {
        return Err(DtlError::Internal("witness is not a model of the formula".into()));
    }
    Ok(())
}
