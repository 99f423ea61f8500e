//! Elementary sets and the local tableau automata `G_i`.
//!
//! The closure is indexed by its *bases*: members that are not negations.
//! An elementary set is then a bit vector over the bases relevant to one
//! agent (all global formulas and that agent's local formulas); bit set
//! means the base is in the set, clear means its negation is.

use std::collections::HashMap;

use crate::automata::{Gnba, TransitionSystem};
use crate::error::{DtlError, Result};
use crate::exec::Execution;
use crate::formula::{subformulas_global, tableau_closure, Formula, FormulaSet, GlobalFormula, GlobalNode, LocalFormula, LocalNode};
use crate::signature::{Agent, Prop, Signature, Valuation};

/// Membership bits over the bases of a closure.
pub type Bits = u128;

/// A closure member in terms of a base: `positive == false` means `¬base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lit {
    pub base: usize,
    pub positive: bool,
}

impl Lit {
    #[inline]
    pub fn holds(self, bits: Bits) -> bool {
        (bits >> self.base & 1 == 1) == self.positive
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    True,
    Prop(Prop),
    Imp(Lit, Lit),
    Next(Lit),
    Always(Lit),
    /// The body is `None` when it is not in the closure (plain closure only).
    Comm(Agent, Option<Lit>),
    At(Agent, Lit),
    GImp(Lit, Lit),
}

/// The tableau closure of `α`, with base indexing.
#[derive(Clone, Debug)]
pub struct Closure {
    alpha: GlobalFormula,
    set: FormulaSet,
    bases: Vec<Formula>,
    owners: Vec<Option<Agent>>,
    kinds: Vec<Kind>,
    index: HashMap<Formula, usize>,
    /// `@_i[φ] ∈ subf(α)`; i-consistency is only required for these.
    in_subf: Vec<bool>,
}

fn size_of(f: &Formula) -> usize {
    fn local(f: &LocalFormula) -> usize {
        match f.node() {
            LocalNode::True | LocalNode::Prop(_) | LocalNode::Comm(..) => 1,
            LocalNode::Not(a) | LocalNode::Next(a) | LocalNode::Always(a) => 1 + local(a),
            LocalNode::Imp(a, b) => 1 + local(a) + local(b),
        }
    }
    fn global(g: &GlobalFormula) -> usize {
        match g.node() {
            GlobalNode::At(_, f) => 1 + local(f),
            GlobalNode::Not(a) => 1 + global(a),
            GlobalNode::Imp(a, b) => 1 + global(a) + global(b),
        }
    }
    match f {
        Formula::Global(g) => global(g),
        Formula::Local { formula, .. } => local(formula),
    }
}

impl Closure {
    /// Indexes the tableau closure of `α` (closure plus communication bodies).
    pub fn new(alpha: &GlobalFormula) -> Result<Self> {
        Self::from_set(alpha, tableau_closure(alpha))
    }

    /// Indexes `closure(α)` exactly as defined, without communication bodies.
    pub fn plain(alpha: &GlobalFormula) -> Result<Self> {
        Self::from_set(alpha, crate::formula::closure(alpha))
    }

    fn from_set(alpha: &GlobalFormula, set: FormulaSet) -> Result<Self> {
        let mut bases: Vec<Formula> = set.iter().filter(|f| !f.is_negation()).cloned().collect();
        if bases.len() > Bits::BITS as usize {
            return Err(DtlError::ResourceExhausted(format!(
                "closure has {} base formulas; at most {} are supported",
                bases.len(),
                Bits::BITS
            )));
        }
        bases.sort_by(|a, b| size_of(a).cmp(&size_of(b)).then_with(|| a.cmp(b)));
        let index: HashMap<Formula, usize> = bases.iter().cloned().enumerate().map(|(k, f)| (f, k)).collect();
        let try_lit = |f: Formula| -> Option<Lit> {
            if f.is_negation() {
                index.get(&f.negate()).map(|&base| Lit { base, positive: false })
            } else {
                index.get(&f).map(|&base| Lit { base, positive: true })
            }
        };
        let lit = |f: Formula| try_lit(f).expect("closure is closed under subformulas");
        let subf = subformulas_global(alpha);
        let mut kinds = Vec::with_capacity(bases.len());
        let mut owners = Vec::with_capacity(bases.len());
        let mut in_subf = Vec::with_capacity(bases.len());
        for f in &bases {
            owners.push(f.owner());
            in_subf.push(subf.contains(f));
            let kind = match f {
                Formula::Local { owner, formula } => {
                    let l = |g: &LocalFormula| lit(Formula::local(*owner, g.clone()));
                    match formula.node() {
                        LocalNode::True => Kind::True,
                        LocalNode::Prop(p) => Kind::Prop(*p),
                        LocalNode::Imp(a, b) => Kind::Imp(l(a), l(b)),
                        LocalNode::Next(a) => Kind::Next(l(a)),
                        LocalNode::Always(a) => Kind::Always(l(a)),
                        LocalNode::Comm(j, a) => Kind::Comm(*j, try_lit(Formula::local(*j, a.clone()))),
                        LocalNode::Not(_) => unreachable!("bases are not negations"),
                    }
                }
                Formula::Global(g) => match g.node() {
                    GlobalNode::At(i, a) => Kind::At(*i, lit(Formula::local(*i, a.clone()))),
                    GlobalNode::Imp(a, b) => Kind::GImp(lit(Formula::Global(a.clone())), lit(Formula::Global(b.clone()))),
                    GlobalNode::Not(_) => unreachable!("bases are not negations"),
                },
            };
            kinds.push(kind);
        }
        Ok(Closure {
            alpha: alpha.clone(),
            set,
            bases,
            owners,
            kinds,
            index,
            in_subf,
        })
    }

    pub fn alpha(&self) -> &GlobalFormula {
        &self.alpha
    }

    /// The closure as a formula set.
    pub fn formulas(&self) -> &FormulaSet {
        &self.set
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn base(&self, k: usize) -> &Formula {
        &self.bases[k]
    }

    pub(crate) fn kind(&self, k: usize) -> &Kind {
        &self.kinds[k]
    }

    /// The base literal of a closure member.
    pub fn lit(&self, f: &Formula) -> Option<Lit> {
        if f.is_negation() {
            self.index.get(&f.negate()).map(|&base| Lit { base, positive: false })
        } else {
            self.index.get(f).map(|&base| Lit { base, positive: true })
        }
    }

    /// Bases of the projection `↓i`, in size order.
    pub fn relevant(&self, i: Agent) -> Vec<usize> {
        (0..self.bases.len())
            .filter(|&k| self.owners[k].is_none_or(|o| o == i))
            .collect()
    }

    /// Communication bases `©_j[φ]` owned by `i`, as `(base, j, φ)`.
    pub fn comms_of(&self, i: Agent) -> Vec<(usize, Agent, Option<Lit>)> {
        (0..self.bases.len())
            .filter_map(|k| match self.kinds[k] {
                Kind::Comm(j, body) if self.owners[k] == Some(i) => Some((k, j, body)),
                _ => None,
            })
            .collect()
    }

    /// Global bases.
    pub fn globals(&self) -> Vec<usize> {
        (0..self.bases.len()).filter(|&k| self.owners[k].is_none()).collect()
    }

    /// The formula set denoted by `bits` over the bases in `relevant`.
    pub fn to_set(&self, owner: Option<Agent>, relevant: &[usize], bits: Bits) -> FormulaSet {
        FormulaSet {
            owner,
            members: relevant
                .iter()
                .map(|&k| {
                    if bits >> k & 1 == 1 {
                        self.bases[k].clone()
                    } else {
                        self.bases[k].negate()
                    }
                })
                .collect(),
        }
    }

    /// Inverse of [`Closure::to_set`]; members outside the closure are an error.
    pub fn to_bits(&self, b: &FormulaSet) -> Result<Bits> {
        let mut bits = 0;
        for f in b.iter() {
            let l = self
                .lit(f)
                .ok_or_else(|| DtlError::Internal("formula outside the closure".into()))?;
            if l.positive {
                bits |= 1 << l.base;
            }
        }
        Ok(bits)
    }
}

/// Enumerates `Q_i`: projections of `i`-elementary sets, in a fixed order.
/// Free choices (propositions, `○`, `©`, foreign `@_j`, and `□φ` when `φ`
/// holds) are branched on; every other base is computed from smaller ones.
pub fn enumerate_elementary(c: &Closure, i: Agent) -> Vec<Bits> {
    enumerate_elementary_with(c, i, Execution::Sequential)
}

pub fn enumerate_elementary_with(c: &Closure, i: Agent, exec: Execution) -> Vec<Bits> {
    let relevant = c.relevant(i);
    // split on the first free base so that the two halves can run in parallel
    let first_free = relevant.iter().position(|&k| branch(c, i, k, 0).len() == 2);
    match first_free {
        None => {
            let mut out = Vec::new();
            extend(c, i, &relevant, 0, 0, &mut out);
            out
        }
        Some(pos) => {
            let mut seeds = Vec::new();
            extend_until(c, i, &relevant, 0, 0, pos, &mut seeds);
            exec.flat_map(&seeds, |&(bits, at)| {
                let mut out = Vec::new();
                extend(c, i, &relevant, at, bits, &mut out);
                out
            })
        }
    }
}

/// Allowed values of base `k` given the smaller bases in `bits`.
fn branch(c: &Closure, i: Agent, k: usize, bits: Bits) -> Vec<bool> {
    match *c.kind(k) {
        Kind::True => vec![true],
        Kind::Prop(_) | Kind::Next(_) | Kind::Comm(..) => vec![false, true],
        Kind::Imp(a, b) | Kind::GImp(a, b) => vec![!a.holds(bits) || b.holds(bits)],
        Kind::Always(a) => {
            if a.holds(bits) {
                vec![false, true]
            } else {
                vec![false]
            }
        }
        Kind::At(j, a) => {
            if j == i && c.in_subf[k] {
                vec![a.holds(bits)]
            } else {
                vec![false, true]
            }
        }
    }
}

/// The unique set over `relevant` that takes `value` on free bases and the
/// forced value elsewhere.
pub(crate) fn complete_bits(c: &Closure, i: Agent, relevant: &[usize], value: impl Fn(usize) -> bool) -> Bits {
    relevant.iter().fold(0, |bits, &k| {
        let opts = branch(c, i, k, bits);
        let v = if opts.len() == 1 { opts[0] } else { value(k) };
        if v {
            bits | 1 << k
        } else {
            bits
        }
    })
}

fn extend(c: &Closure, i: Agent, relevant: &[usize], at: usize, bits: Bits, out: &mut Vec<Bits>) {
    if at == relevant.len() {
        out.push(bits);
        return;
    }
    let k = relevant[at];
    for v in branch(c, i, k, bits) {
        extend(c, i, relevant, at + 1, if v { bits | 1 << k } else { bits }, out);
    }
}

fn extend_until(c: &Closure, i: Agent, relevant: &[usize], at: usize, bits: Bits, stop: usize, out: &mut Vec<(Bits, usize)>) {
    if at > stop {
        out.push((bits, at));
        return;
    }
    let k = relevant[at];
    for v in branch(c, i, k, bits) {
        extend_until(c, i, relevant, at + 1, if v { bits | 1 << k } else { bits }, stop, out);
    }
}

/// Predicates on arbitrary formula sets, stated directly on closure members.
/// They serve as the specification that [`enumerate_elementary`] is checked against.
pub mod predicates {
    use super::*;

    fn imp_parts(f: &Formula) -> Option<(Formula, Formula)> {
        match f {
            Formula::Local { owner, formula } => match formula.node() {
                LocalNode::Imp(a, b) => Some((Formula::local(*owner, a.clone()), Formula::local(*owner, b.clone()))),
                _ => None,
            },
            Formula::Global(g) => match g.node() {
                GlobalNode::Imp(a, b) => Some((Formula::Global(a.clone()), Formula::Global(b.clone()))),
                _ => None,
            },
        }
    }

    /// Implications decided classically, no `γ, ¬γ` pair, `⊤` present when in scope.
    pub fn propositionally_consistent(b: &FormulaSet, scope: &FormulaSet) -> bool {
        for f in scope.iter() {
            if let Some((g1, g2)) = imp_parts(f) {
                let rhs = b.contains(&g1.negate()) || b.contains(&g2);
                if b.contains(f) != rhs {
                    return false;
                }
            }
            if let Formula::Local { formula, .. } = f {
                if matches!(formula.node(), LocalNode::True) && !b.contains(f) {
                    return false;
                }
            }
        }
        b.iter().all(|f| !b.contains(&f.negate()))
    }

    /// `□φ ∈ B ⇒ φ ∈ B`.
    pub fn always_consistent(b: &FormulaSet) -> bool {
        b.iter().all(|f| match f {
            Formula::Local { owner, formula } => match formula.node() {
                LocalNode::Always(a) => b.contains(&Formula::local(*owner, a.clone())),
                _ => true,
            },
            _ => true,
        })
    }

    /// `@_i[φ] ∈ B ⇔ φ ∈ B` for `@_i[φ] ∈ subf(α)`.
    pub fn globally_consistent(b: &FormulaSet, i: Agent, alpha: &GlobalFormula) -> bool {
        subformulas_global(alpha).iter().all(|f| match f {
            Formula::Global(g) => match g.node() {
                GlobalNode::At(j, a) if *j == i => b.contains(f) == b.contains(&Formula::local(i, a.clone())),
                _ => true,
            },
            _ => true,
        })
    }

    /// `γ ∉ B ⇒ ¬γ ∈ B` for every `γ` in scope.
    pub fn maximal(b: &FormulaSet, scope: &FormulaSet) -> bool {
        scope.iter().all(|f| b.contains(f) || b.contains(&f.negate()))
    }

    pub fn is_elementary(b: &FormulaSet, i: Agent, alpha: &GlobalFormula, scope: &FormulaSet) -> bool {
        propositionally_consistent(b, scope) && always_consistent(b) && globally_consistent(b, i, alpha) && maximal(b, scope)
    }

    /// All subsets of `scope` passing [`is_elementary`]; exponential, for tests.
    pub fn brute_force(scope: &FormulaSet, i: Agent, alpha: &GlobalFormula) -> Vec<FormulaSet> {
        let members: Vec<&Formula> = scope.iter().collect();
        assert!(members.len() <= 24, "brute force over {} formulas", members.len());
        let mut out = Vec::new();
        for mask in 0u32..1 << members.len() {
            let b = FormulaSet {
                owner: scope.owner,
                members: members
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, f)| (*f).clone())
                    .collect(),
            };
            if is_elementary(&b, i, alpha, scope) {
                out.push(b);
            }
        }
        out
    }
}

/// `G_i` with its states kept as bit sets.
#[derive(Clone, Debug)]
pub struct LocalTableau {
    pub agent: Agent,
    pub relevant: Vec<usize>,
    pub states: Vec<Bits>,
    /// Successors under conditions (1) and (2), independent of the letter.
    pub succ: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    /// `(□φ base, F_□φ)` in base order.
    pub acceptance: Vec<(usize, Vec<bool>)>,
    /// Bit mask (in valuation bit order) of `i`'s propositions occurring in the closure.
    pub prop_mask: u64,
    /// Valuation of each state on those propositions; other propositions false.
    pub valuation: Vec<Valuation>,
    /// `marks[q]`: bit `k` set iff `q ∈` the `k`-th acceptance set.
    pub marks: Vec<u64>,
}

impl LocalTableau {
    pub fn build(c: &Closure, i: Agent, exec: Execution) -> Result<Self> {
        let relevant = c.relevant(i);
        let states = enumerate_elementary_with(c, i, exec);
        let mut nexts = Vec::new();
        let mut boxes = Vec::new();
        let mut prop_mask = 0u64;
        let mut props = Vec::new();
        let mut comms = 0 as Bits;
        for &k in &relevant {
            match *c.kind(k) {
                Kind::Next(a) => nexts.push((k, a)),
                Kind::Always(a) => boxes.push((k, a)),
                Kind::Prop(p) => {
                    prop_mask |= 1 << p.slot();
                    props.push((k, p));
                }
                Kind::Comm(..) => comms |= 1 << k,
                _ => {}
            }
        }
        if boxes.len() >= 64 {
            return Err(DtlError::ResourceExhausted("more than 63 always-formulas for one agent".into()));
        }
        let succ = exec.map(&states, |&b| {
            states
                .iter()
                .enumerate()
                .filter(|(_, &b2)| {
                    nexts.iter().all(|&(k, a)| (b >> k & 1 == 1) == a.holds(b2))
                        && boxes
                            .iter()
                            .all(|&(k, a)| (b >> k & 1 == 1) == (a.holds(b) && b2 >> k & 1 == 1))
                })
                .map(|(n, _)| n)
                .collect::<Vec<usize>>()
        });
        let alpha = c.lit(&Formula::Global(c.alpha().clone())).expect("α is in its closure");
        let initial = (0..states.len())
            .filter(|&q| alpha.holds(states[q]) && states[q] & comms == 0)
            .collect();
        let acceptance: Vec<(usize, Vec<bool>)> = boxes
            .iter()
            .map(|&(k, a)| (k, states.iter().map(|&b| b >> k & 1 == 1 || !a.holds(b)).collect()))
            .collect();
        let marks = (0..states.len())
            .map(|q| {
                acceptance
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, s))| s[q])
                    .fold(0u64, |m, (n, _)| m | 1 << n)
            })
            .collect();
        let valuation = states
            .iter()
            .map(|&b| {
                props.iter().fold(Valuation::default(), |v, &(k, p)| v.with(p, b >> k & 1 == 1))
            })
            .collect();
        Ok(LocalTableau {
            agent: i,
            relevant,
            states,
            succ,
            initial,
            acceptance,
            prop_mask,
            valuation,
            marks,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// `v` agrees with `B` on every proposition of the closure.
    #[inline]
    pub fn enables(&self, q: usize, v: Valuation) -> bool {
        v.bits() & self.prop_mask == self.valuation[q].bits()
    }

    /// `δ_i(B, v)`.
    pub fn delta(&self, q: usize, v: Valuation) -> &[usize] {
        if self.enables(q, v) {
            &self.succ[q]
        } else {
            &[]
        }
    }

    pub fn state_set(&self, c: &Closure, q: usize) -> FormulaSet {
        c.to_set(Some(self.agent), &self.relevant, self.states[q])
    }

    /// The explicit GNBA over `Val_i`, states named by their formula sets.
    pub fn to_gnba(&self, c: &Closure, sig: &Signature) -> Gnba<Valuation> {
        let names = (0..self.num_states())
            .map(|q| self.state_set(c, q).display(sig).to_string())
            .collect();
        let alphabet = sig.valuations(self.agent);
        let mut ts = TransitionSystem::new(alphabet.clone(), names);
        for &q in &self.initial {
            ts.add_initial(q);
        }
        for q in 0..self.num_states() {
            for (a, &v) in alphabet.iter().enumerate() {
                for &t in self.delta(q, v) {
                    ts.add_edge(q, a, t);
                }
            }
        }
        let family = self
            .acceptance
            .iter()
            .map(|(k, s)| (format!("F[{}]", c.base(*k).display(sig)), s.clone()))
            .collect();
        Gnba::new(ts, family)
    }
}

/// Convenience: `G_i` for `α` as an explicit GNBA.
pub fn build_local_gnba(sig: &Signature, alpha: &GlobalFormula, i: Agent) -> Result<Gnba<Valuation>> {
    let c = Closure::new(alpha)?;
    Ok(LocalTableau::build(&c, i, Execution::Sequential)?.to_gnba(&c, sig))
}

/// Whether `w_i ∈ L(G_i)`.
pub fn local_language_check(sig: &Signature, alpha: &GlobalFormula, i: Agent, w: &crate::word::Lasso<Valuation>) -> Result<bool> {
    Ok(build_local_gnba(sig, alpha, i)?.accepts(w))
}
