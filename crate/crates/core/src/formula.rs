//! Formula ASTs for the local languages `L_i` and the global language `L`,
//! subformulas, closures and the per-agent projection of formula sets.
//!
//! Negation is normalizing: `LocalFormula::not(LocalFormula::not(f)) == f`, so no
//! stored formula ever carries a double negation and set membership is purely
//! structural.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{DtlError, Result};
use crate::signature::{Agent, Prop, Signature};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LocalNode {
    True,
    Prop(Prop),
    Not(LocalFormula),
    Imp(LocalFormula, LocalFormula),
    Next(LocalFormula),
    Always(LocalFormula),
    /// `©_j[φ]`; the body is a formula of agent `j`.
    Comm(Agent, LocalFormula),
}

/// A formula of some local language `L_i`. The owner is not stored in the
/// formula; it is carried by [`Formula::Local`] or by the enclosing `@_i`/`©_i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalFormula(Arc<LocalNode>);

impl LocalFormula {
    pub fn node(&self) -> &LocalNode {
        &self.0
    }

    pub fn tt() -> Self {
        LocalFormula(Arc::new(LocalNode::True))
    }

    pub fn ff() -> Self {
        Self::not(Self::tt())
    }

    pub fn prop(p: Prop) -> Self {
        LocalFormula(Arc::new(LocalNode::Prop(p)))
    }

    pub fn not(f: LocalFormula) -> Self {
        match f.node() {
            LocalNode::Not(inner) => inner.clone(),
            _ => LocalFormula(Arc::new(LocalNode::Not(f))),
        }
    }

    pub fn imp(a: LocalFormula, b: LocalFormula) -> Self {
        LocalFormula(Arc::new(LocalNode::Imp(a, b)))
    }

    pub fn next(f: LocalFormula) -> Self {
        LocalFormula(Arc::new(LocalNode::Next(f)))
    }

    pub fn always(f: LocalFormula) -> Self {
        LocalFormula(Arc::new(LocalNode::Always(f)))
    }

    pub fn comm(j: Agent, f: LocalFormula) -> Self {
        LocalFormula(Arc::new(LocalNode::Comm(j, f)))
    }

    /// `a ∧ b` as `¬(a → ¬b)`.
    pub fn and(a: LocalFormula, b: LocalFormula) -> Self {
        Self::not(Self::imp(a, Self::not(b)))
    }

    /// `a ∨ b` as `¬a → b`.
    pub fn or(a: LocalFormula, b: LocalFormula) -> Self {
        Self::imp(Self::not(a), b)
    }

    /// `◇φ` as `¬□¬φ`.
    pub fn eventually(f: LocalFormula) -> Self {
        Self::not(Self::always(Self::not(f)))
    }

    pub fn is_negation(&self) -> bool {
        matches!(self.node(), LocalNode::Not(_))
    }

    /// Nesting depth of `○`/`□` (communication bodies count as fresh scopes but
    /// their temporal depth is included).
    pub fn temporal_depth(&self) -> usize {
        match self.node() {
            LocalNode::True | LocalNode::Prop(_) => 0,
            LocalNode::Not(a) => a.temporal_depth(),
            LocalNode::Imp(a, b) => a.temporal_depth().max(b.temporal_depth()),
            LocalNode::Next(a) | LocalNode::Always(a) => 1 + a.temporal_depth(),
            LocalNode::Comm(_, a) => a.temporal_depth(),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        LocalDisplay { f: self, sig }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GlobalNode {
    At(Agent, LocalFormula),
    Not(GlobalFormula),
    Imp(GlobalFormula, GlobalFormula),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalFormula(Arc<GlobalNode>);

impl GlobalFormula {
    pub fn node(&self) -> &GlobalNode {
        &self.0
    }

    pub fn at(i: Agent, f: LocalFormula) -> Self {
        GlobalFormula(Arc::new(GlobalNode::At(i, f)))
    }

    pub fn not(f: GlobalFormula) -> Self {
        match f.node() {
            GlobalNode::Not(inner) => inner.clone(),
            _ => GlobalFormula(Arc::new(GlobalNode::Not(f))),
        }
    }

    pub fn imp(a: GlobalFormula, b: GlobalFormula) -> Self {
        GlobalFormula(Arc::new(GlobalNode::Imp(a, b)))
    }

    pub fn and(a: GlobalFormula, b: GlobalFormula) -> Self {
        Self::not(Self::imp(a, Self::not(b)))
    }

    pub fn or(a: GlobalFormula, b: GlobalFormula) -> Self {
        Self::imp(Self::not(a), b)
    }

    pub fn is_negation(&self) -> bool {
        matches!(self.node(), GlobalNode::Not(_))
    }

    pub fn temporal_depth(&self) -> usize {
        match self.node() {
            GlobalNode::At(_, f) => f.temporal_depth(),
            GlobalNode::Not(a) => a.temporal_depth(),
            GlobalNode::Imp(a, b) => a.temporal_depth().max(b.temporal_depth()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        GlobalDisplay { f: self, sig }
    }
}

/// A member of a closure: either a global formula or a local formula tagged
/// with the agent whose language it belongs to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Global(GlobalFormula),
    Local { owner: Agent, formula: LocalFormula },
}

impl Formula {
    pub fn local(owner: Agent, formula: LocalFormula) -> Self {
        Formula::Local { owner, formula }
    }

    pub fn owner(&self) -> Option<Agent> {
        match self {
            Formula::Global(_) => None,
            Formula::Local { owner, .. } => Some(*owner),
        }
    }

    pub fn negate(&self) -> Formula {
        match self {
            Formula::Global(g) => Formula::Global(GlobalFormula::not(g.clone())),
            Formula::Local { owner, formula } => Formula::Local {
                owner: *owner,
                formula: LocalFormula::not(formula.clone()),
            },
        }
    }

    pub fn is_negation(&self) -> bool {
        match self {
            Formula::Global(g) => g.is_negation(),
            Formula::Local { formula, .. } => formula.is_negation(),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        FormulaDisplay { f: self, sig }
    }
}

/// A finite set of closure members, canonically ordered.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaSet {
    pub owner: Option<Agent>,
    pub members: BTreeSet<Formula>,
}

impl FormulaSet {
    pub fn new(members: impl IntoIterator<Item = Formula>) -> Self {
        FormulaSet {
            owner: None,
            members: members.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter()
    }

    /// `B↓i`: the global formulas of `B` together with its `i`-local formulas.
    pub fn project_down(&self, i: Agent) -> FormulaSet {
        FormulaSet {
            owner: Some(i),
            members: self
                .members
                .iter()
                .filter(|f| f.owner().is_none_or(|o| o == i))
                .cloned()
                .collect(),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        SetDisplay { s: self, sig }
    }
}

impl FromIterator<Formula> for FormulaSet {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        FormulaSet::new(iter)
    }
}

fn collect_local(owner: Agent, f: &LocalFormula, out: &mut BTreeSet<Formula>) {
    out.insert(Formula::local(owner, f.clone()));
    match f.node() {
        LocalNode::True | LocalNode::Prop(_) | LocalNode::Comm(..) => {}
        LocalNode::Not(a) | LocalNode::Next(a) | LocalNode::Always(a) => collect_local(owner, a, out),
        LocalNode::Imp(a, b) => {
            collect_local(owner, a, out);
            collect_local(owner, b, out);
        }
    }
}

fn collect_global(g: &GlobalFormula, out: &mut BTreeSet<Formula>) {
    out.insert(Formula::Global(g.clone()));
    match g.node() {
        GlobalNode::At(i, f) => collect_local(*i, f, out),
        GlobalNode::Not(a) => collect_global(a, out),
        GlobalNode::Imp(a, b) => {
            collect_global(a, out);
            collect_global(b, out);
        }
    }
}

/// `subf_i(φ)`. Communication formulas are atomic: their bodies are not visited.
pub fn subformulas_local(f: &LocalFormula, i: Agent) -> FormulaSet {
    let mut out = BTreeSet::new();
    collect_local(i, f, &mut out);
    FormulaSet {
        owner: Some(i),
        members: out,
    }
}

/// `subf(α)`, including `subf_i(φ)` for every `@_i[φ]` below `α`.
pub fn subformulas_global(alpha: &GlobalFormula) -> FormulaSet {
    let mut out = BTreeSet::new();
    collect_global(alpha, &mut out);
    FormulaSet::new(out)
}

fn close_under_negation(members: BTreeSet<Formula>) -> FormulaSet {
    let negs: Vec<Formula> = members.iter().map(Formula::negate).collect();
    let mut all = members;
    all.extend(negs);
    FormulaSet::new(all)
}

/// `closure(α) = subf(α) ∪ {¬β | β ∈ subf(α)}` with `¬¬β ≡ β`.
pub fn closure(alpha: &GlobalFormula) -> FormulaSet {
    close_under_negation(subformulas_global(alpha).members)
}

/// The closure used to build tableau automata: `closure(α)` extended, for
/// every communication formula `©_j[φ]` it (transitively) contains, with
/// `subf_j(φ)` and the negations. Communication constraints between agents
/// refer to `φ` as a formula of agent `j`, so `j`'s states must decide it.
pub fn tableau_closure(alpha: &GlobalFormula) -> FormulaSet {
    let mut members = subformulas_global(alpha).members;
    let mut pending: Vec<(Agent, LocalFormula)> = comm_bodies(&members);
    while let Some((j, body)) = pending.pop() {
        let mut fresh = BTreeSet::new();
        collect_local(j, &body, &mut fresh);
        let new: BTreeSet<Formula> = fresh.difference(&members).cloned().collect();
        pending.extend(comm_bodies(&new));
        members.extend(new);
    }
    close_under_negation(members)
}

fn comm_bodies(members: &BTreeSet<Formula>) -> Vec<(Agent, LocalFormula)> {
    members
        .iter()
        .filter_map(|f| match f {
            Formula::Local { formula, .. } => match formula.node() {
                LocalNode::Comm(j, body) => Some((*j, body.clone())),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

/// Checks that `f` is a well-formed formula of `L_owner` over `sig`.
pub fn check_local(sig: &Signature, owner: Agent, f: &LocalFormula) -> Result<()> {
    match f.node() {
        LocalNode::True => Ok(()),
        LocalNode::Prop(p) => {
            if p.owner() != owner {
                return Err(DtlError::WrongScope {
                    prop: sig.prop_name(*p).to_string(),
                    owner: sig.agent_name(p.owner()).to_string(),
                    scope: sig.agent_name(owner).to_string(),
                });
            }
            Ok(())
        }
        LocalNode::Not(a) | LocalNode::Next(a) | LocalNode::Always(a) => check_local(sig, owner, a),
        LocalNode::Imp(a, b) => {
            check_local(sig, owner, a)?;
            check_local(sig, owner, b)
        }
        LocalNode::Comm(j, body) => {
            if j.index() >= sig.num_agents() {
                return Err(DtlError::UnknownAgent(format!("#{}", j.index())));
            }
            check_local(sig, *j, body)
        }
    }
}

pub fn check_global(sig: &Signature, g: &GlobalFormula) -> Result<()> {
    match g.node() {
        GlobalNode::At(i, f) => {
            if i.index() >= sig.num_agents() {
                return Err(DtlError::UnknownAgent(format!("#{}", i.index())));
            }
            check_local(sig, *i, f)
        }
        GlobalNode::Not(a) => check_global(sig, a),
        GlobalNode::Imp(a, b) => {
            check_global(sig, a)?;
            check_global(sig, b)
        }
    }
}

/// Propositions occurring anywhere in `α`, including inside communication bodies.
pub fn props_of(alpha: &GlobalFormula) -> BTreeSet<Prop> {
    fn local(f: &LocalFormula, out: &mut BTreeSet<Prop>) {
        match f.node() {
            LocalNode::True => {}
            LocalNode::Prop(p) => {
                out.insert(*p);
            }
            LocalNode::Not(a) | LocalNode::Next(a) | LocalNode::Always(a) | LocalNode::Comm(_, a) => local(a, out),
            LocalNode::Imp(a, b) => {
                local(a, out);
                local(b, out);
            }
        }
    }
    fn global(g: &GlobalFormula, out: &mut BTreeSet<Prop>) {
        match g.node() {
            GlobalNode::At(_, f) => local(f, out),
            GlobalNode::Not(a) => global(a, out),
            GlobalNode::Imp(a, b) => {
                global(a, out);
                global(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    global(alpha, &mut out);
    out
}

struct LocalDisplay<'a> {
    f: &'a LocalFormula,
    sig: &'a Signature,
}

fn write_local(f: &LocalFormula, sig: &Signature, top: bool, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f.node() {
        LocalNode::True => write!(out, "true"),
        LocalNode::Prop(p) => write!(out, "{}", sig.prop_name(*p)),
        LocalNode::Not(a) => {
            write!(out, "!")?;
            write_local(a, sig, false, out)
        }
        LocalNode::Imp(a, b) => {
            if !top {
                write!(out, "(")?;
            }
            write_local(a, sig, false, out)?;
            write!(out, " -> ")?;
            write_local(b, sig, true, out)?;
            if !top {
                write!(out, ")")?;
            }
            Ok(())
        }
        LocalNode::Next(a) => {
            write!(out, "X ")?;
            write_local(a, sig, false, out)
        }
        LocalNode::Always(a) => {
            write!(out, "G ")?;
            write_local(a, sig, false, out)
        }
        LocalNode::Comm(j, a) => {
            write!(out, "C {}[", sig.agent_name(*j))?;
            write_local(a, sig, true, out)?;
            write!(out, "]")
        }
    }
}

impl fmt::Display for LocalDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_local(self.f, self.sig, true, f)
    }
}

struct GlobalDisplay<'a> {
    f: &'a GlobalFormula,
    sig: &'a Signature,
}

fn write_global(g: &GlobalFormula, sig: &Signature, top: bool, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match g.node() {
        GlobalNode::At(i, f) => {
            write!(out, "@{}[", sig.agent_name(*i))?;
            write_local(f, sig, true, out)?;
            write!(out, "]")
        }
        GlobalNode::Not(a) => {
            write!(out, "!")?;
            write_global(a, sig, false, out)
        }
        GlobalNode::Imp(a, b) => {
            if !top {
                write!(out, "(")?;
            }
            write_global(a, sig, false, out)?;
            write!(out, " -> ")?;
            write_global(b, sig, true, out)?;
            if !top {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for GlobalDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_global(self.f, self.sig, true, f)
    }
}

struct FormulaDisplay<'a> {
    f: &'a Formula,
    sig: &'a Signature,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.f {
            Formula::Global(g) => write_global(g, self.sig, true, f),
            Formula::Local { formula, .. } => write_local(formula, self.sig, true, f),
        }
    }
}

struct SetDisplay<'a> {
    s: &'a FormulaSet,
    sig: &'a Signature,
}

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.s.members.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", m.display(self.sig))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fx {
        sig: Signature,
        i: Agent,
        j: Agent,
    }

    fn fx() -> Fx {
        let sig = Signature::new([("i", vec!["p"]), ("j", vec!["q", "q1", "q2"])]).unwrap();
        let i = sig.agent("i").unwrap();
        let j = sig.agent("j").unwrap();
        Fx { sig, i, j }
    }

    fn lp(sig: &Signature, name: &str) -> LocalFormula {
        LocalFormula::prop(sig.prop(name).unwrap())
    }

    /// `@i[X(p -> C j[q])] -> @j[X q]`
    fn running_example(x: &Fx) -> GlobalFormula {
        let s = &x.sig;
        GlobalFormula::imp(
            GlobalFormula::at(
                x.i,
                LocalFormula::next(LocalFormula::imp(lp(s, "p"), LocalFormula::comm(x.j, lp(s, "q")))),
            ),
            GlobalFormula::at(x.j, LocalFormula::next(lp(s, "q"))),
        )
    }

    #[test]
    fn double_negation_collapses() {
        let x = fx();
        let p = lp(&x.sig, "p");
        assert_eq!(LocalFormula::not(LocalFormula::not(p.clone())), p);
        let g = GlobalFormula::at(x.i, p);
        assert_eq!(GlobalFormula::not(GlobalFormula::not(g.clone())), g);
    }

    #[test]
    fn local_subformulas_treat_comm_as_atomic() {
        let x = fx();
        let s = &x.sig;
        let body = LocalFormula::imp(lp(s, "q1"), lp(s, "q2"));
        let comm = LocalFormula::comm(x.j, body);
        let inner = LocalFormula::imp(lp(s, "p"), comm.clone());
        let phi = LocalFormula::always(inner.clone());
        let got = subformulas_local(&phi, x.i);
        let want: FormulaSet = [phi, inner, lp(s, "p"), comm]
            .into_iter()
            .map(|f| Formula::local(x.i, f))
            .collect();
        assert_eq!(got.members, want.members);
        assert!(got.iter().all(|f| f.owner() == Some(x.i)));

        let p = lp(s, "p");
        assert_eq!(subformulas_local(&p, x.i).len(), 1);

        let xq = LocalFormula::next(lp(s, "q"));
        let got = subformulas_local(&xq, x.j);
        assert_eq!(got.len(), 2);
        assert!(got.contains(&Formula::local(x.j, lp(s, "q"))));
    }

    #[test]
    fn global_subformulas_running_example() {
        let x = fx();
        let alpha = running_example(&x);
        let subf = subformulas_global(&alpha);
        assert_eq!(subf.len(), 9);
        let shown: BTreeSet<String> = subf.iter().map(|f| f.display(&x.sig).to_string()).collect();
        for want in [
            "@i[X (p -> C j[q])] -> @j[X q]",
            "@i[X (p -> C j[q])]",
            "@j[X q]",
            "X (p -> C j[q])",
            "p -> C j[q]",
            "p",
            "C j[q]",
            "X q",
            "q",
        ] {
            assert!(shown.contains(want), "missing {want}: {shown:?}");
        }
    }

    #[test]
    fn small_subformula_sets() {
        let x = fx();
        let at = GlobalFormula::at(x.i, lp(&x.sig, "p"));
        assert_eq!(subformulas_global(&at).len(), 2);
        let neg = GlobalFormula::not(at.clone());
        let s = subformulas_global(&neg);
        assert_eq!(s.len(), 3);
        assert!(s.contains(&Formula::Global(neg)));
        assert!(s.contains(&Formula::Global(at)));
        assert!(s.contains(&Formula::local(x.i, lp(&x.sig, "p"))));
    }

    #[test]
    fn closure_basics() {
        let x = fx();
        let at = GlobalFormula::at(x.i, lp(&x.sig, "p"));
        let cl = closure(&at);
        assert_eq!(cl.len(), 4);
        for f in cl.iter() {
            assert!(cl.contains(&f.negate()));
        }
        let alpha = running_example(&x);
        assert_eq!(closure(&alpha).len(), 2 * subformulas_global(&alpha).len());
        // comm body q is already a j-subformula here, so nothing is added
        assert_eq!(tableau_closure(&alpha), closure(&alpha));
    }

    #[test]
    fn tableau_closure_adds_comm_bodies() {
        let x = fx();
        let alpha = GlobalFormula::at(x.i, LocalFormula::next(LocalFormula::comm(x.j, lp(&x.sig, "q"))));
        let cl = closure(&alpha);
        let tcl = tableau_closure(&alpha);
        let q = Formula::local(x.j, lp(&x.sig, "q"));
        assert!(!cl.contains(&q));
        assert!(tcl.contains(&q));
        assert!(tcl.contains(&q.negate()));
        assert_eq!(tcl.len(), cl.len() + 2);
    }

    #[test]
    fn projection_running_example() {
        let x = fx();
        let s = &x.sig;
        let alpha = running_example(&x);
        let xpc = LocalFormula::next(LocalFormula::imp(lp(s, "p"), LocalFormula::comm(x.j, lp(s, "q"))));
        let b = FormulaSet::new([
            Formula::Global(alpha.clone()),
            Formula::local(x.i, xpc.clone()),
            Formula::local(x.i, LocalFormula::comm(x.j, lp(s, "q"))),
            Formula::local(x.j, LocalFormula::next(lp(s, "q"))),
        ]);
        let bi = b.project_down(x.i);
        assert_eq!(
            bi.members,
            FormulaSet::new([
                Formula::Global(alpha.clone()),
                Formula::local(x.i, xpc),
                Formula::local(x.i, LocalFormula::comm(x.j, lp(s, "q"))),
            ])
            .members
        );
        let bj = b.project_down(x.j);
        assert_eq!(
            bj.members,
            FormulaSet::new([Formula::Global(alpha.clone()), Formula::local(x.j, LocalFormula::next(lp(s, "q")))])
                .members
        );
        let globals = FormulaSet::new([Formula::Global(alpha)]);
        assert_eq!(globals.project_down(x.i).members, globals.members);
        assert_eq!(globals.project_down(x.j).members, globals.members);
    }

    #[test]
    fn scope_checks() {
        let x = fx();
        let bad = GlobalFormula::at(x.i, lp(&x.sig, "q"));
        assert!(matches!(check_global(&x.sig, &bad), Err(DtlError::WrongScope { .. })));
        let ok = GlobalFormula::at(x.i, LocalFormula::comm(x.j, lp(&x.sig, "q")));
        assert!(check_global(&x.sig, &ok).is_ok());
    }
}
