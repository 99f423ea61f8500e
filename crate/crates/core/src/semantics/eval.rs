//! Direct satisfaction `⊨_i` and anchored `⊨` on lasso structures.
//!
//! Formulas are compiled into a program whose nodes are evaluated bottom-up,
//! each node filling a table indexed by canonical local states of its agent.
//! Local suffixes repeat with the agent's loop, so those states are enough.

use std::collections::HashMap;

use crate::formula::{GlobalFormula, GlobalNode, LocalFormula, LocalNode};
use crate::signature::{Agent, Prop};

use super::structure::LassoStructure;

#[derive(Clone, Debug)]
enum Op {
    True,
    Prop(Prop),
    Not(usize),
    Imp(usize, usize),
    Next(usize),
    Always(usize),
    Comm(Agent, usize),
}

#[derive(Clone, Debug)]
enum GOp {
    At(usize),
    Not(Box<GOp>),
    Imp(Box<GOp>, Box<GOp>),
}

/// A set of local formulas (with their owners) compiled for repeated evaluation.
#[derive(Clone, Debug, Default)]
pub struct Program {
    nodes: Vec<(Agent, Op)>,
    index: HashMap<(Agent, LocalFormula), usize>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `φ ∈ L_i`; returns its node id. Shared subformulas share nodes.
    pub fn add_local(&mut self, i: Agent, f: &LocalFormula) -> usize {
        if let Some(&id) = self.index.get(&(i, f.clone())) {
            return id;
        }
        let op = match f.node() {
            LocalNode::True => Op::True,
            LocalNode::Prop(p) => Op::Prop(*p),
            LocalNode::Not(a) => Op::Not(self.add_local(i, a)),
            LocalNode::Imp(a, b) => {
                let a = self.add_local(i, a);
                Op::Imp(a, self.add_local(i, b))
            }
            LocalNode::Next(a) => Op::Next(self.add_local(i, a)),
            LocalNode::Always(a) => Op::Always(self.add_local(i, a)),
            LocalNode::Comm(j, a) => Op::Comm(*j, self.add_local(*j, a)),
        };
        let id = self.nodes.len();
        self.nodes.push((i, op));
        self.index.insert((i, f.clone()), id);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Evaluates every node on `mu`, reusing `out`'s storage.
    pub fn eval_into(&self, mu: &LassoStructure, out: &mut Table) {
        out.offsets.clear();
        let mut total = 0;
        for (a, _) in &self.nodes {
            out.offsets.push(total);
            total += mu.table(*a).width();
        }
        out.data.clear();
        out.data.resize(total, false);
        out.agents.clear();
        out.agents.extend(self.nodes.iter().map(|(a, _)| *a));
        out.tables.clear();
        out.tables.extend((0..mu.num_agents()).map(|i| {
            let t = mu.table(Agent::from_index(i));
            (t.prefix, t.period)
        }));

        for (id, (a, op)) in self.nodes.iter().enumerate() {
            let t = mu.table(*a);
            let w = t.width();
            let base = out.offsets[id];
            match op {
                Op::True => out.data[base..base + w].fill(true),
                Op::Prop(p) => {
                    for m in 0..w {
                        out.data[base + m] = mu.label(*a, m).holds(*p);
                    }
                }
                Op::Not(x) => {
                    let xb = out.offsets[*x];
                    for m in 0..w {
                        out.data[base + m] = !out.data[xb + m];
                    }
                }
                Op::Imp(x, y) => {
                    let (xb, yb) = (out.offsets[*x], out.offsets[*y]);
                    for m in 0..w {
                        out.data[base + m] = !out.data[xb + m] || out.data[yb + m];
                    }
                }
                Op::Next(x) => {
                    let xb = out.offsets[*x];
                    for m in 0..w {
                        out.data[base + m] = out.data[xb + t.canon(m + 1)];
                    }
                }
                Op::Always(x) => {
                    let xb = out.offsets[*x];
                    // the loop part holds iff x holds on the whole loop
                    let loop_all = (t.prefix + 1..w).all(|m| out.data[xb + m]);
                    for m in t.prefix + 1..w {
                        out.data[base + m] = loop_all;
                    }
                    let mut acc = loop_all;
                    for m in (0..=t.prefix).rev() {
                        acc = acc && out.data[xb + m];
                        out.data[base + m] = acc;
                    }
                }
                Op::Comm(j, x) => {
                    let xb = out.offsets[*x];
                    out.data[base] = false;
                    for m in 1..w {
                        let g = t.event_of_state[m];
                        out.data[base + m] = mu.events().get(g).contains(*j) && out.data[xb + mu.count_through(g, *j)];
                    }
                }
            }
        }
    }

    pub fn eval(&self, mu: &LassoStructure) -> Table {
        let mut t = Table::default();
        self.eval_into(mu, &mut t);
        t
    }
}

/// Truth tables produced by [`Program::eval`].
#[derive(Clone, Debug, Default)]
pub struct Table {
    offsets: Vec<usize>,
    data: Vec<bool>,
    agents: Vec<Agent>,
    tables: Vec<(usize, usize)>,
}

impl Table {
    /// Truth of node `id` at local state `m` (any natural number) of its agent.
    pub fn at(&self, id: usize, m: usize) -> bool {
        let (p, c) = self.tables[self.agents[id].index()];
        let m = if m <= p + c { m } else { p + 1 + (m - p - 1) % c };
        self.data[self.offsets[id] + m]
    }
}

/// A global formula compiled on top of a [`Program`].
#[derive(Clone, Debug)]
pub struct GlobalProgram {
    program: Program,
    root: GOp,
}

impl GlobalProgram {
    pub fn new(alpha: &GlobalFormula) -> Self {
        let mut program = Program::new();
        let root = compile_global(&mut program, alpha);
        GlobalProgram { program, root }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// `μ, ∅ ⊨ α`.
    pub fn holds(&self, mu: &LassoStructure, scratch: &mut Table) -> bool {
        self.program.eval_into(mu, scratch);
        eval_gop(&self.root, scratch, &|_| 0)
    }

    /// `μ, ξ ⊨ α` where agent `i` is at local state `local(i)`.
    pub fn holds_at(&self, table: &Table, local: &dyn Fn(Agent) -> usize) -> bool {
        eval_gop(&self.root, table, local)
    }
}

fn compile_global(p: &mut Program, g: &GlobalFormula) -> GOp {
    match g.node() {
        GlobalNode::At(i, f) => GOp::At(p.add_local(*i, f)),
        GlobalNode::Not(a) => GOp::Not(Box::new(compile_global(p, a))),
        GlobalNode::Imp(a, b) => GOp::Imp(Box::new(compile_global(p, a)), Box::new(compile_global(p, b))),
    }
}

fn eval_gop(g: &GOp, t: &Table, local: &dyn Fn(Agent) -> usize) -> bool {
    match g {
        GOp::At(id) => t.at(*id, local(t.agents[*id])),
        GOp::Not(a) => !eval_gop(a, t, local),
        GOp::Imp(a, b) => !eval_gop(a, t, local) || eval_gop(b, t, local),
    }
}

/// `μ_i, ξ_i ⊨_i φ` where `|ξ_i| = m`.
pub fn sat_local(mu: &LassoStructure, i: Agent, m: usize, f: &LocalFormula) -> bool {
    let mut p = Program::new();
    let id = p.add_local(i, f);
    p.eval(mu).at(id, m)
}

/// Anchored satisfaction `μ, ∅ ⊨ α`.
pub fn sat_global(mu: &LassoStructure, alpha: &GlobalFormula) -> bool {
    GlobalProgram::new(alpha).holds(mu, &mut Table::default())
}

/// `μ, ξ^k ⊨ α` for the global state `{e_1, …, e_k}`.
pub fn sat_global_at(mu: &LassoStructure, k: usize, alpha: &GlobalFormula) -> bool {
    let gp = GlobalProgram::new(alpha);
    let table = gp.program.eval(mu);
    gp.holds_at(&table, &|a| mu.local_state_at(a, k))
}

/// Whether `□φ` agrees with `φ ∧ ○□φ` at local state `m`.
pub fn always_fixpoint_check(mu: &LassoStructure, i: Agent, m: usize, phi: &LocalFormula) -> bool {
    let mut p = Program::new();
    let box_id = p.add_local(i, &LocalFormula::always(phi.clone()));
    let phi_id = p.add_local(i, phi);
    let t = p.eval(mu);
    t.at(box_id, m) == (t.at(phi_id, m) && t.at(box_id, m + 1))
}
