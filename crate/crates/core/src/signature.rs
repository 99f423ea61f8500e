//! Distributed signatures: agents, their local propositions, literals and valuations.

use std::collections::HashMap;
use std::fmt;

use crate::error::{DtlError, Result};

/// Index of an agent in its signature. Agent order is the declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Agent(pub(crate) u16);

impl Agent {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        Agent(i as u16)
    }
}

/// A proposition, identified by its owner and its position in the owner's list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop {
    pub(crate) owner: Agent,
    pub(crate) slot: u16,
}

impl Prop {
    pub fn owner(self) -> Agent {
        self.owner
    }

    pub fn slot(self) -> usize {
        self.slot as usize
    }
}

/// `p` or `¬p` for a proposition of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub prop: Prop,
    pub positive: bool,
}

/// A set of agents as a bitmask; agents are limited to 64.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentSet(pub(crate) u64);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn all(n: usize) -> Self {
        if n >= 64 {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(a: Agent) -> Self {
        AgentSet(1 << a.0)
    }

    pub fn from_bits(bits: u64) -> Self {
        AgentSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, a: Agent) -> bool {
        self.0 >> a.0 & 1 == 1
    }

    pub fn insert(&mut self, a: Agent) {
        self.0 |= 1 << a.0;
    }

    pub fn union(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Agent> {
        (0..64u16).filter(move |i| self.0 >> i & 1 == 1).map(Agent)
    }
}

impl FromIterator<Agent> for AgentSet {
    fn from_iter<I: IntoIterator<Item = Agent>>(iter: I) -> Self {
        let mut s = AgentSet::EMPTY;
        for a in iter {
            s.insert(a);
        }
        s
    }
}

/// A total valuation of one agent's propositions. Bit `k` is the truth of the
/// agent's `k`-th proposition; the agent itself is implied by context.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub(crate) u64);

impl Valuation {
    pub fn from_bits(bits: u64) -> Self {
        Valuation(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn holds(self, p: Prop) -> bool {
        self.0 >> p.slot & 1 == 1
    }

    pub fn with(self, p: Prop, value: bool) -> Self {
        if value {
            Valuation(self.0 | 1 << p.slot)
        } else {
            Valuation(self.0 & !(1 << p.slot))
        }
    }
}

#[derive(Clone, Debug)]
struct AgentInfo {
    name: String,
    props: Vec<String>,
}

/// `⟨Id, {Prop_i}⟩` with a fixed agent order.
#[derive(Clone, Debug)]
pub struct Signature {
    agents: Vec<AgentInfo>,
    agent_index: HashMap<String, Agent>,
    prop_index: HashMap<String, Prop>,
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.agents.len() == other.agents.len()
            && self
                .agents
                .iter()
                .zip(&other.agents)
                .all(|(a, b)| a.name == b.name && a.props == b.props)
    }
}

impl Eq for Signature {}

const RESERVED: &[&str] = &["X", "G", "F", "C", "true", "false"];

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&s)
}

impl Signature {
    /// Builds a signature from `(agent, propositions)` pairs in agent order.
    pub fn new<A, P, S>(decl: impl IntoIterator<Item = (A, P)>) -> Result<Self>
    where
        A: Into<String>,
        P: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut agents = Vec::new();
        let mut agent_index = HashMap::new();
        let mut prop_index = HashMap::new();
        for (a, props) in decl {
            let name: String = a.into();
            if !valid_ident(&name) {
                return Err(DtlError::Signature(format!("invalid agent name `{name}`")));
            }
            let id = Agent(agents.len() as u16);
            if agent_index.insert(name.clone(), id).is_some() {
                return Err(DtlError::Signature(format!("duplicate agent `{name}`")));
            }
            let mut names = Vec::new();
            for p in props {
                let p: String = p.into();
                if !valid_ident(&p) {
                    return Err(DtlError::Signature(format!("invalid proposition name `{p}`")));
                }
                let prop = Prop {
                    owner: id,
                    slot: names.len() as u16,
                };
                if prop_index.insert(p.clone(), prop).is_some() {
                    return Err(DtlError::Signature(format!(
                        "proposition `{p}` declared for more than one agent"
                    )));
                }
                names.push(p);
            }
            if names.len() > 63 {
                return Err(DtlError::Signature(format!("agent `{name}` has more than 63 propositions")));
            }
            agents.push(AgentInfo { name, props: names });
        }
        if agents.is_empty() {
            return Err(DtlError::Signature("at least one agent is required".into()));
        }
        if agents.len() > 64 {
            return Err(DtlError::Signature("at most 64 agents are supported".into()));
        }
        Ok(Signature {
            agents,
            agent_index,
            prop_index,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.agents.len()).map(Agent::from_index)
    }

    pub fn agent(&self, name: &str) -> Result<Agent> {
        self.agent_index
            .get(name)
            .copied()
            .ok_or_else(|| DtlError::UnknownAgent(name.to_string()))
    }

    pub fn agent_name(&self, a: Agent) -> &str {
        &self.agents[a.index()].name
    }

    pub fn prop(&self, name: &str) -> Result<Prop> {
        self.prop_index
            .get(name)
            .copied()
            .ok_or_else(|| DtlError::UnknownProp(name.to_string()))
    }

    pub fn prop_name(&self, p: Prop) -> &str {
        &self.agents[p.owner.index()].props[p.slot()]
    }

    pub fn props(&self, a: Agent) -> impl Iterator<Item = Prop> + '_ {
        (0..self.agents[a.index()].props.len()).map(move |k| Prop {
            owner: a,
            slot: k as u16,
        })
    }

    pub fn num_props(&self, a: Agent) -> usize {
        self.agents[a.index()].props.len()
    }

    /// `lit_i`, positive literals first.
    pub fn literals(&self, a: Agent) -> Vec<Literal> {
        let mut out: Vec<Literal> = self.props(a).map(|prop| Literal { prop, positive: true }).collect();
        out.extend(self.props(a).map(|prop| Literal { prop, positive: false }));
        out
    }

    /// `Val_i`: all `2^|Prop_i|` valuations, in increasing bit order.
    pub fn valuations(&self, a: Agent) -> Vec<Valuation> {
        (0..1u64 << self.num_props(a)).map(Valuation).collect()
    }

    pub fn valuation_literals(&self, a: Agent, v: Valuation) -> Vec<Literal> {
        self.props(a)
            .map(|prop| Literal {
                prop,
                positive: v.holds(prop),
            })
            .collect()
    }

    /// Valuation as `{p, !q}`.
    pub fn fmt_valuation(&self, a: Agent, v: Valuation) -> String {
        let parts: Vec<String> = self
            .props(a)
            .map(|p| {
                if v.holds(p) {
                    self.prop_name(p).to_string()
                } else {
                    format!("!{}", self.prop_name(p))
                }
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.agents.iter().map(|a| a.name.as_str()).collect();
        writeln!(f, "agents: {}", names.join(", "))?;
        for a in &self.agents {
            writeln!(f, "props {}: {}", a.name, a.props.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new([("i", vec!["p"]), ("j", vec!["q1", "q2"]), ("k", vec![])]).unwrap()
    }

    #[test]
    fn valuation_counts() {
        let s = sig();
        let i = s.agent("i").unwrap();
        let j = s.agent("j").unwrap();
        let k = s.agent("k").unwrap();
        assert_eq!(s.valuations(i).len(), 2);
        assert_eq!(s.valuations(j).len(), 4);
        // empty product: exactly one (empty) valuation
        assert_eq!(s.valuations(k), vec![Valuation(0)]);
        let p = s.prop("p").unwrap();
        let shown: Vec<String> = s.valuations(i).into_iter().map(|v| s.fmt_valuation(i, v)).collect();
        assert_eq!(shown, vec!["{!p}", "{p}"]);
        assert!(s.valuations(i)[1].holds(p));
    }

    #[test]
    fn each_valuation_decides_every_prop_once() {
        let s = sig();
        let j = s.agent("j").unwrap();
        for v in s.valuations(j) {
            let lits = s.valuation_literals(j, v);
            for p in s.props(j) {
                let pos = lits.contains(&Literal { prop: p, positive: true });
                let neg = lits.contains(&Literal { prop: p, positive: false });
                assert!(pos ^ neg);
            }
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(Signature::new([("i", vec!["p"]), ("i", vec!["q"])]).is_err());
        assert!(Signature::new([("i", vec!["p"]), ("j", vec!["p"])]).is_err());
        assert!(Signature::new(Vec::<(&str, Vec<&str>)>::new()).is_err());
        assert!(Signature::new([("X", vec!["p"])]).is_err());
        assert!(Signature::new([("i", vec!["G"])]).is_err());
    }

    #[test]
    fn agent_sets() {
        let mut s = AgentSet::EMPTY;
        s.insert(Agent(0));
        s.insert(Agent(2));
        assert_eq!(s.len(), 2);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![Agent(0), Agent(2)]);
        assert!(!s.contains(Agent(1)));
        assert_eq!(AgentSet::all(3).len(), 3);
    }
}
