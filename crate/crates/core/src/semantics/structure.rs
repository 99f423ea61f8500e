//! Ultimately periodic interpretation structures.
//!
//! Events are `e_1, e_2, …`; `events.get(k)` is `Ids(e_{k+1})`. Each agent's
//! local life-cycle is its events in index order, and its local states are
//! numbered by how many of its events occurred. `labels[i].get(m)` is the
//! valuation of agent `i`'s `m`-th local state.
//!
//! A structure is stored *aligned*: the label lasso of agent `i` has exactly
//! as many prefix entries as `i` has events in the event prefix, and a loop as
//! long as `i`'s events in the event loop. [`LassoStructure::new`] unrolls the
//! event lasso until every label lasso fits.

use crate::error::{DtlError, Result};
use crate::signature::{Agent, AgentSet, Signature, Valuation};
use crate::word::{lcm, starved_agents, Lasso, LassoWord};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoStructure {
    events: Lasso<AgentSet>,
    labels: Vec<Lasso<Valuation>>,
    agents: Vec<AgentTable>,
    /// `counts[g][j]`: events of `j` among `e_1..e_{g+1}`, for `g < span`.
    counts: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct AgentTable {
    /// Events of this agent in the event prefix.
    pub prefix: usize,
    /// Events of this agent in one pass of the event loop; positive.
    pub period: usize,
    /// `event_of_state[m]` (for `1 ≤ m ≤ prefix + period`): 0-based index of
    /// the event that produced local state `m`. Entry 0 is unused.
    pub event_of_state: Vec<usize>,
}

impl AgentTable {
    /// Canonical representative of local state `m`: states past
    /// `prefix + period` repeat with the loop.
    #[inline]
    pub fn canon(&self, m: usize) -> usize {
        let top = self.prefix + self.period;
        if m <= top {
            m
        } else {
            self.prefix + 1 + (m - self.prefix - 1) % self.period
        }
    }

    /// Number of canonical local states.
    #[inline]
    pub fn width(&self) -> usize {
        self.prefix + self.period + 1
    }
}

impl LassoStructure {
    /// Builds a structure from event participation and per-agent labelings of
    /// local states. Every agent must participate in the event loop (so every
    /// local life-cycle is infinite) and every event needs a participant.
    pub fn new(n_agents: usize, events: Lasso<AgentSet>, labels: Vec<Lasso<Valuation>>) -> Result<Self> {
        if labels.len() != n_agents {
            return Err(DtlError::MalformedStructure(format!(
                "{} labelings for {} agents",
                labels.len(),
                n_agents
            )));
        }
        if events.cycle.is_empty() || labels.iter().any(|l| l.cycle.is_empty()) {
            return Err(DtlError::MalformedStructure("empty loop".into()));
        }
        if events.iter_positions().any(|e| e.is_empty()) {
            return Err(DtlError::MalformedStructure("event without participants".into()));
        }
        let all = AgentSet::all(n_agents);
        if events.iter_positions().any(|e| e.union(all) != all) {
            return Err(DtlError::MalformedStructure("event names an undeclared agent".into()));
        }
        let in_loop = events.cycle.iter().fold(AgentSet::EMPTY, |a, e| a.union(*e));
        let starved: Vec<String> = (0..n_agents)
            .map(Agent::from_index)
            .filter(|a| !in_loop.contains(*a))
            .map(|a| format!("#{}", a.index()))
            .collect();
        if !starved.is_empty() {
            return Err(DtlError::UnfairWord(starved));
        }

        let count = |seq: &[AgentSet], i: usize| seq.iter().filter(|e| e.contains(Agent::from_index(i))).count();
        // loop repetitions so that each label loop divides the agent's events per loop
        let mut reps = 1usize;
        for (i, lab) in labels.iter().enumerate() {
            let c = count(&events.cycle, i);
            let need = lab.cycle.len() / crate::word::gcd(lab.cycle.len(), c);
            reps = lcm(reps, need);
        }
        // extra loop copies in the prefix so that label prefixes fit
        let mut extra = 0usize;
        for (i, lab) in labels.iter().enumerate() {
            let p = count(&events.prefix, i);
            let c = count(&events.cycle, i) * reps;
            if lab.prefix.len() > p {
                extra = extra.max((lab.prefix.len() - p).div_ceil(c));
            }
        }
        let mut prefix = events.prefix.clone();
        for _ in 0..extra * reps {
            prefix.extend(events.cycle.iter().copied());
        }
        let mut cycle = Vec::with_capacity(events.cycle.len() * reps);
        for _ in 0..reps {
            cycle.extend(events.cycle.iter().copied());
        }
        let events = Lasso { prefix, cycle };
        let aligned: Vec<Lasso<Valuation>> = labels
            .iter()
            .enumerate()
            .map(|(i, lab)| {
                let p = count(&events.prefix, i);
                let c = count(&events.cycle, i);
                Lasso {
                    prefix: lab.unroll(p),
                    cycle: (p..p + c).map(|m| *lab.get(m)).collect(),
                }
            })
            .collect();
        Ok(Self::from_aligned(n_agents, events, aligned))
    }

    fn from_aligned(n_agents: usize, events: Lasso<AgentSet>, labels: Vec<Lasso<Valuation>>) -> Self {
        let span = events.span();
        let mut counts = Vec::with_capacity(span);
        let mut running = vec![0u32; n_agents];
        let mut agents: Vec<AgentTable> = (0..n_agents)
            .map(|i| AgentTable {
                prefix: labels[i].prefix.len(),
                period: labels[i].cycle.len(),
                event_of_state: vec![usize::MAX],
            })
            .collect();
        for (g, e) in events.iter_positions().enumerate() {
            for a in e.iter() {
                running[a.index()] += 1;
                agents[a.index()].event_of_state.push(g);
            }
            counts.push(running.clone());
        }
        LassoStructure {
            events,
            labels,
            agents,
            counts,
        }
    }

    /// `μ^w`: events from the letters' participants, labels from `w↓i`.
    pub fn from_word(w: &LassoWord, n_agents: usize) -> Result<Self> {
        let starved = starved_agents(w, n_agents);
        if !starved.is_empty() {
            return Err(DtlError::UnfairWord(
                starved.into_iter().map(|a| format!("#{}", a.index())).collect(),
            ));
        }
        let events = w.map(|a| a.participants());
        let labels = (0..n_agents)
            .map(|i| {
                let a = Agent::from_index(i);
                Lasso {
                    prefix: w.prefix.iter().filter_map(|l| l.get(a).copied()).collect(),
                    cycle: w.cycle.iter().filter_map(|l| l.get(a).copied()).collect(),
                }
            })
            .collect();
        Ok(Self::from_aligned(n_agents, events, labels))
    }

    pub fn num_agents(&self) -> usize {
        self.labels.len()
    }

    pub fn events(&self) -> &Lasso<AgentSet> {
        &self.events
    }

    pub fn labels(&self, i: Agent) -> &Lasso<Valuation> {
        &self.labels[i.index()]
    }

    /// `Ids(e_k)` for `k ≥ 1`.
    pub fn ids(&self, k: usize) -> AgentSet {
        assert!(k >= 1, "events are numbered from 1");
        *self.events.get(k - 1)
    }

    /// `ϑ_i` at local state `m`.
    pub fn label(&self, i: Agent, m: usize) -> Valuation {
        *self.labels[i.index()].get(m)
    }

    pub(crate) fn table(&self, i: Agent) -> &AgentTable {
        &self.agents[i.index()]
    }

    /// Events (as 0-based indices) up to `g` inclusive, of agent `j`, for `g < span`.
    pub(crate) fn count_through(&self, g: usize, j: Agent) -> usize {
        self.counts[g][j.index()] as usize
    }

    /// `|ξ^k|_i|`: the local state of agent `i` in the global state `{e_1,…,e_k}`.
    pub fn local_state_at(&self, i: Agent, k: usize) -> usize {
        if k == 0 {
            return 0;
        }
        let span = self.events.span();
        if k <= span {
            return self.count_through(k - 1, i);
        }
        let p = self.events.prefix.len();
        let l = self.events.cycle.len();
        let t = &self.agents[i.index()];
        let laps = (k - p) / l;
        let rest = (k - p) % l;
        let partial = if rest == 0 {
            0
        } else {
            self.count_through(p + rest - 1, i) - t.prefix
        };
        t.prefix + laps * t.period + partial
    }

    /// `Ev_i ∩ {e_1, …, e_n}` as event numbers (1-based).
    pub fn local_events(&self, i: Agent, n: usize) -> Vec<usize> {
        (1..=n).filter(|&k| self.ids(k).contains(i)).collect()
    }

    /// Index of the event producing local state `m ≥ 1` of agent `i`, 1-based.
    pub fn last_event(&self, i: Agent, m: usize) -> Option<usize> {
        if m == 0 {
            return None;
        }
        let t = &self.agents[i.index()];
        if m <= t.prefix + t.period {
            return Some(t.event_of_state[m] + 1);
        }
        let laps = (m - t.prefix - 1) / t.period;
        let c = t.canon(m);
        Some(t.event_of_state[c] + 1 + laps * self.events.cycle.len())
    }

    /// Causal predecessors: `e_a ≤ e_b` under `(∪_i ≤_i)*`, for events up to `n`.
    /// Returned as `below[b][a]`, 1-based.
    pub fn causality(&self, n: usize) -> Vec<Vec<bool>> {
        let mut below = vec![vec![false; n + 1]; n + 1];
        let mut last: Vec<Option<usize>> = vec![None; self.num_agents()];
        for b in 1..=n {
            below[b][b] = true;
            for i in self.ids(b).iter() {
                if let Some(prev) = last[i.index()] {
                    for a in 1..=n {
                        if below[prev][a] {
                            below[b][a] = true;
                        }
                    }
                }
                last[i.index()] = Some(b);
            }
        }
        below
    }

    /// All global states (causally down-closed event sets) among `e_1..e_n`,
    /// each as a sorted list of event numbers. Intended for small `n`.
    pub fn global_states_upto(&self, n: usize) -> Vec<Vec<usize>> {
        assert!(n < 20, "global state enumeration is exponential");
        let below = self.causality(n);
        let mut out = Vec::new();
        for mask in 0u32..1 << n {
            let members: Vec<usize> = (1..=n).filter(|k| mask >> (k - 1) & 1 == 1).collect();
            let closed = members
                .iter()
                .all(|&b| (1..=n).all(|a| !below[b][a] || mask >> (a - 1) & 1 == 1));
            if closed {
                out.push(members);
            }
        }
        out.sort_by_key(|s| (s.len(), s.clone()));
        out
    }

    /// Checks that each label is a valuation of the right agent.
    pub fn check_signature(&self, sig: &Signature) -> Result<()> {
        if sig.num_agents() != self.num_agents() {
            return Err(DtlError::MalformedStructure("agent count differs from signature".into()));
        }
        for i in sig.agents() {
            let limit = 1u64 << sig.num_props(i);
            if self.labels[i.index()].iter_positions().any(|v| v.bits() >= limit) {
                return Err(DtlError::MalformedStructure(format!(
                    "label of agent `{}` mentions undeclared propositions",
                    sig.agent_name(i)
                )));
            }
        }
        Ok(())
    }
}
