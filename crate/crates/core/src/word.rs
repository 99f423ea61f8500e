//! Ultimately periodic sequences, global letters and fair words.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DtlError, Result};
use crate::signature::{Agent, AgentSet, Signature, Valuation};

/// `prefix · cycle^ω`. The cycle is never empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lasso<T> {
    pub prefix: Vec<T>,
    #[serde(rename = "loop")]
    pub cycle: Vec<T>,
}

impl<T> Lasso<T> {
    pub fn new(prefix: Vec<T>, cycle: Vec<T>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(DtlError::MalformedWord("loop must be nonempty".into()));
        }
        Ok(Lasso { prefix, cycle })
    }

    pub fn periodic(cycle: Vec<T>) -> Result<Self> {
        Self::new(Vec::new(), cycle)
    }

    /// The `k`-th element of the infinite sequence.
    pub fn get(&self, k: usize) -> &T {
        if k < self.prefix.len() {
            &self.prefix[k]
        } else {
            &self.cycle[(k - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Number of distinct positions (`|prefix| + |loop|`).
    pub fn span(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Position reached after `k`, folded into `0..span()`.
    pub fn next_position(&self, k: usize) -> usize {
        if k + 1 < self.span() {
            k + 1
        } else {
            self.prefix.len()
        }
    }

    pub fn iter_positions(&self) -> impl Iterator<Item = &T> {
        self.prefix.iter().chain(self.cycle.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Lasso<U> {
        Lasso {
            prefix: self.prefix.iter().map(&mut f).collect(),
            cycle: self.cycle.iter().map(&mut f).collect(),
        }
    }

    /// First `n` elements of the infinite sequence.
    pub fn unroll(&self, n: usize) -> Vec<T>
    where
        T: Clone,
    {
        (0..n).map(|k| self.get(k).clone()).collect()
    }

    /// The same infinite sequence with `prefix · first(loop)` and the loop
    /// rotated by one.
    pub fn rotate(&self) -> Lasso<T>
    where
        T: Clone,
    {
        let mut prefix = self.prefix.clone();
        prefix.push(self.cycle[0].clone());
        let mut cycle = self.cycle[1..].to_vec();
        cycle.push(self.cycle[0].clone());
        Lasso { prefix, cycle }
    }

    /// Whether two lassos denote the same infinite sequence.
    pub fn same_sequence(&self, other: &Lasso<T>) -> bool
    where
        T: PartialEq,
    {
        let horizon = self.prefix.len().max(other.prefix.len()) + lcm(self.cycle.len(), other.cycle.len());
        (0..horizon).all(|k| self.get(k) == other.get(k))
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A letter of a distributed alphabet: a nonempty partial map from agents to
/// local letters, at most one per agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalLetter<L = Valuation> {
    parts: Vec<Option<L>>,
}

impl<L> GlobalLetter<L> {
    /// `parts[i]` is agent `i`'s symbol, if it participates.
    pub fn new(parts: Vec<Option<L>>) -> Result<Self> {
        if parts.iter().all(Option::is_none) {
            return Err(DtlError::MalformedWord("a global letter needs at least one participant".into()));
        }
        Ok(GlobalLetter { parts })
    }

    pub fn single(n_agents: usize, a: Agent, l: L) -> Self {
        let mut parts: Vec<Option<L>> = (0..n_agents).map(|_| None).collect();
        parts[a.index()] = Some(l);
        GlobalLetter { parts }
    }

    pub fn get(&self, a: Agent) -> Option<&L> {
        self.parts.get(a.index()).and_then(Option::as_ref)
    }

    pub fn participants(&self) -> AgentSet {
        self.parts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_some())
            .map(|(k, _)| Agent::from_index(k))
            .collect()
    }

    pub fn num_agents(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Option<L>] {
        &self.parts
    }
}

pub type LassoWord<L = Valuation> = Lasso<GlobalLetter<L>>;

/// Agents that never occur in the loop of `w`.
pub fn starved_agents<L>(w: &LassoWord<L>, n_agents: usize) -> Vec<Agent> {
    let seen = w
        .cycle
        .iter()
        .fold(AgentSet::EMPTY, |acc, a| acc.union(a.participants()));
    (0..n_agents)
        .map(Agent::from_index)
        .filter(|a| !seen.contains(*a))
        .collect()
}

/// Every agent participates in infinitely many letters.
pub fn is_fair<L>(w: &LassoWord<L>, n_agents: usize) -> bool {
    starved_agents(w, n_agents).is_empty()
}

/// The error for an unfair word, naming the starved agents.
pub fn unfair_error<L>(w: &LassoWord<L>, sig: &Signature) -> DtlError {
    DtlError::UnfairWord(
        starved_agents(w, sig.num_agents())
            .into_iter()
            .map(|a| sig.agent_name(a).to_string())
            .collect(),
    )
}

/// `w↓i`: the letters in which `i` participates, stripped to `i`'s symbol.
/// Prefix letters project into the prefix and loop letters into the loop.
pub fn project_word<L: Clone>(w: &LassoWord<L>, i: Agent) -> Result<Lasso<L>> {
    let prefix: Vec<L> = w.prefix.iter().filter_map(|a| a.get(i).cloned()).collect();
    let cycle: Vec<L> = w.cycle.iter().filter_map(|a| a.get(i).cloned()).collect();
    if cycle.is_empty() {
        return Err(DtlError::UnfairWord(vec![format!("#{}", i.index())]));
    }
    Ok(Lasso { prefix, cycle })
}

impl<L: fmt::Debug> GlobalLetter<L> {
    pub fn debug_string(&self) -> String {
        let parts: Vec<String> = self.parts.iter().flatten().map(|l| format!("{l:?}")).collect();
        format!("{{{}}}", parts.join(","))
    }
}

pub fn fmt_letter(sig: &Signature, a: &GlobalLetter) -> String {
    let parts: Vec<String> = sig
        .agents()
        .filter_map(|i| a.get(i).map(|v| format!("{}:{}", sig.agent_name(i), sig.fmt_valuation(i, *v))))
        .collect();
    format!("{{{}}}", parts.join(" "))
}

pub fn fmt_word(sig: &Signature, w: &LassoWord) -> String {
    let p: Vec<String> = w.prefix.iter().map(|a| fmt_letter(sig, a)).collect();
    let l: Vec<String> = w.cycle.iter().map(|a| fmt_letter(sig, a)).collect();
    format!("prefix [{}] loop [{}]", p.join(" "), l.join(" "))
}
