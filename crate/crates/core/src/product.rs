//! Distributed Büchi automata over agent-indexed component NBAs.
//!
//! A global letter names at most one symbol per agent. Agents absent from a
//! letter keep their component state; present agents move in their component.
//! Acceptance is generalized with one set per agent.

use std::collections::HashSet;

use crate::automata::{Gnba, Letter, LassoRun, Nba, TransitionSystem};
use crate::error::{DtlError, Result};
use crate::signature::Agent;
use crate::word::{is_fair, lcm, GlobalLetter, Lasso, LassoWord};

/// All nonempty partial maps from agents to their component alphabets,
/// ordered by participating agent set (smaller first, then lexicographic on
/// agent indices) and then by the symbols in component alphabet order.
pub fn global_alphabet<L: Clone>(alphabets: &[Vec<L>]) -> Vec<GlobalLetter<L>> {
    let n = alphabets.len();
    let mut subsets: Vec<Vec<usize>> = (1u64..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut out = Vec::new();
    for s in subsets {
        let mut choice = vec![0usize; s.len()];
        if s.iter().any(|&i| alphabets[i].is_empty()) {
            continue;
        }
        'next: loop {
            let mut parts: Vec<Option<L>> = vec![None; n];
            for (k, &i) in s.iter().enumerate() {
                parts[i] = Some(alphabets[i][choice[k]].clone());
            }
            out.push(GlobalLetter::new(parts).expect("nonempty participation"));
            // odometer, last agent fastest
            for k in (0..s.len()).rev() {
                choice[k] += 1;
                if choice[k] < alphabets[s[k]].len() {
                    continue 'next;
                }
                choice[k] = 0;
            }
            break;
        }
    }
    out
}

/// An explicit DNBA: the product automaton with its tuple states.
#[derive(Clone, Debug)]
pub struct Dnba<L> {
    components: Vec<Nba<L>>,
    tuples: Vec<Vec<usize>>,
    gnba: Gnba<GlobalLetter<L>>,
}

impl<L: Letter> Dnba<L> {
    /// `⊗_i A_i` over all state tuples. Component alphabets must be disjoint.
    pub fn build(components: Vec<Nba<L>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, c) in components.iter().enumerate() {
            for a in c.ts.alphabet() {
                if !seen.insert(a.clone()) {
                    return Err(DtlError::AlphabetOverlap(format!("symbol {a:?} of agent #{i} is shared with another agent")));
                }
            }
        }
        Ok(Self::build_tagged(components))
    }

    /// As [`Dnba::build`], for components whose symbols are made distinct by
    /// the agent slot of the global letter (e.g. valuations).
    pub fn build_tagged(components: Vec<Nba<L>>) -> Self {
        let sizes: Vec<usize> = components.iter().map(|c| c.ts.num_states()).collect();
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for &n in &sizes {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    (0..n).map(move |q| {
                        let mut t = t.clone();
                        t.push(q);
                        t
                    })
                })
                .collect();
        }
        let alphabets: Vec<Vec<L>> = components.iter().map(|c| c.ts.alphabet().to_vec()).collect();
        let alphabet = global_alphabet(&alphabets);
        let names = tuples.iter().map(|t| tuple_name(&components, t)).collect();
        let mut ts = TransitionSystem::new(alphabet.clone(), names);
        let index_of = |t: &[usize]| t.iter().zip(&sizes).fold(0, |acc, (&q, &n)| acc * n + q);
        for (s, t) in tuples.iter().enumerate() {
            if t.iter().enumerate().all(|(i, &q)| components[i].ts.is_initial(q)) {
                ts.add_initial(s);
            }
            for (a, letter) in alphabet.iter().enumerate() {
                for succ in product_successors(&components, t, letter) {
                    ts.add_edge(s, a, index_of(&succ));
                }
            }
        }
        let family = (0..components.len())
            .map(|i| {
                (
                    format!("F{}", i + 1),
                    tuples.iter().map(|t| components[i].is_accepting(t[i])).collect(),
                )
            })
            .collect();
        Dnba {
            components,
            tuples,
            gnba: Gnba::new(ts, family),
        }
    }

    pub fn components(&self) -> &[Nba<L>] {
        &self.components
    }

    pub fn num_agents(&self) -> usize {
        self.components.len()
    }

    pub fn tuple(&self, s: usize) -> &[usize] {
        &self.tuples[s]
    }

    pub fn state_of(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.iter().position(|t| t == tuple)
    }

    /// The product as a generalized automaton over global letters.
    pub fn as_gnba(&self) -> &Gnba<GlobalLetter<L>> {
        &self.gnba
    }

    /// `q ∈ ℱ_i`.
    pub fn in_family(&self, i: Agent, s: usize) -> bool {
        self.gnba.family()[i.index()].1[s]
    }

    /// Accepting lasso run on a fair word; unfair words are rejected.
    pub fn lasso_accepts(&self, w: &LassoWord<L>) -> Option<LassoRun> {
        if !is_fair(w, self.num_agents()) {
            return None;
        }
        self.gnba.lasso_accepts(w)
    }

    pub fn accepts(&self, w: &LassoWord<L>) -> bool {
        self.lasso_accepts(w).is_some()
    }

    /// `τ↓_{w,i}` for a run given as product state indices.
    pub fn project_run(&self, run: &LassoRun, w: &LassoWord<L>, i: Agent) -> Result<LassoRun> {
        if !self.gnba.ts.is_run(w, run) {
            return Err(DtlError::MisalignedRun("not a run of the product on this word".into()));
        }
        let tuples = run.map(|&s| self.tuples[s].clone());
        project_tuples(&tuples, w, i)
    }
}

fn tuple_name<L: Letter>(components: &[Nba<L>], t: &[usize]) -> String {
    let parts: Vec<&str> = t.iter().enumerate().map(|(i, &q)| components[i].ts.name(q)).collect();
    format!("<{}>", parts.join(","))
}

/// Successor tuples of `t` on `letter`: stuttering for absent agents.
pub fn product_successors<L: Letter>(components: &[Nba<L>], t: &[usize], letter: &GlobalLetter<L>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::with_capacity(t.len())];
    for (i, c) in components.iter().enumerate() {
        let options: Vec<usize> = match letter.get(Agent::from_index(i)) {
            None => vec![t[i]],
            Some(a) => c.ts.step(t[i], a).to_vec(),
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&q| {
                    let mut p = prefix.clone();
                    p.push(q);
                    p
                })
            })
            .collect();
    }
    out
}

/// Projects a run of tuple states onto agent `i`: component `i`, keeping the
/// first state and the target of every letter `i` participates in.
pub fn project_tuples<T: Clone + PartialEq, L>(run: &Lasso<Vec<T>>, w: &LassoWord<L>, i: Agent) -> Result<Lasso<T>> {
    let p = run.prefix.len().max(w.prefix.len());
    let l = lcm(run.cycle.len(), w.cycle.len());
    let mut seq = vec![run.get(0)[i.index()].clone()];
    let mut prefix_len = 0;
    for k in 0..p + l {
        if w.get(k).get(i).is_some() {
            seq.push(run.get(k + 1)[i.index()].clone());
            if k < p {
                prefix_len += 1;
            }
        }
    }
    let total = seq.len() - 1;
    if total == prefix_len {
        return Err(DtlError::UnfairWord(vec![format!("#{}", i.index())]));
    }
    // seq[total] closes the loop back to seq[prefix_len]
    if seq[total] != seq[prefix_len] {
        return Err(DtlError::MisalignedRun("projected run does not close its loop".into()));
    }
    Ok(Lasso {
        prefix: seq[..prefix_len].to_vec(),
        cycle: seq[prefix_len..total].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::{a1, a2};

    fn letter(s: &str) -> GlobalLetter<char> {
        let mut parts = vec![None, None];
        for c in s.chars() {
            if c.is_ascii_digit() {
                parts[0] = Some(c);
            } else {
                parts[1] = Some(c);
            }
        }
        GlobalLetter::new(parts).unwrap()
    }

    fn word(prefix: &str, cycle: &str) -> LassoWord<char> {
        Lasso::new(
            prefix.split_whitespace().map(letter).collect(),
            cycle.split_whitespace().map(letter).collect(),
        )
        .unwrap()
    }

    #[test]
    fn alphabet_order() {
        let a = global_alphabet(&[vec!['0', '1'], vec!['a', 'b']]);
        let shown: Vec<String> = a
            .iter()
            .map(|l| l.parts().iter().flatten().collect::<String>())
            .collect();
        assert_eq!(shown, vec!["0", "1", "a", "b", "0a", "0b", "1a", "1b"]);
    }

    #[test]
    fn stuttering_and_overlap() {
        let d = Dnba::build(vec![a1(), a2()]).unwrap();
        let s = d.state_of(&[0, 1]).unwrap();
        let g = d.as_gnba();
        for (k, l) in g.ts.alphabet().iter().enumerate() {
            if l.get(Agent::from_index(1)).is_none() {
                for &t in g.ts.successors(s, k) {
                    assert_eq!(d.tuple(t)[1], 1);
                }
            }
        }
        assert!(matches!(Dnba::build(vec![a1(), a1()]), Err(DtlError::AlphabetOverlap(_))));
    }

    #[test]
    fn projections_of_the_example_word() {
        let d = Dnba::build(vec![a1(), a2()]).unwrap();
        let w = word("1 a 1b 0b", "0 b 0b");
        let run = d.lasso_accepts(&w).unwrap();
        for i in 0..2 {
            let a = Agent::from_index(i);
            let pr = d.project_run(&run, &w, a).unwrap();
            let pw = crate::word::project_word(&w, a).unwrap();
            assert!(d.components()[i].is_accepting_run(&pw, &pr));
        }
        assert!(!d.accepts(&word("1 a 1b 0b", "0")));
    }
}
