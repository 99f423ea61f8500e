//! Between words and structures: `μ^w`, linearizations, `w^{μ,ℓ}`, the
//! canonical accepting run of a model, and isomorphism of lasso structures.

use std::collections::HashMap;

use crate::automata::advance_counter;
use crate::dalpha::{DtlAutomaton, PState};
use crate::error::{DtlError, Result};
use crate::formula::{Formula, FormulaSet};
use crate::semantics::{derive_structure, sat_global, sat_local, LassoStructure};
use crate::signature::{Agent, AgentSet};
use crate::tableau::complete_bits;
use crate::word::{lcm, GlobalLetter, Lasso, LassoWord};

/// The structure induced by a fair word.
pub fn word_to_structure(w: &LassoWord, n_agents: usize) -> Result<LassoStructure> {
    derive_structure(w, n_agents)
}

/// As [`word_to_structure`], also checking that every letter agrees with
/// the state its agent reads it from in `run`.
pub fn word_to_structure_checked(d: &DtlAutomaton, w: &LassoWord, run: &Lasso<PState>) -> Result<LassoStructure> {
    let mu = derive_structure(w, d.num_agents())?;
    let horizon = w.prefix.len().max(run.prefix.len()) + lcm(w.cycle.len(), run.cycle.len());
    for k in 0..horizon {
        for (i, v) in w.get(k).parts().iter().enumerate() {
            let Some(v) = v else { continue };
            let b = d.unpack(i, run.get(k)[i]).0;
            if !d.local(Agent::from_index(i)).enables(b, *v) {
                return Err(DtlError::LabelMismatch {
                    event: k + 1,
                    agent: d.signature().agent_name(Agent::from_index(i)).to_string(),
                });
            }
        }
    }
    Ok(mu)
}

/// An order-preserving enumeration `ℓ` of events that permutes a finite
/// window and is the index order beyond it. Events are 0-based here:
/// `ℓ(k + 1) = e_{window[k] + 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Linearization {
    window: Vec<usize>,
}

impl Linearization {
    pub fn identity() -> Self {
        Linearization::default()
    }

    /// `window` must be a permutation of `0..window.len()`.
    pub fn from_window(window: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; window.len()];
        for &e in &window {
            if e >= window.len() || std::mem::replace(&mut seen[e], true) {
                return Err(DtlError::PreconditionFailed("linearization window is not a permutation".into()));
            }
        }
        Ok(Linearization { window })
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    /// The 0-based event enumerated at 0-based position `k`.
    pub fn event(&self, k: usize) -> usize {
        self.window.get(k).copied().unwrap_or(k)
    }

    /// `ξ^k`, as sorted 1-based event numbers.
    pub fn xi(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..k).map(|n| self.event(n) + 1).collect();
        out.sort_unstable();
        out
    }

    /// Causal predecessors come first.
    pub fn is_valid_for(&self, mu: &LassoStructure) -> bool {
        let n = self.window.len();
        let below = mu.causality(n);
        let mut pos = vec![0; n];
        for (k, &e) in self.window.iter().enumerate() {
            pos[e] = k;
        }
        (0..n).all(|b| (0..n).all(|a| !below[b + 1][a + 1] || pos[a] <= pos[b]))
    }
}

pub fn default_linearization(_mu: &LassoStructure) -> Linearization {
    Linearization::identity()
}

/// `w^{μ,ℓ}`: the `k`-th letter is read by the participants of `ℓ(k + 1)`
/// at their local states in `ξ^k`.
pub fn structure_to_word(mu: &LassoStructure, lin: &Linearization) -> LassoWord {
    let events = mu.events();
    let p = events.prefix.len().max(lin.window.len());
    let l = events.cycle.len();
    let mut local = vec![0usize; mu.num_agents()];
    let letters: Vec<GlobalLetter> = (0..p + l)
        .map(|k| {
            let ids: AgentSet = *events.get(lin.event(k));
            let mut parts = vec![None; mu.num_agents()];
            for i in ids.iter() {
                parts[i.index()] = Some(mu.label(i, local[i.index()]));
                local[i.index()] += 1;
            }
            GlobalLetter::new(parts).expect("events have participants")
        })
        .collect();
    let mut prefix = letters;
    let cycle = prefix.split_off(p);
    Lasso { prefix, cycle }
}

/// The run of `D_α` read off a model: at every position, each component holds
/// the closure formulas true at its agent's current local state, counters
/// following the acceptance sets.
#[derive(Clone, Debug)]
pub struct CanonicalRun {
    pub word: LassoWord,
    pub sets: Lasso<Vec<FormulaSet>>,
    pub run: Lasso<PState>,
}

pub fn build_canonical_run(d: &DtlAutomaton, mu: &LassoStructure, lin: &Linearization) -> Result<CanonicalRun> {
    if !sat_global(mu, d.alpha()) {
        return Err(DtlError::PreconditionFailed("the structure is not a model of the formula".into()));
    }
    if !d.constraints().communication_bodies {
        return Err(DtlError::PreconditionFailed("canonical runs need the extended closure".into()));
    }
    if !lin.is_valid_for(mu) {
        return Err(DtlError::PreconditionFailed("linearization is not order-preserving".into()));
    }
    let n = d.num_agents();
    let w = structure_to_word(mu, lin);
    let c = d.closure();
    let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
    let mut elementary = |i: usize, m: usize| -> Result<usize> {
        if let Some(&b) = cache.get(&(i, m)) {
            return Ok(b);
        }
        let a = Agent::from_index(i);
        let t = d.local(a);
        let bits = complete_bits(c, a, &t.relevant, |k| match c.base(k) {
            Formula::Local { formula, .. } => sat_local(mu, a, m, formula),
            Formula::Global(g) => sat_global(mu, g),
        });
        let b = t
            .states
            .iter()
            .position(|&s| s == bits)
            .ok_or_else(|| DtlError::Internal(format!("local state {m} of agent #{i} gives no elementary set")))?;
        cache.insert((i, m), b);
        Ok(b)
    };
    let (p, l) = (w.prefix.len(), w.cycle.len());
    let mut local = vec![0usize; n];
    let mut counter = vec![0usize; n];
    let mut states: Vec<PState> = Vec::new();
    let mut loop_starts: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    // component sets repeat from p + l on; unroll until counters repeat too
    let (start, end) = loop {
        if k >= p + l && (k - p) % l == 0 {
            if let Some(s) = loop_starts.iter().position(|c| *c == counter) {
                break (p + (s + 1) * l, k);
            }
            loop_starts.push(counter.clone());
        }
        let q: Vec<u32> = (0..n)
            .map(|i| Ok(d.pack(i, elementary(i, local[i])?, counter[i])))
            .collect::<Result<_>>()?;
        for i in w.get(k).participants().iter() {
            let ii = i.index();
            let b = d.unpack(ii, q[ii]).0;
            let t = d.local(i);
            counter[ii] = advance_counter(counter[ii], t.marks[b], t.acceptance.len());
            local[ii] += 1;
        }
        states.push(q.into_boxed_slice());
        k += 1;
    };
    let cycle = states.split_off(start);
    states.truncate(start);
    debug_assert_eq!(start + cycle.len(), end);
    let run = Lasso { prefix: states, cycle };
    let sets = run.map(|q| d.state_sets(q));
    Ok(CanonicalRun { word: w, sets, run })
}

/// `μ₁ ≅_f μ₂` with `f` the order-preserving bijection that sends the `n`-th
/// event of each agent to its `n`-th event; `map[k]` is `f` on 0-based event
/// `k` over the checked window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsomorphismWitness {
    pub map: Vec<usize>,
}

/// Finds an event map that carries one structure onto the other, or `None`. Periodicity is checked
/// over a window of two common periods past both prefixes.
pub fn iso_check(m1: &LassoStructure, m2: &LassoStructure) -> Option<IsomorphismWitness> {
    let n = m1.num_agents();
    if n != m2.num_agents() {
        return None;
    }
    if !(0..n).all(|i| m1.labels(Agent::from_index(i)).same_sequence(m2.labels(Agent::from_index(i)))) {
        return None;
    }
    let (e1, e2) = (m1.events(), m2.events());
    let h = e1.prefix.len().max(e2.prefix.len()) + 2 * lcm(e1.cycle.len(), e2.cycle.len());
    let map = local_index_map(e1, e2, n, h)?;
    local_index_map(e2, e1, n, h)?;
    Some(IsomorphismWitness { map })
}

fn local_index_map(e1: &Lasso<AgentSet>, e2: &Lasso<AgentSet>, n: usize, h: usize) -> Option<Vec<usize>> {
    // positions of each agent's events in e2, far enough to cover density drift
    let mut of_agent: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut idx2: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![0usize; n];
    for k in 0..2 * h + e2.span() {
        let ids = e2.get(k);
        idx2.push(ids.iter().map(|i| seen[i.index()]).collect());
        for i in ids.iter() {
            of_agent[i.index()].push(k);
            seen[i.index()] += 1;
        }
    }
    let mut count = vec![0usize; n];
    let mut map = Vec::with_capacity(h);
    for k in 0..h {
        let ids = *e1.get(k);
        let first = ids.iter().next()?;
        let target = *of_agent[first.index()].get(count[first.index()])?;
        if *e2.get(target) != ids {
            return None;
        }
        let local: Vec<usize> = ids.iter().map(|i| count[i.index()]).collect();
        if idx2[target] != local {
            return None;
        }
        for i in ids.iter() {
            count[i.index()] += 1;
        }
        map.push(target);
    }
    Some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dalpha::DtlConstraints;
    use crate::parse::{parse_global, parse_word};
    use crate::signature::Signature;

    fn sig() -> Signature {
        Signature::new([("i", vec!["p"]), ("j", vec!["q"])]).unwrap()
    }

    #[test]
    fn default_roundtrip_is_exact() {
        let s = sig();
        let w = parse_word("i:p j:q ; j:!q", "i:!p j:q ; i:p", &s).unwrap();
        let mu = word_to_structure(&w, 2).unwrap();
        assert_eq!(structure_to_word(&mu, &default_linearization(&mu)), w);
        assert!(iso_check(&mu, &mu).is_some());
    }

    #[test]
    fn swapping_concurrent_events() {
        let s = sig();
        let w = parse_word("i:p ; j:q ; i:!p j:!q", "i:p j:q", &s).unwrap();
        let mu = word_to_structure(&w, 2).unwrap();
        // e1 and e2 are concurrent, e2 and e3 are not
        let lin = Linearization::from_window(vec![1, 0]).unwrap();
        assert!(lin.is_valid_for(&mu));
        assert!(!Linearization::from_window(vec![0, 2, 1]).unwrap().is_valid_for(&mu));
        assert_eq!(lin.xi(1), vec![2]);
        let w2 = structure_to_word(&mu, &lin);
        assert_ne!(w2, w);
        let mu2 = word_to_structure(&w2, 2).unwrap();
        let f = iso_check(&mu, &mu2).unwrap();
        assert_eq!(&f.map[..3], &[1, 0, 2]);
    }

    #[test]
    fn different_patterns_are_not_isomorphic() {
        let s = sig();
        let a = word_to_structure(&parse_word("", "i:p j:q", &s).unwrap(), 2).unwrap();
        let b = word_to_structure(&parse_word("", "i:p ; j:q", &s).unwrap(), 2).unwrap();
        assert!(iso_check(&a, &b).is_none());
    }

    #[test]
    fn canonical_run_is_accepting() {
        let s = sig();
        let alpha = parse_global("@i[G (p -> X C j[q])] & @j[F q]", &s).unwrap();
        let w = parse_word("i:p j:q", "i:p j:q ; j:q", &s).unwrap();
        let mu = word_to_structure(&w, 2).unwrap();
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        let cr = build_canonical_run(&d, &mu, &Linearization::identity()).unwrap();
        assert_eq!(cr.word, w);
        assert!(d.is_accepting_run(&w, &cr.run));
        let a = Formula::Global(alpha.clone());
        for set in &cr.sets.get(0)[..] {
            assert!(set.contains(&a));
        }
        assert!(word_to_structure_checked(&d, &w, &cr.run).is_ok());
    }

    #[test]
    fn canonical_run_needs_a_model() {
        let s = sig();
        let alpha = parse_global("@i[p]", &s).unwrap();
        let w = parse_word("", "i:!p j:q", &s).unwrap();
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        let mu = word_to_structure(&w, 2).unwrap();
        assert!(matches!(
            build_canonical_run(&d, &mu, &Linearization::identity()),
            Err(DtlError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn label_mismatch_is_reported() {
        let s = sig();
        let alpha = parse_global("@i[G p]", &s).unwrap();
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        let good = parse_word("", "i:p j:q", &s).unwrap();
        let run = d.lasso_accepts(&good).unwrap();
        let bad = parse_word("", "i:!p j:q", &s).unwrap();
        assert!(matches!(
            word_to_structure_checked(&d, &bad, &run),
            Err(DtlError::LabelMismatch { event: 1, .. })
        ));
    }
}
