//! Explicit-state Büchi automata: NBA, generalized NBA, degeneralization,
//! acceptance of lasso words and emptiness with witnesses.
//!
//! Letters are opaque values compared for equality; transitions are stored
//! per state and letter index.

pub mod graph;

use std::fmt::Debug;
use std::hash::Hash;

use crate::word::Lasso;
use graph::{generalized_lasso, nested_dfs, Budget};

/// A run as a lasso of state indices: `run.get(k)` reads `word.get(k)`.
pub type LassoRun = Lasso<usize>;

/// Letters must support equality; everything else is bookkeeping.
pub trait Letter: Clone + Eq + Hash + Debug {}
impl<T: Clone + Eq + Hash + Debug> Letter for T {}

/// States, alphabet and transitions shared by [`Nba`] and [`Gnba`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem<L> {
    alphabet: Vec<L>,
    names: Vec<String>,
    delta: Vec<Vec<Vec<usize>>>,
    initial: Vec<usize>,
}

impl<L: Letter> TransitionSystem<L> {
    pub fn new(alphabet: Vec<L>, names: Vec<String>) -> Self {
        let n = names.len();
        let k = alphabet.len();
        TransitionSystem {
            alphabet,
            names,
            delta: vec![vec![Vec::new(); k]; n],
            initial: Vec::new(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn alphabet(&self) -> &[L] {
        &self.alphabet
    }

    pub fn name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn is_initial(&self, q: usize) -> bool {
        self.initial.contains(&q)
    }

    pub fn letter_index(&self, a: &L) -> Option<usize> {
        self.alphabet.iter().position(|b| b == a)
    }

    /// `δ(q, a)` by letter index, sorted.
    pub fn successors(&self, q: usize, letter: usize) -> &[usize] {
        &self.delta[q][letter]
    }

    /// `δ(q, a)`; empty for letters outside the alphabet.
    pub fn step(&self, q: usize, a: &L) -> &[usize] {
        match self.letter_index(a) {
            Some(k) => &self.delta[q][k],
            None => &[],
        }
    }

    pub fn add_initial(&mut self, q: usize) {
        if !self.initial.contains(&q) {
            self.initial.push(q);
            self.initial.sort_unstable();
        }
    }

    pub fn add_edge(&mut self, from: usize, letter: usize, to: usize) {
        let out = &mut self.delta[from][letter];
        if let Err(pos) = out.binary_search(&to) {
            out.insert(pos, to);
        }
    }

    /// All edges `(from, letter index, to)` in state/letter/target order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(|(q, row)| {
            row.iter()
                .enumerate()
                .flat_map(move |(a, tos)| tos.iter().map(move |&t| (q, a, t)))
        })
    }

    fn labelled_successors(&self, q: usize) -> Vec<(usize, usize)> {
        self.delta[q]
            .iter()
            .enumerate()
            .flat_map(|(a, tos)| tos.iter().map(move |&t| (a, t)))
            .collect()
    }

    /// Checks that `run` is a run of this system on `word`: it starts in an
    /// initial state and follows `δ` at every position of one common period.
    pub fn is_run(&self, word: &Lasso<L>, run: &LassoRun) -> bool {
        if run.cycle.is_empty() || !self.is_initial(*run.get(0)) {
            return false;
        }
        let horizon = word.prefix.len().max(run.prefix.len()) + crate::word::lcm(word.cycle.len(), run.cycle.len());
        (0..horizon).all(|k| self.step(*run.get(k), word.get(k)).contains(run.get(k + 1)))
    }

    fn run_graph_lasso(&self, word: &Lasso<L>, marks: &dyn Fn(usize) -> u64, full: u64) -> Option<LassoRun> {
        let letters: Vec<Option<usize>> = word.iter_positions().map(|a| self.letter_index(a)).collect();
        let succ = |&(q, pos): &(usize, usize)| -> Vec<((), (usize, usize))> {
            match letters[pos] {
                Some(a) => self.delta[q][a]
                    .iter()
                    .map(|&t| ((), (t, word.next_position(pos))))
                    .collect(),
                None => Vec::new(),
            }
        };
        let path = generalized_lasso(self.initial.iter().map(|&q| (q, 0usize)), succ, |&(q, _)| marks(q), full)?;
        Some(Lasso {
            prefix: path.stem.iter().map(|((q, _), _)| *q).collect(),
            cycle: path.cycle.iter().map(|((q, _), _)| *q).collect(),
        })
    }
}

/// `⟨Q, Σ, δ, Q₀, F⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nba<L> {
    pub ts: TransitionSystem<L>,
    accepting: Vec<bool>,
}

impl<L: Letter> Nba<L> {
    pub fn new(ts: TransitionSystem<L>, accepting: Vec<bool>) -> Self {
        assert_eq!(ts.num_states(), accepting.len());
        Nba { ts, accepting }
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    /// Whether some run on `word` visits `F` infinitely often; with a witness run.
    pub fn lasso_accepts(&self, word: &Lasso<L>) -> Option<LassoRun> {
        self.ts.run_graph_lasso(word, &|q| u64::from(self.accepting[q]), 1)
    }

    pub fn accepts(&self, word: &Lasso<L>) -> bool {
        self.lasso_accepts(word).is_some()
    }

    /// A run on `word` that is accepting.
    pub fn is_accepting_run(&self, word: &Lasso<L>, run: &LassoRun) -> bool {
        self.ts.is_run(word, run) && run.cycle.iter().any(|&q| self.accepting[q])
    }

    pub fn as_gnba(&self) -> Gnba<L> {
        Gnba {
            ts: self.ts.clone(),
            family: vec![("F".to_string(), self.accepting.clone())],
        }
    }
}

/// `⟨Q, Σ, δ, Q₀, ℱ⟩`; the family is ordered and its sets are named.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gnba<L> {
    pub ts: TransitionSystem<L>,
    family: Vec<(String, Vec<bool>)>,
}

impl<L: Letter> Gnba<L> {
    pub fn new(ts: TransitionSystem<L>, family: Vec<(String, Vec<bool>)>) -> Self {
        assert!(family.iter().all(|(_, s)| s.len() == ts.num_states()));
        assert!(family.len() < 64, "acceptance families are limited to 63 sets");
        Gnba { ts, family }
    }

    pub fn family(&self) -> &[(String, Vec<bool>)] {
        &self.family
    }

    fn marks(&self, q: usize) -> u64 {
        self.family
            .iter()
            .enumerate()
            .filter(|(_, (_, s))| s[q])
            .fold(0, |m, (k, _)| m | 1 << k)
    }

    fn full(&self) -> u64 {
        (1u64 << self.family.len()) - 1
    }

    /// Whether some run on `word` visits every set of the family infinitely often.
    pub fn lasso_accepts(&self, word: &Lasso<L>) -> Option<LassoRun> {
        self.ts.run_graph_lasso(word, &|q| self.marks(q), self.full())
    }

    pub fn accepts(&self, word: &Lasso<L>) -> bool {
        self.lasso_accepts(word).is_some()
    }

    pub fn is_accepting_run(&self, word: &Lasso<L>, run: &LassoRun) -> bool {
        self.ts.is_run(word, run)
            && self
                .family
                .iter()
                .all(|(_, s)| run.cycle.iter().any(|&q| s[q]))
    }
}

/// A degeneralized automaton together with the `(G-state, counter)` pair
/// behind each of its states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degeneralized<L> {
    pub nba: Nba<L>,
    pub origin: Vec<(usize, usize)>,
}

/// Number of counter values used for a family of `k` sets.
pub fn counter_range(k: usize) -> usize {
    k.max(1)
}

/// Next counter value after leaving a state with acceptance marks `marks`.
#[inline]
pub fn advance_counter(counter: usize, marks: u64, k: usize) -> usize {
    if k == 0 {
        0
    } else if marks >> counter & 1 == 1 {
        (counter + 1) % k
    } else {
        counter
    }
}

/// Counter construction: states `(q, c)` with `c` ranging over the family;
/// the counter moves on when the current state is in the awaited set, and
/// `(q, 0)` with `q ∈ F_0` is accepting. An empty family makes every state
/// accepting.
pub fn degeneralize<L: Letter>(g: &Gnba<L>) -> Degeneralized<L> {
    let k = g.family.len();
    let range = counter_range(k);
    let n = g.ts.num_states();
    let id = |q: usize, c: usize| q * range + c;
    let mut origin = Vec::with_capacity(n * range);
    let mut names = Vec::with_capacity(n * range);
    for q in 0..n {
        for c in 0..range {
            origin.push((q, c));
            names.push(if k <= 1 {
                g.ts.name(q).to_string()
            } else {
                format!("{}/{}", g.ts.name(q), c)
            });
        }
    }
    let mut ts = TransitionSystem::new(g.ts.alphabet.clone(), names);
    for &q in &g.ts.initial {
        ts.add_initial(id(q, 0));
    }
    for q in 0..n {
        let marks = g.marks(q);
        for c in 0..range {
            let c2 = advance_counter(c, marks, k);
            for a in 0..g.ts.alphabet.len() {
                for &t in &g.ts.delta[q][a] {
                    ts.add_edge(id(q, c), a, id(t, c2));
                }
            }
        }
    }
    let accepting = origin
        .iter()
        .map(|&(q, c)| k == 0 || (c == 0 && g.family[0].1[q]))
        .collect();
    Degeneralized {
        nba: Nba::new(ts, accepting),
        origin,
    }
}

/// An accepted lasso word with an accepting run, if `L(A) ≠ ∅`.
pub fn find_accepting_lasso<L: Letter>(a: &Nba<L>) -> Option<(Lasso<L>, LassoRun)> {
    let succ = |q: &usize| a.ts.labelled_successors(*q);
    let path = nested_dfs(a.ts.initial.iter().copied(), succ, |q: &usize| a.accepting[*q], Budget {
        max_states: usize::MAX,
        deadline: None,
    })
    .expect("unbounded search cannot run out of budget")?;
    let word = Lasso {
        prefix: path.stem.iter().map(|(_, l)| a.ts.alphabet[*l].clone()).collect(),
        cycle: path.cycle.iter().map(|(_, l)| a.ts.alphabet[*l].clone()).collect(),
    };
    let run = Lasso {
        prefix: path.stem.iter().map(|(q, _)| *q).collect(),
        cycle: path.cycle.iter().map(|(q, _)| *q).collect(),
    };
    assert!(a.is_accepting_run(&word, &run), "emptiness witness rejected by the automaton");
    Some((word, run))
}
