//! Seeded generators for formulas, words and structures.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

use crate::formula::{closure, GlobalFormula, LocalFormula};
use crate::signature::{Agent, AgentSet, Prop, Signature, Valuation};
use crate::word::{is_fair, GlobalLetter, Lasso, LassoWord};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of random formulas.
#[derive(Clone, Copy, Debug)]
pub struct FormulaShape {
    /// Nesting of `X`, `G`, `F`.
    pub max_depth: usize,
    /// Bound on `|closure(α)|`; samples over it are redrawn.
    pub max_closure: usize,
    /// Number of `@` atoms, at most.
    pub max_atoms: usize,
    pub communication: bool,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            max_depth: 2,
            max_closure: 14,
            max_atoms: 2,
            communication: true,
        }
    }
}

pub fn random_local(sig: &Signature, i: Agent, shape: &FormulaShape, depth: usize, size: usize, rng: &mut Rng64) -> LocalFormula {
    let props: Vec<Prop> = sig.props(i).collect();
    let leaf = |rng: &mut Rng64| -> LocalFormula {
        if props.is_empty() || rng.gen_ratio(1, 8) {
            LocalFormula::tt()
        } else {
            LocalFormula::prop(*props.choose(rng).expect("nonempty"))
        }
    };
    if size <= 1 {
        return leaf(rng);
    }
    let temporal = depth < shape.max_depth;
    let others: Vec<Agent> = sig.agents().filter(|&j| j != i).collect();
    loop {
        match rng.gen_range(0..10) {
            0 | 1 => return leaf(rng),
            2 => return LocalFormula::not(random_local(sig, i, shape, depth, size - 1, rng)),
            3 | 4 => {
                let a = random_local(sig, i, shape, depth, size / 2, rng);
                let b = random_local(sig, i, shape, depth, size / 2, rng);
                return match rng.gen_range(0..3) {
                    0 => LocalFormula::and(a, b),
                    1 => LocalFormula::or(a, b),
                    _ => LocalFormula::imp(a, b),
                };
            }
            5 | 6 if temporal => return LocalFormula::next(random_local(sig, i, shape, depth + 1, size - 1, rng)),
            7 if temporal => return LocalFormula::always(random_local(sig, i, shape, depth + 1, size - 1, rng)),
            8 if temporal => return LocalFormula::eventually(random_local(sig, i, shape, depth + 1, size - 1, rng)),
            9 if shape.communication && !others.is_empty() => {
                let j = *others.choose(rng).expect("nonempty");
                return LocalFormula::comm(j, random_local(sig, j, shape, depth, size - 1, rng));
            }
            _ => {}
        }
    }
}

/// A boolean combination of `@` atoms within `shape`.
pub fn random_global(sig: &Signature, shape: &FormulaShape, rng: &mut Rng64) -> GlobalFormula {
    let agents: Vec<Agent> = sig.agents().collect();
    loop {
        let atoms = rng.gen_range(1..=shape.max_atoms.max(1));
        let mut g: Option<GlobalFormula> = None;
        for _ in 0..atoms {
            let i = *agents.choose(rng).expect("agents");
            let size = rng.gen_range(2..=5);
            let mut a = GlobalFormula::at(i, random_local(sig, i, shape, 0, size, rng));
            if rng.gen_ratio(1, 4) {
                a = GlobalFormula::not(a);
            }
            g = Some(match g {
                None => a,
                Some(prev) => match rng.gen_range(0..3) {
                    0 => GlobalFormula::and(prev, a),
                    1 => GlobalFormula::or(prev, a),
                    _ => GlobalFormula::imp(prev, a),
                },
            });
        }
        let g = g.expect("at least one atom");
        if closure(&g).len() <= shape.max_closure && g.temporal_depth() <= shape.max_depth {
            return g;
        }
    }
}

/// Every global letter over the given propositions (others false), ordered
/// by participation set and valuation.
pub fn letters(sig: &Signature, props: &BTreeSet<Prop>) -> Vec<GlobalLetter> {
    let per_agent: Vec<Vec<Valuation>> = sig
        .agents()
        .map(|i| {
            let mine: Vec<Prop> = props.iter().copied().filter(|p| p.owner() == i).collect();
            (0u64..1 << mine.len())
                .map(|m| {
                    mine.iter()
                        .enumerate()
                        .fold(Valuation::default(), |v, (k, &p)| v.with(p, m >> k & 1 == 1))
                })
                .collect()
        })
        .collect();
    crate::product::global_alphabet(&per_agent)
}

/// All fair lassos over `alphabet` with `|prefix| ≤ max_prefix` and
/// `1 ≤ |loop| ≤ max_loop`, shortest first.
pub fn all_lassos(alphabet: &[GlobalLetter], n_agents: usize, max_prefix: usize, max_loop: usize) -> impl Iterator<Item = LassoWord> + '_ {
    (1..=max_prefix + max_loop).flat_map(move |total| {
        (0..=max_prefix.min(total - 1))
            .filter(move |&p| total - p <= max_loop)
            .flat_map(move |p| sequences(alphabet, total).map(move |s| (p, s)))
            .filter_map(move |(p, s)| {
                let mut prefix = s;
                let cycle = prefix.split_off(p);
                let w = Lasso { prefix, cycle };
                is_fair(&w, n_agents).then_some(w)
            })
    })
}

fn sequences(alphabet: &[GlobalLetter], len: usize) -> impl Iterator<Item = Vec<GlobalLetter>> + '_ {
    let n = alphabet.len();
    let total = if n == 0 { 0 } else { n.pow(len as u32) };
    (0..total).map(move |mut code| {
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(alphabet[code % n].clone());
            code /= n;
        }
        out
    })
}

/// A fair lasso with random participation and valuations.
pub fn random_word(sig: &Signature, max_prefix: usize, max_loop: usize, rng: &mut Rng64) -> LassoWord {
    let n = sig.num_agents();
    let letter = |rng: &mut Rng64| -> GlobalLetter {
        loop {
            let parts: Vec<Option<Valuation>> = sig
                .agents()
                .map(|i| {
                    rng.gen_bool(0.6)
                        .then(|| Valuation::from_bits(rng.gen_range(0..1u64 << sig.num_props(i))))
                })
                .collect();
            if let Ok(l) = GlobalLetter::new(parts) {
                return l;
            }
        }
    };
    loop {
        let p = rng.gen_range(0..=max_prefix);
        let l = rng.gen_range(1..=max_loop.max(1));
        let w = Lasso {
            prefix: (0..p).map(|_| letter(rng)).collect(),
            cycle: (0..l).map(|_| letter(rng)).collect(),
        };
        if is_fair(&w, n) {
            return w;
        }
    }
}

/// A fair participation pattern for events.
pub fn random_events(n_agents: usize, max_prefix: usize, max_loop: usize, rng: &mut Rng64) -> Lasso<AgentSet> {
    let set = |rng: &mut Rng64| AgentSet::from_bits(rng.gen_range(1..1u64 << n_agents));
    loop {
        let p = rng.gen_range(0..=max_prefix);
        let l = rng.gen_range(1..=max_loop.max(1));
        let e = Lasso {
            prefix: (0..p).map(|_| set(rng)).collect(),
            cycle: (0..l).map(|_| set(rng)).collect(),
        };
        let seen = e.cycle.iter().fold(AgentSet::EMPTY, |a, s| a.union(*s));
        if seen == AgentSet::all(n_agents) {
            return e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::check_global;

    fn sig() -> Signature {
        Signature::new([("i", vec!["p", "r"]), ("j", vec!["q"])]).unwrap()
    }

    #[test]
    fn generated_formulas_respect_the_shape() {
        let s = sig();
        let shape = FormulaShape::default();
        let mut r = rng(7);
        for _ in 0..200 {
            let g = random_global(&s, &shape, &mut r);
            check_global(&s, &g).unwrap();
            assert!(closure(&g).len() <= 14);
            assert!(g.temporal_depth() <= 2);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let s = sig();
        let a = random_word(&s, 3, 3, &mut rng(1));
        let b = random_word(&s, 3, 3, &mut rng(1));
        assert_eq!(a, b);
        assert!(is_fair(&a, 2));
    }

    #[test]
    fn lasso_enumeration_counts() {
        let s = Signature::new([("i", vec!["p"])]).unwrap();
        let props: BTreeSet<Prop> = s.props(s.agent("i").unwrap()).collect();
        let alphabet = letters(&s, &props);
        assert_eq!(alphabet.len(), 2);
        assert_eq!(all_lassos(&alphabet, 1, 2, 1).count(), 2 + 4 + 8);
        assert_eq!(all_lassos(&alphabet, 1, 1, 2).count(), 2 + 4 + 4 + 8);
    }
}
