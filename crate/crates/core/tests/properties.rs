mod common;

use dtl_core::automata::degeneralize;
use dtl_core::corpus::{random_global, random_word, rng, FormulaShape};
use dtl_core::dalpha::{DtlAutomaton, DtlConstraints};
use dtl_core::export::{valuation_letter, JsonAutomaton};
use dtl_core::parse::parse_global;
use dtl_core::semantics::{derive_structure, sat_global};
use dtl_core::signature::Signature;
use dtl_core::tableau::build_local_gnba;
use dtl_core::word::Lasso;
use proptest::prelude::*;

fn sig() -> Signature {
    Signature::new([("i", vec!["p", "r"]), ("j", vec!["q"])]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The automaton accepts exactly the words whose structures are models.
    #[test]
    fn language_is_the_set_of_models(seed in any::<u64>()) {
        let s = sig();
        let mut r = rng(seed);
        let alpha = random_global(&s, &FormulaShape::default(), &mut r);
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        for _ in 0..20 {
            let w = random_word(&s, 3, 3, &mut r);
            let model = sat_global(&derive_structure(&w, 2).unwrap(), &alpha);
            prop_assert_eq!(d.accepts(&w), model, "{} on {:?}", alpha.display(&s), w);
        }
    }

    #[test]
    fn language_is_the_set_of_models_for_larger_formulas(seed in any::<u64>()) {
        let s = sig();
        let mut r = rng(seed);
        let shape = FormulaShape { max_depth: 3, max_closure: 30, max_atoms: 3, communication: true };
        let alpha = random_global(&s, &shape, &mut r);
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        for _ in 0..10 {
            let w = random_word(&s, 3, 4, &mut r);
            let model = sat_global(&derive_structure(&w, 2).unwrap(), &alpha);
            prop_assert_eq!(d.accepts(&w), model, "{} on {:?}", alpha.display(&s), w);
        }
    }

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let s = sig();
        let alpha = random_global(&s, &FormulaShape { max_closure: 40, ..FormulaShape::default() }, &mut rng(seed));
        let text = alpha.display(&s).to_string();
        prop_assert_eq!(parse_global(&text, &s).unwrap(), alpha);
    }

    #[test]
    fn degeneralization_keeps_the_language(seed in any::<u64>()) {
        let s = sig();
        let mut r = rng(seed);
        let alpha = random_global(&s, &FormulaShape::default(), &mut r);
        let i = s.agents().next().unwrap();
        let g = build_local_gnba(&s, &alpha, i).unwrap();
        let nba = degeneralize(&g).nba;
        for _ in 0..10 {
            let w = random_word(&s, 3, 3, &mut r);
            let local = dtl_core::word::project_word(&w, i).unwrap();
            prop_assert_eq!(g.accepts(&local), nba.accepts(&local));
        }
    }

    #[test]
    fn rotation_keeps_the_sequence(xs in proptest::collection::vec(0u8..4, 0..5), ys in proptest::collection::vec(0u8..4, 1..5)) {
        let l = Lasso::new(xs, ys).unwrap();
        let r = l.rotate();
        prop_assert!(l.same_sequence(&r));
        prop_assert_eq!(r.prefix.len(), l.prefix.len() + 1);
        prop_assert_eq!(l.unroll(12), r.unroll(12));
    }

    #[test]
    fn explicit_export_roundtrips(seed in any::<u64>()) {
        let s = sig();
        let alpha = random_global(&s, &FormulaShape { max_closure: 10, max_depth: 1, ..FormulaShape::default() }, &mut rng(seed));
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::default()).unwrap();
        let e = d.explicit(true, 200_000).unwrap();
        let text = JsonAutomaton::from_gnba(&e, valuation_letter(&s)).to_json();
        let back = JsonAutomaton::from_json(&text).unwrap().to_gnba().unwrap();
        prop_assert_eq!(JsonAutomaton::from_gnba(&back, |x| x.clone()).to_json(), text);
    }
}

/// How often the conditions as first stated give a wrong verdict on a random
/// population; each kind of wrong verdict must actually occur.
#[test]
fn literal_conditions_disagree_with_semantics() {
    let s = sig();
    let mut r = rng(0x5EED);
    let (mut unsound, mut incomplete) = (0, 0);
    for _ in 0..150 {
        let alpha = random_global(&s, &FormulaShape::default(), &mut r);
        let d = DtlAutomaton::new(&s, &alpha, DtlConstraints::literal()).unwrap();
        for _ in 0..10 {
            let w = random_word(&s, 2, 3, &mut r);
            let model = sat_global(&derive_structure(&w, 2).unwrap(), &alpha);
            match (d.accepts(&w), model) {
                (true, false) => unsound += 1,
                (false, true) => incomplete += 1,
                _ => {}
            }
        }
    }
    assert!(unsound > 0 && incomplete > 0, "unsound {unsound}, incomplete {incomplete}");
}
