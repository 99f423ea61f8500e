use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dtl_core::corpus::{random_global, rng, FormulaShape};
use dtl_core::dalpha::{satisfiable_batch, DtlAutomaton, DtlConstraints, SatOptions};
use dtl_core::exec::Execution;
use dtl_core::parse::parse_global;
use dtl_core::signature::Signature;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if Execution::parallel_available() {
        m.push(("parallel", Execution::Parallel));
    }
    m
}

fn batch(c: &mut Criterion) {
    let sig = Signature::new([("i", vec!["p", "r"]), ("j", vec!["q", "s"])]).unwrap();
    let shape = FormulaShape {
        max_closure: 20,
        max_atoms: 3,
        ..FormulaShape::default()
    };
    let mut r = rng(42);
    let alphas: Vec<_> = (0..48).map(|_| random_global(&sig, &shape, &mut r)).collect();
    let opts = SatOptions::default();
    let mut g = c.benchmark_group("satisfiable_batch");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| satisfiable_batch(&sig, &alphas, &opts, exec))
        });
    }
    g.finish();
}

fn construction(c: &mut Criterion) {
    let sig = Signature::new([("i", vec!["p", "r"]), ("j", vec!["q"])]).unwrap();
    let alpha = parse_global(
        "@i[G (p -> X (r | C j[q & X q])) & G F !r & F G (p -> r)] & @j[G (q -> X X !q) & G F C i[p]]",
        &sig,
    )
    .unwrap();
    let mut g = c.benchmark_group("automaton_construction");
    g.sample_size(10);
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| DtlAutomaton::with_execution(&sig, &alpha, DtlConstraints::default(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, batch, construction);
criterion_main!(benches);
