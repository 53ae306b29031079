use criterion::{black_box, criterion_group, criterion_main, Criterion};
use mscott::dense::{
    default_budget, enumerate_family, lattice_approximate, DenseFamilyIndex, UnitGridFunction,
};
use mscott::modulus::{largest_modulus_below, GridFunction, NiceDomain};
use mscott::numeric::RatGrid;
use mscott::scott::{gamma_fixpoint_from, r0_table, r_successor, AnalysisConfig};
use mscott::{
    eval_formula_value, parse_formula, rat, ModulusSpec, Rational, Signature, WeakModulus,
};
use mscott_bench::{cycle, scalene};

fn stage_zero(c: &mut Criterion) {
    let s = scalene();
    let cfg = AnalysisConfig::default();
    c.bench_function("r0_table arity 2, 6 points", |b| {
        b.iter(|| r0_table(black_box(&s), 2, &cfg))
    });
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("r0_table arity 3, 6 points", |b| {
        b.iter(|| r0_table(black_box(&s), 3, &cfg))
    });
    g.finish();
}

fn successor_and_fixpoint(c: &mut Criterion) {
    let s = cycle(6);
    let cfg = AnalysisConfig::default();
    let tables: Vec<_> = (1..=3).map(|n| r0_table(&s, n, &cfg)).collect();
    c.bench_function("r_successor arity 3 -> 2, 6 points", |b| {
        b.iter(|| r_successor(black_box(&tables[2])))
    });
    c.bench_function("gamma fixpoint q=1/10, 6 points", |b| {
        b.iter(|| gamma_fixpoint_from(black_box(&tables), &rat(1, 10), 8))
    });
}

fn family(c: &mut Criterion) {
    let idx = DenseFamilyIndex::new(3, WeakModulus::Sum, Signature::empty());
    c.bench_function("enumerate_family arity 3, 200 members", |b| {
        b.iter(|| enumerate_family(black_box(&idx), 200))
    });
}

fn approximation(c: &mut Criterion) {
    let delta = ModulusSpec::linear(vec![rat(1, 1), rat(1, 1)]).unwrap();
    let u = UnitGridFunction::sample(2, rat(1, 8), |z| {
        let s = &z[0] + &z[1];
        (&s * &rat(1, 2)).min(rat(3, 4))
    });
    c.bench_function("lattice_approximate 2-d grid 1/8", |b| {
        b.iter(|| lattice_approximate(black_box(&u), &delta, &rat(1, 8), default_budget(&u)))
    });
    let grid = RatGrid::unit(1, rat(1, 16));
    let f = GridFunction::sample(&grid, &NiceDomain::full(1, Rational::one()), |x| {
        &x[0] * &x[0]
    })
    .unwrap();
    c.bench_function("largest_modulus_below x^2, grid 1/16, K 16", |b| {
        b.iter(|| largest_modulus_below(black_box(&f), 16))
    });
}

fn evaluation(c: &mut Criterion) {
    let s = cycle(8);
    let phi = parse_formula(
        "sup v1 . inf v2 . latmax(d(v0, v2), d(v1, v2))",
        s.signature(),
    )
    .unwrap();
    c.bench_function("eval two quantifiers, 8 points", |b| {
        b.iter(|| eval_formula_value(black_box(&phi), &s, &[0]))
    });
}

criterion_group!(
    benches,
    stage_zero,
    successor_and_fixpoint,
    family,
    approximation,
    evaluation
);
criterion_main!(benches);
