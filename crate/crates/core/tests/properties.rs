use mscott::dense::LatticeTerm;
use mscott::evaluation::{check_canonical_respect, eval_normal_form};
use mscott::modulus::{check_modulus, largest_modulus_below, pi_fold, GridFunction, NiceDomain};
use mscott::numeric::RatGrid;
use mscott::structures::{all_tuples, load_structure};
use mscott::syntax::normalize_basic;
use mscott::{
    eval_formula_value, parse_formula, rat, Connective, Formula, ModulusSpec, PreStructure,
    Rational, SegmentConnective, Term,
};
use proptest::prelude::*;

fn line() -> PreStructure {
    load_structure(format!(
        "{}/../../data/line_with_map.ms",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (0usize..3).prop_map(Term::Var),
        Just(Term::Const("o".into()))
    ];
    leaf.prop_recursive(3, 6, 1, |inner| {
        inner.prop_map(|t| Term::Apply("f".into(), vec![t]))
    })
}

fn unit() -> impl Strategy<Value = Rational> {
    (0i64..=8).prop_map(|k| rat(k, 8))
}

fn formula(quantifiers: bool) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (term(), term()).prop_map(|(a, b)| Formula::Dist(a, b)),
        term().prop_map(|t| Formula::Rel("P".into(), vec![t])),
        unit().prop_map(|q| Formula::Conn(Connective::constant(q).unwrap(), vec![])),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let pwl = Connective::pwl(vec![
            (rat(0, 1), rat(0, 1)),
            (rat(1, 2), rat(3, 4)),
            (rat(1, 1), rat(1, 1)),
        ])
        .unwrap();
        let conn = prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Conn(Connective::LatMin, vec![a, b])),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Conn(Connective::LatMax, vec![a, b])),
            inner
                .clone()
                .prop_map(move |a| Formula::Conn(pwl.clone(), vec![a])),
        ];
        if quantifiers {
            prop_oneof![
                conn,
                (0usize..3, inner.clone()).prop_map(|(i, a)| Formula::sup(i, a)),
                (0usize..3, inner).prop_map(|(i, a)| Formula::inf(i, a)),
            ]
            .boxed()
        } else {
            conn.boxed()
        }
    })
}

fn point(k: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(unit(), k)
}

fn segment(k: usize) -> impl Strategy<Value = SegmentConnective> {
    (
        proptest::collection::vec(1i64..=4, k),
        point(k),
        point(k),
        unit(),
        0i64..=4,
    )
        .prop_filter_map("nondegenerate", |(c, x, y, a, t)| {
            let delta = ModulusSpec::linear(c.into_iter().map(|v| rat(v, 2)).collect()).unwrap();
            let diff: Vec<Rational> = x.iter().zip(&y).map(|(p, q)| q - p).collect();
            let top = (&a + &delta.value(&pi_fold(&diff))).min(Rational::one());
            let b = &a + &((&top - &a) * rat(t, 4));
            SegmentConnective::new(delta, x, y, a, b)
                .ok()
                .filter(|s| !s.is_degenerate())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(phi in formula(true)) {
        let s = line();
        let text = phi.to_string();
        prop_assert_eq!(parse_formula(&text, s.signature()).unwrap(), phi);
    }

    #[test]
    fn formulas_respect_canonical_modulus(phi in formula(true)) {
        let s = line();
        let witness = check_canonical_respect(&phi, &s, 3).unwrap();
        prop_assert!(witness.is_none(), "{phi}: {witness:?}");
    }

    #[test]
    fn normal_form_agrees_with_tree_walk(phi in formula(false)) {
        let s = line();
        let nf = normalize_basic(&phi).unwrap();
        for t in all_tuples(s.len(), 3) {
            prop_assert_eq!(eval_normal_form(&nf, &s, &t).unwrap(), eval_formula_value(&phi, &s, &t).unwrap());
        }
    }

    #[test]
    fn segments_stay_in_range_and_respect_delta(s in segment(2), z in point(2), w in point(2)) {
        let (u, v) = (s.eval(&z), s.eval(&w));
        prop_assert!(u.in_unit_interval());
        let diff: Vec<Rational> = z.iter().zip(&w).map(|(p, q)| p - q).collect();
        prop_assert!((&u - &v).abs() <= s.delta().value(&pi_fold(&diff)));
        prop_assert_eq!(s.eval(s.x()), s.a().clone());
        prop_assert_eq!(s.eval(s.y()), s.b().clone());
    }

    #[test]
    fn lattice_terms_respect_own_modulus(
        c in proptest::collection::vec(1i64..=4, 1),
        data in proptest::collection::vec((point(1), point(1), unit(), 0i64..=4), 2..5),
        z in point(1),
        w in point(1),
        joins in proptest::collection::vec(any::<bool>(), 4),
    ) {
        let delta = ModulusSpec::linear(c.into_iter().map(|v| rat(v, 2)).collect()).unwrap();
        let mut leaves = Vec::new();
        for (x, y, a, t) in data {
            let diff = vec![&y[0] - &x[0]];
            let top = (&a + &delta.value(&pi_fold(&diff))).min(Rational::one());
            let b = &a + &((&top - &a) * rat(t, 4));
            let seg = if x == y {
                SegmentConnective::constant(delta.clone(), a).unwrap()
            } else {
                SegmentConnective::new(delta.clone(), x, y, a, b).unwrap()
            };
            leaves.push(LatticeTerm::from(seg));
        }
        let mut term = leaves.pop().unwrap();
        for (leaf, join) in leaves.into_iter().zip(joins) {
            term = if join { LatticeTerm::join(term, leaf) } else { LatticeTerm::meet(term, leaf) }.unwrap();
        }
        let diff = vec![&z[0] - &w[0]];
        prop_assert!((term.eval(&z) - term.eval(&w)).abs() <= term.own_modulus().value(&pi_fold(&diff)));
    }

    #[test]
    fn envelope_is_a_modulus_below_f(steps in proptest::collection::vec(0i64..=6, 8)) {
        let mut acc = 0i64;
        let mut table = vec![Rational::zero()];
        for s in steps {
            acc += s;
            table.push(rat(acc, 16));
        }
        let grid = RatGrid::unit(1, rat(1, 8));
        let idx = |x: &Rational| (x * &rat(8, 1)).to_i64().unwrap() as usize;
        let f = GridFunction::sample(&grid, &NiceDomain::full(1, Rational::one()), |x| table[idx(&x[0])].clone()).unwrap();
        let env = largest_modulus_below(&f, 8).unwrap();
        for (v, fv) in env.values.iter().zip(&table) {
            prop_assert!(v <= fv);
        }
        prop_assert!(check_modulus(&env.modulus, &RatGrid::unit(1, rat(1, 16))).passed());
    }
}
