use mscott::dense::{enumerate_family, DenseFamilyIndex};
use mscott::evaluation::{dense_agreement_bound, eval_dense_agreement};
use mscott::structures::{all_tuples, load_structure};
use mscott::syntax::{respects_weak_modulus, RespectCheck};
use mscott::{parse_formula, parse_structure, rat, PreStructure, WeakModulus};

/// The 3x3 grid with distance (|di| + |dj|) / 4.
fn grid9() -> PreStructure {
    let pts: Vec<(i64, i64)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let name = |(i, j): (i64, i64)| format!("g{i}{j}");
    let mut text = String::from("mscott/1\n[points]\n");
    text.push_str(&pts.iter().map(|&p| name(p)).collect::<Vec<_>>().join(" "));
    text.push_str("\n[metric]\n");
    for (k, &p) in pts.iter().enumerate().skip(1) {
        let row: Vec<String> = pts[..k]
            .iter()
            .map(|&q| rat((p.0 - q.0).abs() + (p.1 - q.1).abs(), 4).to_string())
            .collect();
        text.push_str(&format!("{}: {}\n", name(p), row.join(" ")));
    }
    parse_structure(&text).unwrap()
}

#[test]
fn quarter_dense_subset_of_grid() {
    let s = grid9();
    let subset: Vec<usize> = ["g00", "g02", "g11", "g20", "g22"]
        .iter()
        .map(|n| s.point_index(n).unwrap())
        .collect();
    let sig = s.signature().clone();
    for text in [
        "sup v1 . d(v0, v1)",
        "inf v1 . latmax(d(v0, v1), const(1/8))",
        "sup v1 . inf v2 . latmin(d(v0, v2), d(v1, v2))",
    ] {
        let phi = parse_formula(text, &sig).unwrap();
        let bound = dense_agreement_bound(&phi, &s, 1, &rat(1, 4)).unwrap();
        for &a in &subset {
            let r = eval_dense_agreement(&phi, &s, &subset, &[a]).unwrap();
            assert_eq!(r.density, rat(1, 4));
            assert!(
                (&r.restricted - &r.full).abs() <= bound,
                "{text} at {a}: {r:?} vs {bound}"
            );
        }
    }
}

#[test]
fn whole_set_and_quantifier_free_agree_exactly() {
    let s = grid9();
    let all: Vec<usize> = (0..s.len()).collect();
    let sub = vec![0, 4, 8];
    let sup = parse_formula("sup v1 . d(v0, v1)", s.signature()).unwrap();
    let qf = parse_formula("latmin(d(v0, v1), const(1/3))", s.signature()).unwrap();
    for &a in &sub {
        let r = eval_dense_agreement(&sup, &s, &all, &[a]).unwrap();
        assert_eq!(r.restricted, r.full);
        for &b in &sub {
            let r = eval_dense_agreement(&qf, &s, &sub, &[a, b]).unwrap();
            assert_eq!(r.restricted, r.full);
        }
    }
}

#[test]
fn family_members_respect_the_weak_modulus() {
    let s = load_structure(format!(
        "{}/../../data/marked_triangle.ms",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    for omega in [WeakModulus::Sum, WeakModulus::Max] {
        for arity in 1..=2 {
            let idx = DenseFamilyIndex::new(arity, omega, s.signature().clone());
            let check = RespectCheck::new(omega);
            for m in enumerate_family(&idx, 40) {
                let out = respects_weak_modulus(&m.formula, s.signature(), arity, &check).unwrap();
                assert!(out.holds(), "{} under {omega:?}: {out:?}", m.formula);
            }
        }
    }
}

#[test]
fn family_values_stay_in_unit_interval() {
    let s = load_structure(format!(
        "{}/../../data/line_with_map.ms",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap();
    let idx = DenseFamilyIndex::new(2, WeakModulus::Sum, s.signature().clone());
    for m in enumerate_family(&idx, 60) {
        for t in all_tuples(s.len(), 2) {
            let v = mscott::eval_formula_value(&m.formula, &s, &t).unwrap();
            assert!(v.in_unit_interval(), "{}", m.formula);
        }
    }
}
