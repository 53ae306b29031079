use mscott::scott::{
    gamma_fixpoint, oracle_equivalence, r0, r0_closed_form, r0_table, r_alpha, scott_rank,
    triangle, AnalysisConfig,
};
use mscott::structures::{all_tuples, load_structure, PreStructure};
use mscott::{rat, WeakModulus};

fn data(name: &str) -> PreStructure {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    load_structure(&path).expect("data file loads")
}

fn small() -> AnalysisConfig {
    AnalysisConfig {
        family_size: 60,
        ..AnalysisConfig::default()
    }
}

#[test]
fn three_point_stage_zero_pair() {
    let s = data("three_point.ms");
    let (v, meta) = r0(&s, &[0, 1], &[0, 2], &AnalysisConfig::default()).unwrap();
    assert_eq!(v, rat(1, 5));
    assert!(meta.closed_form_available);
}

#[test]
fn three_point_stage_one_singletons() {
    let s = data("three_point.ms");
    let cfg = small();
    assert_eq!(r_alpha(&s, 0, &[0], &[1], &cfg).unwrap(), rat(0, 1));
    assert_eq!(r_alpha(&s, 1, &[0], &[1], &cfg).unwrap(), rat(1, 5));
}

#[test]
fn three_point_fixpoint_entry() {
    let s = data("three_point.ms");
    let trace = gamma_fixpoint(&s, &rat(1, 10), &small());
    assert_eq!(trace.entry(0, 1, 1), Some(1));
    assert!(trace.closure_stage.is_some());
}

#[test]
fn two_point_rank_is_zero() {
    let s = data("two_point.ms");
    let (report, _) = scott_rank(&s, &small());
    assert_eq!(report.rank, Some(0));
}

#[test]
fn three_point_rank_positive() {
    let s = data("three_point.ms");
    let (report, _) = scott_rank(&s, &small());
    assert_ne!(report.rank, Some(0));
}

#[test]
fn binary_stage_zero_matches_closed_form() {
    for name in ["three_point.ms", "square.ms", "two_point.ms"] {
        let s = data(name);
        let table = r0_table(&s, 2, &AnalysisConfig::default());
        for a in all_tuples(s.len(), 2) {
            for b in all_tuples(s.len(), 2) {
                let oracle = r0_closed_form(&s, &a, &b, WeakModulus::Sum).unwrap();
                assert_eq!(table.get(&a, &b).unwrap(), &oracle, "{name} {a:?} {b:?}");
            }
        }
    }
}

#[test]
fn ternary_stage_zero_below_closed_form() {
    let s = data("three_point.ms");
    let table = r0_table(&s, 3, &small());
    for a in all_tuples(s.len(), 3) {
        for b in all_tuples(s.len(), 3) {
            let oracle = r0_closed_form(&s, &a, &b, WeakModulus::Sum).unwrap();
            assert!(table.get(&a, &b).unwrap() <= &oracle);
        }
    }
}

#[test]
fn stages_are_monotone() {
    for name in ["three_point.ms", "square.ms", "marked_triangle.ms"] {
        let s = data(name);
        let tables = triangle(&s, &small());
        for k in 1..tables.len() {
            for (hi, lo) in tables[k].iter().zip(&tables[k - 1]) {
                assert!(
                    hi.values().iter().zip(lo.values()).all(|(h, l)| h >= l),
                    "{name}"
                );
            }
        }
    }
}

#[test]
fn fixpoint_agrees_with_thresholds() {
    for name in [
        "three_point.ms",
        "square.ms",
        "marked_triangle.ms",
        "two_point.ms",
    ] {
        let s = data(name);
        for q in [rat(0, 1), rat(1, 10), rat(1, 5), rat(1, 2)] {
            let report = oracle_equivalence(&s, &q, &small());
            assert!(
                report.holds(),
                "{name} q={q}: {:?}",
                report.discrepancies.first()
            );
        }
    }
}

const SIX: &str = "mscott/1\n[points]\na b c d e f\n[metric]\nb: 1/3\nc: 1/2 1/4\nd: 2/5 1/2 1/3\ne: 3/5 1/2 1/2 1/4\nf: 1/2 2/5 3/5 1/2 1/3\n";

#[test]
fn ternary_stage_zero_reaches_pairwise_gap() {
    use mscott::scott::max_pairwise_gap;
    let s = mscott::parse_structure(SIX).unwrap();
    let table = r0_table(&s, 3, &AnalysisConfig::default());
    for a in all_tuples(s.len(), 3) {
        for b in all_tuples(s.len(), 3) {
            let gap = max_pairwise_gap(&s, &a, &b);
            assert!(table.get(&a, &b).unwrap() >= &gap, "{a:?} {b:?}");
        }
    }
}

#[test]
fn fixpoint_shrinks_as_threshold_grows() {
    let s = data("square.ms");
    let cfg = small();
    let qs = [rat(1, 20), rat(1, 10), rat(1, 5), rat(1, 2), rat(3, 4)];
    let traces: Vec<_> = qs.iter().map(|q| gamma_fixpoint(&s, q, &cfg)).collect();
    for w in traces.windows(2) {
        for (lo, hi) in w[0].entries.iter().zip(&w[1].entries) {
            for (l, h) in lo.iter().zip(hi) {
                // Membership at the larger threshold implies membership at the smaller.
                assert!(h.is_none() || l.is_some());
            }
        }
    }
}

#[test]
fn automorphisms_are_exhaustive() {
    assert_eq!(data("two_point.ms").automorphisms().len(), 2);
    assert_eq!(data("square.ms").automorphisms().len(), 8);
    assert_eq!(data("three_point.ms").automorphisms().len(), 1);
    assert_eq!(data("marked_triangle.ms").automorphisms().len(), 2);
}
