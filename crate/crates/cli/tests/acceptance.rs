//! End-to-end acceptance checks. Run with `--nocapture` to see one result
//! line per criterion.

mod common;

use std::process::Command;
use std::time::Instant;

use common::{data, decode, int_tables, random_structure};
use mscott::dense::{default_budget, lattice_approximate, segment_norm_bound, UnitGridFunction};
use mscott::modulus::{check_modulus, largest_modulus_below, pi_fold, GridFunction, NiceDomain};
use mscott::numeric::{grid_points, RatGrid};
use mscott::scott::{
    closed_form_table, max_pairwise_gap, oracle_equivalence_with, triangle, AnalysisConfig, BFTable,
};
use mscott::structures::all_tuples;
use mscott::{
    load_structure, rat, ModulusSpec, PreStructure, Rational, SegmentConnective, WeakModulus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Corpus {
    items: Vec<(String, PreStructure, Vec<Vec<BFTable>>)>,
}

fn corpus() -> Corpus {
    let cfg = AnalysisConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut items = Vec::new();
    for i in 0..20 {
        let n = 2 + i % 5;
        let s = random_structure(&mut rng, n, i % 3 == 2);
        let tables = triangle(&s, &cfg);
        items.push((format!("random-{i} ({n} points)"), s, tables));
    }
    for name in [
        "three_point.ms",
        "two_point.ms",
        "square.ms",
        "marked_triangle.ms",
    ] {
        let s = load_structure(data(name)).unwrap();
        let tables = triangle(&s, &cfg);
        items.push((name.to_string(), s, tables));
    }
    Corpus { items }
}

fn all_tables(c: &Corpus) -> impl Iterator<Item = (&str, &PreStructure, &BFTable)> {
    c.items
        .iter()
        .flat_map(|(name, s, rows)| rows.iter().flatten().map(move |t| (name.as_str(), s, t)))
}

fn pseudo_distance(c: &Corpus) -> Outcome {
    let mut triples = 0u64;
    for (name, s, table) in all_tables(c) {
        let (it, _) = int_tables(s, table);
        let t = table.tuples();
        let v = |a: usize, b: usize| it.nums[a * t + b];
        for a in 0..t {
            if v(a, a) != 0 {
                return Err(format!("{name}: r{}({a},{a}) != 0", table.stage));
            }
            for b in 0..t {
                if v(a, b) != v(b, a) {
                    return Err(format!("{name}: asymmetric at stage {}", table.stage));
                }
                for m in 0..t {
                    if v(a, b) > v(a, m) + v(m, b) {
                        return Err(format!(
                            "{name}: triangle fails at stage {} arity {}",
                            table.stage, table.arity
                        ));
                    }
                }
                triples += t as u64;
            }
        }
    }
    Ok(format!("{} structures, {triples} triples", c.items.len()))
}

fn omega_respect(c: &Corpus) -> Outcome {
    let mut checks = 0u64;
    for (name, s, table) in all_tables(c) {
        let (it, metric) = int_tables(s, table);
        let (p, n, t) = (s.len(), table.arity, table.tuples());
        let tuples: Vec<Vec<usize>> = (0..t).map(|k| decode(k, p, n)).collect();
        let shift = |a: usize, a2: usize| -> i64 {
            tuples[a]
                .iter()
                .zip(&tuples[a2])
                .map(|(&x, &y)| metric[x * p + y])
                .sum()
        };
        for a in 0..t {
            for a2 in 0..t {
                let w = shift(a, a2);
                for b in 0..t {
                    if it.nums[a * t + b] > it.nums[a2 * t + b] + w {
                        return Err(format!(
                            "{name}: stage {} arity {n} tuples {a},{a2},{b}",
                            table.stage
                        ));
                    }
                }
                checks += t as u64;
            }
        }
    }
    Ok(format!("{checks} inequalities, zero violations"))
}

fn monotone(c: &Corpus) -> Outcome {
    let mut cells = 0usize;
    for (name, _, rows) in &c.items {
        for k in 1..rows.len() {
            for (hi, lo) in rows[k].iter().zip(&rows[k - 1]) {
                if hi.values().iter().zip(lo.values()).any(|(h, l)| h < l) {
                    return Err(format!("{name}: r{} < r{} at arity {}", k, k - 1, hi.arity));
                }
                cells += hi.values().len();
            }
        }
    }
    Ok(format!("{cells} cells"))
}

fn equivalence(c: &Corpus) -> Outcome {
    let cfg = AnalysisConfig::default();
    let mut pairs = 0usize;
    for (name, _, rows) in &c.items {
        for q in [rat(1, 10), rat(1, 4), rat(1, 2), rat(3, 4)] {
            let report = oracle_equivalence_with(rows, &q, cfg.stage_cap);
            if let Some(d) = report.discrepancies.first() {
                return Err(format!("{name} q={q}: {d:?}"));
            }
            pairs += report.pairs_checked;
        }
    }
    Ok(format!("{pairs} pairs, zero discrepancies"))
}

fn closed_form(c: &Corpus) -> Outcome {
    let mut exact = 0usize;
    let mut slack = Rational::zero();
    for (name, s, rows) in &c.items {
        if !s.signature().is_empty() {
            continue;
        }
        for table in &rows[0] {
            let sup_table = closed_form_table(s, table.arity, WeakModulus::Sum).unwrap();
            for a in all_tuples(s.len(), table.arity) {
                for b in all_tuples(s.len(), table.arity) {
                    let got = table.get(&a, &b).unwrap();
                    let gap = max_pairwise_gap(s, &a, &b);
                    let sup = sup_table.get(&a, &b).unwrap().clone();
                    if table.arity <= 2 {
                        if *got != gap || sup != gap {
                            return Err(format!("{name}: {a:?} {b:?}: {got} vs {gap}"));
                        }
                        exact += 1;
                    } else if *got < gap || *got > sup {
                        return Err(format!("{name}: {a:?} {b:?}: {got} outside [{gap}, {sup}]"));
                    } else {
                        slack = slack.max(&sup - got);
                    }
                }
            }
        }
    }
    let three = load_structure(data("three_point.ms")).unwrap();
    let rows = &c
        .items
        .iter()
        .find(|(n, _, _)| n == "three_point.ms")
        .unwrap()
        .2;
    let v = rows[0][1].get(&[0, 1], &[0, 2]).unwrap();
    if *v != rat(1, 5) || three.len() != 3 {
        return Err(format!("three-point r0((x,y),(x,z)) = {v}, expected 1/5"));
    }
    Ok(format!(
        "{exact} pairs at arity <= 2 exact; arity 3 bracketed, max slack {slack}; three-point value 1/5"
    ))
}

fn density() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let eps = rat(1, 8);
    let mut worst = Rational::zero();
    let mut leaves = 0usize;
    for i in 0..100 {
        let k = 1 + i % 2;
        let coeffs: Vec<Rational> = (0..k).map(|_| rat(rng.gen_range(1..=8), 4)).collect();
        let delta = ModulusSpec::linear(coeffs.clone()).unwrap();
        // min/max of affine pieces with slopes bounded by the coefficients.
        let pieces: Vec<(Rational, Vec<Rational>)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let slopes = coeffs
                    .iter()
                    .map(|c| c * &rat(rng.gen_range(-4..=4), 4))
                    .collect();
                (rat(rng.gen_range(0..=8), 8), slopes)
            })
            .collect();
        let use_max = rng.gen_bool(0.5);
        let u = UnitGridFunction::sample(k, rat(1, 8), |z| {
            let vals = pieces.iter().map(|(a, s)| {
                let v = a + &s.iter().zip(z).map(|(c, x)| c * x).sum::<Rational>();
                v.max(Rational::zero()).min(Rational::one())
            });
            if use_max {
                vals.max().unwrap()
            } else {
                vals.min().unwrap()
            }
        });
        match lattice_approximate(&u, &delta, &eps, default_budget(&u)) {
            Ok(a) if a.deviation < eps => {
                worst = worst.max(a.deviation);
                leaves = leaves.max(a.leaves);
            }
            Ok(a) => return Err(format!("target {i}: deviation {}", a.deviation)),
            Err(e) => return Err(format!("target {i}: {e}")),
        }
    }
    Ok(format!(
        "100/100 within 1/8; worst deviation {worst}, most leaves {leaves}"
    ))
}

fn random_segment(rng: &mut ChaCha8Rng, delta: &ModulusSpec) -> SegmentConnective {
    let k = delta.arity();
    loop {
        let x: Vec<Rational> = (0..k).map(|_| rat(rng.gen_range(0..=8), 8)).collect();
        let y: Vec<Rational> = (0..k).map(|_| rat(rng.gen_range(0..=8), 8)).collect();
        if x == y {
            continue;
        }
        let a = rat(rng.gen_range(0..=8), 8);
        let diff: Vec<Rational> = x.iter().zip(&y).map(|(p, q)| q - p).collect();
        let top = (&a + &delta.value(&pi_fold(&diff))).min(Rational::one());
        let b = &a + &((&top - &a) * rat(rng.gen_range(0..=4), 4));
        if let Ok(s) = SegmentConnective::new(delta.clone(), x, y, a, b) {
            if !s.is_degenerate() {
                return s;
            }
        }
    }
}

fn perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tight = 0usize;
    for i in 0..1000 {
        let k = 1 + i % 2;
        let coeffs = (0..k).map(|_| rat(rng.gen_range(1..=4), 2)).collect();
        let delta = ModulusSpec::linear(coeffs).unwrap();
        let (s, t) = (
            random_segment(&mut rng, &delta),
            random_segment(&mut rng, &delta),
        );
        let bound = segment_norm_bound(&s, &t).map_err(|e| e.to_string())?;
        let measured = grid_points(&RatGrid::unit(k, rat(1, 8)))
            .iter()
            .map(|z| (s.eval(z) - t.eval(z)).abs())
            .max()
            .unwrap();
        if measured > bound {
            return Err(format!("pair {i}: measured {measured} > bound {bound}"));
        }
        tight += usize::from(measured == bound);
    }
    Ok(format!("1000 pairs, zero violations ({tight} tight)"))
}

fn envelope_at_one(
    f: impl Fn(&Rational) -> Rational,
    step: Rational,
    k_max: usize,
) -> Result<Rational, String> {
    let grid = RatGrid::unit(1, step);
    let g =
        GridFunction::sample(&grid, &NiceDomain::full(1, Rational::one()), |x| f(&x[0])).unwrap();
    let env = largest_modulus_below(&g, k_max).map_err(|e| e.to_string())?;
    Ok(env.values.last().unwrap().clone())
}

fn envelope() -> Outcome {
    let step = rat(1, 8);
    let sqrt_up = |x: &Rational| {
        // Smallest multiple of 1/1000 at least sqrt(x).
        let mut k = 0i64;
        while rat(k * k, 1_000_000) < *x {
            k += 1;
        }
        rat(k, 1000)
    };
    let cases: Vec<(&str, Box<dyn Fn(&Rational) -> Rational>, bool)> = vec![
        ("identity", Box::new(|x: &Rational| x.clone()), true),
        ("sqrt table", Box::new(sqrt_up), true),
        (
            "capped linear",
            Box::new(|x: &Rational| (x * &rat(2, 1)).min(rat(1, 2))),
            true,
        ),
        ("square", Box::new(|x: &Rational| x * x), false),
    ];
    for (name, f, is_modulus) in &cases {
        let grid = RatGrid::unit(1, step.clone());
        let g = GridFunction::sample(&grid, &NiceDomain::full(1, Rational::one()), |x| f(&x[0]))
            .unwrap();
        let env = largest_modulus_below(&g, 8).map_err(|e| e.to_string())?;
        for (p, v) in grid_points(&grid).iter().zip(&env.values) {
            let fv = f(&p[0]);
            if *v > fv || (*is_modulus && *v != fv) {
                return Err(format!("{name}: envelope {v} vs f {fv} at {}", p[0]));
            }
        }
        if !check_modulus(&env.modulus, &RatGrid::unit(1, rat(1, 16))).passed() {
            return Err(format!("{name}: envelope is not a modulus"));
        }
    }
    let coarse = envelope_at_one(|x| x * x, rat(1, 8), 8)?;
    let fine = envelope_at_one(|x| x * x, rat(1, 16), 16)?;
    if coarse != rat(1, 8) || fine != rat(1, 16) {
        return Err(format!(
            "square at 1: {coarse} (grid 1/8), {fine} (grid 1/16)"
        ));
    }
    Ok("4 functions; square envelope at 1 is 1/8 then 1/16".into())
}

fn isometry(c: &Corpus) -> Outcome {
    let mut pairs = 0usize;
    for name in ["two_point.ms", "square.ms"] {
        let (_, s, rows) = c.items.iter().find(|(n, _, _)| n == name).unwrap();
        let autos: Vec<Vec<usize>> = s
            .automorphisms()
            .into_iter()
            .filter(|p| p.iter().enumerate().any(|(i, &j)| i != j))
            .collect();
        if autos.is_empty() {
            return Err(format!("{name}: no nontrivial automorphism"));
        }
        for sigma in &autos {
            for table in rows.iter().flatten() {
                for a in all_tuples(s.len(), table.arity) {
                    let b: Vec<usize> = a.iter().map(|&i| sigma[i]).collect();
                    let v = table.get(&a, &b).unwrap();
                    if !v.is_zero() {
                        return Err(format!("{name}: r{}({a:?}, {b:?}) = {v}", table.stage));
                    }
                    pairs += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} automorphic pairs, all zero"))
}

fn run_cli(args: &[String], jobs: &str) -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_mscott"))
        .args(args)
        .args(["--jobs", jobs])
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code())
}

fn determinism() -> Outcome {
    let p = |n: &str| data(n).display().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["validate".into(), p("three_point.ms")],
        vec![
            "eval".into(),
            p("three_point.ms"),
            "sup v1 . d(v0, v1)".into(),
            "x".into(),
        ],
        vec![
            "dense-family".into(),
            "--arity".into(),
            "2".into(),
            "--count".into(),
            "40".into(),
        ],
        vec![
            "modulus-floor".into(),
            "--values".into(),
            "0,1/64,1/16,9/64,1/4,25/64,9/16,49/64,1".into(),
            "--grid".into(),
            "1/8".into(),
        ],
        vec!["r0".into(), p("three_point.ms"), "x,y".into(), "x,z".into()],
        vec![
            "ralpha".into(),
            p("square.ms"),
            "--stage".into(),
            "1".into(),
            "--arity".into(),
            "2".into(),
        ],
        vec!["scott-rank".into(), p("marked_triangle.ms")],
        vec![
            "fixpoint".into(),
            p("three_point.ms"),
            "--q".into(),
            "1/10".into(),
        ],
    ];
    let mut runs = 0;
    for base in &commands {
        for json in [false, true] {
            let mut args = base.clone();
            if json {
                args.push("--json".into());
            }
            let reference = run_cli(&args, "1");
            if reference.1 != Some(0) {
                return Err(format!("{args:?} exited with {:?}", reference.1));
            }
            for jobs in ["1", "1", "4", "4", "4"] {
                runs += 1;
                if run_cli(&args, jobs) != reference {
                    return Err(format!("{args:?} differs with --jobs {jobs}"));
                }
            }
            runs += 1;
        }
    }
    Ok(format!(
        "{} commands, {runs} runs byte-identical",
        commands.len() * 2
    ))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let c = corpus();
    println!(
        "corpus: {} structures, tables built in {:.1?}",
        c.items.len(),
        start.elapsed()
    );
    let checks: Vec<(u32, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            1,
            "pseudo-distance axioms",
            Box::new(|| pseudo_distance(&c)),
        ),
        (2, "weak-modulus respect", Box::new(|| omega_respect(&c))),
        (3, "stage monotonicity", Box::new(|| monotone(&c))),
        (
            4,
            "fixpoint/threshold equivalence",
            Box::new(|| equivalence(&c)),
        ),
        (5, "stage-0 closed form", Box::new(|| closed_form(&c))),
        (6, "lattice density on the grid", Box::new(density)),
        (7, "segment perturbation bound", Box::new(perturbation)),
        (8, "modulus envelope", Box::new(envelope)),
        (9, "isometry invariance", Box::new(|| isometry(&c))),
        (10, "CLI determinism", Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (n, name, check) in &checks {
        let start = Instant::now();
        let r = check();
        let took = start.elapsed();
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} [{took:.1?}]"),
            Err(detail) => {
                println!("criterion {n:>2} FAIL  {name}: {detail} [{took:.1?}]");
                failed.push(*n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
