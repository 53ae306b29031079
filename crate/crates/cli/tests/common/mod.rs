#![allow(dead_code)]

use std::path::PathBuf;

use mscott::scott::BFTable;
use mscott::{parse_structure, rat, PreStructure, Rational};
use num::bigint::BigInt;
use num::{Integer, One, ToPrimitive};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

/// Random metric on `n` points: edge weights in `{1/8, ..., 1}` closed under
/// shortest paths. With `marked`, adds a 1-Lipschitz unary predicate `P`
/// built as a McShane extension of random seeds.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize, marked: bool) -> PreStructure {
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rat(rng.gen_range(1..=8), 8);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut text = String::from("mscott/1\n");
    if marked {
        text.push_str("[signature]\nrel P/1 : linear(1)\n");
    }
    text.push_str(&format!("[points]\n{}\n[metric]\n", names.join(" ")));
    for i in 1..n {
        let row: Vec<String> = (0..i).map(|j| d[i][j].to_string()).collect();
        text.push_str(&format!("{}: {}\n", names[i], row.join(" ")));
    }
    if marked {
        let seeds: Vec<Rational> = (0..n).map(|_| rat(rng.gen_range(0..=8), 8)).collect();
        text.push_str("[rel P]\n");
        for i in 0..n {
            let v = (0..n)
                .map(|j| &seeds[j] + &d[i][j])
                .min()
                .expect("nonempty")
                .min(Rational::one());
            text.push_str(&format!("{} = {v}\n", names[i]));
        }
    }
    parse_structure(&text).expect("generated structure is valid")
}

/// Values scaled to integers over one common denominator.
pub struct IntTable {
    pub den: i64,
    pub nums: Vec<i64>,
}

pub fn common_denominator<'a>(vals: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    let mut l = BigInt::one();
    for v in vals {
        l = l.lcm(v.denom());
    }
    l
}

pub fn scale(vals: &[Rational], den: &BigInt) -> Vec<i64> {
    vals.iter()
        .map(|v| {
            (v.numer() * (den / v.denom()))
                .to_i64()
                .expect("fits in i64")
        })
        .collect()
}

/// A stage table and the structure's metric over a shared denominator.
pub fn int_tables(s: &PreStructure, table: &BFTable) -> (IntTable, Vec<i64>) {
    let n = s.len();
    let metric: Vec<Rational> = (0..n * n).map(|k| s.dist(k / n, k % n).clone()).collect();
    let den = common_denominator(table.values().iter().chain(&metric));
    (
        IntTable {
            den: den.to_i64().expect("fits in i64"),
            nums: scale(table.values(), &den),
        },
        scale(&metric, &den),
    )
}

/// Digits of `index` in base `points`, most significant first.
pub fn decode(mut index: usize, points: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for k in (0..arity).rev() {
        out[k] = index % points;
        index /= points;
    }
    out
}
