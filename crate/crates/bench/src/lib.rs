//! Fixtures shared by the benchmarks.

use mscott::{parse_structure, rat, PreStructure};

/// `n` points on a circle of circumference `n / 8` with the arc metric.
pub fn cycle(n: usize) -> PreStructure {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut text = format!("mscott/1\n[points]\n{}\n[metric]\n", names.join(" "));
    for i in 1..n {
        let row: Vec<String> = (0..i)
            .map(|j| {
                let k = (i - j).min(n - (i - j)) as i64;
                rat(k, 8).to_string()
            })
            .collect();
        text.push_str(&format!("{}: {}\n", names[i], row.join(" ")));
    }
    parse_structure(&text).expect("cycle metric is valid")
}

/// Six points with no nontrivial symmetry.
pub fn scalene() -> PreStructure {
    parse_structure(
        "mscott/1\n[points]\na b c d e f\n[metric]\nb: 1/3\nc: 1/2 1/4\nd: 2/5 1/2 1/3\n\
         e: 3/5 1/2 1/2 1/4\nf: 1/2 2/5 3/5 1/2 1/3\n",
    )
    .expect("valid metric")
}
