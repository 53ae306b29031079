use std::fmt::Write as _;
use std::path::Path;

use mscott::scott::{
    certified_slack, gamma_fixpoint_from, r0 as stage_zero, r0_closed_form, r0_table, r_successor,
    triangle, AnalysisConfig,
};
use mscott::structures::all_tuples;
use mscott::{PreStructure, Rational};
use serde_json::{json, Value};

use super::{rational_arg, structure, tuple_arg, tuple_text};
use crate::args::AnalysisArgs;
use crate::{CliError, Report};

fn config(a: &AnalysisArgs) -> Result<AnalysisConfig, CliError> {
    let grid = rational_arg("--grid", &a.grid)?;
    if !grid.is_positive() || grid > Rational::one() {
        return Err(CliError::usage("--grid must lie in (0, 1]"));
    }
    if a.max_arity == 0 {
        return Err(CliError::usage("--max-arity must be at least 1"));
    }
    Ok(AnalysisConfig {
        omega: a.omega.into(),
        family_size: a.family,
        max_arity: a.max_arity,
        stage_cap: a.stage_cap,
        grid,
        k_max: a.k_max,
    })
}

fn config_line(c: &AnalysisConfig) -> String {
    format!(
        "config: family {} per arity, max arity {}, stage cap {}, grid {}, k_max {}, omega {}\n",
        c.family_size,
        c.max_arity,
        c.stage_cap,
        c.grid,
        c.k_max,
        serde_json::to_value(c.omega)
            .expect("serializable")
            .as_str()
            .unwrap_or("?")
    )
}

fn slack_text(slack: &Option<Rational>) -> String {
    match slack {
        Some(v) => format!("certified slack: {v}\n"),
        None => {
            "certified slack: unavailable (no closed form for this signature or modulus)\n".into()
        }
    }
}

pub fn r0(path: &Path, left: &str, right: &str, args: &AnalysisArgs) -> Result<Report, CliError> {
    let cfg = config(args)?;
    let s = structure(path)?;
    let (a, b) = (tuple_arg(&s, left)?, tuple_arg(&s, right)?);
    if a.len() != b.len() || a.is_empty() {
        return Err(CliError::usage(
            "tuples must be nonempty and of equal length",
        ));
    }
    let (value, meta) = stage_zero(&s, &a, &b, &cfg).map_err(|e| CliError::usage(e.to_string()))?;
    let closed = r0_closed_form(&s, &a, &b, cfg.omega);
    let slack = closed.as_ref().map(|c| c - &value);
    let mut text = format!(
        "r0({}, {}) = {value}\n",
        tuple_text(&s, &a),
        tuple_text(&s, &b)
    );
    writeln!(text, "family members evaluated: {}", meta.members_used).unwrap();
    if let Some(c) = &closed {
        writeln!(text, "closed form: {c}").unwrap();
    }
    text.push_str(&slack_text(&slack));
    text.push_str(&config_line(&cfg));
    Ok(Report {
        text,
        json: json!({
            "command": "r0",
            "left": s.names(&a),
            "right": s.names(&b),
            "value": value,
            "meta": {
                "config": cfg,
                "members_used": meta.members_used,
                "closed_form": closed,
                "certified_slack": slack,
            },
        }),
        rejected: false,
    })
}

fn table_rows(s: &PreStructure, arity: usize, values: &[Rational]) -> (String, Vec<Value>) {
    let tuples = all_tuples(s.len(), arity);
    let t = tuples.len();
    let mut text = String::new();
    let mut rows = Vec::with_capacity(t * t);
    for (i, a) in tuples.iter().enumerate() {
        for (j, b) in tuples.iter().enumerate() {
            let v = &values[i * t + j];
            writeln!(text, "{} {} {v}", tuple_text(s, a), tuple_text(s, b)).unwrap();
            rows.push(json!({ "left": s.names(a), "right": s.names(b), "value": v }));
        }
    }
    (text, rows)
}

pub fn ralpha(
    path: &Path,
    stage: usize,
    arity: usize,
    args: &AnalysisArgs,
) -> Result<Report, CliError> {
    let mut cfg = config(args)?;
    if arity == 0 {
        return Err(CliError::usage("--arity must be at least 1"));
    }
    if stage > cfg.stage_cap {
        return Err(CliError::usage(format!(
            "--stage {stage} exceeds the stage cap {}",
            cfg.stage_cap
        )));
    }
    // A single stage only needs the one column of the triangle above it.
    cfg.max_arity = cfg.max_arity.max(arity + stage);
    let s = structure(path)?;
    let base = r0_table(&s, arity + stage, &cfg);
    let slack = certified_slack(&s, std::slice::from_ref(&base), cfg.omega);
    let mut table = base;
    for _ in 0..stage {
        table = r_successor(&table);
    }
    let (rows_text, rows) = table_rows(&s, arity, table.values());
    let mut text = format!("r{stage} at arity {arity} (max {})\n", table.max_value());
    text.push_str(&rows_text);
    text.push_str(&slack_text(&slack));
    text.push_str(&config_line(&cfg));
    Ok(Report {
        text,
        json: json!({
            "command": "ralpha",
            "stage": stage,
            "arity": arity,
            "max": table.max_value(),
            "pairs": rows,
            "meta": { "config": cfg, "certified_slack": slack },
        }),
        rejected: false,
    })
}

pub fn scott_rank(path: &Path, args: &AnalysisArgs) -> Result<Report, CliError> {
    let cfg = config(args)?;
    let s = structure(path)?;
    let (report, tables) = mscott::scott::scott_rank(&s, &cfg);
    let slack = certified_slack(&s, &tables[0], cfg.omega);
    let mut text = match report.rank {
        Some(r) => format!("scott rank: {r}\n"),
        None => format!(
            "scott rank: not reached within the computed triangle (stages 0..={})\n",
            report.stages_computed
        ),
    };
    let mut stages = Vec::new();
    for (k, row) in tables.iter().enumerate() {
        let maxima: Vec<Rational> = row.iter().map(|t| t.max_value()).collect();
        writeln!(
            text,
            "stage {k}: max by arity {}",
            maxima
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        )
        .unwrap();
        stages.push(json!({ "stage": k, "max_by_arity": maxima }));
    }
    text.push_str(&slack_text(&slack));
    text.push_str(&config_line(&cfg));
    Ok(Report {
        text,
        json: json!({
            "command": "scott-rank",
            "rank": report.rank,
            "partial": report.is_partial(),
            "stages_computed": report.stages_computed,
            "stages": stages,
            "meta": { "config": cfg, "certified_slack": slack },
        }),
        rejected: false,
    })
}

pub fn fixpoint(path: &Path, q: &str, args: &AnalysisArgs) -> Result<Report, CliError> {
    let cfg = config(args)?;
    let q = rational_arg("--q", q)?;
    if !q.is_positive() {
        return Err(CliError::usage("--q must be positive"));
    }
    let s = structure(path)?;
    let r0: Vec<_> = triangle(
        &s,
        &AnalysisConfig {
            stage_cap: 0,
            ..cfg.clone()
        },
    )
    .into_iter()
    .next()
    .unwrap_or_default();
    let slack = certified_slack(&s, &r0, cfg.omega);
    let trace = gamma_fixpoint_from(&r0, &q, cfg.stage_cap);
    let mut text = format!("fixpoint for q = {q}\n");
    for st in &trace.stages {
        writeln!(
            text,
            "stage {}: {} pairs ({} new)",
            st.stage, st.size, st.added
        )
        .unwrap();
    }
    match trace.closure_stage {
        Some(c) => writeln!(text, "closed at stage {c}").unwrap(),
        None => writeln!(text, "not closed within stage cap {}", cfg.stage_cap).unwrap(),
    }
    writeln!(
        text,
        "pairs of unequal length: {} (stage 0)",
        trace.mismatched_pairs
    )
    .unwrap();
    let mut entries = Vec::new();
    for n in 1..=cfg.max_arity {
        let tuples = all_tuples(s.len(), n);
        for (i, a) in tuples.iter().enumerate() {
            for (j, b) in tuples.iter().enumerate() {
                if let Some(e) = trace.entry(i, j, n) {
                    writeln!(
                        text,
                        "{} {} enters at {e}",
                        tuple_text(&s, a),
                        tuple_text(&s, b)
                    )
                    .unwrap();
                    entries.push(json!({ "left": s.names(a), "right": s.names(b), "stage": e }));
                }
            }
        }
    }
    text.push_str(&slack_text(&slack));
    text.push_str(&config_line(&cfg));
    Ok(Report {
        text,
        json: json!({
            "command": "fixpoint",
            "q": q,
            "stages": trace.stages,
            "closure_stage": trace.closure_stage,
            "mismatched_pairs": trace.mismatched_pairs,
            "entries": entries,
            "meta": { "config": cfg, "certified_slack": slack },
        }),
        rejected: false,
    })
}
