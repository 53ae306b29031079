use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use mscott::dense::enumerate_family;
use mscott::modulus::{largest_modulus_below, GridFunction};
use mscott::numeric::{parse_rational_list, RatGrid};
use mscott::structures::LoadError;
use mscott::syntax::{parse_formula_file, Signature};
use mscott::{eval_formula_value, parse_formula, parse_structure, Formula, WeakModulus};
use serde_json::json;

use super::{point_arg, rational_arg, structure};
use crate::{CliError, Report};

pub fn validate(path: &Path) -> Result<Report, CliError> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (points, report) = match parse_structure(&text) {
        Ok(s) => (s.len(), s.validate()),
        Err(LoadError::Invalid(report)) => (0, report),
        Err(e) => {
            return Err(anyhow::Error::new(e)
                .context(format!("loading {}", path.display()))
                .into())
        }
    };
    let mut out = String::new();
    if report.is_valid() {
        writeln!(out, "valid: {points} points, no violations").unwrap();
    } else {
        writeln!(out, "invalid: {} violation(s)", report.violations.len()).unwrap();
        for v in &report.violations {
            writeln!(out, "  {v}").unwrap();
        }
    }
    Ok(Report {
        text: out,
        json: json!({
            "command": "validate",
            "structure": path.display().to_string(),
            "valid": report.is_valid(),
            "violations": report.violations,
        }),
        rejected: !report.is_valid(),
    })
}

/// Formula from inline text or `@path`; a formula file's signature must
/// agree with the structure's on every symbol it declares.
fn formula_arg(text: &str, sig: &Signature) -> Result<Formula, CliError> {
    let Some(path) = text.strip_prefix('@') else {
        return Ok(parse_formula(text, sig).context("parsing formula")?);
    };
    let body = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let (file_sig, phi) = parse_formula_file(&body).with_context(|| format!("parsing {path}"))?;
    for r in file_sig.relations() {
        if sig.relation(&r.name).map(|s| s.arity) != Some(r.arity) {
            return Err(anyhow!(
                "relation {}/{} is not in the structure's signature",
                r.name,
                r.arity
            )
            .into());
        }
    }
    for f in file_sig.functions() {
        if sig.function(&f.name).map(|s| s.arity) != Some(f.arity) {
            return Err(anyhow!(
                "function {}/{} is not in the structure's signature",
                f.name,
                f.arity
            )
            .into());
        }
    }
    for c in file_sig.constants() {
        if !sig.is_constant(c) {
            return Err(anyhow!("constant {c} is not in the structure's signature").into());
        }
    }
    Ok(phi)
}

pub fn eval(
    path: &Path,
    formula: &str,
    tuple: &[String],
    decimal: bool,
) -> Result<Report, CliError> {
    let s = structure(path)?;
    let phi = formula_arg(formula, s.signature())?;
    let t = tuple
        .iter()
        .map(|n| point_arg(&s, n))
        .collect::<Result<Vec<_>, _>>()?;
    if t.len() < phi.min_arity() {
        return Err(CliError::usage(format!(
            "formula has free variables up to v{}; {} point(s) given",
            phi.min_arity() - 1,
            t.len()
        )));
    }
    let value = eval_formula_value(&phi, &s, &t).context("evaluating")?;
    let mut text = format!("{value}");
    if decimal {
        write!(text, " (approx. {:.6})", value.to_f64_lossy()).unwrap();
    }
    text.push('\n');
    let mut j = json!({
        "command": "eval",
        "formula": phi.to_string(),
        "tuple": s.names(&t),
        "value": value,
    });
    if decimal {
        j["approximate_decimal"] = json!(format!("{:.6}", value.to_f64_lossy()));
    }
    Ok(Report {
        text,
        json: j,
        rejected: false,
    })
}

fn signature_file(path: &Path) -> Result<Signature, CliError> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(s) = parse_structure(&text) {
        return Ok(s.signature().clone());
    }
    let (sig, _) = parse_formula_file(&text)
        .with_context(|| format!("reading a signature from {}", path.display()))?;
    Ok(sig)
}

pub fn dense_family(
    arity: usize,
    count: usize,
    omega: WeakModulus,
    signature: Option<&Path>,
) -> Result<Report, CliError> {
    if arity == 0 {
        return Err(CliError::usage("--arity must be at least 1"));
    }
    let sig = match signature {
        Some(p) => signature_file(p)?,
        None => Signature::empty(),
    };
    let index = mscott::dense::DenseFamilyIndex::new(arity, omega, sig);
    let members = enumerate_family(&index, count);
    let mut text = String::new();
    for m in &members {
        writeln!(text, "{}", m.formula).unwrap();
    }
    let list: Vec<_> = members
        .iter()
        .map(|m| json!({ "level": m.level, "formula": m.formula.to_string() }))
        .collect();
    Ok(Report {
        text,
        json: json!({
            "command": "dense-family",
            "arity": arity,
            "count": count,
            "omega": omega,
            "members": list,
        }),
        rejected: false,
    })
}

pub fn modulus_floor(
    values: &str,
    arity: usize,
    grid: &str,
    bound: &str,
    k_max: usize,
) -> Result<Report, CliError> {
    let step = rational_arg("--grid", grid)?;
    let bound = rational_arg("--bound", bound)?;
    if !step.is_positive() || !bound.is_positive() {
        return Err(CliError::usage("--grid and --bound must be positive"));
    }
    let vals =
        parse_rational_list(values).map_err(|e| CliError::usage(format!("--values: {e}")))?;
    let g = RatGrid::new(arity, step.clone(), bound.clone());
    if vals.len() != g.len() {
        return Err(CliError::usage(format!(
            "--values: the grid has {} points, {} values given",
            g.len(),
            vals.len()
        )));
    }
    let f = GridFunction {
        grid: g,
        values: vals.into_iter().map(Some).collect(),
    };
    let env = largest_modulus_below(&f, k_max).context("computing the envelope")?;
    let text = format!(
        "modulus: {}\nvalues: {}\ngrid: {step} on [0,{bound}]^{arity}, k_max {k_max}\nclosure tightened: {}\n",
        env.modulus,
        env.values.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
        env.closure_tightened
    );
    Ok(Report {
        text,
        json: json!({
            "command": "modulus-floor",
            "modulus": env.modulus.to_string(),
            "values": env.values,
            "grid": step,
            "bound": bound,
            "arity": arity,
            "k_max": k_max,
            "closure_tightened": env.closure_tightened,
        }),
        rejected: false,
    })
}
