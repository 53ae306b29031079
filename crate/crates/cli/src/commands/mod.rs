mod analysis;
mod basic;

use std::path::Path;

use anyhow::Context;
use mscott::structures::LoadError;
use mscott::{load_structure, PreStructure, Rational};

use crate::args::Command;
use crate::{CliError, Report};

pub fn dispatch(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::Validate { structure } => basic::validate(structure),
        Command::Eval {
            structure,
            formula,
            tuple,
            decimal,
        } => basic::eval(structure, formula, tuple, *decimal),
        Command::DenseFamily {
            arity,
            count,
            omega,
            signature,
        } => basic::dense_family(*arity, *count, (*omega).into(), signature.as_deref()),
        Command::ModulusFloor {
            values,
            arity,
            grid,
            bound,
            k_max,
        } => basic::modulus_floor(values, *arity, grid, bound, *k_max),
        Command::R0 {
            structure,
            left,
            right,
            analysis,
        } => analysis::r0(structure, left, right, analysis),
        Command::Ralpha {
            structure,
            stage,
            arity,
            analysis,
        } => analysis::ralpha(structure, *stage, *arity, analysis),
        Command::ScottRank {
            structure,
            analysis,
        } => analysis::scott_rank(structure, analysis),
        Command::Fixpoint {
            structure,
            q,
            analysis,
        } => analysis::fixpoint(structure, q, analysis),
    }
}

pub(crate) fn structure(path: &Path) -> Result<PreStructure, CliError> {
    load_structure(path)
        .map_err(|e: LoadError| anyhow::Error::new(e))
        .with_context(|| format!("loading {}", path.display()))
        .map_err(CliError::Domain)
}

pub(crate) fn rational_arg(flag: &str, text: &str) -> Result<Rational, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: `{text}` is not a rational")))
}

/// Comma-separated point names to indices.
pub(crate) fn tuple_arg(s: &PreStructure, text: &str) -> Result<Vec<usize>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|name| point_arg(s, name)).collect()
}

pub(crate) fn point_arg(s: &PreStructure, name: &str) -> Result<usize, CliError> {
    let name = name.trim();
    s.point_index(name)
        .ok_or_else(|| CliError::usage(format!("no point named `{name}`")))
}

pub(crate) fn tuple_text(s: &PreStructure, t: &[usize]) -> String {
    format!("({})", s.names(t).join(","))
}
