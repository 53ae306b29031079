use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::{all_tuples, tuple_index, PreStructure, StructureError, ValidationReport};
use crate::numeric::Rational;
use crate::syntax::parse::{apply_signature_line, lex, Tok};
use crate::syntax::{parse_signature_line, Signature, SyntaxError, SyntaxErrorKind};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line}: {error}")]
    Structure { line: usize, error: StructureError },
    #[error("structure violates {} invariant(s); first: {}", .0.violations.len(), .0.violations[0])]
    Invalid(ValidationReport),
}

fn err(line: usize, col: usize, kind: SyntaxErrorKind) -> LoadError {
    LoadError::Syntax(SyntaxError { line, col, kind })
}

fn unexpected(line: usize, col: usize, found: impl fmt::Display, expected: &str) -> LoadError {
    err(
        line,
        col,
        SyntaxErrorKind::Unexpected {
            found: found.to_string(),
            expected: expected.to_string(),
        },
    )
}

struct Section<'a> {
    header: Vec<String>,
    line: usize,
    body: Vec<(usize, &'a str)>,
}

fn split_sections(text: &str) -> Result<Vec<Section<'_>>, LoadError> {
    let mut out = vec![Section {
        header: Vec::new(),
        line: 1,
        body: Vec::new(),
    }];
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let trimmed = raw.trim_start();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(close) = rest.find(']') else {
                return Err(unexpected(ln, raw.len() + 1, "end of line", "`]`"));
            };
            let header = rest[..close]
                .split_whitespace()
                .map(str::to_string)
                .collect();
            let mut body = Vec::new();
            let tail = &rest[close + 1..];
            if !tail.trim().is_empty() {
                body.push((ln, tail));
            }
            out.push(Section {
                header,
                line: ln,
                body,
            });
        } else {
            out.last_mut().unwrap().body.push((ln, raw));
        }
    }
    Ok(out)
}

/// Tokens of one line, without the trailing end marker.
fn line_tokens(text: &str, line: usize) -> Result<Vec<(Tok, usize)>, LoadError> {
    let mut toks: Vec<(Tok, usize)> = lex(text, line)?
        .into_iter()
        .map(|t| (t.tok, t.col))
        .collect();
    toks.pop();
    Ok(toks)
}

fn point_ref(s: &PreStructure, tok: &(Tok, usize), line: usize) -> Result<usize, LoadError> {
    match &tok.0 {
        Tok::Ident(name) => s
            .point_index(name)
            .ok_or_else(|| err(line, tok.1, SyntaxErrorKind::UnknownSymbol(name.clone()))),
        other => Err(unexpected(line, tok.1, other, "point name")),
    }
}

/// Parses and validates a structure file.
pub fn parse_structure(text: &str) -> Result<PreStructure, LoadError> {
    let sections = split_sections(text)?;
    let preamble: Vec<_> = sections[0]
        .body
        .iter()
        .filter(|(_, l)| !l.split('#').next().unwrap_or("").trim().is_empty())
        .collect();
    match preamble.first() {
        Some((_, l))
            if l.split('#').next().unwrap_or("").trim() == "mscott/1" && preamble.len() == 1 => {}
        Some((ln, l)) => {
            return Err(unexpected(
                *ln,
                1,
                format!("`{}`", l.trim()),
                "`mscott/1` header",
            ))
        }
        None => return Err(unexpected(1, 1, "no header", "`mscott/1` header")),
    }

    let mut sig = Signature::empty();
    let mut pseudometric = false;
    let mut points: Vec<String> = Vec::new();
    let find = |name: &str| {
        sections
            .iter()
            .find(|s| s.header.first().map(String::as_str) == Some(name))
    };
    if let Some(sec) = find("signature") {
        for (ln, l) in &sec.body {
            if let Some(decl) = parse_signature_line(l, *ln)? {
                pseudometric |= apply_signature_line(&mut sig, decl, *ln)?;
            }
        }
    }
    let points_sec = find("points")
        .ok_or_else(|| err(1, 1, SyntaxErrorKind::MissingSection("points".into())))?;
    for (ln, l) in &points_sec.body {
        for (tok, col) in line_tokens(l, *ln)? {
            match tok {
                Tok::Ident(p) => {
                    if points.contains(&p) {
                        return Err(LoadError::Structure {
                            line: *ln,
                            error: StructureError::DuplicatePoint(p),
                        });
                    }
                    points.push(p);
                }
                Tok::Comma => {}
                other => return Err(unexpected(*ln, col, other, "point name")),
            }
        }
    }
    let n = points.len();
    if n == 0 {
        return Err(LoadError::Structure {
            line: points_sec.line,
            error: StructureError::Empty,
        });
    }

    let mut rows: Vec<Option<Vec<Rational>>> = vec![None; n];
    rows[0] = Some(Vec::new());
    let metric_sec = find("metric");
    if let Some(sec) = metric_sec {
        for (ln, l) in &sec.body {
            let toks = line_tokens(l, *ln)?;
            if toks.is_empty() {
                continue;
            }
            let i = match &toks[0].0 {
                Tok::Ident(p) => points.iter().position(|q| q == p).ok_or_else(|| {
                    err(*ln, toks[0].1, SyntaxErrorKind::UnknownSymbol(p.clone()))
                })?,
                other => return Err(unexpected(*ln, toks[0].1, other, "point name")),
            };
            if toks.get(1).map(|t| &t.0) != Some(&Tok::Colon) {
                return Err(unexpected(
                    *ln,
                    toks.get(1).map_or(l.len() + 1, |t| t.1),
                    "row",
                    "`:`",
                ));
            }
            let mut vals = Vec::new();
            for (tok, col) in &toks[2..] {
                match tok {
                    Tok::Num(q) => vals.push(q.clone()),
                    Tok::Comma => {}
                    other => return Err(unexpected(*ln, *col, other, "distance")),
                }
            }
            if vals.len() != i {
                return Err(unexpected(
                    *ln,
                    1,
                    format!("{} values", vals.len()),
                    &format!("{i} values (distances to earlier points)"),
                ));
            }
            rows[i] = Some(vals);
        }
    }
    let mut metric = vec![vec![Rational::zero(); n]; n];
    for (i, row) in rows.iter().enumerate() {
        let Some(row) = row else {
            let line = metric_sec.map_or(1, |s| s.line);
            return Err(err(
                line,
                1,
                SyntaxErrorKind::MissingSection(format!("metric row for `{}`", points[i])),
            ));
        };
        for (j, q) in row.iter().enumerate() {
            metric[i][j] = q.clone();
            metric[j][i] = q.clone();
        }
    }
    let mut s = PreStructure::new(sig.clone(), points, metric, pseudometric).map_err(|error| {
        LoadError::Structure {
            line: points_sec.line,
            error,
        }
    })?;

    for sec in &sections[1..] {
        let kind = sec.header.first().map(String::as_str).unwrap_or("");
        match kind {
            "signature" | "points" | "metric" => {}
            "rel" | "fun" | "const" => {
                let Some(name) = sec.header.get(1) else {
                    return Err(unexpected(sec.line, 1, "section", "symbol name in header"));
                };
                match kind {
                    "rel" => load_relation(&mut s, &sig, name, sec)?,
                    "fun" => load_function(&mut s, &sig, name, sec)?,
                    _ => load_constant(&mut s, name, sec)?,
                }
            }
            other => {
                return Err(unexpected(
                    sec.line,
                    1,
                    format!("[{other}]"),
                    "known section",
                ))
            }
        }
    }
    s.check_complete().map_err(|error| LoadError::Structure {
        line: text.lines().count().max(1),
        error,
    })?;
    let report = s.validate();
    if !report.is_valid() {
        return Err(LoadError::Invalid(report));
    }
    Ok(s)
}

fn table_lines<'a>(
    s: &PreStructure,
    sec: &'a Section<'a>,
    arity: usize,
    sep: Tok,
) -> Result<Vec<(usize, usize, Vec<(Tok, usize)>)>, LoadError> {
    let n = s.len();
    let mut seen = vec![false; n.pow(arity as u32)];
    let mut out = Vec::new();
    for (ln, l) in &sec.body {
        let toks = line_tokens(l, *ln)?;
        if toks.is_empty() {
            continue;
        }
        let Some(k) = toks.iter().position(|t| t.0 == sep) else {
            return Err(unexpected(
                *ln,
                l.len() + 1,
                "end of line",
                &sep.to_string(),
            ));
        };
        let args: Vec<_> = toks[..k].iter().filter(|t| t.0 != Tok::Comma).collect();
        if args.len() != arity {
            return Err(err(
                *ln,
                1,
                SyntaxErrorKind::Arity {
                    symbol: sec.header[1].clone(),
                    expected: arity,
                    found: args.len(),
                },
            ));
        }
        let tuple = args
            .iter()
            .map(|t| point_ref(s, t, *ln))
            .collect::<Result<Vec<_>, _>>()?;
        let idx = tuple_index(n, &tuple);
        if seen[idx] {
            return Err(unexpected(*ln, 1, "repeated tuple", "each tuple once"));
        }
        seen[idx] = true;
        out.push((*ln, idx, toks[k + 1..].to_vec()));
    }
    if let Some(missing) = seen.iter().position(|b| !b) {
        let t = &all_tuples(n, arity)[missing];
        return Err(LoadError::Structure {
            line: sec.line,
            error: StructureError::Missing(format!("{}({})", sec.header[1], s.names(t).join(", "))),
        });
    }
    Ok(out)
}

fn load_relation(
    s: &mut PreStructure,
    sig: &Signature,
    name: &str,
    sec: &Section<'_>,
) -> Result<(), LoadError> {
    let sym = sig.relation(name).ok_or_else(|| {
        err(
            sec.line,
            1,
            SyntaxErrorKind::UnknownSymbol(name.to_string()),
        )
    })?;
    let mut values = vec![Rational::zero(); s.len().pow(sym.arity as u32)];
    for (ln, idx, rest) in table_lines(s, sec, sym.arity, Tok::Eq)? {
        match rest.as_slice() {
            [(Tok::Num(q), _)] => values[idx] = q.clone(),
            [(other, col), ..] => return Err(unexpected(ln, *col, other, "value")),
            [] => return Err(unexpected(ln, 1, "end of line", "value")),
        }
    }
    s.set_relation(name, values)
        .map_err(|error| LoadError::Structure {
            line: sec.line,
            error,
        })
}

fn load_function(
    s: &mut PreStructure,
    sig: &Signature,
    name: &str,
    sec: &Section<'_>,
) -> Result<(), LoadError> {
    let sym = sig.function(name).ok_or_else(|| {
        err(
            sec.line,
            1,
            SyntaxErrorKind::UnknownSymbol(name.to_string()),
        )
    })?;
    let mut values = vec![0usize; s.len().pow(sym.arity as u32)];
    for (ln, idx, rest) in table_lines(s, sec, sym.arity, Tok::Arrow)? {
        match rest.as_slice() {
            [t] => values[idx] = point_ref(s, t, ln)?,
            [_, (other, col), ..] => return Err(unexpected(ln, *col, other, "end of line")),
            [] => return Err(unexpected(ln, 1, "end of line", "point name")),
        }
    }
    s.set_function(name, values)
        .map_err(|error| LoadError::Structure {
            line: sec.line,
            error,
        })
}

fn load_constant(s: &mut PreStructure, name: &str, sec: &Section<'_>) -> Result<(), LoadError> {
    let mut toks = Vec::new();
    let mut line = sec.line;
    for (ln, l) in &sec.body {
        let t = line_tokens(l, *ln)?;
        if !t.is_empty() {
            line = *ln;
            toks.extend(t);
        }
    }
    let [t] = toks.as_slice() else {
        return Err(unexpected(
            line,
            1,
            format!("{} tokens", toks.len()),
            "one point name",
        ));
    };
    let p = point_ref(s, t, line)?;
    s.set_constant(name, p)
        .map_err(|error| LoadError::Structure {
            line: sec.line,
            error,
        })
}

/// Reads and validates a structure file.
pub fn load_structure(path: impl AsRef<Path>) -> Result<PreStructure, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_structure(&text)
}

impl fmt::Display for PreStructure {
    /// Writes the `mscott/1` file form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mscott/1")?;
        let sig = self.signature();
        if !sig.is_empty() || self.is_pseudometric() {
            writeln!(f, "[signature]")?;
            write!(f, "{sig}")?;
            if self.is_pseudometric() {
                writeln!(f, "pseudometric")?;
            }
        }
        writeln!(f, "[points]")?;
        writeln!(f, "{}", self.points().join(" "))?;
        writeln!(f, "[metric]")?;
        for i in 1..self.len() {
            let row: Vec<String> = (0..i).map(|j| self.dist(i, j).to_string()).collect();
            writeln!(f, "{}: {}", self.point_name(i), row.join(" "))?;
        }
        for r in sig.relations() {
            writeln!(f, "[rel {}]", r.name)?;
            for t in all_tuples(self.len(), r.arity) {
                let v = self.relation_value(&r.name, &t).expect("complete");
                writeln!(f, "{} = {v}", self.names(&t).join(" ").trim_start())?;
            }
        }
        for g in sig.functions() {
            writeln!(f, "[fun {}]", g.name)?;
            for t in all_tuples(self.len(), g.arity) {
                let v = self.function_value(&g.name, &t).expect("complete");
                writeln!(f, "{} -> {}", self.names(&t).join(" "), self.point_name(v))?;
            }
        }
        for c in sig.constants() {
            let p = self.constant(c).expect("complete");
            writeln!(f, "[const {c}] {}", self.point_name(p))?;
        }
        Ok(())
    }
}
