use std::fmt;

use thiserror::Error;

use super::{
    is_variable_name, Connective, ConnectiveError, Formula, Signature, SignatureError, Term,
};
use crate::dense::{LatticeError, LatticeTerm, SegmentConnective, SegmentError};
use crate::modulus::{ModulusError, ModulusSpec};
use crate::numeric::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    BadCharacter(char),
    BadNumber(String),
    Unexpected {
        found: String,
        expected: String,
    },
    UnknownSymbol(String),
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    Modulus(ModulusError),
    Segment(SegmentError),
    Lattice(LatticeError),
    Connective(ConnectiveError),
    Signature(SignatureError),
    MissingSection(String),
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyntaxErrorKind::BadCharacter(c) => write!(f, "unexpected character `{c}`"),
            SyntaxErrorKind::BadNumber(s) => write!(f, "bad number `{s}`"),
            SyntaxErrorKind::Unexpected { found, expected } => {
                write!(f, "expected {expected}, found {found}")
            }
            SyntaxErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
            SyntaxErrorKind::Arity {
                symbol,
                expected,
                found,
            } => write!(f, "`{symbol}` takes {expected} arguments, got {found}"),
            SyntaxErrorKind::Modulus(e) => write!(f, "{e}"),
            SyntaxErrorKind::Segment(e) => write!(f, "{e}"),
            SyntaxErrorKind::Lattice(e) => write!(f, "{e}"),
            SyntaxErrorKind::Connective(e) => write!(f, "{e}"),
            SyntaxErrorKind::Signature(e) => write!(f, "{e}"),
            SyntaxErrorKind::MissingSection(s) => write!(f, "missing section [{s}]"),
        }
    }
}

/// A parse failure with its 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Num(Rational),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Dot,
    Slash,
    Colon,
    Arrow,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(q) => write!(f, "number {q}"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrack => write!(f, "`[`"),
            Tok::RBrack => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

/// Tokenizes `text`, numbering lines from `first_line`. `#` starts a comment.
pub(crate) fn lex(text: &str, first_line: usize) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, first_line, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let single = |tok| Token {
            tok,
            line: tline,
            col: tcol,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        if c.is_ascii_digit() || (c == '-' && next.is_some_and(|n| n.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len()
                && (chars[i] == '/' || chars[i] == '.')
                && chars[i + 1].is_ascii_digit()
            {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let q: Rational = s.parse().map_err(|_| SyntaxError {
                line: tline,
                col: tcol,
                kind: SyntaxErrorKind::BadNumber(s.clone()),
            })?;
            col += i - start;
            out.push(single(Tok::Num(q)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(single(Tok::Ident(s)));
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '.' => Tok::Dot,
            '/' => Tok::Slash,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '-' if next == Some('>') => {
                i += 1;
                col += 1;
                Tok::Arrow
            }
            other => {
                return Err(SyntaxError {
                    line: tline,
                    col: tcol,
                    kind: SyntaxErrorKind::BadCharacter(other),
                })
            }
        };
        out.push(single(tok));
        i += 1;
        col += 1;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str, first_line: usize) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: lex(text, first_line)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error(&self, kind: SyntaxErrorKind) -> SyntaxError {
        let t = &self.toks[self.pos];
        SyntaxError {
            line: t.line,
            col: t.col,
            kind,
        }
    }

    fn error_at(&self, pos: usize, kind: SyntaxErrorKind) -> SyntaxError {
        let t = &self.toks[pos];
        SyntaxError {
            line: t.line,
            col: t.col,
            kind,
        }
    }

    pub fn unexpected(&self, expected: &str) -> SyntaxError {
        self.error(SyntaxErrorKind::Unexpected {
            found: self.peek().to_string(),
            expected: expected.to_string(),
        })
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    pub fn number(&mut self) -> Result<Rational, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.advance();
                Ok(q)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    pub fn natural(&mut self) -> Result<usize, SyntaxError> {
        let q = self.number()?;
        match q.to_i64() {
            Some(n) if q.is_integer() && n >= 0 => Ok(n as usize),
            _ => Err(self.error_at(self.pos - 1, SyntaxErrorKind::BadNumber(q.to_string()))),
        }
    }

    pub fn finish(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    /// Index just past the item starting at `from`, i.e. the first `,` `;`
    /// or closing bracket at nesting depth 0.
    fn skip_item(&self, from: usize) -> usize {
        let mut depth = 0usize;
        let mut i = from;
        loop {
            match &self.toks[i].tok {
                Tok::LParen | Tok::LBrack => depth += 1,
                Tok::RParen | Tok::RBrack if depth == 0 => return i,
                Tok::RParen | Tok::RBrack => depth -= 1,
                Tok::Comma | Tok::Semi if depth == 0 => return i,
                Tok::Eof => return i,
                _ => {}
            }
            i += 1;
        }
    }

    /// Number of comma-separated items starting at `from` up to the closing
    /// bracket or `;` at depth 0.
    fn count_items(&self, from: usize) -> usize {
        if matches!(self.toks[from].tok, Tok::RParen | Tok::RBrack) {
            return 0;
        }
        let mut n = 1;
        let mut i = from;
        loop {
            i = self.skip_item(i);
            match self.toks[i].tok {
                Tok::Comma => {
                    n += 1;
                    i += 1;
                }
                _ => return n,
            }
        }
    }

    pub fn vector(&mut self) -> Result<Vec<Rational>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn pairs(&mut self) -> Result<Vec<(Rational, Rational)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.expect(Tok::LParen)?;
            let x = self.number()?;
            self.expect(Tok::Comma)?;
            let y = self.number()?;
            self.expect(Tok::RParen)?;
            out.push((x, y));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn numbers_until_close(&mut self) -> Result<Vec<Rational>, SyntaxError> {
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    pub fn modulus(&mut self, arity: usize) -> Result<ModulusSpec, SyntaxError> {
        let start = self.pos;
        let head = self.ident()?;
        let wrap = |p: &Self, e: ModulusError| p.error_at(start, SyntaxErrorKind::Modulus(e));
        if head == "zero" {
            return Ok(ModulusSpec::zero(arity));
        }
        self.expect(Tok::LParen)?;
        let spec = match head.as_str() {
            "linear" => {
                let c = self.numbers_until_close()?;
                if c.len() != arity {
                    return Err(wrap(
                        self,
                        ModulusError::ArityMismatch {
                            expected: arity,
                            found: c.len(),
                        },
                    ));
                }
                ModulusSpec::linear(c).map_err(|e| wrap(self, e))?
            }
            "capped" => {
                let cap = self.number()?;
                self.expect(Tok::Semi)?;
                let c = self.numbers_until_close()?;
                if c.len() != arity {
                    return Err(wrap(
                        self,
                        ModulusError::ArityMismatch {
                            expected: arity,
                            found: c.len(),
                        },
                    ));
                }
                ModulusSpec::capped(cap, c).map_err(|e| wrap(self, e))?
            }
            "pwl" => {
                let pts = self.pairs()?;
                ModulusSpec::piecewise(arity, pts).map_err(|e| wrap(self, e))?
            }
            "max" => {
                let mut ms = vec![self.modulus(arity)?];
                while self.eat(&Tok::Comma) {
                    ms.push(self.modulus(arity)?);
                }
                ModulusSpec::max_of(ms).map_err(|e| wrap(self, e))?
            }
            "compose" => {
                let semi = self.skip_item(self.pos);
                let k = self.count_items(semi + 1);
                let outer = self.modulus(k)?;
                self.expect(Tok::Semi)?;
                let mut inner = vec![self.modulus(arity)?];
                while self.eat(&Tok::Comma) {
                    inner.push(self.modulus(arity)?);
                }
                ModulusSpec::compose(outer, inner).map_err(|e| wrap(self, e))?
            }
            "table" => {
                let step = self.number()?;
                self.expect(Tok::Semi)?;
                let bound = self.number()?;
                self.expect(Tok::Semi)?;
                let values = self.numbers_until_close()?;
                ModulusSpec::table(arity, step, bound, values).map_err(|e| wrap(self, e))?
            }
            other => {
                return Err(self.error_at(start, SyntaxErrorKind::UnknownSymbol(other.to_string())))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(spec)
    }

    pub fn term(&mut self, sig: &Signature) -> Result<Term, SyntaxError> {
        let start = self.pos;
        let name = self.ident()?;
        if let Some(i) = is_variable_name(&name) {
            return Ok(Term::Var(i));
        }
        if *self.peek() == Tok::LParen {
            let Some(f) = sig.function(&name) else {
                return Err(self.error_at(start, SyntaxErrorKind::UnknownSymbol(name)));
            };
            let arity = f.arity;
            let args = self.term_args(sig)?;
            if args.len() != arity {
                return Err(self.error_at(
                    start,
                    SyntaxErrorKind::Arity {
                        symbol: name,
                        expected: arity,
                        found: args.len(),
                    },
                ));
            }
            return Ok(Term::Apply(name, args));
        }
        if sig.is_constant(&name) {
            Ok(Term::Const(name))
        } else {
            Err(self.error_at(start, SyntaxErrorKind::UnknownSymbol(name)))
        }
    }

    fn term_args(&mut self, sig: &Signature) -> Result<Vec<Term>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.term(sig)?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn formula_args(&mut self, sig: &Signature) -> Result<Vec<Formula>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(self.formula(sig)?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn segment(&mut self) -> Result<SegmentConnective, SyntaxError> {
        let start = self.pos;
        self.expect(Tok::Ident("seg".into()))?;
        self.expect(Tok::LBrack)?;
        let semi = self.skip_item(self.pos);
        let k = match self.toks.get(semi + 1).map(|t| &t.tok) {
            Some(Tok::LParen) => self.count_items(semi + 2),
            _ => 0,
        };
        let delta = self.modulus(k)?;
        self.expect(Tok::Semi)?;
        let x = self.vector()?;
        self.expect(Tok::Semi)?;
        let y = self.vector()?;
        self.expect(Tok::Semi)?;
        let a = self.number()?;
        self.expect(Tok::Semi)?;
        let b = self.number()?;
        self.expect(Tok::RBrack)?;
        SegmentConnective::new(delta, x, y, a, b)
            .map_err(|e| self.error_at(start, SyntaxErrorKind::Segment(e)))
    }

    fn lattice_term(&mut self) -> Result<LatticeTerm, SyntaxError> {
        let start = self.pos;
        match self.peek().clone() {
            Tok::Ident(s) if s == "seg" => Ok(self.segment()?.into()),
            Tok::Ident(s) if s == "meet" || s == "join" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let a = self.lattice_term()?;
                self.expect(Tok::Comma)?;
                let b = self.lattice_term()?;
                self.expect(Tok::RParen)?;
                let t = if s == "meet" {
                    LatticeTerm::meet(a, b)
                } else {
                    LatticeTerm::join(a, b)
                };
                t.map_err(|e| self.error_at(start, SyntaxErrorKind::Lattice(e)))
            }
            _ => Err(self.unexpected("`seg`, `meet` or `join`")),
        }
    }

    fn connective_app(
        &mut self,
        sig: &Signature,
        start: usize,
        name: &str,
        conn: Connective,
    ) -> Result<Formula, SyntaxError> {
        let args = self.formula_args(sig)?;
        conn.accepts(args.len()).map_err(|e| match e {
            ConnectiveError::Arity { expected, found } => self.error_at(
                start,
                SyntaxErrorKind::Arity {
                    symbol: name.to_string(),
                    expected,
                    found,
                },
            ),
            other => self.error_at(start, SyntaxErrorKind::Connective(other)),
        })?;
        Ok(Formula::Conn(conn, args))
    }

    pub fn formula(&mut self, sig: &Signature) -> Result<Formula, SyntaxError> {
        let start = self.pos;
        let head = match self.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(self.unexpected("formula")),
        };
        match head.as_str() {
            "sup" | "inf" => {
                self.advance();
                let vpos = self.pos;
                let v = self.ident()?;
                let Some(i) = is_variable_name(&v) else {
                    return Err(self.error_at(
                        vpos,
                        SyntaxErrorKind::Unexpected {
                            found: format!("`{v}`"),
                            expected: "variable".into(),
                        },
                    ));
                };
                self.expect(Tok::Dot)?;
                let body = self.formula(sig)?;
                Ok(if head == "sup" {
                    Formula::sup(i, body)
                } else {
                    Formula::inf(i, body)
                })
            }
            "d" => {
                self.advance();
                let args = self.term_args(sig)?;
                if args.len() != 2 {
                    return Err(self.error_at(
                        start,
                        SyntaxErrorKind::Arity {
                            symbol: "d".into(),
                            expected: 2,
                            found: args.len(),
                        },
                    ));
                }
                let mut it = args.into_iter();
                Ok(Formula::Dist(it.next().unwrap(), it.next().unwrap()))
            }
            "const" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let q = self.number()?;
                self.expect(Tok::RParen)?;
                let c = Connective::constant(q)
                    .map_err(|e| self.error_at(start, SyntaxErrorKind::Connective(e)))?;
                Ok(Formula::Conn(c, Vec::new()))
            }
            "latmin" | "latmax" => {
                self.advance();
                let c = if head == "latmin" {
                    Connective::LatMin
                } else {
                    Connective::LatMax
                };
                self.connective_app(sig, start, &head, c)
            }
            "pwl" => {
                self.advance();
                self.expect(Tok::LParen)?;
                let pts = self.pairs()?;
                self.expect(Tok::RParen)?;
                let c = Connective::pwl(pts)
                    .map_err(|e| self.error_at(start, SyntaxErrorKind::Connective(e)))?;
                self.connective_app(sig, start, "pwl", c)
            }
            "seg" | "meet" | "join" => {
                let t = self.lattice_term()?;
                self.connective_app(sig, start, &head, Connective::Lattice(t))
            }
            _ => {
                self.advance();
                let Some(r) = sig.relation(&head) else {
                    return Err(self.error_at(start, SyntaxErrorKind::UnknownSymbol(head)));
                };
                let arity = r.arity;
                let args = self.term_args(sig)?;
                if args.len() != arity {
                    return Err(self.error_at(
                        start,
                        SyntaxErrorKind::Arity {
                            symbol: head,
                            expected: arity,
                            found: args.len(),
                        },
                    ));
                }
                Ok(Formula::Rel(head, args))
            }
        }
    }
}

pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text, 1)?;
    let f = p.formula(sig)?;
    p.finish()?;
    Ok(f)
}

pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text, 1)?;
    let t = p.term(sig)?;
    p.finish()?;
    Ok(t)
}

/// Parses a modulus of the given arity, e.g. `linear(1,1)` or `max(linear(1,0), linear(0,1))`.
pub fn parse_modulus(text: &str, arity: usize) -> Result<ModulusSpec, SyntaxError> {
    let mut p = Parser::new(text, 1)?;
    let m = p.modulus(arity)?;
    p.finish()?;
    Ok(m)
}

/// One declaration in a `[signature]` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignatureLine {
    Relation(String, usize, ModulusSpec),
    Function(String, usize, ModulusSpec),
    Constant(String),
    Pseudometric,
}

/// Parses `rel NAME/ARITY : MODULUS`, `fun NAME/ARITY : MODULUS`,
/// `const NAME` or `pseudometric`. Returns `None` for blank or comment lines.
pub fn parse_signature_line(text: &str, line: usize) -> Result<Option<SignatureLine>, SyntaxError> {
    let mut p = Parser::new(text, line)?;
    if *p.peek() == Tok::Eof {
        return Ok(None);
    }
    let kw = p.ident()?;
    let decl = match kw.as_str() {
        "rel" | "fun" => {
            let name = p.ident()?;
            p.expect(Tok::Slash)?;
            let arity = p.natural()?;
            p.expect(Tok::Colon)?;
            let m = p.modulus(arity)?;
            if kw == "rel" {
                SignatureLine::Relation(name, arity, m)
            } else {
                SignatureLine::Function(name, arity, m)
            }
        }
        "const" => SignatureLine::Constant(p.ident()?),
        "pseudometric" => SignatureLine::Pseudometric,
        _ => {
            return Err(SyntaxError {
                line,
                col: 1,
                kind: SyntaxErrorKind::Unexpected {
                    found: format!("`{kw}`"),
                    expected: "`rel`, `fun`, `const` or `pseudometric`".into(),
                },
            })
        }
    };
    p.finish()?;
    Ok(Some(decl))
}

pub(crate) fn apply_signature_line(
    sig: &mut Signature,
    decl: SignatureLine,
    line: usize,
) -> Result<bool, SyntaxError> {
    let res = match decl {
        SignatureLine::Relation(n, a, m) => sig.add_relation(&n, a, m),
        SignatureLine::Function(n, a, m) => sig.add_function(&n, a, m),
        SignatureLine::Constant(n) => sig.add_constant(&n),
        SignatureLine::Pseudometric => return Ok(true),
    };
    res.map_err(|e| SyntaxError {
        line,
        col: 1,
        kind: SyntaxErrorKind::Signature(e),
    })?;
    Ok(false)
}

/// Parses a block of signature declarations, one per line.
pub fn parse_signature(text: &str) -> Result<Signature, SyntaxError> {
    let mut sig = Signature::empty();
    for (i, line) in text.lines().enumerate() {
        if let Some(decl) = parse_signature_line(line, i + 1)? {
            if apply_signature_line(&mut sig, decl, i + 1)? {
                return Err(SyntaxError {
                    line: i + 1,
                    col: 1,
                    kind: SyntaxErrorKind::Unexpected {
                        found: "`pseudometric`".into(),
                        expected: "symbol declaration".into(),
                    },
                });
            }
        }
    }
    Ok(sig)
}

/// Splits text into `[name]` sections: `(header, first body line, body)`.
/// Lines before the first header go to an unnamed section.
pub(crate) fn sections(text: &str) -> Vec<(String, usize, Vec<(usize, &str)>)> {
    let mut out: Vec<(String, usize, Vec<(usize, &str)>)> = vec![(String::new(), 1, Vec::new())];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') && line.ends_with(']') {
            out.push((
                line[1..line.len() - 1].trim().to_string(),
                i + 2,
                Vec::new(),
            ));
        } else {
            out.last_mut().unwrap().2.push((i + 1, raw));
        }
    }
    out
}

/// Parses a formula file: an optional `mscott/1` header, a `[signature]`
/// block and a `[formula]` block.
pub fn parse_formula_file(text: &str) -> Result<(Signature, Formula), SyntaxError> {
    let secs = sections(text);
    let mut sig = Signature::empty();
    let mut formula = None;
    for (name, first, body) in &secs {
        match name.as_str() {
            "" => {
                for (ln, l) in body {
                    let t = l.split('#').next().unwrap_or("").trim();
                    if !t.is_empty() && t != "mscott/1" {
                        return Err(SyntaxError {
                            line: *ln,
                            col: 1,
                            kind: SyntaxErrorKind::Unexpected {
                                found: format!("`{t}`"),
                                expected: "section header".into(),
                            },
                        });
                    }
                }
            }
            "signature" => {
                for (ln, l) in body {
                    if let Some(decl) = parse_signature_line(l, *ln)? {
                        apply_signature_line(&mut sig, decl, *ln)?;
                    }
                }
            }
            "formula" => {
                let joined: Vec<&str> = body.iter().map(|(_, l)| *l).collect();
                let mut p = Parser::new(&joined.join("\n"), *first)?;
                let f = p.formula(&sig)?;
                p.finish()?;
                formula = Some(f);
            }
            other => {
                return Err(SyntaxError {
                    line: first - 1,
                    col: 1,
                    kind: SyntaxErrorKind::Unexpected {
                        found: format!("[{other}]"),
                        expected: "[signature] or [formula]".into(),
                    },
                })
            }
        }
    }
    let last_line = text.lines().count().max(1);
    let f = formula.ok_or(SyntaxError {
        line: last_line,
        col: 1,
        kind: SyntaxErrorKind::MissingSection("formula".into()),
    })?;
    Ok((sig, f))
}
