use std::fmt;

use super::{Connective, Formula, Signature, Term};

fn comma_list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, xs: &[T]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "v{i}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Apply(name, args) => {
                write!(f, "{name}(")?;
                comma_list(f, args)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Dist(a, b) => write!(f, "d({a}, {b})"),
            Formula::Rel(name, args) => {
                write!(f, "{name}(")?;
                comma_list(f, args)?;
                write!(f, ")")
            }
            Formula::Conn(Connective::Const(q), _) => write!(f, "const({q})"),
            Formula::Conn(c, args) => {
                match c {
                    Connective::LatMin => write!(f, "latmin")?,
                    Connective::LatMax => write!(f, "latmax")?,
                    Connective::Lattice(t) => write!(f, "{t}")?,
                    Connective::Pwl(points) => {
                        write!(f, "pwl(")?;
                        for (i, (x, y)) in points.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            write!(f, "({x},{y})")?;
                        }
                        write!(f, ")")?;
                    }
                    Connective::Const(_) => unreachable!(),
                }
                write!(f, "(")?;
                comma_list(f, args)?;
                write!(f, ")")
            }
            Formula::Sup(i, body) => write!(f, "sup v{i} . {body}"),
            Formula::Inf(i, body) => write!(f, "inf v{i} . {body}"),
        }
    }
}

impl fmt::Display for Signature {
    /// One declaration per line, in the `[signature]` block format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.relations() {
            writeln!(f, "rel {}/{} : {}", r.name, r.arity, r.modulus)?;
        }
        for g in self.functions() {
            writeln!(f, "fun {}/{} : {}", g.name, g.arity, g.modulus)?;
        }
        for c in self.constants() {
            writeln!(f, "const {c}")?;
        }
        Ok(())
    }
}
