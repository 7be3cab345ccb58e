use std::fmt;

use super::{Condition, OutputItem, OutputSpec, Pattern, PropRef};

// Printing brackets right-nested concatenations and unions so that parsing
// the output (which associates to the left) rebuilds the same tree.

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Level {
    Union,
    Concat,
    Atom,
}

fn opt(x: &Option<String>) -> &str {
    x.as_deref().unwrap_or("")
}

fn write_pattern(f: &mut fmt::Formatter<'_>, p: &Pattern, level: Level) -> fmt::Result {
    match p {
        Pattern::Node(x) => write!(f, "({})", opt(x)),
        Pattern::Fwd(None) => f.write_str("-->"),
        Pattern::Fwd(Some(x)) => write!(f, "-[{x}]->"),
        Pattern::Bwd(None) => f.write_str("<--"),
        Pattern::Bwd(Some(x)) => write!(f, "<-[{x}]-"),
        Pattern::Union(a, b) => {
            if level > Level::Union {
                f.write_str("[")?;
            }
            write_pattern(f, a, Level::Union)?;
            f.write_str(" + ")?;
            write_pattern(f, b, Level::Concat)?;
            if level > Level::Union {
                f.write_str("]")?;
            }
            Ok(())
        }
        Pattern::Concat(a, b) => {
            if level > Level::Concat {
                f.write_str("[")?;
            }
            write_pattern(f, a, Level::Concat)?;
            f.write_str(" ")?;
            write_pattern(f, b, Level::Atom)?;
            if level > Level::Concat {
                f.write_str("]")?;
            }
            Ok(())
        }
        Pattern::Cond(q, theta) => {
            f.write_str("[")?;
            write_pattern(f, q, Level::Union)?;
            write!(f, " | {theta}]")
        }
        Pattern::Repeat(q, lo, hi) => {
            f.write_str("[")?;
            match &**q {
                Pattern::Cond(inner, theta) => {
                    write_pattern(f, inner, Level::Union)?;
                    write!(f, " | {theta}")?;
                }
                other => write_pattern(f, other, Level::Union)?,
            }
            match hi {
                Some(hi) => write!(f, "]{{{lo}..{hi}}}"),
                None => write!(f, "]{{{lo}..*}}"),
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pattern(f, self, Level::Union)
    }
}

impl fmt::Display for PropRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.var, self.key)
    }
}

fn write_cond(f: &mut fmt::Formatter<'_>, c: &Condition, level: Level) -> fmt::Result {
    match c {
        Condition::Eq(a, b) => write!(f, "{a} = {b}"),
        Condition::Lt(a, b) => write!(f, "{a} < {b}"),
        Condition::HasLabel(x, l) => write!(f, ":{l}({x})"),
        Condition::Or(a, b) => {
            if level > Level::Union {
                f.write_str("(")?;
            }
            write_cond(f, a, Level::Union)?;
            f.write_str(" or ")?;
            write_cond(f, b, Level::Concat)?;
            if level > Level::Union {
                f.write_str(")")?;
            }
            Ok(())
        }
        Condition::And(a, b) => {
            if level > Level::Concat {
                f.write_str("(")?;
            }
            write_cond(f, a, Level::Concat)?;
            f.write_str(" and ")?;
            write_cond(f, b, Level::Atom)?;
            if level > Level::Concat {
                f.write_str(")")?;
            }
            Ok(())
        }
        Condition::Not(a) => {
            f.write_str("not ")?;
            write_cond(f, a, Level::Atom)
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cond(f, self, Level::Union)
    }
}

impl fmt::Display for OutputItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.attr_name())
    }
}

impl fmt::Display for OutputSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, it) in self.items().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{it}")?;
        }
        Ok(())
    }
}
