//! Path patterns, conditions and patterns with output.
//!
//! ```text
//! ψ := (x) | -[x]-> | <-[x]- | ψ ψ | ψ + ψ | [ψ]{n..m} | [ψ | θ]
//! ```
//!
//! Variables are optional on atoms. Smart constructors enforce the
//! well-formedness side conditions (equal free variables in union arms,
//! condition variables free in the conditioned pattern, `lo ≤ hi`).

mod analysis;
pub(crate) mod parser;
mod print;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::SyntaxError;

pub use analysis::{
    is_one_way, is_plus_normal_form, one_way_violations, plus_normal_form, OneWayViolation,
    PnfError, PnfMode,
};
pub use parser::{parse_condition, parse_output, parse_pattern};

pub type Var = String;

/// A property reference `x.k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropRef {
    pub var: Var,
    pub key: String,
}

impl PropRef {
    pub fn new(var: &str, key: &str) -> Self {
        PropRef {
            var: var.to_string(),
            key: key.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Eq(PropRef, PropRef),
    Lt(PropRef, PropRef),
    HasLabel(Var, String),
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn eq(x: &str, k: &str, y: &str, l: &str) -> Self {
        Condition::Eq(PropRef::new(x, k), PropRef::new(y, l))
    }

    pub fn lt(x: &str, k: &str, y: &str, l: &str) -> Self {
        Condition::Lt(PropRef::new(x, k), PropRef::new(y, l))
    }

    pub fn has_label(x: &str, label: &str) -> Self {
        Condition::HasLabel(x.to_string(), label.to_string())
    }

    pub fn and(self, other: Condition) -> Self {
        Condition::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Condition) -> Self {
        Condition::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Condition::Not(Box::new(self))
    }

    /// Variables mentioned anywhere in the condition.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Condition::Eq(a, b) | Condition::Lt(a, b) => {
                out.insert(a.var.clone());
                out.insert(b.var.clone());
            }
            Condition::HasLabel(x, _) => {
                out.insert(x.clone());
            }
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Condition::Not(a) => a.collect_vars(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Node(Option<Var>),
    Fwd(Option<Var>),
    Bwd(Option<Var>),
    Concat(Box<Pattern>, Box<Pattern>),
    Union(Box<Pattern>, Box<Pattern>),
    /// `ψ^{lo..hi}`; `None` is an unbounded upper limit.
    Repeat(Box<Pattern>, u32, Option<u32>),
    Cond(Box<Pattern>, Condition),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("union arms have different free variables {left:?} and {right:?}")]
    UnionMismatch {
        left: BTreeSet<Var>,
        right: BTreeSet<Var>,
    },
    #[error("condition mentions `{0}`, which is not free in the pattern")]
    UnboundConditionVar(Var),
    #[error("repetition bounds {lo}..{hi} are decreasing")]
    BadRepeat { lo: u32, hi: u32 },
    #[error("output variable `{0}` is not free in the pattern")]
    UnboundOutputVar(Var),
    #[error("output attribute `{0}` appears twice")]
    DuplicateOutput(String),
}

fn var(x: &str) -> Option<Var> {
    (!x.is_empty()).then(|| x.to_string())
}

impl Pattern {
    /// `(x)`; the empty string gives the anonymous node `()`.
    pub fn node(x: &str) -> Self {
        Pattern::Node(var(x))
    }

    pub fn fwd(x: &str) -> Self {
        Pattern::Fwd(var(x))
    }

    pub fn bwd(x: &str) -> Self {
        Pattern::Bwd(var(x))
    }

    pub fn concat(self, other: Pattern) -> Self {
        Pattern::Concat(Box::new(self), Box::new(other))
    }

    /// Left-associated concatenation of a nonempty sequence.
    pub fn seq(parts: impl IntoIterator<Item = Pattern>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("nonempty concatenation");
        it.fold(first, Pattern::concat)
    }

    pub fn union(self, other: Pattern) -> Result<Self, PatternError> {
        let (left, right) = (self.free_vars(), other.free_vars());
        if left != right {
            return Err(PatternError::UnionMismatch { left, right });
        }
        Ok(Pattern::Union(Box::new(self), Box::new(other)))
    }

    pub fn repeat(self, lo: u32, hi: Option<u32>) -> Result<Self, PatternError> {
        if let Some(hi) = hi {
            if hi < lo {
                return Err(PatternError::BadRepeat { lo, hi });
            }
        }
        Ok(Pattern::Repeat(Box::new(self), lo, hi))
    }

    pub fn with_cond(self, theta: Condition) -> Result<Self, PatternError> {
        let free = self.free_vars();
        if let Some(x) = theta.vars().into_iter().find(|x| !free.contains(x)) {
            return Err(PatternError::UnboundConditionVar(x));
        }
        Ok(Pattern::Cond(Box::new(self), theta))
    }

    /// `sch(ψ)`.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Pattern::Node(x) | Pattern::Fwd(x) | Pattern::Bwd(x) => out.extend(x.iter().cloned()),
            Pattern::Concat(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            // Arms have equal free variables when well-formed; collecting
            // both keeps the function total on ill-formed input.
            Pattern::Union(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Pattern::Repeat(..) => {}
            Pattern::Cond(p, _) => p.collect_free(out),
        }
    }

    /// True if no variable occurs anywhere, including under repetition.
    pub fn is_variable_free(&self) -> bool {
        match self {
            Pattern::Node(x) | Pattern::Fwd(x) | Pattern::Bwd(x) => x.is_none(),
            Pattern::Concat(a, b) | Pattern::Union(a, b) => {
                a.is_variable_free() && b.is_variable_free()
            }
            Pattern::Repeat(p, _, _) => p.is_variable_free(),
            Pattern::Cond(..) => false,
        }
    }

    pub fn has_condition(&self) -> bool {
        match self {
            Pattern::Node(_) | Pattern::Fwd(_) | Pattern::Bwd(_) => false,
            Pattern::Concat(a, b) | Pattern::Union(a, b) => a.has_condition() || b.has_condition(),
            Pattern::Repeat(p, _, _) => p.has_condition(),
            Pattern::Cond(..) => true,
        }
    }

    /// Checks every side condition recursively.
    pub fn validate(&self) -> Result<(), PatternError> {
        match self {
            Pattern::Node(_) | Pattern::Fwd(_) | Pattern::Bwd(_) => Ok(()),
            Pattern::Concat(a, b) => {
                a.validate()?;
                b.validate()
            }
            Pattern::Union(a, b) => {
                a.validate()?;
                b.validate()?;
                let (left, right) = (a.free_vars(), b.free_vars());
                if left != right {
                    return Err(PatternError::UnionMismatch { left, right });
                }
                Ok(())
            }
            Pattern::Repeat(p, lo, hi) => {
                p.validate()?;
                match hi {
                    Some(hi) if hi < lo => Err(PatternError::BadRepeat { lo: *lo, hi: *hi }),
                    _ => Ok(()),
                }
            }
            Pattern::Cond(p, theta) => {
                p.validate()?;
                let free = p.free_vars();
                match theta.vars().into_iter().find(|x| !free.contains(x)) {
                    Some(x) => Err(PatternError::UnboundConditionVar(x)),
                    None => Ok(()),
                }
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Pattern::Node(_) | Pattern::Fwd(_) | Pattern::Bwd(_) => 1,
            Pattern::Concat(a, b) | Pattern::Union(a, b) => 1 + a.size() + b.size(),
            Pattern::Repeat(p, _, _) | Pattern::Cond(p, _) => 1 + p.size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutputItem {
    Var(Var),
    Prop(Var, String),
}

impl OutputItem {
    pub fn var(&self) -> &str {
        match self {
            OutputItem::Var(x) | OutputItem::Prop(x, _) => x,
        }
    }

    /// Attribute name in the output relation: `x` or `x.k`.
    pub fn attr_name(&self) -> String {
        match self {
            OutputItem::Var(x) => x.clone(),
            OutputItem::Prop(x, k) => format!("{x}.{k}"),
        }
    }
}

/// The `ω` of a pattern with output `ψ_ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OutputSpec {
    items: Vec<OutputItem>,
}

impl OutputSpec {
    /// Checks that attribute names are distinct. Use [`OutputSpec::check`]
    /// to validate against a pattern.
    pub fn new(items: Vec<OutputItem>) -> Result<Self, PatternError> {
        let mut seen = BTreeSet::new();
        for it in &items {
            let name = it.attr_name();
            if !seen.insert(name.clone()) {
                return Err(PatternError::DuplicateOutput(name));
            }
        }
        Ok(OutputSpec { items })
    }

    pub fn vars(vars: &[&str]) -> Result<Self, PatternError> {
        Self::new(vars.iter().map(|x| OutputItem::Var(x.to_string())).collect())
    }

    pub fn items(&self) -> &[OutputItem] {
        &self.items
    }

    pub fn attr_names(&self) -> Vec<String> {
        self.items.iter().map(OutputItem::attr_name).collect()
    }

    /// Every variable used must be free in `psi`.
    pub fn check(&self, psi: &Pattern) -> Result<(), PatternError> {
        let free = psi.free_vars();
        match self.items.iter().find(|it| !free.contains(it.var())) {
            Some(it) => Err(PatternError::UnboundOutputVar(it.var().to_string())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<Var> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn free_vars_follow_sch() {
        assert_eq!(Pattern::node("x").free_vars(), set(&["x"]));
        let rep = Pattern::fwd("e").repeat(1, None).unwrap();
        assert!(rep.free_vars().is_empty());
        assert_eq!(Pattern::node("x").concat(Pattern::fwd("e")).free_vars(), set(&["x", "e"]));
        assert!(Pattern::node("").free_vars().is_empty());
    }

    #[test]
    fn constructors_enforce_side_conditions() {
        assert!(matches!(
            Pattern::node("x").union(Pattern::node("y")),
            Err(PatternError::UnionMismatch { .. })
        ));
        assert!(Pattern::node("x").union(Pattern::node("x")).is_ok());
        assert!(Pattern::fwd("").repeat(2, Some(1)).is_err());
        let theta = Condition::lt("x", "k", "y", "k");
        assert_eq!(
            Pattern::node("x").with_cond(theta.clone()),
            Err(PatternError::UnboundConditionVar("y".into()))
        );
        let p = Pattern::seq([Pattern::node("x"), Pattern::fwd(""), Pattern::node("y")]);
        assert!(p.with_cond(theta).unwrap().validate().is_ok());
    }

    #[test]
    fn output_specs() {
        let spec = OutputSpec::new(vec![
            OutputItem::Var("x".into()),
            OutputItem::Prop("x".into(), "k".into()),
        ])
        .unwrap();
        assert_eq!(spec.attr_names(), vec!["x", "x.k"]);
        assert!(spec.check(&Pattern::node("x")).is_ok());
        assert!(spec.check(&Pattern::node("y")).is_err());
        assert!(OutputSpec::vars(&["x", "x"]).is_err());
    }

    #[test]
    fn variable_free_means_nowhere() {
        assert!(Pattern::fwd("").repeat(0, None).unwrap().is_variable_free());
        assert!(!Pattern::fwd("e").repeat(0, None).unwrap().is_variable_free());
    }
}
