//! Relational algebra over named attributes with set semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::Value;
use crate::relation::{Attr, Relation, RelationError};
use crate::syntax::{Cursor, SyntaxError};

/// Attribute sets of the base relations.
pub type Schema = BTreeMap<String, BTreeSet<Attr>>;

/// Instances of the base relations.
pub type Database = BTreeMap<String, Relation>;

pub fn schema_of(db: &Database) -> Schema {
    db.iter().map(|(k, r)| (k.clone(), r.attr_set())).collect()
}

/// Selection conditions: Boolean combinations of attribute equalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EqCond {
    Eq(Attr, Attr),
    Not(Box<EqCond>),
    And(Box<EqCond>, Box<EqCond>),
    Or(Box<EqCond>, Box<EqCond>),
}

impl EqCond {
    pub fn eq(a: &str, b: &str) -> Self {
        EqCond::Eq(a.to_string(), b.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        EqCond::Not(Box::new(self))
    }

    pub fn and(self, other: EqCond) -> Self {
        EqCond::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: EqCond) -> Self {
        EqCond::Or(Box::new(self), Box::new(other))
    }

    pub fn attrs(&self) -> BTreeSet<Attr> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<Attr>) {
        match self {
            EqCond::Eq(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            EqCond::Not(c) => c.collect(out),
            EqCond::And(a, b) | EqCond::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// Truth under a partial tuple; an equality with an unbound side is false.
    pub fn holds<'a>(&self, get: &impl Fn(&str) -> Option<&'a Value>) -> bool {
        match self {
            EqCond::Eq(a, b) => matches!((get(a), get(b)), (Some(x), Some(y)) if x == y),
            EqCond::Not(c) => !c.holds(get),
            EqCond::And(a, b) => a.holds(get) && b.holds(get),
            EqCond::Or(a, b) => a.holds(get) || b.holds(get),
        }
    }

    pub(crate) fn select(&self, r: &Relation) -> Relation {
        r.filter(|rel, row| self.holds(&|a: &str| rel.get(row, a)))
    }

    /// Replaces equalities that mention attributes outside `attrs` by false
    /// and folds constants. `Ok(θ')` is a residual condition, `Err(b)` a
    /// constant.
    pub fn simplify(&self, attrs: &BTreeSet<Attr>) -> Result<EqCond, bool> {
        match self {
            EqCond::Eq(a, b) => {
                if attrs.contains(a) && attrs.contains(b) {
                    if a == b {
                        Err(true)
                    } else {
                        Ok(self.clone())
                    }
                } else {
                    Err(false)
                }
            }
            EqCond::Not(c) => match c.simplify(attrs) {
                Ok(c) => Ok(c.not()),
                Err(b) => Err(!b),
            },
            EqCond::And(a, b) => match (a.simplify(attrs), b.simplify(attrs)) {
                (Err(false), _) | (_, Err(false)) => Err(false),
                (Err(true), other) | (other, Err(true)) => other,
                (Ok(a), Ok(b)) => Ok(a.and(b)),
            },
            EqCond::Or(a, b) => match (a.simplify(attrs), b.simplify(attrs)) {
                (Err(true), _) | (_, Err(true)) => Err(true),
                (Err(false), other) | (other, Err(false)) => other,
                (Ok(a), Ok(b)) => Ok(a.or(b)),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RAExpr {
    Base(String),
    Project(Vec<Attr>, Box<RAExpr>),
    Select(EqCond, Box<RAExpr>),
    Rename(Attr, Attr, Box<RAExpr>),
    Join(Box<RAExpr>, Box<RAExpr>),
    Union(Box<RAExpr>, Box<RAExpr>),
    Intersect(Box<RAExpr>, Box<RAExpr>),
    Diff(Box<RAExpr>, Box<RAExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOp {
    Union,
    Intersect,
    Diff,
}

impl SetOp {
    pub fn keyword(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Intersect => "intersect",
            SetOp::Diff => "diff",
        }
    }

    pub(crate) fn apply(self, a: &Relation, b: &Relation) -> Result<Relation, RelationError> {
        match self {
            SetOp::Union => a.union(b),
            SetOp::Intersect => a.intersect(b),
            SetOp::Diff => a.difference(b),
        }
    }
}

impl RAExpr {
    pub fn base(name: &str) -> Self {
        RAExpr::Base(name.to_string())
    }

    pub fn project<S: AsRef<str>>(self, attrs: &[S]) -> Self {
        RAExpr::Project(attrs.iter().map(|a| a.as_ref().to_string()).collect(), Box::new(self))
    }

    pub fn select(self, theta: EqCond) -> Self {
        RAExpr::Select(theta, Box::new(self))
    }

    pub fn rename(self, from: &str, to: &str) -> Self {
        RAExpr::Rename(from.to_string(), to.to_string(), Box::new(self))
    }

    pub fn join(self, other: RAExpr) -> Self {
        RAExpr::Join(Box::new(self), Box::new(other))
    }

    pub fn set_op(op: SetOp, a: RAExpr, b: RAExpr) -> Self {
        let (a, b) = (Box::new(a), Box::new(b));
        match op {
            SetOp::Union => RAExpr::Union(a, b),
            SetOp::Intersect => RAExpr::Intersect(a, b),
            SetOp::Diff => RAExpr::Diff(a, b),
        }
    }

    pub fn union(self, other: RAExpr) -> Self {
        Self::set_op(SetOp::Union, self, other)
    }

    pub fn intersect(self, other: RAExpr) -> Self {
        Self::set_op(SetOp::Intersect, self, other)
    }

    pub fn diff(self, other: RAExpr) -> Self {
        Self::set_op(SetOp::Diff, self, other)
    }

    fn as_set_op(&self) -> Option<(SetOp, &RAExpr, &RAExpr)> {
        match self {
            RAExpr::Union(a, b) => Some((SetOp::Union, a, b)),
            RAExpr::Intersect(a, b) => Some((SetOp::Intersect, a, b)),
            RAExpr::Diff(a, b) => Some((SetOp::Diff, a, b)),
            _ => None,
        }
    }

    /// Base relation names used.
    pub fn bases(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let RAExpr::Base(s) = e {
                out.insert(s.clone());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&RAExpr)) {
        f(self);
        match self {
            RAExpr::Base(_) => {}
            RAExpr::Project(_, e) | RAExpr::Select(_, e) | RAExpr::Rename(_, _, e) => e.walk(f),
            RAExpr::Join(a, b) | RAExpr::Union(a, b) | RAExpr::Intersect(a, b) | RAExpr::Diff(a, b) => {
                a.walk(f);
                b.walk(f);
            }
        }
    }

    /// Every attribute name the expression can mention: schema attributes
    /// of its bases plus names in projections, conditions and renamings.
    pub fn names(&self, schema: &Schema) -> BTreeSet<Attr> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            RAExpr::Base(s) => out.extend(schema.get(s).into_iter().flatten().cloned()),
            RAExpr::Project(a, _) => out.extend(a.iter().cloned()),
            RAExpr::Select(t, _) => out.extend(t.attrs()),
            RAExpr::Rename(a, b, _) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
            _ => {}
        });
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            RAExpr::Base(_) => 1,
            RAExpr::Project(_, e) | RAExpr::Select(_, e) | RAExpr::Rename(_, _, e) => 1 + e.depth(),
            RAExpr::Join(a, b) | RAExpr::Union(a, b) | RAExpr::Intersect(a, b) | RAExpr::Diff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RAError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown base relation `{0}`")]
    UnknownRelation(String),
    #[error("projection onto {wanted:?} is not within {available:?} in `{expr}`")]
    ProjectOutside {
        wanted: Vec<Attr>,
        available: BTreeSet<Attr>,
        expr: String,
    },
    #[error("selection mentions `{attr}`, not an attribute of `{expr}`")]
    SelectOutside { attr: Attr, expr: String },
    #[error("cannot rename `{from}` to `{to}` in `{expr}`")]
    BadRename { from: Attr, to: Attr, expr: String },
    #[error("`{op}` over different attribute sets {left:?} and {right:?}")]
    SetOpMismatch {
        op: &'static str,
        left: BTreeSet<Attr>,
        right: BTreeSet<Attr>,
    },
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// `attr(e)`, checking every side condition.
pub fn ra_attrs(e: &RAExpr, schema: &Schema) -> Result<BTreeSet<Attr>, RAError> {
    match e {
        RAExpr::Base(s) => schema
            .get(s)
            .cloned()
            .ok_or_else(|| RAError::UnknownRelation(s.clone())),
        RAExpr::Project(attrs, inner) => {
            let available = ra_attrs(inner, schema)?;
            if attrs.iter().all(|a| available.contains(a)) {
                Ok(attrs.iter().cloned().collect())
            } else {
                Err(RAError::ProjectOutside {
                    wanted: attrs.clone(),
                    available,
                    expr: e.to_string(),
                })
            }
        }
        RAExpr::Select(theta, inner) => {
            let available = ra_attrs(inner, schema)?;
            match theta.attrs().into_iter().find(|a| !available.contains(a)) {
                Some(attr) => Err(RAError::SelectOutside {
                    attr,
                    expr: e.to_string(),
                }),
                None => Ok(available),
            }
        }
        RAExpr::Rename(from, to, inner) => {
            let mut available = ra_attrs(inner, schema)?;
            if !available.contains(from) || available.contains(to) {
                return Err(RAError::BadRename {
                    from: from.clone(),
                    to: to.clone(),
                    expr: e.to_string(),
                });
            }
            available.remove(from);
            available.insert(to.clone());
            Ok(available)
        }
        RAExpr::Join(a, b) => {
            let mut left = ra_attrs(a, schema)?;
            left.extend(ra_attrs(b, schema)?);
            Ok(left)
        }
        RAExpr::Union(a, b) | RAExpr::Intersect(a, b) | RAExpr::Diff(a, b) => {
            let (left, right) = (ra_attrs(a, schema)?, ra_attrs(b, schema)?);
            if left != right {
                let op = e.as_set_op().expect("set operation").0.keyword();
                return Err(RAError::SetOpMismatch { op, left, right });
            }
            Ok(left)
        }
    }
}

/// Evaluates `e` over `db`. Side conditions are checked against `db`'s
/// schema before evaluation starts.
pub fn eval_ra(db: &Database, e: &RAExpr) -> Result<Relation, RAError> {
    ra_attrs(e, &schema_of(db))?;
    Ok(eval_checked(db, e))
}

fn eval_checked(db: &Database, e: &RAExpr) -> Relation {
    match e {
        RAExpr::Base(s) => db[s].clone(),
        RAExpr::Project(attrs, inner) => eval_checked(db, inner).project(attrs),
        RAExpr::Select(theta, inner) => theta.select(&eval_checked(db, inner)),
        RAExpr::Rename(from, to, inner) => eval_checked(db, inner).rename(from, to),
        RAExpr::Join(a, b) => eval_checked(db, a).join(&eval_checked(db, b)),
        RAExpr::Union(a, b) | RAExpr::Intersect(a, b) | RAExpr::Diff(a, b) => {
            let op = e.as_set_op().expect("set operation").0;
            op.apply(&eval_checked(db, a), &eval_checked(db, b))
                .expect("attributes checked")
        }
    }
}

// ---------------------------------------------------------------------------
// Concrete syntax

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum CondLevel {
    Or,
    And,
    Unary,
}

fn write_cond(f: &mut fmt::Formatter<'_>, c: &EqCond, level: CondLevel) -> fmt::Result {
    match c {
        EqCond::Eq(a, b) => write!(f, "{a} = {b}"),
        EqCond::Not(inner) => match &**inner {
            EqCond::Eq(a, b) => write!(f, "{a} != {b}"),
            other => {
                f.write_str("not ")?;
                write_cond(f, other, CondLevel::Unary)
            }
        },
        EqCond::Or(a, b) => {
            let paren = level > CondLevel::Or;
            if paren {
                f.write_str("(")?;
            }
            write_cond(f, a, CondLevel::Or)?;
            f.write_str(" or ")?;
            write_cond(f, b, CondLevel::And)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        EqCond::And(a, b) => {
            let paren = level > CondLevel::And;
            if paren {
                f.write_str("(")?;
            }
            write_cond(f, a, CondLevel::And)?;
            f.write_str(" and ")?;
            write_cond(f, b, CondLevel::Unary)?;
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for EqCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_cond(f, self, CondLevel::Or)
    }
}

pub(crate) fn write_attr_list(f: &mut fmt::Formatter<'_>, attrs: &[Attr]) -> fmt::Result {
    for (i, a) in attrs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        f.write_str(a)?;
    }
    Ok(())
}

fn write_term(f: &mut fmt::Formatter<'_>, e: &RAExpr) -> fmt::Result {
    match e {
        RAExpr::Join(..) | RAExpr::Union(..) | RAExpr::Intersect(..) | RAExpr::Diff(..) => {
            write!(f, "({e})")
        }
        _ => write!(f, "{e}"),
    }
}

impl fmt::Display for RAExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RAExpr::Base(s) => f.write_str(s),
            RAExpr::Project(attrs, e) => {
                f.write_str("pi(")?;
                write_attr_list(f, attrs)?;
                f.write_str(") ")?;
                write_term(f, e)
            }
            RAExpr::Select(theta, e) => {
                write!(f, "sigma({theta}) ")?;
                write_term(f, e)
            }
            RAExpr::Rename(a, b, e) => {
                write!(f, "rho({a} -> {b}) ")?;
                write_term(f, e)
            }
            RAExpr::Join(a, b) => {
                write!(f, "{a} join ")?;
                write_term(f, b)
            }
            other => {
                let (op, a, b) = other.as_set_op().expect("set operation");
                write!(f, "{a} {} ", op.keyword())?;
                write_term(f, b)
            }
        }
    }
}

pub(crate) const KEYWORDS: &[&str] = &[
    "pi", "sigma", "rho", "join", "union", "intersect", "diff", "call", "not", "and", "or",
];

pub(crate) fn relation_name(c: &mut Cursor) -> Result<String, SyntaxError> {
    let start = c.pos();
    let mut probe = c.clone();
    match probe.try_ident() {
        Some(name) if !KEYWORDS.contains(&name.as_str()) => {
            *c = probe;
            Ok(name)
        }
        Some(name) => Err(c.error_at(start, format!("`{name}` is a keyword"))),
        None => Err(c.error("expected a relation name".into())),
    }
}

pub(crate) fn attr_list(c: &mut Cursor) -> Result<Vec<Attr>, SyntaxError> {
    c.expect("(")?;
    let mut attrs = Vec::new();
    if c.eat(")") {
        return Ok(attrs);
    }
    loop {
        attrs.push(c.attr_name()?);
        if c.eat(")") {
            return Ok(attrs);
        }
        c.expect(",")?;
    }
}

pub(crate) fn rename_pair(c: &mut Cursor) -> Result<(Attr, Attr), SyntaxError> {
    c.expect("(")?;
    let a = c.attr_name()?;
    c.expect("->")?;
    let b = c.attr_name()?;
    c.expect(")")?;
    Ok((a, b))
}

pub(crate) fn eq_cond(c: &mut Cursor) -> Result<EqCond, SyntaxError> {
    let mut theta = eq_conj(c)?;
    while c.eat_keyword("or") {
        theta = theta.or(eq_conj(c)?);
    }
    Ok(theta)
}

fn eq_conj(c: &mut Cursor) -> Result<EqCond, SyntaxError> {
    let mut theta = eq_unary(c)?;
    while c.eat_keyword("and") {
        theta = theta.and(eq_unary(c)?);
    }
    Ok(theta)
}

fn eq_unary(c: &mut Cursor) -> Result<EqCond, SyntaxError> {
    if c.eat_keyword("not") {
        return Ok(eq_unary(c)?.not());
    }
    if c.eat("(") {
        let theta = eq_cond(c)?;
        c.expect(")")?;
        return Ok(theta);
    }
    let a = c.attr_name()?;
    let negated = if c.eat("!=") || c.eat("<>") {
        true
    } else {
        c.expect("=")?;
        false
    };
    let b = c.attr_name()?;
    let atom = EqCond::Eq(a, b);
    Ok(if negated { atom.not() } else { atom })
}

pub(crate) fn ra_expr(c: &mut Cursor) -> Result<RAExpr, SyntaxError> {
    let mut e = ra_term(c)?;
    loop {
        if c.eat_keyword("join") {
            e = e.join(ra_term(c)?);
        } else if let Some(op) = set_op_keyword(c) {
            e = RAExpr::set_op(op, e, ra_term(c)?);
        } else {
            return Ok(e);
        }
    }
}

pub(crate) fn set_op_keyword(c: &mut Cursor) -> Option<SetOp> {
    [SetOp::Union, SetOp::Intersect, SetOp::Diff]
        .into_iter()
        .find(|op| c.eat_keyword(op.keyword()))
}

fn ra_term(c: &mut Cursor) -> Result<RAExpr, SyntaxError> {
    if c.eat_keyword("pi") {
        let attrs = attr_list(c)?;
        return Ok(RAExpr::Project(attrs, Box::new(ra_term(c)?)));
    }
    if c.eat_keyword("sigma") {
        c.expect("(")?;
        let theta = eq_cond(c)?;
        c.expect(")")?;
        return Ok(RAExpr::Select(theta, Box::new(ra_term(c)?)));
    }
    if c.eat_keyword("rho") {
        let (a, b) = rename_pair(c)?;
        return Ok(RAExpr::Rename(a, b, Box::new(ra_term(c)?)));
    }
    if c.eat("(") {
        let e = ra_expr(c)?;
        c.expect(")")?;
        return Ok(e);
    }
    Ok(RAExpr::Base(relation_name(c)?))
}

pub fn parse_ra(text: &str) -> Result<RAExpr, RAError> {
    let mut c = Cursor::new(text);
    let e = ra_expr(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected input after expression".into()).into());
    }
    Ok(e)
}

pub fn parse_eq_cond(text: &str) -> Result<EqCond, RAError> {
    let mut c = Cursor::new(text);
    let theta = eq_cond(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected input after condition".into()).into());
    }
    Ok(theta)
}

/// Parses a schema such as `R(A, B); S(B, C)`.
pub fn parse_schema(text: &str) -> Result<Schema, RAError> {
    let mut c = Cursor::new(text);
    let mut schema = Schema::new();
    while !c.at_end() {
        let name = relation_name(&mut c)?;
        let attrs = attr_list(&mut c)?;
        schema.insert(name, attrs.into_iter().collect());
        if !c.eat(";") && !c.eat(",") {
            break;
        }
    }
    if !c.at_end() {
        return Err(c.error("expected `;` between relations".into()).into());
    }
    Ok(schema)
}
