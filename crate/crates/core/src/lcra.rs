//! Linear composition of relational algebra.
//!
//! A linear clause is a sequence of operations, each of which transforms a
//! driving table. Evaluation starts from the table holding one empty tuple.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::relalg::{
    attr_list, eq_cond, ra_attrs, relation_name, rename_pair, set_op_keyword, write_attr_list,
    Database, EqCond, RAError, RAExpr, Schema, SetOp,
};
use crate::relation::{Attr, Relation, RelationError};
use crate::syntax::{Cursor, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clause {
    /// `R ⋈ S` for a base relation `S`.
    Scan(String),
    /// Projection onto the listed attributes that are present.
    Proj(Vec<Attr>),
    Filt(EqCond),
    Ren(Attr, Attr),
    /// `R ⋈ Q(R)`.
    Call(Box<LcraQuery>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LcraQuery {
    Lin(Vec<Clause>),
    Union(Box<LcraQuery>, Box<LcraQuery>),
    Intersect(Box<LcraQuery>, Box<LcraQuery>),
    Diff(Box<LcraQuery>, Box<LcraQuery>),
}

impl LcraQuery {
    pub fn lin(clauses: Vec<Clause>) -> Self {
        LcraQuery::Lin(clauses)
    }

    pub fn set_op(op: SetOp, a: LcraQuery, b: LcraQuery) -> Self {
        let (a, b) = (Box::new(a), Box::new(b));
        match op {
            SetOp::Union => LcraQuery::Union(a, b),
            SetOp::Intersect => LcraQuery::Intersect(a, b),
            SetOp::Diff => LcraQuery::Diff(a, b),
        }
    }

    fn as_set_op(&self) -> Option<(SetOp, &LcraQuery, &LcraQuery)> {
        match self {
            LcraQuery::Union(a, b) => Some((SetOp::Union, a, b)),
            LcraQuery::Intersect(a, b) => Some((SetOp::Intersect, a, b)),
            LcraQuery::Diff(a, b) => Some((SetOp::Diff, a, b)),
            LcraQuery::Lin(_) => None,
        }
    }

    pub fn has_call(&self) -> bool {
        match self {
            LcraQuery::Lin(cs) => cs.iter().any(|c| matches!(c, Clause::Call(_))),
            other => {
                let (_, a, b) = other.as_set_op().expect("set operation");
                a.has_call() || b.has_call()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LcraError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown base relation `{0}`")]
    UnknownRelation(String),
    #[error("`{op}` over different attribute sets {left:?} and {right:?}")]
    SetOpMismatch {
        op: &'static str,
        left: BTreeSet<Attr>,
        right: BTreeSet<Attr>,
    },
    #[error("query evaluates to the unit table on every database, which no algebra expression denotes")]
    Unresolvable,
    #[error(transparent)]
    Algebra(#[from] RAError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// `⟦Q⟧(R)` over `db`.
pub fn eval_lcra(db: &Database, q: &LcraQuery, r: &Relation) -> Result<Relation, LcraError> {
    match q {
        LcraQuery::Lin(clauses) => {
            let mut cur = r.clone();
            for c in clauses {
                cur = eval_clause(db, c, cur)?;
            }
            Ok(cur)
        }
        other => {
            let (op, a, b) = other.as_set_op().expect("set operation");
            let (ra, rb) = (eval_lcra(db, a, r)?, eval_lcra(db, b, r)?);
            op.apply(&ra, &rb).map_err(|_| LcraError::SetOpMismatch {
                op: op.keyword(),
                left: ra.attr_set(),
                right: rb.attr_set(),
            })
        }
    }
}

fn eval_clause(db: &Database, c: &Clause, r: Relation) -> Result<Relation, LcraError> {
    Ok(match c {
        Clause::Scan(s) => {
            let base = db.get(s).ok_or_else(|| LcraError::UnknownRelation(s.clone()))?;
            r.join(base)
        }
        Clause::Proj(attrs) => r.project(attrs),
        Clause::Filt(theta) => theta.select(&r),
        Clause::Ren(from, to) => {
            if r.has_attr(from) && !r.has_attr(to) {
                r.rename(from, to)
            } else {
                Relation::empty(r.attrs().to_vec())
            }
        }
        Clause::Call(q) => {
            let inner = eval_lcra(db, q, &r)?;
            r.join(&inner)
        }
    })
}

/// Evaluation from the unit table.
pub fn eval_lcra_query(db: &Database, q: &LcraQuery) -> Result<Relation, LcraError> {
    eval_lcra(db, q, &Relation::unit())
}

/// Whether `q` uses no `call`.
pub fn is_slcra(q: &LcraQuery) -> bool {
    !q.has_call()
}

// ---------------------------------------------------------------------------
// Translations

struct Fresh {
    used: BTreeSet<Attr>,
    next: usize,
}

impl Fresh {
    fn name(&mut self) -> Attr {
        loop {
            let candidate = format!("_f{}", self.next);
            self.next += 1;
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

/// Translates an algebra expression into an equivalent query, evaluated
/// from the unit table.
///
/// A join renames the attributes of its left operand that the right
/// operand could capture, evaluates the right operand under `call`, and
/// projects the renamed copies away again.
pub fn ra_to_lcra(e: &RAExpr, schema: &Schema) -> Result<LcraQuery, RAError> {
    ra_attrs(e, schema)?;
    let mut used = e.names(schema);
    used.extend(schema.values().flatten().cloned());
    let mut fresh = Fresh { used, next: 0 };
    Ok(translate(e, schema, &mut fresh))
}

fn append(q: LcraQuery, c: Clause) -> LcraQuery {
    match q {
        LcraQuery::Lin(mut cs) => {
            cs.push(c);
            LcraQuery::Lin(cs)
        }
        other => LcraQuery::Lin(vec![Clause::Call(Box::new(other)), c]),
    }
}

fn call(q: LcraQuery) -> Clause {
    Clause::Call(Box::new(q))
}

fn translate(e: &RAExpr, schema: &Schema, fresh: &mut Fresh) -> LcraQuery {
    match e {
        RAExpr::Base(s) => LcraQuery::Lin(vec![Clause::Scan(s.clone())]),
        RAExpr::Project(attrs, inner) => append(translate(inner, schema, fresh), Clause::Proj(attrs.clone())),
        RAExpr::Select(theta, inner) => append(translate(inner, schema, fresh), Clause::Filt(theta.clone())),
        RAExpr::Rename(a, b, inner) => {
            append(translate(inner, schema, fresh), Clause::Ren(a.clone(), b.clone()))
        }
        RAExpr::Join(a, b) => {
            let left_attrs = ra_attrs(a, schema).expect("checked");
            let right_names = b.names(schema);
            let x1 = translate(a, schema, fresh);
            let x2 = translate(b, schema, fresh);
            let clash: Vec<&Attr> = left_attrs.intersection(&right_names).collect();
            if clash.is_empty() {
                return LcraQuery::Lin(vec![call(x1), call(x2)]);
            }
            let mut y2 = Vec::new();
            for a in clash {
                y2.push(Clause::Ren(a.clone(), fresh.name()));
            }
            y2.push(call(x2));
            let right_attrs = ra_attrs(b, schema).expect("checked");
            y2.push(Clause::Proj(right_attrs.into_iter().collect()));
            LcraQuery::Lin(vec![call(x1), call(LcraQuery::Lin(y2))])
        }
        other => {
            let (op, a, b) = match other {
                RAExpr::Union(a, b) => (SetOp::Union, a, b),
                RAExpr::Intersect(a, b) => (SetOp::Intersect, a, b),
                RAExpr::Diff(a, b) => (SetOp::Diff, a, b),
                _ => unreachable!(),
            };
            let x1 = translate(a, schema, fresh);
            let x2 = translate(b, schema, fresh);
            LcraQuery::set_op(
                op,
                LcraQuery::Lin(vec![call(x1)]),
                LcraQuery::Lin(vec![call(x2)]),
            )
        }
    }
}

/// A driving table as an expression with its attributes; `None` is the
/// unit table.
type Driver = Option<(RAExpr, BTreeSet<Attr>)>;

/// Translates a query, evaluated from the unit table, into an equivalent
/// algebra expression over `schema`.
pub fn lcra_to_ra(q: &LcraQuery, schema: &Schema) -> Result<RAExpr, LcraError> {
    match to_ra(q, None, schema)? {
        Some((e, _)) => Ok(e),
        None => Err(LcraError::Unresolvable),
    }
}

/// The empty relation over no attributes.
fn empty_unit(schema: &Schema) -> Result<RAExpr, LcraError> {
    let s = schema.keys().next().ok_or(LcraError::Unresolvable)?;
    let base = RAExpr::base(s);
    Ok(RAExpr::Project(Vec::new(), Box::new(base.clone().diff(base))))
}

fn to_ra(q: &LcraQuery, input: Driver, schema: &Schema) -> Result<Driver, LcraError> {
    match q {
        LcraQuery::Lin(clauses) => {
            let mut cur = input;
            for c in clauses {
                cur = clause_to_ra(c, cur, schema)?;
            }
            Ok(cur)
        }
        other => {
            let (op, a, b) = other.as_set_op().expect("set operation");
            let left = to_ra(a, input.clone(), schema)?;
            let right = to_ra(b, input, schema)?;
            match (left, right) {
                (None, None) => match op {
                    SetOp::Union | SetOp::Intersect => Ok(None),
                    SetOp::Diff => Ok(Some((empty_unit(schema)?, BTreeSet::new()))),
                },
                (Some((ea, aa)), Some((eb, ab))) => {
                    if aa != ab {
                        return Err(LcraError::SetOpMismatch {
                            op: op.keyword(),
                            left: aa,
                            right: ab,
                        });
                    }
                    Ok(Some((RAExpr::set_op(op, ea, eb), aa)))
                }
                _ => Err(LcraError::Unresolvable),
            }
        }
    }
}

fn clause_to_ra(c: &Clause, cur: Driver, schema: &Schema) -> Result<Driver, LcraError> {
    Ok(match (c, cur) {
        (Clause::Scan(s), cur) => {
            let attrs = schema
                .get(s)
                .ok_or_else(|| LcraError::UnknownRelation(s.clone()))?;
            match cur {
                None => Some((RAExpr::base(s), attrs.clone())),
                Some((e, mut a)) => {
                    a.extend(attrs.iter().cloned());
                    Some((e.join(RAExpr::base(s)), a))
                }
            }
        }
        (Clause::Proj(_), None) => None,
        (Clause::Proj(attrs), Some((e, a))) => {
            let kept: Vec<Attr> = a.iter().filter(|x| attrs.contains(x)).cloned().collect();
            let set = kept.iter().cloned().collect();
            Some((RAExpr::Project(kept, Box::new(e)), set))
        }
        (Clause::Filt(theta), None) => match theta.simplify(&BTreeSet::new()) {
            Err(true) => None,
            _ => Some((empty_unit(schema)?, BTreeSet::new())),
        },
        (Clause::Filt(theta), Some((e, a))) => match theta.simplify(&a) {
            Err(true) => Some((e, a)),
            Err(false) => Some((e.clone().diff(e), a)),
            Ok(residual) => Some((e.select(residual), a)),
        },
        (Clause::Ren(..), None) => Some((empty_unit(schema)?, BTreeSet::new())),
        (Clause::Ren(from, to), Some((e, mut a))) => {
            if a.contains(from) && !a.contains(to) {
                a.remove(from);
                a.insert(to.clone());
                Some((e.rename(from, to), a))
            } else {
                Some((e.clone().diff(e), a))
            }
        }
        (Clause::Call(q), None) => to_ra(q, None, schema)?,
        (Clause::Call(q), Some((e, mut a))) => match to_ra(q, Some((e.clone(), a.clone())), schema)? {
            Some((inner, ia)) => {
                a.extend(ia);
                Some((e.join(inner), a))
            }
            None => unreachable!("a non-unit driver never yields the unit table"),
        },
    })
}

// ---------------------------------------------------------------------------
// Concrete syntax

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Scan(s) => f.write_str(s),
            Clause::Proj(attrs) => {
                f.write_str("pi(")?;
                write_attr_list(f, attrs)?;
                f.write_str(")")
            }
            Clause::Filt(theta) => write!(f, "sigma({theta})"),
            Clause::Ren(a, b) => write!(f, "rho({a} -> {b})"),
            Clause::Call(q) => write!(f, "call {{ {q} }}"),
        }
    }
}

impl fmt::Display for LcraQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LcraQuery::Lin(cs) if cs.is_empty() => f.write_str("{ }"),
            LcraQuery::Lin(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            other => {
                let (op, a, b) = other.as_set_op().expect("set operation");
                if a.as_set_op().is_some() {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "{{ {a} }}")?;
                }
                write!(f, " {} {{ {b} }}", op.keyword())
            }
        }
    }
}

pub(crate) fn lcra_query(c: &mut Cursor) -> Result<LcraQuery, SyntaxError> {
    let mut q = lcra_term(c)?;
    while let Some(op) = set_op_keyword(c) {
        q = LcraQuery::set_op(op, q, lcra_term(c)?);
    }
    Ok(q)
}

fn lcra_term(c: &mut Cursor) -> Result<LcraQuery, SyntaxError> {
    if c.eat("{") {
        if c.eat("}") {
            return Ok(LcraQuery::Lin(Vec::new()));
        }
        let q = lcra_query(c)?;
        c.expect("}")?;
        return Ok(q);
    }
    let mut clauses = vec![clause(c)?];
    while starts_clause(c) {
        clauses.push(clause(c)?);
    }
    Ok(LcraQuery::Lin(clauses))
}

fn starts_clause(c: &mut Cursor) -> bool {
    if ["pi", "sigma", "rho", "call"].iter().any(|k| c.peek_keyword(k)) {
        return true;
    }
    let mut probe = c.clone();
    relation_name(&mut probe).is_ok()
}

fn clause(c: &mut Cursor) -> Result<Clause, SyntaxError> {
    if c.eat_keyword("pi") {
        return Ok(Clause::Proj(attr_list(c)?));
    }
    if c.eat_keyword("sigma") {
        c.expect("(")?;
        let theta = eq_cond(c)?;
        c.expect(")")?;
        return Ok(Clause::Filt(theta));
    }
    if c.eat_keyword("rho") {
        let (a, b) = rename_pair(c)?;
        return Ok(Clause::Ren(a, b));
    }
    if c.eat_keyword("call") {
        c.expect("{")?;
        let q = if c.peek_str("}") {
            LcraQuery::Lin(Vec::new())
        } else {
            lcra_query(c)?
        };
        c.expect("}")?;
        return Ok(Clause::Call(Box::new(q)));
    }
    Ok(Clause::Scan(relation_name(c)?))
}

pub fn parse_lcra(text: &str) -> Result<LcraQuery, LcraError> {
    let mut c = Cursor::new(text);
    let q = lcra_query(&mut c)?;
    if !c.at_end() {
        return Err(LcraError::Syntax(c.error("unexpected input after query".into())));
    }
    Ok(q)
}
