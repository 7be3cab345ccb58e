use std::collections::BTreeSet;

use thiserror::Error;

use super::{Pattern, Var};

/// Why a pattern is not one-way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OneWayViolation {
    /// A backward edge atom.
    BackwardEdge(Pattern),
    /// A concatenation whose operands share free variables.
    SharedVariables { subterm: Pattern, shared: BTreeSet<Var> },
}

/// Every violating subterm, in pre-order.
pub fn one_way_violations(p: &Pattern) -> Vec<OneWayViolation> {
    let mut out = Vec::new();
    collect_violations(p, &mut out);
    out
}

fn collect_violations(p: &Pattern, out: &mut Vec<OneWayViolation>) {
    match p {
        Pattern::Node(_) | Pattern::Fwd(_) => {}
        Pattern::Bwd(_) => out.push(OneWayViolation::BackwardEdge(p.clone())),
        Pattern::Concat(a, b) => {
            let shared: BTreeSet<Var> = a
                .free_vars()
                .intersection(&b.free_vars())
                .cloned()
                .collect();
            if !shared.is_empty() {
                out.push(OneWayViolation::SharedVariables {
                    subterm: p.clone(),
                    shared,
                });
            }
            collect_violations(a, out);
            collect_violations(b, out);
        }
        Pattern::Union(a, b) => {
            collect_violations(a, out);
            collect_violations(b, out);
        }
        Pattern::Repeat(q, _, _) | Pattern::Cond(q, _) => collect_violations(q, out),
    }
}

pub fn is_one_way(p: &Pattern) -> bool {
    one_way_violations(p).is_empty()
}

/// How conditions are treated by [`plus_normal_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnfMode {
    /// Conditions are kept and pushed onto every summand.
    General,
    /// Conditions are dropped; only sound on graphs without data.
    Dataless,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnfError {
    #[error("pattern is not one-way ({0} violations)")]
    NotOneWay(usize),
    #[error("normal form exceeds {0} summands")]
    TooLarge(usize),
}

const MAX_SUMMANDS: usize = 4096;

/// Rewrites a one-way pattern into a sum whose summands contain `+` only
/// under unbounded repetition.
///
/// Finite repetitions are unfolded into their possible iteration counts.
/// Each unfolded copy that has free variables is wrapped as `[ρ]{1..1}`,
/// which hides its variables the way the original repetition did.
pub fn plus_normal_form(p: &Pattern, mode: PnfMode) -> Result<Pattern, PnfError> {
    let violations = one_way_violations(p);
    if !violations.is_empty() {
        return Err(PnfError::NotOneWay(violations.len()));
    }
    let summands = tr(p, mode)?;
    let mut it = summands.into_iter();
    let first = it.next().expect("tr yields at least one summand");
    Ok(it.fold(first, |acc, s| Pattern::Union(Box::new(acc), Box::new(s))))
}

fn check_size(v: Vec<Pattern>) -> Result<Vec<Pattern>, PnfError> {
    if v.len() > MAX_SUMMANDS {
        Err(PnfError::TooLarge(MAX_SUMMANDS))
    } else {
        Ok(v)
    }
}

fn product(left: &[Pattern], right: &[Pattern]) -> Result<Vec<Pattern>, PnfError> {
    if left.len().saturating_mul(right.len()) > MAX_SUMMANDS {
        return Err(PnfError::TooLarge(MAX_SUMMANDS));
    }
    let mut out = Vec::with_capacity(left.len() * right.len());
    for a in left {
        for b in right {
            out.push(a.clone().concat(b.clone()));
        }
    }
    Ok(out)
}

fn tr(p: &Pattern, mode: PnfMode) -> Result<Vec<Pattern>, PnfError> {
    match p {
        Pattern::Node(_) | Pattern::Fwd(_) | Pattern::Bwd(_) => Ok(vec![p.clone()]),
        Pattern::Union(a, b) => {
            let mut v = tr(a, mode)?;
            v.extend(tr(b, mode)?);
            check_size(v)
        }
        Pattern::Concat(a, b) => product(&tr(a, mode)?, &tr(b, mode)?),
        Pattern::Repeat(_, _, None) => Ok(vec![p.clone()]),
        Pattern::Repeat(q, lo, Some(hi)) => {
            let copies: Vec<Pattern> = tr(q, mode)?
                .into_iter()
                .map(|r| {
                    if r.free_vars().is_empty() {
                        r
                    } else {
                        Pattern::Repeat(Box::new(r), 1, Some(1))
                    }
                })
                .collect();
            let mut out = Vec::new();
            if *lo == 0 {
                out.push(Pattern::Node(None));
            }
            let mut layer: Vec<Pattern> = Vec::new();
            for i in 1..=*hi {
                layer = if i == 1 {
                    copies.clone()
                } else {
                    product(&layer, &copies)?
                };
                if i >= *lo {
                    out.extend(layer.iter().cloned());
                    out = check_size(out)?;
                }
            }
            Ok(out)
        }
        Pattern::Cond(q, theta) => {
            let inner = tr(q, mode)?;
            Ok(match mode {
                PnfMode::General => inner
                    .into_iter()
                    .map(|r| Pattern::Cond(Box::new(r), theta.clone()))
                    .collect(),
                PnfMode::Dataless => inner,
            })
        }
    }
}

fn plus_free(p: &Pattern) -> bool {
    match p {
        Pattern::Node(_) | Pattern::Fwd(_) | Pattern::Bwd(_) => true,
        Pattern::Union(..) => false,
        Pattern::Concat(a, b) => plus_free(a) && plus_free(b),
        Pattern::Repeat(_, _, None) => true,
        Pattern::Repeat(q, _, Some(_)) | Pattern::Cond(q, _) => plus_free(q),
    }
}

/// A top-level sum of summands in which `+` occurs only under unbounded
/// repetition.
pub fn is_plus_normal_form(p: &Pattern) -> bool {
    match p {
        Pattern::Union(a, b) => is_plus_normal_form(a) && is_plus_normal_form(b),
        other => plus_free(other),
    }
}
