//! Core PGQ and Core GQL queries: relational bodies over pattern relations.
//!
//! A query file declares each pattern relation and then gives one body:
//!
//! ```text
//! rel R1 = match [(x) -[e]-> (y) | :Friends(e)] columns (x, y, y.city);
//! rel R2 = match [(y) -[o]-> (a) | :Owns(o)] columns (y, a);
//! query gql = R1 R2 pi(y.city, a)
//! ```
//!
//! `query pgq = ...` takes an algebra expression instead.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::graph::{Const, PropertyGraph, Value};
use crate::lcra::{eval_lcra_query, lcra_query, lcra_to_ra, ra_to_lcra, Clause, LcraError, LcraQuery};
use crate::patmatch::eval_pattern_with_output;
use crate::pattern::parser::{output_items, pattern};
use crate::pattern::{OutputSpec, Pattern, PatternError};
use crate::relalg::{eval_ra, ra_expr, relation_name, Database, RAError, RAExpr, Schema};
use crate::relation::Relation;
use crate::syntax::{Cursor, SyntaxError};

/// A base relation `R_{ψ,ω}` whose attributes are the output names of `ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatRelation {
    pub name: String,
    pub pattern: Pattern,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryBody {
    Pgq(RAExpr),
    Gql(LcraQuery),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreQueryFile {
    pub relations: Vec<PatRelation>,
    pub body: QueryBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("relation `{name}`: {source}")]
    Pattern { name: String, source: PatternError },
    #[error("relation `{0}` is declared twice")]
    DuplicateRelation(String),
    #[error("query refers to undeclared relation `{0}`")]
    UndeclaredRelation(String),
    #[error(transparent)]
    Algebra(#[from] RAError),
    #[error(transparent)]
    Lcra(#[from] LcraError),
}

fn lcra_scans(q: &LcraQuery, out: &mut BTreeSet<String>) {
    match q {
        LcraQuery::Lin(cs) => {
            for c in cs {
                match c {
                    Clause::Scan(s) => {
                        out.insert(s.clone());
                    }
                    Clause::Call(q) => lcra_scans(q, out),
                    _ => {}
                }
            }
        }
        LcraQuery::Union(a, b) | LcraQuery::Intersect(a, b) | LcraQuery::Diff(a, b) => {
            lcra_scans(a, out);
            lcra_scans(b, out);
        }
    }
}

impl CoreQueryFile {
    pub fn new(relations: Vec<PatRelation>, body: QueryBody) -> Result<Self, CoreError> {
        let qf = CoreQueryFile { relations, body };
        qf.validate()?;
        Ok(qf)
    }

    pub fn schema(&self) -> Schema {
        self.relations
            .iter()
            .map(|r| (r.name.clone(), r.output.attr_names().into_iter().collect()))
            .collect()
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let mut seen = BTreeSet::new();
        for r in &self.relations {
            if !seen.insert(r.name.as_str()) {
                return Err(CoreError::DuplicateRelation(r.name.clone()));
            }
            r.pattern
                .validate()
                .and_then(|_| r.output.check(&r.pattern))
                .map_err(|source| CoreError::Pattern {
                    name: r.name.clone(),
                    source,
                })?;
        }
        let used = match &self.body {
            QueryBody::Pgq(e) => e.bases(),
            QueryBody::Gql(q) => {
                let mut out = BTreeSet::new();
                lcra_scans(q, &mut out);
                out
            }
        };
        match used.into_iter().find(|s| !seen.contains(s.as_str())) {
            Some(s) => Err(CoreError::UndeclaredRelation(s)),
            None => Ok(()),
        }
    }

    /// The same query with the body translated to the other language.
    pub fn translated(&self) -> Result<CoreQueryFile, CoreError> {
        let schema = self.schema();
        let body = match &self.body {
            QueryBody::Pgq(e) => QueryBody::Gql(ra_to_lcra(e, &schema)?),
            QueryBody::Gql(q) => QueryBody::Pgq(lcra_to_ra(q, &schema)?),
        };
        Ok(CoreQueryFile {
            relations: self.relations.clone(),
            body,
        })
    }
}

impl fmt::Display for CoreQueryFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.relations {
            writeln!(f, "rel {} = match {} columns ({});", r.name, r.pattern, r.output)?;
        }
        match &self.body {
            QueryBody::Pgq(e) => writeln!(f, "query pgq = {e}"),
            QueryBody::Gql(q) => writeln!(f, "query gql = {q}"),
        }
    }
}

pub fn parse_query_file(text: &str) -> Result<CoreQueryFile, CoreError> {
    let mut c = Cursor::new(text);
    let mut relations = Vec::new();
    while c.eat_keyword("rel") {
        let name = relation_name(&mut c)?;
        let wrap = |source| CoreError::Pattern {
            name: name.clone(),
            source,
        };
        c.expect("=")?;
        c.expect_keyword("match")?;
        let psi = pattern(&mut c).map_err(wrap)?;
        c.expect_keyword("columns")?;
        c.expect("(")?;
        let omega = if c.peek_str(")") {
            OutputSpec::new(Vec::new()).map_err(wrap)?
        } else {
            output_items(&mut c).map_err(wrap)?
        };
        c.expect(")")?;
        c.expect(";")?;
        relations.push(PatRelation {
            name,
            pattern: psi,
            output: omega,
        });
    }
    c.expect_keyword("query")?;
    let body = if c.eat_keyword("pgq") {
        c.expect("=")?;
        QueryBody::Pgq(ra_expr(&mut c)?)
    } else if c.eat_keyword("gql") {
        c.expect("=")?;
        QueryBody::Gql(lcra_query(&mut c)?)
    } else {
        return Err(c.error("expected `pgq` or `gql`".into()).into());
    };
    c.eat(";");
    if !c.at_end() {
        return Err(c.error("unexpected input after query body".into()).into());
    }
    CoreQueryFile::new(relations, body)
}

/// Every declared pattern relation over `g`.
pub fn materialize(g: &PropertyGraph, qf: &CoreQueryFile) -> Database {
    qf.relations
        .iter()
        .map(|r| (r.name.clone(), eval_pattern_with_output(g, &r.pattern, &r.output)))
        .collect()
}

pub fn eval_core(g: &PropertyGraph, qf: &CoreQueryFile) -> Result<Relation, CoreError> {
    qf.validate()?;
    let db = materialize(g, qf);
    Ok(match &qf.body {
        QueryBody::Pgq(e) => eval_ra(&db, e)?,
        QueryBody::Gql(q) => eval_lcra_query(&db, q)?,
    })
}

/// A Boolean query holds when its result is nonempty.
pub fn check_boolean(rel: &Relation) -> bool {
    !rel.is_empty()
}

pub fn render_csv(g: &PropertyGraph, rel: &Relation) -> String {
    rel.to_csv(|v| g.render(v))
}

fn json_value(g: &PropertyGraph, v: &Value) -> serde_json::Value {
    match v {
        Value::Const(Const::Int(i)) => json!(i),
        other => json!(g.render(other)),
    }
}

/// `{"attrs": [...], "rows": [{attr: value}, ...]}` with rows in CSV order.
pub fn render_json(g: &PropertyGraph, rel: &Relation) -> String {
    let mut rows: Vec<(Vec<String>, serde_json::Value)> = rel
        .rows()
        .map(|row| {
            let key = row.iter().map(|v| g.render(v)).collect();
            let obj: serde_json::Map<String, serde_json::Value> = rel
                .attrs()
                .iter()
                .zip(row)
                .map(|(a, v)| (a.clone(), json_value(g, v)))
                .collect();
            (key, serde_json::Value::Object(obj))
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let doc = json!({
        "attrs": rel.attrs(),
        "rows": rows.into_iter().map(|(_, r)| r).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("JSON values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn musketeers() -> PropertyGraph {
        let mut b = PropertyGraph::builder();
        for (name, city) in [("athos", "Paris"), ("porthos", "Lyon"), ("aramis", "Paris")] {
            b.add_node(
                name,
                ["Person"],
                [("name".to_string(), Const::from(name)), ("city".to_string(), Const::from(city))],
            )
            .unwrap();
        }
        b.add_node("a1", ["Account"], Vec::new()).unwrap();
        b.add_node("a2", ["Account"], Vec::new()).unwrap();
        for (e, s, t) in [("f1", "athos", "porthos"), ("f2", "porthos", "aramis"), ("f3", "aramis", "athos")] {
            b.add_edge(e, s, t, ["Friends"], Vec::new()).unwrap();
        }
        b.add_edge("o1", "athos", "a1", ["Owns"], Vec::new()).unwrap();
        b.add_edge("o2", "porthos", "a2", ["Owns"], Vec::new()).unwrap();
        b.build()
    }

    const RELS: &str = "
        rel R1 = match [(x) -[e1]-> (y) (y) -[e2]-> (z) | :Friends(e1) and :Friends(e2)]
                 columns (x, y, z, x.city, y.city, z.city, y.name);
        rel R2 = match [(y) -[e3]-> (acc_y) | :Owns(e3)] columns (y, acc_y);
    ";

    #[test]
    fn friends_in_other_cities() {
        let g = musketeers();
        let text = format!(
            "{RELS} query gql = R1 R2 sigma(y.city != x.city and x.city = z.city) \
             pi(y.name, acc_y) rho(y.name -> name) rho(acc_y -> account)"
        );
        let qf = parse_query_file(&text).unwrap();
        let r = eval_core(&g, &qf).unwrap();
        assert_eq!(render_csv(&g, &r), "account,name\na2,porthos\n");
        assert!(check_boolean(&r));

        let text = format!(
            "{RELS} query pgq = rho(acc_y -> account) rho(y.name -> name) pi(y.name, acc_y) \
             sigma(y.city != x.city and x.city = z.city) (R1 join R2)"
        );
        let pgq = eval_core(&g, &parse_query_file(&text).unwrap()).unwrap();
        assert_eq!(pgq, r);
        let back = qf.translated().unwrap();
        assert_eq!(eval_core(&g, &back).unwrap(), r);
        assert_eq!(eval_core(&g, &back.translated().unwrap()).unwrap(), r);
    }

    #[test]
    fn printing_round_trips() {
        let text = format!("{RELS} query gql = {{ R1 pi(y) }} union {{ R2 pi(y) }}");
        let qf = parse_query_file(&text).unwrap();
        assert_eq!(parse_query_file(&qf.to_string()).unwrap(), qf);
    }

    #[test]
    fn rejects_bad_files() {
        let bad = parse_query_file("rel R = match (x) columns (x); query pgq = S");
        assert_eq!(bad, Err(CoreError::UndeclaredRelation("S".into())));
        let bad = parse_query_file("rel R = match (x) columns (y); query pgq = R");
        assert!(matches!(bad, Err(CoreError::Pattern { .. })));
        let bad = parse_query_file("rel R = match (x) columns (x); rel R = match (y) columns (y); query pgq = R");
        assert_eq!(bad, Err(CoreError::DuplicateRelation("R".into())));
        assert!(matches!(parse_query_file("query sql = R"), Err(CoreError::Syntax(_))));
    }

    #[test]
    fn empty_graph() {
        let g = PropertyGraph::builder().build();
        let qf = parse_query_file("rel R = match (x) --> (y) columns (x, y); rel E = match [-->]{0..*} columns (); query pgq = pi() R union E").unwrap();
        assert!(eval_core(&g, &qf).unwrap().is_empty());
    }

    #[test]
    fn json_output() {
        let g = musketeers();
        let qf = parse_query_file("rel R = match [(x) -[o]-> (a) | :Owns(o)] columns (x, a); query pgq = R").unwrap();
        let text = render_json(&g, &eval_core(&g, &qf).unwrap());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["attrs"], json!(["a", "x"]));
        assert_eq!(v["rows"][1], json!({"a": "a2", "x": "porthos"}));
    }
}
