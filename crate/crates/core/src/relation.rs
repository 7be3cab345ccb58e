//! Named-perspective relations with set semantics.
//!
//! A [`Relation`] has a finite set of attribute names and a set of tuples,
//! each total on exactly those attributes. Attributes are kept sorted and
//! each row stores its values in attribute order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::Value;

pub type Attr = String;

/// A tuple in map form, used at API boundaries.
pub type Tuple = BTreeMap<Attr, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("tuple attributes {found:?} do not match relation attributes {expected:?}")]
    DomainMismatch {
        expected: Vec<Attr>,
        found: Vec<Attr>,
    },
    #[error("set operation over different attribute sets {left:?} and {right:?}")]
    AttrMismatch { left: Vec<Attr>, right: Vec<Attr> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    attrs: Vec<Attr>,
    rows: BTreeSet<Vec<Value>>,
}

impl Relation {
    /// Empty relation over `attrs` (duplicates are collapsed).
    pub fn empty<I, S>(attrs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Attr>,
    {
        let set: BTreeSet<Attr> = attrs.into_iter().map(Into::into).collect();
        Relation {
            attrs: set.into_iter().collect(),
            rows: BTreeSet::new(),
        }
    }

    /// `I_∅`: the relation over no attributes holding the empty tuple.
    pub fn unit() -> Self {
        let mut rows = BTreeSet::new();
        rows.insert(Vec::new());
        Relation {
            attrs: Vec::new(),
            rows,
        }
    }

    pub fn from_tuples<I, S>(attrs: I, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self, RelationError>
    where
        I: IntoIterator<Item = S>,
        S: Into<Attr>,
    {
        let mut r = Relation::empty(attrs);
        for t in tuples {
            r.insert(t)?;
        }
        Ok(r)
    }

    /// Convenience constructor from rows listed in the order of `attrs`.
    ///
    /// Panics if a row's arity differs from `attrs.len()` or `attrs` repeats.
    pub fn from_rows(attrs: &[&str], rows: impl IntoIterator<Item = Vec<Value>>) -> Self {
        let mut r = Relation::empty(attrs.iter().copied());
        assert_eq!(r.attrs.len(), attrs.len(), "repeated attribute");
        for row in rows {
            assert_eq!(row.len(), attrs.len(), "row arity");
            let t: Tuple = attrs.iter().map(|a| a.to_string()).zip(row).collect();
            r.insert(t).expect("domain checked above");
        }
        r
    }

    pub fn attrs(&self) -> &[Attr] {
        &self.attrs
    }

    pub fn attr_set(&self) -> BTreeSet<Attr> {
        self.attrs.iter().cloned().collect()
    }

    pub fn has_attr(&self, a: &str) -> bool {
        self.position(a).is_some()
    }

    fn position(&self, a: &str) -> Option<usize> {
        self.attrs.binary_search_by(|x| x.as_str().cmp(a)).ok()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in attribute order.
    pub fn rows(&self) -> impl Iterator<Item = &[Value]> {
        self.rows.iter().map(Vec::as_slice)
    }

    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        self.rows
            .iter()
            .map(|row| self.attrs.iter().cloned().zip(row.iter().cloned()).collect())
    }

    pub fn insert(&mut self, t: Tuple) -> Result<bool, RelationError> {
        if t.len() != self.attrs.len() || !t.keys().zip(&self.attrs).all(|(a, b)| a == b) {
            return Err(RelationError::DomainMismatch {
                expected: self.attrs.clone(),
                found: t.into_keys().collect(),
            });
        }
        Ok(self.rows.insert(t.into_values().collect()))
    }

    /// Inserts a row already laid out in attribute order.
    pub fn insert_row(&mut self, row: Vec<Value>) -> bool {
        debug_assert_eq!(row.len(), self.attrs.len());
        self.rows.insert(row)
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        t.len() == self.attrs.len()
            && t.keys().zip(&self.attrs).all(|(a, b)| a == b)
            && self.rows.contains(&t.values().cloned().collect::<Vec<_>>())
    }

    /// Projection onto `attrs ∩ attr(self)`.
    pub fn project<S: AsRef<str>>(&self, attrs: &[S]) -> Relation {
        let keep: BTreeSet<&str> = attrs.iter().map(AsRef::as_ref).collect();
        let idx: Vec<usize> = (0..self.attrs.len())
            .filter(|&i| keep.contains(self.attrs[i].as_str()))
            .collect();
        Relation {
            attrs: idx.iter().map(|&i| self.attrs[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
                .collect(),
        }
    }

    pub fn filter(&self, mut keep: impl FnMut(&Relation, &[Value]) -> bool) -> Relation {
        Relation {
            attrs: self.attrs.clone(),
            rows: self.rows.iter().filter(|r| keep(self, r)).cloned().collect(),
        }
    }

    /// Value of attribute `a` in a row of this relation.
    pub fn get<'r>(&self, row: &'r [Value], a: &str) -> Option<&'r Value> {
        self.position(a).map(|i| &row[i])
    }

    /// `ρ_{from→to}` applied to every tuple. The caller ensures
    /// `from ∈ attrs` and `to ∉ attrs`; otherwise the relation is returned
    /// unchanged.
    pub fn rename(&self, from: &str, to: &str) -> Relation {
        if !self.has_attr(from) || self.has_attr(to) {
            return self.clone();
        }
        let tuples = self.tuples().map(|mut t| {
            let v = t.remove(from).expect("attribute present");
            t.insert(to.to_string(), v);
            t
        });
        let attrs = self
            .attrs
            .iter()
            .map(|a| if a == from { to.to_string() } else { a.clone() });
        Relation::from_tuples(attrs, tuples).expect("renaming preserves the domain")
    }

    /// Natural join: all `μ ⋈ μ'` with `μ ∼ μ'`.
    pub fn join(&self, other: &Relation) -> Relation {
        let shared: Vec<&Attr> = self.attrs.iter().filter(|a| other.has_attr(a)).collect();
        let out_attrs: Vec<Attr> = self
            .attr_set()
            .into_iter()
            .chain(other.attrs.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // For each output column: (from_left, index).
        let layout: Vec<(bool, usize)> = out_attrs
            .iter()
            .map(|a| match self.position(a) {
                Some(i) => (true, i),
                None => (false, other.position(a).unwrap()),
            })
            .collect();
        let lkey: Vec<usize> = shared.iter().map(|a| self.position(a).unwrap()).collect();
        let rkey: Vec<usize> = shared.iter().map(|a| other.position(a).unwrap()).collect();
        let mut index: HashMap<Vec<&Value>, Vec<&Vec<Value>>> = HashMap::new();
        for r in &other.rows {
            index
                .entry(rkey.iter().map(|&i| &r[i]).collect())
                .or_default()
                .push(r);
        }
        let mut rows = BTreeSet::new();
        for l in &self.rows {
            let key: Vec<&Value> = lkey.iter().map(|&i| &l[i]).collect();
            if let Some(matches) = index.get(&key) {
                for r in matches {
                    rows.insert(
                        layout
                            .iter()
                            .map(|&(left, i)| if left { l[i].clone() } else { r[i].clone() })
                            .collect(),
                    );
                }
            }
        }
        Relation {
            attrs: out_attrs,
            rows,
        }
    }

    fn check_same_attrs(&self, other: &Relation) -> Result<(), RelationError> {
        if self.attrs == other.attrs {
            Ok(())
        } else {
            Err(RelationError::AttrMismatch {
                left: self.attrs.clone(),
                right: other.attrs.clone(),
            })
        }
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_same_attrs(other)?;
        Ok(Relation {
            attrs: self.attrs.clone(),
            rows: self.rows.union(&other.rows).cloned().collect(),
        })
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_same_attrs(other)?;
        Ok(Relation {
            attrs: self.attrs.clone(),
            rows: self.rows.intersection(&other.rows).cloned().collect(),
        })
    }

    pub fn difference(&self, other: &Relation) -> Result<Relation, RelationError> {
        self.check_same_attrs(other)?;
        Ok(Relation {
            attrs: self.attrs.clone(),
            rows: self.rows.difference(&other.rows).cloned().collect(),
        })
    }

    /// CSV with the (sorted) attribute header and rows sorted by their
    /// rendered text.
    pub fn to_csv(&self, render: impl Fn(&Value) -> String) -> String {
        let mut lines: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(&render).collect())
            .collect();
        lines.sort();
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // A header-only record for zero attributes would be an empty line; csv
        // refuses to write empty records, so those are emitted by hand.
        let mut out = String::new();
        if self.attrs.is_empty() {
            out.push('\n');
            for _ in &lines {
                out.push('\n');
            }
            return out;
        }
        w.write_record(&self.attrs).expect("in-memory write");
        for l in &lines {
            w.write_record(l).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> Value {
        Value::int(v)
    }

    #[test]
    fn join_on_shared_attribute() {
        let r = Relation::from_rows(&["A", "B"], [vec![int(1), int(2)]]);
        let s = Relation::from_rows(&["B", "C"], [vec![int(2), int(3)], vec![int(9), int(4)]]);
        let j = r.join(&s);
        assert_eq!(j, Relation::from_rows(&["A", "B", "C"], [vec![int(1), int(2), int(3)]]));
    }

    #[test]
    fn unit_is_join_identity_and_product_for_disjoint() {
        let r = Relation::from_rows(&["A"], [vec![int(1)], vec![int(2)]]);
        assert_eq!(Relation::unit().join(&r), r);
        assert_eq!(r.join(&Relation::unit()), r);
        let s = Relation::from_rows(&["B"], [vec![int(7)]]);
        assert_eq!(r.join(&s).len(), 2);
        assert_eq!(r.join(&Relation::empty(["B"])).len(), 0);
    }

    #[test]
    fn set_ops_require_equal_attrs() {
        let r = Relation::from_rows(&["A"], [vec![int(1)]]);
        let s = Relation::from_rows(&["B"], [vec![int(1)]]);
        assert!(r.union(&s).is_err());
        assert!(r.difference(&r).unwrap().is_empty());
        assert_eq!(r.intersect(&r).unwrap(), r);
    }

    #[test]
    fn insert_checks_domain() {
        let mut r = Relation::empty(["A"]);
        let mut t = Tuple::new();
        t.insert("B".into(), int(1));
        assert!(r.insert(t).is_err());
    }

    #[test]
    fn project_and_rename() {
        let r = Relation::from_rows(&["A", "B"], [vec![int(1), int(2)], vec![int(1), int(3)]]);
        assert_eq!(r.project(&["A", "Z"]), Relation::from_rows(&["A"], [vec![int(1)]]));
        assert_eq!(r.project::<&str>(&[]), Relation::unit());
        let renamed = r.rename("A", "D");
        assert_eq!(renamed.attrs(), &["B".to_string(), "D".to_string()]);
        assert_eq!(renamed.len(), 2);
    }

    #[test]
    fn csv_is_sorted_by_rendered_text() {
        let r = Relation::from_rows(&["b", "a"], [vec![int(10), int(2)], vec![int(9), int(1)]]);
        let render = |v: &Value| match v {
            Value::Const(c) => c.to_string(),
            _ => unreachable!(),
        };
        assert_eq!(r.to_csv(render), "a,b\n1,9\n2,10\n");
        let r = Relation::from_rows(&["x"], [vec![Value::str("b,c")], vec![Value::str("a")]]);
        assert_eq!(r.to_csv(render), "x\na\n\"b,c\"\n");
    }
}
