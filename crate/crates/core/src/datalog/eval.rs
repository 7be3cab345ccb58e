//! Least-model computation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::Range;

use crate::graph::Value;

use super::{DatalogError, Facts, Program, Rule, Term};

type Row = Vec<Value>;

/// Append-only table with hash indexes on the column sets that rule bodies
/// look up.
#[derive(Default)]
struct Table {
    rows: Vec<Row>,
    seen: HashSet<Row>,
    indexes: Vec<(Vec<usize>, HashMap<Row, Vec<usize>>)>,
}

impl Table {
    fn insert(&mut self, row: Row) -> bool {
        if self.seen.contains(&row) {
            return false;
        }
        let id = self.rows.len();
        for (cols, index) in &mut self.indexes {
            if let Some(key) = index_key(cols, &row) {
                index.entry(key).or_default().push(id);
            }
        }
        self.seen.insert(row.clone());
        self.rows.push(row);
        true
    }

    /// Position of the index on `cols`, created on first request.
    fn index_on(&mut self, cols: &[usize]) -> usize {
        if let Some(i) = self.indexes.iter().position(|(c, _)| c == cols) {
            return i;
        }
        let mut index: HashMap<Row, Vec<usize>> = HashMap::new();
        for (id, row) in self.rows.iter().enumerate() {
            if let Some(key) = index_key(cols, row) {
                index.entry(key).or_default().push(id);
            }
        }
        self.indexes.push((cols.to_vec(), index));
        self.indexes.len() - 1
    }
}

/// `None` for input rows too short for the index.
fn index_key(cols: &[usize], row: &[Value]) -> Option<Row> {
    cols.iter().map(|&c| row.get(c).cloned()).collect()
}

/// The least model: every relation, input and derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub relations: BTreeMap<String, BTreeSet<Row>>,
    pub out: Option<String>,
}

impl Model {
    pub fn get(&self, pred: &str) -> Option<&BTreeSet<Row>> {
        self.relations.get(pred)
    }

    /// For a nullary output relation, whether it holds.
    pub fn boolean(&self) -> Option<bool> {
        let rel = self.relations.get(self.out.as_deref()?)?;
        match rel.iter().next() {
            Some(row) if !row.is_empty() => None,
            Some(_) => Some(true),
            None => Some(false),
        }
    }
}

struct BodyAtom {
    pred: usize,
    slots: Vec<Slot>,
    /// Columns bound when the atom is reached, with their index.
    lookup: Option<(Vec<usize>, usize)>,
}

/// A rule body in evaluation order.
struct Plan {
    body: Vec<BodyAtom>,
}

struct Compiled {
    head: (usize, Vec<Slot>),
    vars: usize,
    /// Body in written order.
    full: Plan,
    /// One plan per body position, that atom first.
    by_delta: Vec<Plan>,
}

#[derive(Clone)]
enum Slot {
    Var(usize),
    Const(Value),
}

/// With `delta_first`, the first atom is scanned over new rows and needs no index.
fn plan(atoms: &[(usize, Vec<Slot>)], order: &[usize], delta_first: bool, tables: &mut [Table]) -> Plan {
    let mut bound: HashSet<usize> = HashSet::new();
    let mut body = Vec::new();
    for (step, &i) in order.iter().enumerate() {
        let (pred, slots) = &atoms[i];
        let cols: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| match s {
                Slot::Const(_) => true,
                Slot::Var(x) => bound.contains(x),
            })
            .map(|(c, _)| c)
            .collect();
        let scanned = step == 0 && delta_first;
        let lookup = (!cols.is_empty() && !scanned).then(|| {
            let ix = tables[*pred].index_on(&cols);
            (cols, ix)
        });
        bound.extend(slots.iter().filter_map(|s| match s {
            Slot::Var(x) => Some(*x),
            Slot::Const(_) => None,
        }));
        body.push(BodyAtom {
            pred: *pred,
            slots: slots.clone(),
            lookup,
        });
    }
    Plan { body }
}

fn compile(rule: &Rule, preds: &HashMap<String, usize>, tables: &mut [Table]) -> Compiled {
    let mut vars: HashMap<String, usize> = HashMap::new();
    let mut conv = |args: &[Term]| -> Vec<Slot> {
        args.iter()
            .map(|t| match t {
                Term::Const(v) => Slot::Const(v.clone()),
                Term::Var(x) => {
                    let n = vars.len();
                    Slot::Var(*vars.entry(x.clone()).or_insert(n))
                }
            })
            .collect()
    };
    let atoms: Vec<(usize, Vec<Slot>)> = rule.body.iter().map(|a| (preds[&a.pred], conv(&a.args))).collect();
    let head = (preds[&rule.head.pred], conv(&rule.head.args));
    let written: Vec<usize> = (0..atoms.len()).collect();
    let full = plan(&atoms, &written, false, tables);
    let by_delta = (0..atoms.len())
        .map(|d| {
            let order: Vec<usize> = std::iter::once(d).chain(written.iter().copied().filter(|&i| i != d)).collect();
            plan(&atoms, &order, true, tables)
        })
        .collect();
    Compiled {
        head,
        vars: vars.len(),
        full,
        by_delta,
    }
}

struct Engine {
    tables: Vec<Table>,
    rules: Vec<Compiled>,
}

impl Engine {
    /// Derivations of `rule`. With `delta = Some((d, rows))`, body atom `d`
    /// ranges over `rows` of its table and every other atom over the full
    /// table.
    fn fire(&self, rule: &Compiled, delta: Option<(usize, Range<usize>)>, out: &mut Vec<(usize, Row)>) {
        let mut binding: Vec<Option<Value>> = vec![None; rule.vars];
        match delta {
            None => self.search(rule, &rule.full, 0, None, &mut binding, out),
            Some((d, rows)) => self.search(rule, &rule.by_delta[d], 0, Some(rows), &mut binding, out),
        }
    }

    fn search(
        &self,
        rule: &Compiled,
        plan: &Plan,
        i: usize,
        rows: Option<Range<usize>>,
        binding: &mut Vec<Option<Value>>,
        out: &mut Vec<(usize, Row)>,
    ) {
        if i == plan.body.len() {
            let (pred, slots) = &rule.head;
            let row = slots
                .iter()
                .map(|s| match s {
                    Slot::Const(v) => v.clone(),
                    Slot::Var(x) => binding[*x].clone().expect("safe rule"),
                })
                .collect();
            if !self.tables[*pred].seen.contains(&row) {
                out.push((*pred, row));
            }
            return;
        }
        let atom = &plan.body[i];
        let table = &self.tables[atom.pred];
        let slots = &atom.slots;
        let candidates: Box<dyn Iterator<Item = usize> + '_> = match (rows, &atom.lookup) {
            (Some(range), _) => Box::new(range),
            (None, Some((cols, index))) => {
                let key: Row = cols
                    .iter()
                    .map(|&c| match &slots[c] {
                        Slot::Const(v) => v.clone(),
                        Slot::Var(x) => binding[*x].clone().expect("bound on arrival"),
                    })
                    .collect();
                match table.indexes[*index].1.get(&key) {
                    Some(ids) => Box::new(ids.iter().copied()),
                    None => return,
                }
            }
            (None, None) => Box::new(0..table.rows.len()),
        };
        for id in candidates {
            let row = &table.rows[id];
            if row.len() != slots.len() {
                continue;
            }
            let mut newly = Vec::new();
            let mut ok = true;
            for (s, v) in slots.iter().zip(row) {
                match s {
                    Slot::Const(c) => ok = c == v,
                    Slot::Var(x) => match &binding[*x] {
                        Some(b) => ok = b == v,
                        None => {
                            binding[*x] = Some(v.clone());
                            newly.push(*x);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                self.search(rule, plan, i + 1, None, binding, out);
            }
            for x in newly {
                binding[x] = None;
            }
        }
    }
}

fn setup(facts: &Facts, p: &Program) -> Result<(Engine, Vec<String>, BTreeSet<usize>), DatalogError> {
    p.validate()?;
    let idb = p.idb();
    if let Some(edb_head) = idb.iter().find(|q| facts.get(*q).is_some_and(|r| !r.is_empty())) {
        return Err(DatalogError::EdbHead(edb_head.clone()));
    }
    let mut names: Vec<String> = facts.keys().cloned().collect();
    for q in p.idb().into_iter().chain(p.edb()) {
        if !names.contains(&q) {
            names.push(q);
        }
    }
    let preds: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let mut tables: Vec<Table> = names.iter().map(|_| Table::default()).collect();
    for (name, rows) in facts {
        for row in rows {
            tables[preds[name]].insert(row.clone());
        }
    }
    let rules = p.rules.iter().map(|r| compile(r, &preds, &mut tables)).collect();
    let idb_ids = idb.iter().map(|q| preds[q]).collect();
    Ok((Engine { tables, rules }, names, idb_ids))
}

fn finish(engine: Engine, names: Vec<String>, p: &Program) -> Model {
    let relations = names
        .into_iter()
        .zip(engine.tables)
        .map(|(n, t)| (n, t.rows.into_iter().collect()))
        .collect();
    Model {
        relations,
        out: p.out.clone(),
    }
}

/// Re-fires every rule over the full model until nothing new is derived.
pub fn eval_naive(facts: &Facts, p: &Program) -> Result<Model, DatalogError> {
    let (mut engine, names, _) = setup(facts, p)?;
    loop {
        let mut derived = Vec::new();
        for rule in &engine.rules {
            engine.fire(rule, None, &mut derived);
        }
        let mut changed = false;
        for (pred, row) in derived {
            changed |= engine.tables[pred].insert(row);
        }
        if !changed {
            return Ok(finish(engine, names, p));
        }
    }
}

/// Fires each rule once per derived body atom, with that atom restricted to
/// the facts new in the previous round.
pub fn eval_seminaive(facts: &Facts, p: &Program) -> Result<Model, DatalogError> {
    let (mut engine, names, idb) = setup(facts, p)?;
    // Round 0 fires every rule on the input facts alone.
    let mut derived = Vec::new();
    for rule in &engine.rules {
        engine.fire(rule, None, &mut derived);
    }
    let mut delta: Vec<Range<usize>> = engine.tables.iter().map(|t| t.rows.len()..t.rows.len()).collect();
    loop {
        let starts: Vec<usize> = engine.tables.iter().map(|t| t.rows.len()).collect();
        for (pred, row) in derived.drain(..) {
            engine.tables[pred].insert(row);
        }
        for (i, t) in engine.tables.iter().enumerate() {
            delta[i] = starts[i]..t.rows.len();
        }
        if delta.iter().all(|r| r.is_empty()) {
            return Ok(finish(engine, names, p));
        }
        for rule in &engine.rules {
            for (pos, atom) in rule.full.body.iter().enumerate() {
                if idb.contains(&atom.pred) && !delta[atom.pred].is_empty() {
                    engine.fire(rule, Some((pos, delta[atom.pred].clone())), &mut derived);
                }
            }
        }
    }
}

/// The least model, computed semi-naively.
pub fn eval_datalog(facts: &Facts, p: &Program) -> Result<Model, DatalogError> {
    eval_seminaive(facts, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::{encode_graph, parse_program, EQ_LEN_PROGRAM, POW2_PROGRAM, TC_PROGRAM};
    use crate::graph::{dataless_path, NodeId};

    fn node(i: u32) -> Value {
        Value::Node(NodeId(i))
    }

    #[test]
    fn transitive_closure_on_chain() {
        let g = dataless_path(2);
        let p = parse_program(TC_PROGRAM).unwrap();
        let m = eval_datalog(&encode_graph(&g), &p).unwrap();
        let expected: BTreeSet<Row> = [
            vec![node(0), node(1)],
            vec![node(1), node(2)],
            vec![node(0), node(2)],
        ]
        .into();
        assert_eq!(m.get("T").unwrap(), &expected);
        assert_eq!(m.boolean(), None);
        assert_eq!(eval_naive(&encode_graph(&g), &p).unwrap(), m);
    }

    #[test]
    fn equal_lengths() {
        let m = eval_datalog(&encode_graph(&dataless_path(3)), &parse_program(EQ_LEN_PROGRAM).unwrap()).unwrap();
        let eq = m.get("eqLen").unwrap();
        assert!(eq.contains(&vec![node(0), node(1), node(1), node(2)]));
        assert!(eq.contains(&vec![node(0), node(2), node(1), node(3)]));
        assert!(!eq.contains(&vec![node(0), node(2), node(1), node(2)]));
        // Pairs of equal-length subpaths of a 3-edge path: 9 + 4 + 1.
        assert_eq!(eq.len(), 14);
    }

    #[test]
    fn powers_of_two() {
        let p = parse_program(POW2_PROGRAM).unwrap();
        for (n, expected) in [(1, false), (2, true), (3, false), (4, true), (6, false), (8, true)] {
            let m = eval_datalog(&encode_graph(&dataless_path(n)), &p).unwrap();
            assert_eq!(m.boolean(), Some(expected), "n = {n}");
        }
    }

    #[test]
    fn facts_and_constants() {
        let p = parse_program("P(1). P(2). Q(x) :- P(x), R(x, \"k\").\n.out Q").unwrap();
        let mut db = Facts::new();
        db.insert("R".into(), [vec![Value::int(2), Value::str("k")]].into());
        let m = eval_seminaive(&db, &p).unwrap();
        assert_eq!(m.get("Q").unwrap(), &BTreeSet::from([vec![Value::int(2)]]));
        assert_eq!(eval_naive(&db, &p).unwrap(), m);
    }

    #[test]
    fn rejects_rules_for_input_relations() {
        let p = parse_program("E(x, y) :- E(y, x).").unwrap();
        let db = encode_graph(&dataless_path(1));
        assert_eq!(eval_naive(&db, &p), Err(DatalogError::EdbHead("E".into())));
    }
}
