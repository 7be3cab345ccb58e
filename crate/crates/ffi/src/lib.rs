//! C ABI over `coregql`.
//!
//! Graphs and query results are opaque handles released with their
//! `_free` function. Every fallible call returns a [`CoregqlStatus`]; on
//! failure [`coregql_last_error`] describes what went wrong on the calling
//! thread. Strings returned to the caller are released with
//! [`coregql_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coregql::datalog::{encode_graph, eval_datalog, parse_program};
use coregql::graph::load_graph;
use coregql::query::{eval_core, parse_query_file, render_csv, render_json};
use coregql::{PropertyGraph, Relation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoregqlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidGraph = 3,
    InvalidQuery = 4,
    EvalError = 5,
    NotBoolean = 6,
    Panic = 7,
}

/// A loaded property graph.
pub struct CoregqlGraph {
    graph: PropertyGraph,
}

/// A query result with its CSV and JSON renderings.
pub struct CoregqlResult {
    relation: Relation,
    csv: CString,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (CoregqlStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CoregqlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CoregqlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CoregqlStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((CoregqlStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (CoregqlStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn graph_ref<'a>(g: *const CoregqlGraph) -> Result<&'a PropertyGraph, Failure> {
    g.as_ref()
        .map(|g| &g.graph)
        .ok_or((CoregqlStatus::NullArgument, "graph is null".into()))
}

fn c_string(s: String) -> CString {
    CString::new(s).unwrap_or_default()
}

/// Why the most recent call on this thread failed; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn coregql_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a graph from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coregql_graph_from_json(json: *const c_char, out: *mut *mut CoregqlGraph) -> CoregqlStatus {
    guard(|| {
        if out.is_null() {
            return Err((CoregqlStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let json = text(json, "json")?;
        let graph = load_graph(json.as_bytes()).map_err(|e| (CoregqlStatus::InvalidGraph, e.to_string()))?;
        *out = Box::into_raw(Box::new(CoregqlGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a live handle from [`coregql_graph_from_json`].
#[no_mangle]
pub unsafe extern "C" fn coregql_graph_node_count(g: *const CoregqlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.node_count())
}

/// # Safety
/// `g` must be null or a live handle from [`coregql_graph_from_json`].
#[no_mangle]
pub unsafe extern "C" fn coregql_graph_edge_count(g: *const CoregqlGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.edge_count())
}

/// # Safety
/// `g` must be null or a handle from [`coregql_graph_from_json`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn coregql_graph_free(g: *mut CoregqlGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Evaluates a query file over `g`.
///
/// # Safety
/// `g` must be a live graph handle, `query` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coregql_eval(
    g: *const CoregqlGraph,
    query: *const c_char,
    out: *mut *mut CoregqlResult,
) -> CoregqlStatus {
    guard(|| {
        if out.is_null() {
            return Err((CoregqlStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let graph = graph_ref(g)?;
        let qf = parse_query_file(text(query, "query")?).map_err(|e| (CoregqlStatus::InvalidQuery, e.to_string()))?;
        let relation = eval_core(graph, &qf).map_err(|e| (CoregqlStatus::EvalError, e.to_string()))?;
        let csv = c_string(render_csv(graph, &relation));
        let json = c_string(render_json(graph, &relation));
        *out = Box::into_raw(Box::new(CoregqlResult { relation, csv, json }));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn coregql_result_row_count(r: *const CoregqlResult) -> usize {
    r.as_ref().map_or(0, |r| r.relation.len())
}

/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn coregql_result_column_count(r: *const CoregqlResult) -> usize {
    r.as_ref().map_or(0, |r| r.relation.attrs().len())
}

/// The result as CSV with a header line. Owned by the result handle.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn coregql_result_csv(r: *const CoregqlResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.csv.as_ptr())
}

/// The result as JSON. Owned by the result handle.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn coregql_result_json(r: *const CoregqlResult) -> *const c_char {
    r.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `r` must be null or a result handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn coregql_result_free(r: *mut CoregqlResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

unsafe fn datalog_model<'a>(g: *const CoregqlGraph, program: *const c_char) -> Result<(&'a PropertyGraph, coregql::datalog::Model), Failure> {
    let graph = graph_ref(g)?;
    let p = parse_program(text(program, "program")?).map_err(|e| (CoregqlStatus::InvalidQuery, e.to_string()))?;
    let model = eval_datalog(&encode_graph(graph), &p).map_err(|e| (CoregqlStatus::EvalError, e.to_string()))?;
    Ok((graph, model))
}

/// Runs a Datalog program whose `.out` relation is nullary.
///
/// # Safety
/// `g` must be a live graph handle, `program` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coregql_datalog_boolean(
    g: *const CoregqlGraph,
    program: *const c_char,
    out: *mut bool,
) -> CoregqlStatus {
    guard(|| {
        if out.is_null() {
            return Err((CoregqlStatus::NullArgument, "out is null".into()));
        }
        let (_, model) = datalog_model(g, program)?;
        *out = model
            .boolean()
            .ok_or((CoregqlStatus::NotBoolean, "output relation is missing or not nullary".into()))?;
        Ok(())
    })
}

/// Runs a Datalog program and returns the `.out` relation, one
/// comma-separated row per line. Release with [`coregql_string_free`].
///
/// # Safety
/// `g` must be a live graph handle, `program` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn coregql_datalog_rows(
    g: *const CoregqlGraph,
    program: *const c_char,
    out: *mut *mut c_char,
) -> CoregqlStatus {
    guard(|| {
        if out.is_null() {
            return Err((CoregqlStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let (graph, model) = datalog_model(g, program)?;
        let name = model
            .out
            .as_deref()
            .ok_or((CoregqlStatus::InvalidQuery, "program has no `.out` directive".into()))?;
        let mut s = String::new();
        for row in model.get(name).into_iter().flatten() {
            let cells: Vec<String> = row.iter().map(|v| graph.render(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        *out = c_string(s).into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library for the caller
/// to release, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coregql_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
