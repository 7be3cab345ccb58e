use std::ffi::{CStr, CString};
use std::ptr;

use coregql_ffi::*;

const GRAPH: &str = r#"{
  "nodes": [
    {"id": "athos", "labels": ["Person"], "properties": {"city": "Paris"}},
    {"id": "porthos", "labels": ["Person"], "properties": {"city": "Lyon"}},
    {"id": "a1", "labels": ["Account"], "properties": {}}
  ],
  "edges": [
    {"id": "f1", "src": "athos", "tgt": "porthos", "labels": ["Friends"], "properties": {}},
    {"id": "o1", "src": "porthos", "tgt": "a1", "labels": ["Owns"], "properties": {}}
  ]
}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(coregql_last_error()) }.to_str().unwrap().to_string()
}

fn load(json: &str) -> *mut CoregqlGraph {
    let mut g = ptr::null_mut();
    let json = c(json);
    assert_eq!(unsafe { coregql_graph_from_json(json.as_ptr(), &mut g) }, CoregqlStatus::Ok);
    g
}

#[test]
fn evaluates_a_query() {
    let g = load(GRAPH);
    unsafe {
        assert_eq!(coregql_graph_node_count(g), 3);
        assert_eq!(coregql_graph_edge_count(g), 2);
        let q = c("rel F = match [(x) -[e]-> (y) -[o]-> (a) | :Owns(o)] columns (x, a); query pgq = F");
        let mut r = ptr::null_mut();
        assert_eq!(coregql_eval(g, q.as_ptr(), &mut r), CoregqlStatus::Ok);
        assert_eq!(coregql_result_row_count(r), 1);
        assert_eq!(coregql_result_column_count(r), 2);
        let csv = CStr::from_ptr(coregql_result_csv(r)).to_str().unwrap();
        assert_eq!(csv, "a,x\na1,athos\n");
        let json = CStr::from_ptr(coregql_result_json(r)).to_str().unwrap();
        assert!(json.contains("\"athos\""));
        coregql_result_free(r);
        coregql_graph_free(g);
    }
}

#[test]
fn reports_errors() {
    let mut g = ptr::null_mut();
    let bad = c("{\"nodes\": [");
    assert_eq!(unsafe { coregql_graph_from_json(bad.as_ptr(), &mut g) }, CoregqlStatus::InvalidGraph);
    assert!(g.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { coregql_graph_from_json(ptr::null(), &mut g) }, CoregqlStatus::NullArgument);

    let g = load(GRAPH);
    let mut r = ptr::null_mut();
    let q = c("query pgq = Missing");
    assert_eq!(unsafe { coregql_eval(g, q.as_ptr(), &mut r) }, CoregqlStatus::InvalidQuery);
    assert!(last_error().contains("Missing"));
    let q = c("query pgq = (");
    assert_eq!(unsafe { coregql_eval(g, q.as_ptr(), &mut r) }, CoregqlStatus::InvalidQuery);
    assert!(r.is_null());
    let q = c("rel F = match (x) columns (x); query pgq = F");
    assert_eq!(unsafe { coregql_eval(g, q.as_ptr(), &mut r) }, CoregqlStatus::Ok);
    assert_eq!(last_error(), "");
    unsafe {
        coregql_result_free(r);
        coregql_graph_free(g);
        coregql_graph_free(ptr::null_mut());
        coregql_result_free(ptr::null_mut());
        coregql_string_free(ptr::null_mut());
    }
}

#[test]
fn runs_datalog() {
    let path = coregql::graph::save_graph(&coregql::graph::dataless_path(4));
    let g = load(&path);
    let pow2 = c(coregql::datalog::POW2_PROGRAM);
    let mut b = false;
    assert_eq!(unsafe { coregql_datalog_boolean(g, pow2.as_ptr(), &mut b) }, CoregqlStatus::Ok);
    assert!(b);

    let tc = c(coregql::datalog::TC_PROGRAM);
    assert_eq!(unsafe { coregql_datalog_boolean(g, tc.as_ptr(), &mut b) }, CoregqlStatus::NotBoolean);
    let mut rows = ptr::null_mut();
    assert_eq!(unsafe { coregql_datalog_rows(g, tc.as_ptr(), &mut rows) }, CoregqlStatus::Ok);
    let text = unsafe { CStr::from_ptr(rows) }.to_str().unwrap().to_string();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().any(|l| l == "v0,v4"));
    unsafe {
        coregql_string_free(rows);
        coregql_graph_free(g);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coregql.h")).unwrap();
    for name in [
        "typedef struct CoregqlGraph CoregqlGraph",
        "typedef struct CoregqlResult CoregqlResult",
        "COREGQL_STATUS_OK = 0",
        "coregql_last_error",
        "coregql_graph_from_json",
        "coregql_eval",
        "coregql_result_csv",
        "coregql_result_free",
        "coregql_datalog_boolean",
        "coregql_datalog_rows",
        "coregql_string_free",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
