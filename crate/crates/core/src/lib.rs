//! Reference evaluator for Core GQL and Core PGQ.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: property graphs, paths, JSON I/O and generators for the
//!   graph families used by the experiments (G(n,p), dataless paths,
//!   annotated paths).
//! * [`pattern`]: the core path-pattern language: AST, concrete syntax,
//!   free variables, the one-way check and the `+`-normal form.
//! * [`patmatch`]: pattern evaluation over the endpoint abstraction, a
//!   brute-force path-enumeration oracle, and the pattern-to-automaton
//!   construction for variable-free patterns.
//! * [`relation`]: named-perspective relations with set semantics.
//! * [`relalg`] and [`lcra`]: relational algebra and linear-composition
//!   relational algebra, with translations in both directions.
//! * [`query`]: Core PGQ (`RA(Pat)`) and Core GQL (`LCRA(Pat)`) query files.
//! * [`datalog`]: a small positive Datalog engine (naive and semi-naive).
//! * [`experiments`]: the increasing-edge-values benchmark and its oracles.
//! * [`corpus`]: seeded generators used by the tests and the CLI.

pub mod corpus;
pub mod datalog;
pub mod experiments;
pub mod graph;
pub mod lcra;
pub mod patmatch;
pub mod pattern;
pub mod query;
pub mod relalg;
pub mod relation;
mod syntax;

pub use graph::{Const, EdgeId, NodeId, Path, PropertyGraph, Value};
pub use pattern::{Condition, OutputItem, OutputSpec, Pattern};
pub use relation::Relation;
pub use syntax::SyntaxError;
