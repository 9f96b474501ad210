//! Finite-scale historic forcing.
//!
//! Conditions are finite trees of amalgams over atomic generators. Each one
//! carries a finitely presented Boolean algebra, given by a valuation table
//! over its support, together with the history tables that record how every
//! generator entered the construction. The crate builds conditions, compares
//! them, analyses their structure, and checks their structural properties
//! against brute-force oracles.

pub mod algebra;
pub mod checks;
pub mod condition;
pub mod delta;
pub mod error;
pub mod index;
pub mod order;
pub mod signatures;
pub mod term;
pub mod workbench;

pub use algebra::{Assignment, Chain, RowSet, ValuationTable};
pub use checks::{run_suite, CheckReport, SuiteConfig, Verdict};
pub use condition::{Amalgam, Condition, GTag, HistoryValue, Part, Shape, Width};
pub use error::{Clause, CollapseItem, Error, Result};
pub use index::{GenIndex, IndexSet, OrderMap};
pub use order::{iso_map, leq, leq_pr, transform, transport};
pub use term::{sigma_maj, BoolTerm, TermInstance};
