//! Condensed-semantics composition: representative sampling, table
//! generation, verification, and the table text format.

pub mod sampling;
pub mod table;

pub use sampling::{representatives, SamplingPlan};
pub use table::{CompositionTable, TableMeta, VerifyReport, Violation};
