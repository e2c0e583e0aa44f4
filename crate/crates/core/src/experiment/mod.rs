//! Experiment harness: single configured runs, reference solutions and the
//! iteration-count tables.

mod config;
mod reference;
mod table;

pub use config::{Algorithm, Instance, ProblemKind, RunConfig, RunOutcome, Summary, SUMMARY_HEADER};
pub use reference::{
    compute_reference, ReferenceCache, ReferenceSolution, ReferenceSpec, CACHE_DIR_ENV, REFERENCE_MAX_ITER,
};
pub use table::{build_table, TableCell, TableSpec};
