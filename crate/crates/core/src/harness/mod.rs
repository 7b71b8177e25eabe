//! Runs attack scenarios against validator policies or a resolver you
//! operate, classifies what the client got back, and reports the matrix.

mod fixture;
mod probe;
mod report;

use thiserror::Error;

use crate::mutator::MutationError;
use crate::zone::ZoneError;

pub use fixture::{default_seed, Fixture, DEFAULT_SEED, SEED_ENV};
pub use probe::{classify, run_scenario, Classification, Evidence, ProbeOptions, ProbeOutcome, ProbeTarget};
pub use report::{
    parse_report, policy_targets, render_report, run_matrix, MatrixReport, ReportFormat, ReportMetadata, SCHEMA_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("fixture: {0}")]
    Zone(#[from] ZoneError),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("{0}")]
    EthicsGate(String),
    #[error("a matrix needs at least one scenario and one target")]
    EmptyMatrix,
    #[error("report: {0}")]
    Report(String),
}
