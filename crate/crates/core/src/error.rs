use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::channels::ValidationReport;
use crate::dynamics::ChannelClassification;

pub type Result<T> = std::result::Result<T, Error>;

/// Summary of a matrix handed to a failing eigensolver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub dim: usize,
    pub frobenius_norm: f64,
    pub max_abs_entry: f64,
    pub non_finite_entries: usize,
    pub hermitian_deviation: f64,
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dim={} frobenius={:e} max|entry|={:e} non-finite={} hermitian-deviation={:e}",
            self.dim,
            self.frobenius_norm,
            self.max_abs_entry,
            self.non_finite_entries,
            self.hermitian_deviation
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("expected {expected} entries for a {dim}x{dim} operator, got {found}")]
    EntryCount {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a channel needs at least one Kraus operator")]
    EmptyKraus,
    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("not a density matrix: min eigenvalue {min_eigenvalue:e}, trace {trace}")]
    NotDensity { min_eigenvalue: f64, trace: f64 },
    #[error("state vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("operator is not unitary (max deviation of U*U from id {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),
    #[error("unitaries do not form a group: {0}")]
    NotAGroup(String),
    #[error("parameter {name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("missing parameter {0}")]
    MissingParameter(&'static str),
    #[error("unknown channel family {0:?}")]
    UnknownFamily(String),
    #[error("map is not CPTP (trace-preservation residual {:e}, Choi min eigenvalue {:e})", .0.tp_residual, .0.choi_min_eigenvalue)]
    NotCptp(Box<ValidationReport>),
    #[error("eigensolver failed in {context}: {report}")]
    Eigensolver {
        context: &'static str,
        report: ConditionReport,
    },
    #[error("channel is {}, not mixing", .0.verdict.as_str())]
    NotMixing(Box<ChannelClassification>),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndex { index: usize, dim: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
