//! Crate-wide error type.

use crate::subset::Subset;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An exhaustive operation was asked to scan more subsets than its guard allows.
    #[error("{operation}: {actual} queues is too large for exhaustive evaluation (limit {limit})")]
    TooLarge {
        operation: &'static str,
        limit: usize,
        actual: usize,
    },

    /// Two link sets of a tree description cross (neither nested nor disjoint).
    #[error("link sets {a} and {b} cross: a tree requires nested or disjoint links")]
    NotLaminar { a: Subset, b: Subset },

    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },

    /// The rank function is not constant on some profile class.
    #[error("not poly-symmetric: sets {a} and {b} share a profile but rank {rank_a} != {rank_b}")]
    NotPolySymmetric {
        a: Subset,
        b: Subset,
        rank_a: f64,
        rank_b: f64,
    },

    /// Two tree links map to the same cardinality profile with different capacities.
    #[error("ambiguous profile {profile:?}: links with capacities {a} and {b} share it")]
    AmbiguousProfile { profile: Vec<usize>, a: f64, b: f64 },

    /// The workload is not in the interior of the capacity set.
    #[error("unstable: load exceeds capacity on {subset} by {excess:.6e}")]
    Unstable { subset: Subset, excess: f64 },

    /// Grid variant of [`Error::Unstable`].
    #[error("unstable: load exceeds capacity at profile {profile:?} by {excess:.6e}")]
    UnstableProfile { profile: Vec<usize>, excess: f64 },

    /// An unnormalized value left the representable range.
    #[error("numeric range exceeded in {operation}: {detail}")]
    Range {
        operation: &'static str,
        detail: String,
    },

    /// A consistency condition that should hold by construction failed.
    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
        Error::InvalidInput {
            what,
            reason: reason.into(),
        }
    }

    /// Stable machine-readable code for the CLI error record and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooLarge { .. } => "too-large",
            Error::NotLaminar { .. } => "not-laminar",
            Error::InvalidInput { .. } => "invalid-input",
            Error::NotPolySymmetric { .. } => "not-poly-symmetric",
            Error::AmbiguousProfile { .. } => "ambiguous-profile",
            Error::Unstable { .. } | Error::UnstableProfile { .. } => "unstable",
            Error::Range { .. } => "range",
            Error::Inconsistent(_) => "inconsistent",
            Error::Scenario(_) => "scenario",
            Error::Io(_) => "io",
        }
    }
}
