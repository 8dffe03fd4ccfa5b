//! Performance evaluation of processor-sharing systems under balanced
//! fairness in polymatroid capacity sets.
//!
//! The crate is organized around the objects of that theory:
//!
//! - [`rank`]: polymatroid rank functions, their axioms, and the builders
//!   for tree data networks and computer clusters, plus exchangeability
//!   analysis and cardinality (per-part) rank functions.
//! - [`exact`]: exact stationary analysis by subset recursion
//!   (exponential in the number of queues).
//! - [`polysym`]: polynomial-time evaluation on the part-cardinality grid
//!   for poly-symmetric capacity sets, with the access-tree and grid-cluster
//!   applications.
//! - [`bounds`]: sandwich bounds bracketing a nearly poly-symmetric system
//!   between two scaled poly-symmetric references.
//! - [`random_cluster`]: random server assignment, its mean rank, and
//!   empirical concentration experiments.
//! - [`oracle`]: independent verification backends (balance function,
//!   truncated state-space solve, discrete-event simulation).
//! - [`scenario`] / [`output`]: the scenario file format and the CSV/SVG
//!   artifact writers used by the `polyfair` binary.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod numeric;
pub mod oracle;
pub mod output;
pub mod polysym;
pub mod random_cluster;
pub mod rank;
pub mod scenario;
pub mod subset;

pub use error::{Error, Result};
pub use subset::Subset;
