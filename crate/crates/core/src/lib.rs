//! k-dominant skyline join queries (KSJQ) over two base relations.
//!
//! The crate is organised bottom-up:
//!
//! * [`dominance`]: k-dominance tests and a baseline k-dominant skyline.
//! * [`relation`]: schemas, tuples, relations and their join-key groups.
//! * [`partition`]: SS/SN/NN classification, augmentation, dominator sets
//!   and the unique value property check.
//! * [`engine`]: join construction and the naive, grouping, dominator-based
//!   and Cartesian query algorithms.
//! * [`kfinder`]: selecting `k` from a cardinality threshold.
//! * [`data`]: synthetic generators, CSV I/O and the flight fixture.
//! * [`oracle`]: brute-force reference implementations used by tests.
//! * [`bench`]: grid sweeps emitting timing breakdown tables.

pub mod bench;
pub mod data;
pub mod dominance;
pub mod engine;
mod error;
pub mod kfinder;
pub mod oracle;
pub mod partition;
pub mod relation;

pub use dominance::{k_dominant_skyline, k_dominates, DominanceCount};
pub use engine::{
    check_target, join_pair, ksjq, ksjq_cartesian, ksjq_dominator, ksjq_grouping, ksjq_naive,
    Algorithm, JoinedTuple, QueryConfig, SkylineAnswer, Timings,
};
pub use error::{Error, Result};
pub use kfinder::{
    count_bounds, find_k_at_most, find_k_binary, find_k_naive, find_k_range, KSearchResult,
    SearchMethod,
};
pub use partition::{Label, PartitionLabels, Side};
pub use relation::{AggFn, JoinCondition, JoinValue, Relation, Schema, Tuple, TupleId};
