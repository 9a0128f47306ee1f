use thiserror::Error;

use crate::relation::TupleId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("skyline vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("k = {k} is outside the valid range {min}..={max}")]
    KOutOfRange { k: usize, min: usize, max: usize },

    #[error("tuple {id} has a non-finite skyline value at position {position}")]
    NonFinite { id: TupleId, position: usize },

    #[error("vector {index} has a non-finite value at position {position}")]
    NonFiniteVector { index: usize, position: usize },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("tuple {id}: {msg}")]
    InvalidTuple { id: TupleId, msg: String },

    #[error("duplicate tuple id {0}")]
    DuplicateId(TupleId),

    #[error("unknown tuple id {0}")]
    UnknownId(TupleId),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("tuple {0} is labeled NN; dominator sets exist only for SS and SN tuples")]
    NotACandidate(TupleId),

    #[error("unsupported join condition: {0}")]
    UnsupportedCondition(String),

    #[error("tuples {left} and {right} are not join compatible")]
    Incompatible { left: TupleId, right: TupleId },

    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error("{source_name}: line {line}: {msg}")]
    Csv {
        source_name: String,
        line: u64,
        msg: String,
    },

    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
