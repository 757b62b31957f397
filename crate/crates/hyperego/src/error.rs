use crate::NodeId;
use thiserror::Error;

/// Errors produced by dataset ingestion, ego-network extraction, and the
/// measure / learning / search operations built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}:{line}: cannot parse `{token}` as an integer")]
    Parse {
        file: String,
        line: usize,
        token: String,
    },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("structural mismatch: {left_name} has {left} entries but {right_name} has {right}")]
    LengthMismatch {
        left_name: String,
        left: usize,
        right_name: String,
        right: usize,
    },

    #[error("empty dataset: {0} contains no entries")]
    EmptyDataset(String),

    #[error("simplex sequence is not sorted by (real_time, source_index)")]
    UnsortedInput,

    #[error("node {0} does not occur in any non-trivial simplex of the dataset")]
    UnknownEgo(NodeId),

    #[error("node {alter} is not an alter of ego {ego}")]
    NotAnAlter { ego: NodeId, alter: NodeId },

    #[error("measure undefined: ordering has {0} simplices but at least 2 are required")]
    UndefinedMeasure(usize),

    #[error("node {0} does not appear in the ordering")]
    EgoAbsent(NodeId),

    #[error("alter-network of size {0} is too small: thirds analysis requires size >= {1}")]
    TooSmallForThirds(usize, usize),

    #[error("cannot build training examples from an empty ego collection")]
    EmptyTrainingInput,

    #[error("degenerate training set: all examples carry label {0}")]
    SingleClass(u8),

    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cross-validation needs at least {folds} egos, got {egos}")]
    TooFewEgos { egos: usize, folds: usize },

    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),

    #[error("orderings are not permutations of the same simplex multiset")]
    MultisetMismatch,

    #[error("no comparable simplex pairs: every pair is tied in true time")]
    AllPairsTied,

    #[error("permutation is not a bijection over 0..{0}")]
    NotAPermutation(usize),

    #[error("instance has {m} simplices, over the enumeration cap of {cap}")]
    OverEnumerationCap { m: usize, cap: usize },

    #[error("empty reconstruction sample")]
    EmptySample,

    #[error("model file {file}: {msg}")]
    ModelFormat { file: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
