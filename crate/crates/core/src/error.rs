use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclic factor order {0} is invalid, every factor must be at least 2")]
    InvalidFactor(u64),

    #[error("malformed element {residues:?} for group with factors {factors:?}")]
    MalformedElement { residues: Vec<u64>, factors: Vec<u64> },

    #[error("{0}")]
    Domain(String),

    #[error("duplicate branch value {0}")]
    DuplicateLambda(String),

    #[error("branch point {index} is attached to the identity element")]
    TrivialBranchElement { index: usize },

    #[error("cover has no branch points")]
    NoBranchPoints,

    #[error("monodromy product of the branch elements is {sum:?}, expected the identity")]
    Monodromy { sum: Vec<u64> },

    #[error("branch elements generate a subgroup of order {generated} in a group of order {order}")]
    Disconnected { generated: u64, order: u64 },

    #[error("data mismatch: {0}")]
    Data(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("search cap of {cap} nodes exceeded")]
    SearchCapExceeded { cap: u64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI in its JSON reports.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::InvalidFactor(_) => "invalid-factor",
            Error::MalformedElement { .. } => "malformed-element",
            Error::Domain(_) => "domain",
            Error::DuplicateLambda(_) => "duplicate-lambda",
            Error::TrivialBranchElement { .. } => "trivial-branch-element",
            Error::NoBranchPoints => "no-branch-points",
            Error::Monodromy { .. } => "monodromy",
            Error::Disconnected { .. } => "disconnected",
            Error::Data(_) => "data",
            Error::NoSolution(_) => "no-solution",
            Error::SearchCapExceeded { .. } => "search-cap",
            Error::Internal(_) => "internal",
        }
    }
}
