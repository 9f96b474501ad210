use std::fmt;

/// Which amalgamation clause a candidate tuple violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Alpha => "(alpha)",
            Clause::Beta => "(beta)",
            Clause::Gamma => "(gamma)",
            Clause::Delta => "(delta)",
        })
    }
}

/// Precondition items of the chain-collapse argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseItem {
    /// Closedness, covering and equal signatures.
    I,
    /// Order isomorphism of the level sets is the identity on their overlap.
    II,
    /// The generator isomorphism carries `w0` onto `w1`.
    III,
}

impl fmt::Display for CollapseItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CollapseItem::I => "(i)",
            CollapseItem::II => "(ii)",
            CollapseItem::III => "(iii)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("clause {clause} violated: {detail}")]
    Clause { clause: Clause, detail: String },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("search failed: {0}")]
    SearchFailure(String),
    #[error("precondition {item} violated: {detail}")]
    Precondition { item: CollapseItem, detail: String },
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn clause(clause: Clause, detail: impl Into<String>) -> Error {
    Error::Clause {
        clause,
        detail: detail.into(),
    }
}
