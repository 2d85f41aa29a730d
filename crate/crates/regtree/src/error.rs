use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent input (documents, expressions, arguments).
    #[error("input error: {0}")]
    Input(String),
    #[error("rank mismatch: expected {expected}, found {found}")]
    Rank { expected: usize, found: usize },
    #[error("not a system: {0}")]
    NotSystem(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A finite presentation whose tables contradict each other.
    #[error("inconsistent presentation: {0}")]
    Presentation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn rank_check(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Rank { expected, found })
    }
}
