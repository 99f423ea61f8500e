use thiserror::Error;

/// Position of a syntax error, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DtlError {
    #[error("invalid signature: {0}")]
    Signature(String),

    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Position, msg: String },

    #[error("undeclared agent `{0}`")]
    UnknownAgent(String),

    #[error("undeclared proposition `{0}`")]
    UnknownProp(String),

    #[error("proposition `{prop}` belongs to agent `{owner}` but is used in the scope of agent `{scope}`")]
    WrongScope {
        prop: String,
        owner: String,
        scope: String,
    },

    #[error("word is not fair: agent(s) {} never participate in the loop", .0.join(", "))]
    UnfairWord(Vec<String>),

    #[error("malformed word: {0}")]
    MalformedWord(String),

    #[error("malformed structure: {0}")]
    MalformedStructure(String),

    #[error("run does not match word: {0}")]
    MisalignedRun(String),

    #[error("labeling from run contradicts the word at event {event} for agent `{agent}`")]
    LabelMismatch { event: usize, agent: String },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("alphabet overlap: {0}")]
    AlphabetOverlap(String),

    #[error("search aborted: {0}")]
    ResourceExhausted(String),

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("{0}")]
    Format(String),
}

pub type Result<T, E = DtlError> = std::result::Result<T, E>;
