use thiserror::Error;

/// Errors raised while building or reading molecular graphs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MolError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported SMILES feature `{feature}` at byte {offset}")]
    Unsupported { offset: usize, feature: String },
    #[error("unsupported element `{symbol}` at byte {offset}")]
    UnsupportedElement { offset: usize, symbol: String },
    #[error("valence violation at atom {atom}")]
    Valence { atom: usize },
    #[error("atom index {index} out of range for graph with {len} atoms")]
    AtomOutOfRange { index: usize, len: usize },
    #[error("invalid bond between {a} and {b}: {reason}")]
    InvalidBond { a: usize, b: usize, reason: &'static str },
    #[error("graph is not connected")]
    Disconnected,
}

/// Errors raised by fragmentation and annotation handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FragmentError {
    #[error(transparent)]
    Mol(#[from] MolError),
    #[error("bond ({a}, {b}) does not exist in molecule")]
    MissingBond { a: usize, b: usize },
    #[error("annotation for `{molecule}` is inconsistent: {reason}")]
    Inconsistent { molecule: String, reason: String },
    #[error("empty context between fragments {from} and {to}")]
    EmptyContext { from: usize, to: usize },
}

/// Errors raised while building, augmenting or loading motif graphs.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Mol(#[from] MolError),
    #[error("edge {edge} references missing motif {motif}")]
    DanglingEdge { edge: usize, motif: usize },
    #[error("edge {edge} certificate does not verify")]
    BadCertificate { edge: usize },
    #[error("unknown motif `{0}`")]
    UnknownMotif(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Errors raised by walk extraction, linearization and walk-string parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("walk syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown motif `{name}` at byte {offset}")]
    UnknownMotif { name: String, offset: usize },
    #[error("duplicate index {copy} of `{name}` exceeds available copies ({available})")]
    CopyOutOfRange { name: String, copy: usize, available: usize },
    #[error("fragment {fragment} matches no motif of the graph")]
    NoMotif { fragment: usize },
    #[error("no motif-graph edge realizes the cut between fragments {from} and {to}")]
    NoMatchingEdge { from: usize, to: usize },
    #[error("fragment graph has {extra} independent cycles; at most one can be dropped")]
    Cyclic { extra: usize },
    #[error("fragment graph is not connected")]
    Disconnected,
    #[error("replay failed: {0}")]
    Replay(String),
}

/// Errors raised by grammar training, generation and rule extraction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrammarError {
    #[error("walk references node {0} absent from the motif graph")]
    UnknownNode(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("empty mask")]
    EmptyMask,
    #[error("motif graph has no nodes")]
    EmptyGraph,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("transition not allowed: {0}")]
    Transition(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Errors raised by metrics and the property predictor.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("AUC is undefined when only one class is present")]
    SingleClass,
    #[error("need at least {0} samples")]
    TooFewSamples(usize),
    #[error("R² is undefined for constant targets")]
    ConstantTargets,
}
