use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("carrier has {0} elements; at most 64 are supported")]
    TooLarge(usize),
    #[error("order is not antisymmetric: `{0}` <= `{1}` <= `{0}`")]
    NotAntisymmetric(String, String),
    #[error("not a complete lattice: {0}")]
    NotALattice(String),
    #[error("not an implicative structure: {0}")]
    NotImplicative(String),
    #[error("implication table is incomplete: missing `{0} -> {1}`")]
    IncompleteTable(String, String),
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("map is not total: {0}")]
    NonTotalMap(String),
    #[error("value `{0}` is not in the separator")]
    OutsideSeparator(String),
    #[error("morphism is not tracked (best witness `{0}` lies outside the separator)")]
    Untracked(String),
    #[error("valuation is empty at index {0}")]
    EmptyValuation(usize),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("{0}")]
    Workspace(String),
}
