use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distance {0}: must be odd and >= 3")]
    InvalidDistance(usize),
    #[error("patches in a stack must share distance and kind")]
    MixedStack,
    #[error("unsupported gate {0} on a stabilizer tableau")]
    UnsupportedGate(String),
    #[error("qubit index {0} out of range")]
    QubitOutOfRange(usize),
    #[error("gate targets must be distinct")]
    DuplicateTargets,
    #[error("forced outcome contradicts a deterministic measurement")]
    ForcedOutcome,
    #[error("codespace violation: {0}")]
    Codespace(String),
    #[error("image of {0} is not a logical operator")]
    NotLogical(String),
    #[error("alternation length {got}, expected {expected}")]
    AlternationLength { got: usize, expected: usize },
    #[error("patch indices must differ")]
    SamePatch,
    #[error("port is occupied")]
    PortOccupied,
    #[error("token {0} is not on the loop")]
    UnknownToken(usize),
    #[error("target order is not a permutation of the loop occupants")]
    NotPermutation,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("unknown patch id {0}")]
    UnknownPatch(u32),
    #[error("layout does not fit: {0}")]
    Overflow(String),
    #[error("fixture parse error: {0}")]
    Fixture(String),
    #[error("factory branch {record:?} fidelity {fidelity}")]
    FactoryBranch { record: Vec<u8>, fidelity: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
