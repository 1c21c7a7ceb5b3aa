use alloc::string::String;

/// Errors raised while building or loading a noiseless protocol.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("protocol length must be positive")]
    Empty,
    #[error("alternating protocol has odd length {0}; the last message must be Bob's")]
    OddLength(usize),
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("table protocols support at most {max} bits, got {got}")]
    TableTooLarge { got: usize, max: usize },
    #[error("table key {key:?} is not shorter than the protocol length {n_bits}")]
    KeyTooLong { key: String, n_bits: usize },
}

/// A step function or codec was called outside its contract.
///
/// These never arise from channel noise; they mean the caller drove a state
/// machine in an order the scheme does not allow.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractViolation {
    #[error("an erasure mark is produced by the channel and cannot be sent")]
    SendErasure,
    #[error("{party} stepped after terminating")]
    AfterTermination { party: &'static str },
    #[error("{party} step out of order: {detail}")]
    OutOfOrder { party: &'static str, detail: &'static str },
    #[error("Alice heard silence while Bob was still active")]
    UnexpectedSilence,
    #[error("received word is not a codeword and the channel never substitutes")]
    NotACodeword,
    #[error("mixed silent and data slots in one block")]
    MixedBlock,
    #[error("wire slot {0} does not belong to this layer")]
    ForeignSlot(&'static str),
    #[error("transcript would exceed the protocol length")]
    TranscriptOverflow,
}
