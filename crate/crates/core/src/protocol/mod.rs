//! The three-round pairing protocol, run as `n` parallel sessions between one
//! sink and a batch of nodes over an adversary-controlled wireless channel.

use thiserror::Error;

use crate::crypto::CryptoError;

pub mod adversary;
pub mod batch;
pub mod message;
pub mod session;
pub mod transcript;

pub use adversary::{Action, AdversaryPolicy, Substitution};
pub use batch::{run_batch, BatchConfig, BatchRun, SessionFailure};
pub use message::{Payload, Round, SessionId, WirelessMessage};
pub use session::{
    Decision, MatchStatus, NodeSession, NodeState, SinkSession, SinkState, SyncStatus, VirtualTime,
    DEFAULT_DELTA_MS,
};
pub use transcript::{RecordKind, Transcript, TranscriptRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid state: expected {expected}, in {actual}")]
    InvalidState { expected: String, actual: String },
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("decision pending until {deadline} ms (now {now} ms)")]
    DecisionPending {
        deadline: VirtualTime,
        now: VirtualTime,
    },
    #[error("SAS length {0} outside 8..=32")]
    UnsupportedSasLength(usize),
    #[error("batch has no nodes")]
    EmptyBatch,
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}
