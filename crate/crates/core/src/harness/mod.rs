//! Batch-level simulation: matching, scenarios, fault injection, attack
//! experiments, estimates and reports.

pub mod attack;
pub mod estimate;
pub mod faults;
pub mod matching;
pub mod report;
pub mod scenario;

use thiserror::Error;

use crate::decoder::DecoderError;
use crate::encoder::EncoderError;
use crate::protocol::ProtocolError;

pub use attack::{
    attack_experiment, exhaustive_attack, wilson_interval, AttackResult, AttackStrategy,
    ExhaustiveAttack,
};
pub use estimate::{
    one_significant, power_estimate, timing_estimate, PowerEstimate, DEFAULT_BATTERY_J,
};
pub use faults::FaultSpec;
pub use matching::{match_sas, MatchOutcome};
pub use report::{render_overlay, render_report, render_table};
pub use scenario::{
    run_scenario, BatchReport, BatchSummary, NodeReport, ScenarioConfig, ScenarioOutcome, Tallies,
    REPORT_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("SAS length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error("batch aborted after {attempts} LED attempt(s): {cause}")]
    BatchAborted {
        attempts: usize,
        cause: DecoderError,
    },
    #[error("camera stopped delivering frames at frame {frame}")]
    CaptureLost { frame: usize },
}
