//! Node (device A) and sink (device B) state machines.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::{self, Commitment, CryptoError, Decommitment, KeyPair, SasValue, SALT_LEN};

use super::message::{Payload, Round, SessionId, WirelessMessage};
use super::ProtocolError;

/// Virtual time in milliseconds.
pub type VirtualTime = u64;

/// Default-acceptance window: two minutes.
pub const DEFAULT_DELTA_MS: VirtualTime = 120_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeState {
    Idle,
    Committed,
    AwaitingStart,
    SasEmitted,
    AwaitingDecision,
    Accepted,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accepted,
    Rejected,
}

fn random_bits(rng: &mut ChaCha8Rng, k: usize) -> BitString {
    (0..k).map(|_| rng.gen::<bool>()).collect()
}

fn expect_state<S: std::fmt::Debug + PartialEq>(
    actual: S,
    expected: S,
) -> Result<(), ProtocolError> {
    if actual == expected {
        Ok(())
    } else {
        Err(ProtocolError::InvalidState {
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
        })
    }
}

fn check_addressed(
    id: SessionId,
    msg: &WirelessMessage,
    round: Round,
) -> Result<(), ProtocolError> {
    if msg.round() != round {
        return Err(ProtocolError::MalformedMessage(format!(
            "expected round {}, got round {}",
            round.number(),
            msg.round().number()
        )));
    }
    if msg.session_id != id {
        return Err(ProtocolError::MalformedMessage(format!(
            "message for session {} delivered to {id}",
            msg.session_id
        )));
    }
    Ok(())
}

/// Sensor node side of one pairing instance.
#[derive(Debug, Clone)]
pub struct NodeSession {
    id: SessionId,
    k: usize,
    state: NodeState,
    keys: KeyPair,
    rng: ChaCha8Rng,
    preset_nonce: Option<BitString>,
    r_a: Option<BitString>,
    decommitment: Option<Decommitment>,
    peer_pk: Option<Vec<u8>>,
    sas: Option<SasValue>,
    delta_ms: VirtualTime,
    deadline: Option<VirtualTime>,
    link_key: Option<[u8; 32]>,
}

impl NodeSession {
    pub fn new(id: SessionId, k: usize, keys: KeyPair, rng: ChaCha8Rng) -> Self {
        Self {
            id,
            k,
            state: NodeState::Idle,
            keys,
            rng,
            preset_nonce: None,
            r_a: None,
            decommitment: None,
            peer_pk: None,
            sas: None,
            delta_ms: DEFAULT_DELTA_MS,
            deadline: None,
            link_key: None,
        }
    }

    /// Forces the nonce picked in round one. Used by exhaustive enumeration.
    pub fn with_nonce(mut self, r_a: BitString) -> Self {
        self.preset_nonce = Some(r_a);
        self
    }

    pub fn with_delta(mut self, delta_ms: VirtualTime) -> Self {
        self.delta_ms = delta_ms;
        self
    }

    pub fn id(&self) -> SessionId {
        self.id
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn state(&self) -> NodeState {
        self.state
    }
    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }
    pub fn r_a(&self) -> Option<&BitString> {
        self.r_a.as_ref()
    }
    pub fn decommitment(&self) -> Option<&Decommitment> {
        self.decommitment.as_ref()
    }
    pub fn sas(&self) -> Option<&SasValue> {
        self.sas.as_ref()
    }
    pub fn peer_pk(&self) -> Option<&[u8]> {
        self.peer_pk.as_deref()
    }
    pub fn deadline(&self) -> Option<VirtualTime> {
        self.deadline
    }
    pub fn link_key(&self) -> Option<&[u8; 32]> {
        self.link_key.as_ref()
    }

    /// Picks `R_A`, commits to it and emits `(pk_A, c_A)`. The Δ window
    /// starts here.
    pub fn node_round1(&mut self, now: VirtualTime) -> Result<WirelessMessage, ProtocolError> {
        expect_state(self.state, NodeState::Idle)?;
        let r_a = match self.preset_nonce.take() {
            Some(r) => r,
            None => random_bits(&mut self.rng, self.k),
        };
        if r_a.len() != self.k {
            return Err(CryptoError::LengthMismatch {
                expected: self.k,
                actual: r_a.len(),
            }
            .into());
        }
        let salt: [u8; SALT_LEN] = self.rng.gen();
        let (c_a, d_a) = crypto::commit(&self.keys.public_key, &r_a, salt);
        self.r_a = Some(r_a);
        self.decommitment = Some(d_a);
        self.deadline = Some(now + self.delta_ms);
        self.state = NodeState::Committed;
        Ok(WirelessMessage {
            session_id: self.id,
            payload: Payload::Commit {
                pk_a: self.keys.public_key.clone(),
                c_a,
            },
        })
    }

    /// Consumes `(pk_B, R_B)`, reveals `d_A` and computes the SAS to display.
    pub fn node_round3(
        &mut self,
        msg: &WirelessMessage,
    ) -> Result<(WirelessMessage, SasValue), ProtocolError> {
        expect_state(self.state, NodeState::Committed)?;
        check_addressed(self.id, msg, Round::Two)?;
        let Payload::Challenge { pk_b, r_b } = &msg.payload else {
            unreachable!("round checked above");
        };
        if r_b.len() != self.k {
            return Err(CryptoError::LengthMismatch {
                expected: self.k,
                actual: r_b.len(),
            }
            .into());
        }
        let r_a = self.r_a.as_ref().expect("set in round one");
        let sas = crypto::compute_sas(r_b, r_a, pk_b)?;
        self.peer_pk = Some(pk_b.clone());
        self.sas = Some(sas.clone());
        self.state = NodeState::AwaitingStart;
        let d_a = self.decommitment.clone().expect("set in round one");
        Ok((
            WirelessMessage {
                session_id: self.id,
                payload: Payload::Reveal { d_a },
            },
            sas,
        ))
    }

    /// "Start Transmission" received: the node begins blinking its SAS.
    pub fn start_transmission(&mut self) -> Result<SasValue, ProtocolError> {
        expect_state(self.state, NodeState::AwaitingStart)?;
        self.state = NodeState::SasEmitted;
        Ok(self.sas.clone().expect("set in round three"))
    }

    pub fn finish_transmission(&mut self) -> Result<(), ProtocolError> {
        expect_state(self.state, NodeState::SasEmitted)?;
        self.state = NodeState::AwaitingDecision;
        Ok(())
    }

    /// Applies the administrator's action. A turn-off before the deadline
    /// rejects; without one the node accepts once `now` reaches the
    /// deadline. A turn-off at or after the deadline comes too late.
    pub fn finalize(
        &mut self,
        admin_turnoff: bool,
        now: VirtualTime,
    ) -> Result<Decision, ProtocolError> {
        expect_state(self.state, NodeState::AwaitingDecision)?;
        let deadline = self.deadline.expect("set in round one");
        if admin_turnoff && now < deadline {
            self.state = NodeState::Rejected;
            return Ok(Decision::Rejected);
        }
        if now < deadline {
            return Err(ProtocolError::DecisionPending { deadline, now });
        }
        let peer = self.peer_pk.as_ref().expect("set in round three");
        self.link_key = Some(crypto::derive_link_key(&self.keys.private_key, peer)?);
        self.state = NodeState::Accepted;
        Ok(Decision::Accepted)
    }

    /// Terminates the session after a wireless failure.
    pub fn abort(&mut self) {
        if !matches!(self.state, NodeState::Accepted | NodeState::Rejected) {
            self.state = NodeState::Rejected;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SinkState {
    Idle,
    AwaitingReveal,
    Opened,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Free,
    Used,
    Mismatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncStatus {
    Unknown,
    Ok,
    Error,
}

/// Sink side of one pairing instance. The sink uses one permanent key pair
/// across all sessions.
#[derive(Debug, Clone)]
pub struct SinkSession {
    id: SessionId,
    k: usize,
    state: SinkState,
    keys: KeyPair,
    rng: ChaCha8Rng,
    preset_nonce: Option<BitString>,
    r_b: Option<BitString>,
    peer_pk: Option<Vec<u8>>,
    peer_commitment: Option<Commitment>,
    expected_sas: Option<SasValue>,
    match_status: MatchStatus,
    sync_status: SyncStatus,
}

impl SinkSession {
    pub fn new(id: SessionId, k: usize, keys: KeyPair, rng: ChaCha8Rng) -> Self {
        Self {
            id,
            k,
            state: SinkState::Idle,
            keys,
            rng,
            preset_nonce: None,
            r_b: None,
            peer_pk: None,
            peer_commitment: None,
            expected_sas: None,
            match_status: MatchStatus::Free,
            sync_status: SyncStatus::Unknown,
        }
    }

    pub fn with_nonce(mut self, r_b: BitString) -> Self {
        self.preset_nonce = Some(r_b);
        self
    }

    pub fn id(&self) -> SessionId {
        self.id
    }
    pub fn state(&self) -> SinkState {
        self.state
    }
    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }
    pub fn r_b(&self) -> Option<&BitString> {
        self.r_b.as_ref()
    }
    pub fn peer_pk(&self) -> Option<&[u8]> {
        self.peer_pk.as_deref()
    }
    pub fn peer_commitment(&self) -> Option<&Commitment> {
        self.peer_commitment.as_ref()
    }
    pub fn expected_sas(&self) -> Option<&SasValue> {
        self.expected_sas.as_ref()
    }
    pub fn match_status(&self) -> MatchStatus {
        self.match_status
    }
    pub fn sync_status(&self) -> SyncStatus {
        self.sync_status
    }

    /// Stores `(pk_A, c_A)` and answers with `(pk_B, R_B)`.
    pub fn sink_round2(&mut self, msg: &WirelessMessage) -> Result<WirelessMessage, ProtocolError> {
        check_addressed(self.id, msg, Round::One)?;
        expect_state(self.state, SinkState::Idle)?;
        let Payload::Commit { pk_a, c_a } = &msg.payload else {
            unreachable!("round checked above");
        };
        let r_b = match self.preset_nonce.take() {
            Some(r) => r,
            None => random_bits(&mut self.rng, self.k),
        };
        self.peer_pk = Some(pk_a.clone());
        self.peer_commitment = Some(*c_a);
        self.r_b = Some(r_b.clone());
        self.state = SinkState::AwaitingReveal;
        Ok(WirelessMessage {
            session_id: self.id,
            payload: Payload::Challenge {
                pk_b: self.keys.public_key.clone(),
                r_b,
            },
        })
    }

    /// Opens `c_A` with the revealed `d_A` and computes the SAS this session
    /// should produce, `R_B xor H_{R_A}(pk_B)`. A failed opening marks the
    /// session failed for good.
    pub fn sink_expected_sas(&mut self, msg: &WirelessMessage) -> Result<SasValue, ProtocolError> {
        check_addressed(self.id, msg, Round::Three)?;
        expect_state(self.state, SinkState::AwaitingReveal)?;
        let Payload::Reveal { d_a } = &msg.payload else {
            unreachable!("round checked above");
        };
        let pk_a = self.peer_pk.as_ref().expect("set in round two");
        let c_a = self.peer_commitment.as_ref().expect("set in round two");
        let r_a = match crypto::open(pk_a, c_a, d_a) {
            Ok(r) => r,
            Err(e) => {
                self.state = SinkState::Failed;
                return Err(e.into());
            }
        };
        let r_b = self.r_b.as_ref().expect("set in round two");
        let sas = match crypto::compute_sas(r_b, &r_a, &self.keys.public_key) {
            Ok(s) => s,
            Err(e) => {
                self.state = SinkState::Failed;
                return Err(e.into());
            }
        };
        self.expected_sas = Some(sas.clone());
        self.state = SinkState::Opened;
        Ok(sas)
    }

    /// Records the outcome of SAS matching. Only a `Free` value may move, and
    /// only once.
    pub fn set_match_status(&mut self, status: MatchStatus) -> Result<(), ProtocolError> {
        if self.match_status != MatchStatus::Free {
            return Err(ProtocolError::InvalidState {
                expected: "Free".into(),
                actual: format!("{:?}", self.match_status),
            });
        }
        self.match_status = status;
        Ok(())
    }

    pub fn set_sync_status(&mut self, status: SyncStatus) {
        self.sync_status = status;
    }

    /// Sink-side acceptance of `pk_A`: link key if the session's SAS was used
    /// by a display whose sync pattern was correct.
    pub fn accept(&self) -> Option<[u8; 32]> {
        if self.match_status == MatchStatus::Used && self.sync_status == SyncStatus::Ok {
            crypto::derive_link_key(&self.keys.private_key, self.peer_pk.as_ref()?).ok()
        } else {
            None
        }
    }

    pub fn fail(&mut self) {
        self.state = SinkState::Failed;
    }
}
