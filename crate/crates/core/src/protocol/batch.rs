//! Discrete-event runner for rounds one to three of a whole batch.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::crypto::{self, CryptoError, KeyPair, SasValue, MAX_SAS_BITS, MIN_SAS_BITS};
use crate::seed::{derive_seed, rng_for};

use super::adversary::{Action, AdversaryPolicy};
use super::message::{Round, SessionId, WirelessMessage};
use super::session::{
    NodeSession, NodeState, SinkSession, SinkState, VirtualTime, DEFAULT_DELTA_MS,
};
use super::transcript::{RecordKind, Transcript};
use super::ProtocolError;

pub const DEFAULT_HOLD_TIME_MS: VirtualTime = 250;
pub const DEFAULT_LATENCY_MS: VirtualTime = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub n: usize,
    pub k: usize,
    pub hold_time_ms: VirtualTime,
    pub delta_ms: VirtualTime,
    pub latency_ms: VirtualTime,
}

impl BatchConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            hold_time_ms: DEFAULT_HOLD_TIME_MS,
            delta_ms: DEFAULT_DELTA_MS,
            latency_ms: DEFAULT_LATENCY_MS,
        }
    }

    /// A party waiting on the wireless channel gives up after ten hold times.
    pub fn timeout_ms(&self) -> VirtualTime {
        10 * self.hold_time_ms
    }
}

/// Why a session left the protocol before the LED phase could succeed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionFailure {
    /// The node never received round two.
    NodeTimeout,
    /// The sink never received round one or round three.
    SinkTimeout,
    CommitmentMismatch,
    LengthMismatch,
    Malformed(String),
}

/// All sessions of one batch after the wireless phase.
#[derive(Debug, Clone)]
pub struct BatchRun {
    pub config: BatchConfig,
    pub sink_keys: KeyPair,
    pub nodes: Vec<NodeSession>,
    pub sinks: Vec<SinkSession>,
    pub failures: BTreeMap<SessionId, SessionFailure>,
    pub clock: VirtualTime,
    pub transcript: Transcript,
}

impl BatchRun {
    pub fn ids(&self) -> impl Iterator<Item = SessionId> + '_ {
        self.nodes.iter().map(|n| n.id())
    }

    /// Nodes that finished round three and will blink their SAS.
    pub fn displaying(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].state() == NodeState::AwaitingStart)
            .collect()
    }

    /// The sink's computed SAS list, one entry per successfully opened session.
    pub fn expected_sas(&self) -> Vec<(SessionId, SasValue)> {
        self.sinks
            .iter()
            .filter_map(|s| s.expected_sas().map(|v| (s.id(), v.clone())))
            .collect()
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: VirtualTime,
    seq: u64,
    intercepted: bool,
    bytes: Vec<u8>,
}

struct Queue {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl Queue {
    fn push(&mut self, time: VirtualTime, intercepted: bool, msg: &WirelessMessage) {
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time,
            seq: self.seq,
            intercepted,
            bytes: msg.encode(),
        }));
    }
}

fn classify(err: &ProtocolError) -> Option<SessionFailure> {
    match err {
        ProtocolError::InvalidState { .. } => None,
        ProtocolError::Crypto(CryptoError::CommitmentMismatch) => {
            Some(SessionFailure::CommitmentMismatch)
        }
        ProtocolError::Crypto(CryptoError::LengthMismatch { .. }) => {
            Some(SessionFailure::LengthMismatch)
        }
        other => Some(SessionFailure::Malformed(other.to_string())),
    }
}

/// Runs rounds one to three of every session under `adversary`. Session `i`
/// has id `i`; node `i` derives its key pair and nonces from `(seed, i)`, the
/// sink uses a single permanent key pair. Failures stay local to their
/// session.
pub fn run_batch(
    config: &BatchConfig,
    adversary: &AdversaryPolicy,
    seed: u64,
) -> Result<BatchRun, ProtocolError> {
    if config.n == 0 {
        return Err(ProtocolError::EmptyBatch);
    }
    if !(MIN_SAS_BITS..=MAX_SAS_BITS).contains(&config.k) {
        return Err(ProtocolError::UnsupportedSasLength(config.k));
    }
    let n = config.n;
    let timeout = config.timeout_ms();
    let sink_keys = crypto::keygen(&derive_seed(seed, "sink-key", 0));
    let mut nodes: Vec<NodeSession> = (0..n)
        .map(|i| {
            NodeSession::new(
                SessionId(i as u32),
                config.k,
                crypto::keygen(&derive_seed(seed, "node-key", i as u64)),
                rng_for(seed, "node-rng", i as u64),
            )
            .with_delta(config.delta_ms)
        })
        .collect();
    let mut sinks: Vec<SinkSession> = (0..n)
        .map(|i| {
            SinkSession::new(
                SessionId(i as u32),
                config.k,
                sink_keys.clone(),
                rng_for(seed, "sink-rng", i as u64),
            )
        })
        .collect();

    let mut transcript = Transcript::default();
    let mut sent_log: HashMap<(SessionId, Round), WirelessMessage> = HashMap::new();
    let mut failures = BTreeMap::new();
    let mut queue = Queue {
        heap: BinaryHeap::new(),
        seq: 0,
    };
    // Deadline by which each side must hear from the other; None once the
    // side has nothing more to wait for on the wireless channel.
    let mut node_wait: Vec<Option<VirtualTime>> = vec![Some(timeout); n];
    let mut sink_wait: Vec<Option<VirtualTime>> = vec![Some(timeout); n];
    let mut clock: VirtualTime = 0;

    for node in nodes.iter_mut() {
        let m1 = node.node_round1(0)?;
        transcript.push(0, RecordKind::Sent, m1.clone());
        sent_log.insert((m1.session_id, Round::One), m1.clone());
        queue.push(config.latency_ms, false, &m1);
    }

    while let Some(Reverse(ev)) = queue.heap.pop() {
        let now = ev.time;
        let msg = WirelessMessage::decode(&ev.bytes).expect("queue holds encoded messages");
        let round = msg.round();
        let mut deliver = vec![];
        if ev.intercepted {
            deliver.push(msg);
        } else {
            match adversary.action(msg.session_id, round) {
                Action::Pass => deliver.push(msg),
                Action::Drop => {}
                Action::Delay(d) => queue.push(now + d, true, &msg),
                Action::Replay { from } => {
                    if let Some(src) = sent_log.get(&(*from, round)) {
                        deliver.push(WirelessMessage {
                            session_id: msg.session_id,
                            payload: src.payload.clone(),
                        });
                    }
                }
                Action::Duplicate => {
                    queue.push(now + config.latency_ms, true, &msg);
                    deliver.push(msg);
                }
                Action::Substitute(s) => deliver.push(s.apply(&msg)),
            }
        }

        for msg in deliver {
            let i = msg.session_id.0 as usize;
            if i >= n {
                continue;
            }
            let waiting = if round.to_sink() {
                sink_wait[i]
            } else {
                node_wait[i]
            };
            match waiting {
                Some(deadline) if now <= deadline => {}
                _ => continue,
            }
            clock = clock.max(now);
            transcript.push(now, RecordKind::Delivered, msg.clone());
            match round {
                Round::One => match sinks[i].sink_round2(&msg) {
                    Ok(m2) => {
                        transcript.push(now, RecordKind::Sent, m2.clone());
                        sent_log.insert((m2.session_id, Round::Two), m2.clone());
                        queue.push(now + config.latency_ms, false, &m2);
                        sink_wait[i] = Some(now + timeout);
                    }
                    Err(e) => {
                        if let Some(f) = classify(&e) {
                            failures.entry(msg.session_id).or_insert(f);
                        }
                    }
                },
                Round::Two => match nodes[i].node_round3(&msg) {
                    Ok((m3, _)) => {
                        transcript.push(now, RecordKind::Sent, m3.clone());
                        sent_log.insert((m3.session_id, Round::Three), m3.clone());
                        queue.push(now + config.latency_ms, false, &m3);
                        node_wait[i] = None;
                    }
                    Err(e) => {
                        if let Some(f) = classify(&e) {
                            failures.entry(msg.session_id).or_insert(f);
                            nodes[i].abort();
                            sinks[i].fail();
                            node_wait[i] = None;
                            sink_wait[i] = None;
                        }
                    }
                },
                Round::Three => match sinks[i].sink_expected_sas(&msg) {
                    Ok(_) => sink_wait[i] = None,
                    Err(e) => {
                        if let Some(f) = classify(&e) {
                            failures.entry(msg.session_id).or_insert(f);
                            sink_wait[i] = None;
                        }
                    }
                },
            }
        }
    }

    for i in 0..n {
        let id = SessionId(i as u32);
        if nodes[i].state() == NodeState::Committed {
            failures.entry(id).or_insert(SessionFailure::NodeTimeout);
            nodes[i].abort();
            sinks[i].fail();
            clock = clock.max(node_wait[i].unwrap_or(0));
        } else if matches!(
            sinks[i].state(),
            SinkState::Idle | SinkState::AwaitingReveal
        ) {
            failures.entry(id).or_insert(SessionFailure::SinkTimeout);
            sinks[i].fail();
            clock = clock.max(sink_wait[i].unwrap_or(0));
        }
    }

    Ok(BatchRun {
        config: config.clone(),
        sink_keys,
        nodes,
        sinks,
        failures,
        clock,
        transcript,
    })
}
