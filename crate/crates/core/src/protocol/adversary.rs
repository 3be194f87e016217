//! Wireless-channel adversary. It sees every message in flight and may drop,
//! delay, replay, duplicate or rewrite it. It has no access to the LED channel.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::{Commitment, Decommitment};

use super::message::{Payload, Round, SessionId, WirelessMessage};
use super::session::VirtualTime;

pub type Transformer = Arc<dyn Fn(&WirelessMessage) -> WirelessMessage + Send + Sync>;

/// Payload rewrite. Variants that do not fit the intercepted round leave the
/// message unchanged.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    PkA(Vec<u8>),
    CommitmentDigest(Commitment),
    PkB(Vec<u8>),
    Rb(BitString),
    /// XOR a mask into `R_B`.
    RbXor(BitString),
    Decommitment(Decommitment),
    #[serde(skip)]
    Custom(Transformer),
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substitution::PkA(pk) => f.debug_tuple("PkA").field(pk).finish(),
            Substitution::CommitmentDigest(c) => {
                f.debug_tuple("CommitmentDigest").field(c).finish()
            }
            Substitution::PkB(pk) => f.debug_tuple("PkB").field(pk).finish(),
            Substitution::Rb(r) => f.debug_tuple("Rb").field(r).finish(),
            Substitution::RbXor(r) => f.debug_tuple("RbXor").field(r).finish(),
            Substitution::Decommitment(d) => f.debug_tuple("Decommitment").field(d).finish(),
            Substitution::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Substitution {
    pub fn apply(&self, msg: &WirelessMessage) -> WirelessMessage {
        let mut out = msg.clone();
        match (self, &mut out.payload) {
            (Substitution::PkA(pk), Payload::Commit { pk_a, .. }) => *pk_a = pk.clone(),
            (Substitution::CommitmentDigest(c), Payload::Commit { c_a, .. }) => *c_a = *c,
            (Substitution::PkB(pk), Payload::Challenge { pk_b, .. }) => *pk_b = pk.clone(),
            (Substitution::Rb(r), Payload::Challenge { r_b, .. }) => *r_b = r.clone(),
            (Substitution::RbXor(mask), Payload::Challenge { r_b, .. }) => {
                if let Ok(x) = r_b.xor(mask) {
                    *r_b = x;
                }
            }
            (Substitution::Decommitment(d), Payload::Reveal { d_a }) => *d_a = d.clone(),
            (Substitution::Custom(f), _) => return f(msg),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    #[default]
    Pass,
    Drop,
    Delay(VirtualTime),
    /// Deliver the same-round message of another session instead, relabelled
    /// with this session's id. Dropped if that message was never sent.
    Replay {
        from: SessionId,
    },
    Duplicate,
    Substitute(Substitution),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    pub session: SessionId,
    pub round: Round,
    pub action: Action,
}

/// Per-(session, round) actions; unlisted messages pass untouched.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Rule>", into = "Vec<Rule>")]
pub struct AdversaryPolicy {
    actions: BTreeMap<(SessionId, Round), Action>,
}

impl From<Vec<Rule>> for AdversaryPolicy {
    fn from(rules: Vec<Rule>) -> Self {
        let mut p = AdversaryPolicy::default();
        for r in rules {
            p.actions.insert((r.session, r.round), r.action);
        }
        p
    }
}

impl From<AdversaryPolicy> for Vec<Rule> {
    fn from(p: AdversaryPolicy) -> Self {
        p.actions
            .into_iter()
            .map(|((session, round), action)| Rule {
                session,
                round,
                action,
            })
            .collect()
    }
}

impl AdversaryPolicy {
    pub fn pass_through() -> Self {
        Self::default()
    }

    pub fn with(mut self, session: SessionId, round: Round, action: Action) -> Self {
        self.actions.insert((session, round), action);
        self
    }

    pub fn action(&self, session: SessionId, round: Round) -> &Action {
        const PASS: Action = Action::Pass;
        self.actions.get(&(session, round)).unwrap_or(&PASS)
    }

    pub fn is_pass_through(&self) -> bool {
        self.actions.values().all(|a| matches!(a, Action::Pass))
    }

    /// Sessions the policy touches in any round.
    pub fn targeted(&self) -> Vec<SessionId> {
        let mut ids: Vec<SessionId> = self
            .actions
            .iter()
            .filter(|(_, a)| !matches!(a, Action::Pass))
            .map(|((s, _), _)| *s)
            .collect();
        ids.dedup();
        ids
    }
}
