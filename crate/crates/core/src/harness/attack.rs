//! Man-in-the-middle experiments against the many-to-one protocol.
//!
//! The random-guess adversary runs its own device `M` against the sink in
//! session 0, in place of node 0. Toward every node it forwards the sink's
//! round-two message with `R_B` XORed by a fresh uniform mask, so each node
//! displays a uniformly random SAS. The LED channel is honest. The attack
//! succeeds when some display matches the sink's value for `M`'s session, so
//! that the sink marks it used and accepts `pk_M`.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::{keygen, KeyPair, SasValue};
use crate::exec::Execution;
use crate::protocol::{MatchStatus, NodeSession, SessionId, SinkSession, Substitution};
use crate::seed::{derive_seed, rng_for, subseed};

use super::matching::match_sas;
use super::HarnessError;

/// z for a two-sided 99% interval.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStrategy {
    RandomGuess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub n: usize,
    pub k: usize,
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    /// Wilson score interval at 99%.
    pub ci99: (f64, f64),
    /// `n * 2^-k`.
    pub bound: f64,
    /// Binomial standard error of a rate equal to the bound.
    pub sigma: f64,
    pub within_bound: bool,
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub const MIN_ATTACK_BITS: usize = 2;
pub const MAX_ATTACK_BITS: usize = 32;

/// Nonces pinned for exhaustive enumeration of a single-node batch.
struct Pinned {
    r_a: BitString,
    r_b: BitString,
    r_m: BitString,
    delta: BitString,
}

fn random_bits(seed: u64, label: &str, index: u64, k: usize) -> BitString {
    use rand::Rng;
    let mut rng = rng_for(seed, label, index);
    (0..k).map(|_| rng.gen::<bool>()).collect()
}

fn trial(
    n: usize,
    k: usize,
    sink_keys: &KeyPair,
    node_keys: &[KeyPair],
    mallory_keys: &KeyPair,
    seed: u64,
    pinned: Option<&Pinned>,
) -> Result<bool, HarnessError> {
    let mut displayed = Vec::with_capacity(n);
    let mut expected: Vec<SasValue> = Vec::with_capacity(n);
    let mut mallory = NodeSession::new(
        SessionId(0),
        k,
        mallory_keys.clone(),
        rng_for(seed, "adversary-rng", 0),
    );
    if let Some(p) = pinned {
        mallory = mallory.with_nonce(p.r_m.clone());
    }
    for i in 0..n {
        let id = SessionId(i as u32);
        let mut node = NodeSession::new(
            id,
            k,
            node_keys[i].clone(),
            rng_for(seed, "node-rng", i as u64),
        );
        let mut sink = SinkSession::new(
            id,
            k,
            sink_keys.clone(),
            rng_for(seed, "sink-rng", i as u64),
        );
        if let Some(p) = pinned {
            node = node.with_nonce(p.r_a.clone());
            sink = sink.with_nonce(p.r_b.clone());
        }
        let m1 = node.node_round1(0)?;
        let to_sink = if i == 0 { mallory.node_round1(0)? } else { m1 };
        let m2 = sink.sink_round2(&to_sink)?;
        let delta = match pinned {
            Some(p) => p.delta.clone(),
            None => random_bits(seed, "mask", i as u64, k),
        };
        let (m3, sas) = node.node_round3(&Substitution::RbXor(delta).apply(&m2))?;
        let reveal = if i == 0 {
            mallory.node_round3(&m2)?.0
        } else {
            m3
        };
        expected.push(sink.sink_expected_sas(&reveal)?);
        displayed.push(sas.into_bits());
    }
    let m = match_sas(&displayed, &expected)?;
    Ok(m.computed[0] == MatchStatus::Used)
}

fn check_params(n: usize, k: usize) -> Result<(), HarnessError> {
    if n == 0 {
        return Err(HarnessError::Config(
            "attack needs at least one node".into(),
        ));
    }
    if !(MIN_ATTACK_BITS..=MAX_ATTACK_BITS).contains(&k) {
        return Err(HarnessError::Config(format!(
            "k={k} outside {MIN_ATTACK_BITS}..={MAX_ATTACK_BITS}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the random-guess adversary's success rate.
pub fn attack_experiment(
    n: usize,
    k: usize,
    trials: u64,
    strategy: AttackStrategy,
    seed: u64,
    exec: Execution,
) -> Result<AttackResult, HarnessError> {
    check_params(n, k)?;
    let AttackStrategy::RandomGuess = strategy;
    let sink_keys = keygen(&derive_seed(seed, "sink-key", 0));
    let outcomes = exec.map_indexed(trials as usize, |t| {
        let ts = subseed(seed, "attack-trial", t as u64);
        let node_keys: Vec<KeyPair> = (0..n)
            .map(|i| keygen(&derive_seed(ts, "node-key", i as u64)))
            .collect();
        let mallory = keygen(&derive_seed(ts, "adversary-key", 0));
        trial(n, k, &sink_keys, &node_keys, &mallory, ts, None)
    });
    let mut successes = 0u64;
    for o in outcomes {
        successes += o? as u64;
    }
    Ok(summarize(n, k, trials, successes))
}

fn summarize(n: usize, k: usize, trials: u64, successes: u64) -> AttackResult {
    let rate = if trials == 0 {
        0.0
    } else {
        successes as f64 / trials as f64
    };
    let bound = n as f64 * 2f64.powi(-(k as i32));
    let sigma = if trials == 0 {
        0.0
    } else {
        (bound * (1.0 - bound).max(0.0) / trials as f64).sqrt()
    };
    AttackResult {
        n,
        k,
        trials,
        successes,
        rate,
        ci99: wilson_interval(successes, trials, Z99),
        bound,
        sigma,
        within_bound: rate <= bound + 3.0 * sigma,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveAttack {
    pub result: AttackResult,
    /// Best success rate of an adversary that fixes `R_M` and the mask in
    /// advance, over uniform `R_A` and `R_B`. Reflects the hash's output
    /// distribution for the sink's key.
    pub best_fixed_rate: f64,
}

/// Enumerates every `(R_A, R_B, R_M, mask)` of a single-node batch, each
/// equally likely, for `k <= 4`.
pub fn exhaustive_attack(
    k: usize,
    seed: u64,
    exec: Execution,
) -> Result<ExhaustiveAttack, HarnessError> {
    check_params(1, k)?;
    if k > 4 {
        return Err(HarnessError::Config(format!(
            "exhaustive attack limited to k <= 4, got {k}"
        )));
    }
    let sink_keys = keygen(&derive_seed(seed, "sink-key", 0));
    let node_keys = vec![keygen(&derive_seed(seed, "node-key", 0))];
    let mallory = keygen(&derive_seed(seed, "adversary-key", 0));
    let side = 1usize << k;
    let total = side.pow(4);
    let bits = |v: usize| BitString::from_u64(v as u64, k).expect("fits in k bits");
    let outcomes = exec.map_indexed(total, |idx| {
        let pinned = Pinned {
            r_a: bits(idx % side),
            r_b: bits(idx / side % side),
            r_m: bits(idx / side.pow(2) % side),
            delta: bits(idx / side.pow(3)),
        };
        trial(1, k, &sink_keys, &node_keys, &mallory, seed, Some(&pinned))
    });
    let mut per_strategy = vec![0u64; side * side];
    let mut successes = 0u64;
    for (idx, o) in outcomes.into_iter().enumerate() {
        if o? {
            successes += 1;
            per_strategy[idx / side.pow(2)] += 1;
        }
    }
    let best = per_strategy.iter().copied().max().unwrap_or(0);
    Ok(ExhaustiveAttack {
        result: summarize(1, k, total as u64, successes),
        best_fixed_rate: best as f64 / (side * side) as f64,
    })
}
