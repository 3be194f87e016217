//! Binding decoded SAS values to the sink's computed list.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crypto::SasValue;
use crate::protocol::MatchStatus;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchOutcome {
    /// `Used` or `Mismatched` for each extraction.
    pub extracted: Vec<MatchStatus>,
    /// Index into the computed list consumed by each `Used` extraction.
    pub bound_to: Vec<Option<usize>>,
    /// Final status of each computed value; unmatched ones stay `Free`.
    pub computed: Vec<MatchStatus>,
}

/// Each extraction equal to a free computed value marks it used. Values
/// extracted more than once are ambiguous: every copy, and every computed
/// value equal to them, is mismatched.
pub fn match_sas(
    extracted: &[BitString],
    computed: &[SasValue],
) -> Result<MatchOutcome, HarnessError> {
    let k = computed
        .first()
        .map(|c| c.k())
        .or_else(|| extracted.first().map(|e| e.len()));
    if let Some(k) = k {
        let lens = extracted
            .iter()
            .map(|e| e.len())
            .chain(computed.iter().map(|c| c.k()));
        for len in lens {
            if len != k {
                return Err(HarnessError::LengthMismatch {
                    expected: k,
                    actual: len,
                });
            }
        }
    }
    let mut seen: HashMap<&BitString, usize> = HashMap::new();
    for e in extracted {
        *seen.entry(e).or_default() += 1;
    }
    let mut out = MatchOutcome {
        extracted: vec![MatchStatus::Mismatched; extracted.len()],
        bound_to: vec![None; extracted.len()],
        computed: vec![MatchStatus::Free; computed.len()],
    };
    for (j, c) in computed.iter().enumerate() {
        if seen.get(c.bits()).is_some_and(|&count| count > 1) {
            out.computed[j] = MatchStatus::Mismatched;
        }
    }
    for (i, e) in extracted.iter().enumerate() {
        if seen[e] > 1 {
            continue;
        }
        let free = (0..computed.len())
            .find(|&j| out.computed[j] == MatchStatus::Free && computed[j].bits() == e);
        if let Some(j) = free {
            out.computed[j] = MatchStatus::Used;
            out.extracted[i] = MatchStatus::Used;
            out.bound_to[i] = Some(j);
        }
    }
    Ok(out)
}
