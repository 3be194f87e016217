//! Wireless transcripts: every message as sent by an honest party and as
//! delivered by the channel, in event order.
//!
//! Binary layout: `"OOBT"`, version byte, then records of
//! `time u64 | kind u8 | len u32 | encoded message`, big-endian.

use super::message::WirelessMessage;
use super::session::VirtualTime;
use super::ProtocolError;

const MAGIC: &[u8; 4] = b"OOBT";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Sent = 0,
    Delivered = 1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub time: VirtualTime,
    pub kind: RecordKind,
    pub message: WirelessMessage,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn push(&mut self, time: VirtualTime, kind: RecordKind, message: WirelessMessage) {
        self.records.push(TranscriptRecord {
            time,
            kind,
            message,
        });
    }

    pub fn delivered(&self) -> impl Iterator<Item = &TranscriptRecord> {
        self.records
            .iter()
            .filter(|r| r.kind == RecordKind::Delivered)
    }

    pub fn sent(&self) -> impl Iterator<Item = &TranscriptRecord> {
        self.records.iter().filter(|r| r.kind == RecordKind::Sent)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.push(VERSION);
        for r in &self.records {
            let body = r.message.encode();
            out.extend_from_slice(&r.time.to_be_bytes());
            out.push(r.kind as u8);
            out.extend_from_slice(&(body.len() as u32).to_be_bytes());
            out.extend_from_slice(&body);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let bad = |why: &str| ProtocolError::MalformedMessage(format!("transcript: {why}"));
        if bytes.len() < 5 || &bytes[..4] != MAGIC || bytes[4] != VERSION {
            return Err(bad("bad header"));
        }
        let mut rest = &bytes[5..];
        let mut records = Vec::new();
        while !rest.is_empty() {
            if rest.len() < 13 {
                return Err(bad("truncated record header"));
            }
            let time = u64::from_be_bytes(rest[..8].try_into().unwrap());
            let kind = match rest[8] {
                0 => RecordKind::Sent,
                1 => RecordKind::Delivered,
                _ => return Err(bad("unknown record kind")),
            };
            let len = u32::from_be_bytes(rest[9..13].try_into().unwrap()) as usize;
            rest = &rest[13..];
            if rest.len() < len {
                return Err(bad("truncated record body"));
            }
            let message = WirelessMessage::decode(&rest[..len])?;
            rest = &rest[len..];
            records.push(TranscriptRecord {
                time,
                kind,
                message,
            });
        }
        Ok(Self { records })
    }
}
