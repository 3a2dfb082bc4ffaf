//! Protocol messages, their byte encoding and transcript records.
//!
//! Payload bytes use a small length-prefixed format: every bit string is a
//! little-endian `u32` bit length followed by its bytes, every list is a
//! `u32` count followed by its items. The JSON line form carries these bytes
//! as lowercase hex.

use crate::bits::BitString;
use crate::preamble::CompoundWitness;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type SessionId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("truncated payload")]
    Truncated,
    #[error("trailing bytes in payload")]
    Trailing,
    #[error("bad field: {0}")]
    Field(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    VCommit,
    PCommit,
    VReveal,
    Body,
    Abort,
    /// Incarnation selection, first message of an admissible session.
    Select,
    /// Prover initialization carrying the receiver randomness.
    Init,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    ChallengeCommit,
    ColoringCommit,
    ChallengeOpen,
    EndpointOpen,
    OracleClaim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "v→p")]
    VerifierToProver,
    #[serde(rename = "p→v")]
    ProverToVerifier,
}

/// One revealed endpoint: vertex, its 2-bit color and the two seeds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndpointOpening {
    pub vertex: u32,
    pub color: BitString,
    pub seeds: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyPayload {
    /// ρ for the color commitments and hiding commitments to challenge
    /// edge indices (empty when challenges were fixed earlier).
    ChallengeCommit { rho_color: BitString, commitments: Vec<BitString> },
    /// One string per repetition: all vertex color commitments concatenated.
    ColoringCommit { reps: Vec<BitString> },
    /// Openings (value, randomness) of the challenge commitments.
    ChallengeOpen { openings: Vec<(BitString, BitString)> },
    /// Two endpoint openings per answered challenge.
    EndpointOpen { opens: Vec<(EndpointOpening, EndpointOpening)> },
    OracleClaim { witness: Option<CompoundWitness> },
}

impl BodyPayload {
    pub fn kind(&self) -> BodyKind {
        match self {
            BodyPayload::ChallengeCommit { .. } => BodyKind::ChallengeCommit,
            BodyPayload::ColoringCommit { .. } => BodyKind::ColoringCommit,
            BodyPayload::ChallengeOpen { .. } => BodyKind::ChallengeOpen,
            BodyPayload::EndpointOpen { .. } => BodyKind::EndpointOpen,
            BodyPayload::OracleClaim { .. } => BodyKind::OracleClaim,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    VCommit {
        /// Binding-scheme ρ for the prover's commitments (k · 3k bits).
        rho: BitString,
        commitments: Vec<BitString>,
        /// Hiding commitments to body challenge pairs (admissible sessions).
        pair_commitments: Vec<BitString>,
        /// Digest of the selection and initialization messages (admissible sessions).
        prefix: Option<[u8; 32]>,
    },
    PCommit { commitment: BitString },
    VReveal { value: BitString, randomness: BitString },
    Abort,
    Select { incarnation: [u32; 3] },
    Init { h: BitString },
    Body(BodyPayload),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    pub session_id: SessionId,
    pub kind: Kind,
    pub round_index: u32,
    pub payload: Payload,
}

impl Message {
    pub fn new(session_id: SessionId, round_index: u32, payload: Payload) -> Self {
        let kind = match &payload {
            Payload::VCommit { .. } => Kind::VCommit,
            Payload::PCommit { .. } => Kind::PCommit,
            Payload::VReveal { .. } => Kind::VReveal,
            Payload::Abort => Kind::Abort,
            Payload::Select { .. } => Kind::Select,
            Payload::Init { .. } => Kind::Init,
            Payload::Body(_) => Kind::Body,
        };
        Message { session_id, kind, round_index, payload }
    }

    pub fn body_kind(&self) -> Option<BodyKind> {
        match &self.payload {
            Payload::Body(b) => Some(b.kind()),
            _ => None,
        }
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.payload(&self.payload);
        w.0
    }

    pub fn decode(session_id: SessionId, kind: Kind, round_index: u32, sub: Option<BodyKind>, bytes: &[u8]) -> Result<Self, WireError> {
        let mut r = Reader(bytes);
        let payload = r.payload(kind, sub)?;
        if !r.0.is_empty() {
            return Err(WireError::Trailing);
        }
        Ok(Message { session_id, kind, round_index, payload })
    }

    /// Shape used by the witness-independence checks: kind, sub-kind and
    /// the bit length of every payload field, in order.
    pub fn shape(&self) -> (Kind, Option<BodyKind>, usize) {
        (self.kind, self.body_kind(), self.payload_bytes().len())
    }
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn bits(&mut self, b: &BitString) {
        self.u32(b.len() as u32);
        self.0.extend_from_slice(&b.to_bytes());
    }
    fn list(&mut self, items: &[BitString]) {
        self.u32(items.len() as u32);
        for b in items {
            self.bits(b);
        }
    }
    fn endpoint(&mut self, e: &EndpointOpening) {
        self.u32(e.vertex);
        self.bits(&e.color);
        self.bits(&e.seeds);
    }
    fn payload(&mut self, p: &Payload) {
        match p {
            Payload::VCommit { rho, commitments, pair_commitments, prefix } => {
                self.bits(rho);
                self.list(commitments);
                self.list(pair_commitments);
                match prefix {
                    Some(d) => {
                        self.0.push(1);
                        self.0.extend_from_slice(d);
                    }
                    None => self.0.push(0),
                }
            }
            Payload::PCommit { commitment } => self.bits(commitment),
            Payload::VReveal { value, randomness } => {
                self.bits(value);
                self.bits(randomness);
            }
            Payload::Abort => {}
            Payload::Select { incarnation } => incarnation.iter().for_each(|&x| self.u32(x)),
            Payload::Init { h } => self.bits(h),
            Payload::Body(b) => match b {
                BodyPayload::ChallengeCommit { rho_color, commitments } => {
                    self.bits(rho_color);
                    self.list(commitments);
                }
                BodyPayload::ColoringCommit { reps } => self.list(reps),
                BodyPayload::ChallengeOpen { openings } => {
                    self.u32(openings.len() as u32);
                    for (v, r) in openings {
                        self.bits(v);
                        self.bits(r);
                    }
                }
                BodyPayload::EndpointOpen { opens } => {
                    self.u32(opens.len() as u32);
                    for (a, b) in opens {
                        self.endpoint(a);
                        self.endpoint(b);
                    }
                }
                BodyPayload::OracleClaim { witness } => match witness {
                    None => self.0.push(0),
                    Some(CompoundWitness::Coloring(c)) => {
                        self.0.push(1);
                        self.u32(c.len() as u32);
                        self.0.extend_from_slice(c);
                    }
                    Some(CompoundWitness::Equality { index, seeds }) => {
                        self.0.push(2);
                        self.u32(*index as u32);
                        self.bits(seeds);
                    }
                },
            },
        }
    }
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], WireError> {
        if self.0.len() < n {
            return Err(WireError::Truncated);
        }
        let (a, b) = self.0.split_at(n);
        self.0 = b;
        Ok(a)
    }
    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn bits(&mut self) -> Result<BitString, WireError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len.div_ceil(8))?;
        Ok(BitString::from_bytes(bytes, len))
    }
    fn count(&mut self) -> Result<usize, WireError> {
        let n = self.u32()? as usize;
        // Every item takes at least four bytes.
        if n > self.0.len() {
            return Err(WireError::Truncated);
        }
        Ok(n)
    }
    fn list(&mut self) -> Result<Vec<BitString>, WireError> {
        let n = self.count()?;
        (0..n).map(|_| self.bits()).collect()
    }
    fn endpoint(&mut self) -> Result<EndpointOpening, WireError> {
        Ok(EndpointOpening { vertex: self.u32()?, color: self.bits()?, seeds: self.bits()? })
    }
    fn payload(&mut self, kind: Kind, sub: Option<BodyKind>) -> Result<Payload, WireError> {
        Ok(match kind {
            Kind::VCommit => {
                let rho = self.bits()?;
                let commitments = self.list()?;
                let pair_commitments = self.list()?;
                let prefix = match self.u8()? {
                    0 => None,
                    1 => Some(self.take(32)?.try_into().unwrap()),
                    t => return Err(WireError::Field(format!("prefix tag {t}"))),
                };
                Payload::VCommit { rho, commitments, pair_commitments, prefix }
            }
            Kind::PCommit => Payload::PCommit { commitment: self.bits()? },
            Kind::VReveal => Payload::VReveal { value: self.bits()?, randomness: self.bits()? },
            Kind::Abort => Payload::Abort,
            Kind::Select => Payload::Select { incarnation: [self.u32()?, self.u32()?, self.u32()?] },
            Kind::Init => Payload::Init { h: self.bits()? },
            Kind::Body => {
                let sub = sub.ok_or_else(|| WireError::Field("body message without sub-kind".into()))?;
                Payload::Body(match sub {
                    BodyKind::ChallengeCommit => BodyPayload::ChallengeCommit { rho_color: self.bits()?, commitments: self.list()? },
                    BodyKind::ColoringCommit => BodyPayload::ColoringCommit { reps: self.list()? },
                    BodyKind::ChallengeOpen => {
                        let n = self.count()?;
                        let openings = (0..n).map(|_| Ok((self.bits()?, self.bits()?))).collect::<Result<_, WireError>>()?;
                        BodyPayload::ChallengeOpen { openings }
                    }
                    BodyKind::EndpointOpen => {
                        let n = self.count()?;
                        let opens = (0..n).map(|_| Ok((self.endpoint()?, self.endpoint()?))).collect::<Result<_, WireError>>()?;
                        BodyPayload::EndpointOpen { opens }
                    }
                    BodyKind::OracleClaim => {
                        let witness = match self.u8()? {
                            0 => None,
                            1 => {
                                let n = self.count()?;
                                Some(CompoundWitness::Coloring(self.take(n)?.to_vec()))
                            }
                            2 => Some(CompoundWitness::Equality { index: self.u32()? as usize, seeds: self.bits()? }),
                            t => return Err(WireError::Field(format!("witness tag {t}"))),
                        };
                        BodyPayload::OracleClaim { witness }
                    }
                })
            }
        })
    }
}

/// The JSON-lines form of a message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLine {
    pub session_id: SessionId,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub: Option<BodyKind>,
    pub round_index: u32,
    pub payload: String,
}

impl From<&Message> for MessageLine {
    fn from(m: &Message) -> Self {
        MessageLine {
            session_id: m.session_id,
            kind: m.kind,
            sub: m.body_kind(),
            round_index: m.round_index,
            payload: hex::encode(m.payload_bytes()),
        }
    }
}

impl MessageLine {
    pub fn to_message(&self) -> Result<Message, WireError> {
        let bytes = hex::decode(&self.payload).map_err(|e| WireError::Field(e.to_string()))?;
        Message::decode(self.session_id, self.kind, self.round_index, self.sub, &bytes)
    }
}

/// A timed transcript entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub t: u64,
    pub direction: Direction,
    pub message: Message,
}

/// The JSON-lines form of a transcript record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLine {
    pub t: u64,
    pub session_id: SessionId,
    pub direction: Direction,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub: Option<BodyKind>,
    pub round_index: u32,
    pub payload: String,
}

impl From<&Record> for RecordLine {
    fn from(r: &Record) -> Self {
        let m = MessageLine::from(&r.message);
        RecordLine { t: r.t, session_id: m.session_id, direction: r.direction, kind: m.kind, sub: m.sub, round_index: m.round_index, payload: m.payload }
    }
}

impl RecordLine {
    pub fn to_record(&self) -> Result<Record, WireError> {
        let line = MessageLine { session_id: self.session_id, kind: self.kind, sub: self.sub, round_index: self.round_index, payload: self.payload.clone() };
        Ok(Record { t: self.t, direction: self.direction, message: line.to_message()? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_payload_round_trips() {
        let b = |v: u64, n: usize| BitString::from_u64(v, n);
        let ep = EndpointOpening { vertex: 9, color: b(2, 2), seeds: b(77, 16) };
        let payloads = vec![
            Payload::VCommit { rho: b(5, 24), commitments: vec![b(1, 61), b(2, 61)], pair_commitments: vec![], prefix: Some([7; 32]) },
            Payload::PCommit { commitment: b(3, 40) },
            Payload::VReveal { value: b(1, 8), randomness: b(12345, 60) },
            Payload::Abort,
            Payload::Select { incarnation: [1, 2, 3] },
            Payload::Init { h: b(99, 61) },
            Payload::Body(BodyPayload::ChallengeCommit { rho_color: b(1, 48), commitments: vec![b(4, 61)] }),
            Payload::Body(BodyPayload::ColoringCommit { reps: vec![b(8, 64), b(9, 64)] }),
            Payload::Body(BodyPayload::ChallengeOpen { openings: vec![(b(1, 32), b(2, 60))] }),
            Payload::Body(BodyPayload::EndpointOpen { opens: vec![(ep.clone(), ep)] }),
            Payload::Body(BodyPayload::OracleClaim { witness: Some(CompoundWitness::Coloring(vec![0, 1, 2])) }),
            Payload::Body(BodyPayload::OracleClaim { witness: Some(CompoundWitness::Equality { index: 2, seeds: b(3, 16) }) }),
            Payload::Body(BodyPayload::OracleClaim { witness: None }),
        ];
        for p in payloads {
            let m = Message::new(4, 2, p);
            let line = MessageLine::from(&m);
            let json = serde_json::to_string(&line).unwrap();
            let back: MessageLine = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_message().unwrap(), m);
        }
    }

    #[test]
    fn truncated_payload_is_an_error() {
        let m = Message::new(1, 1, Payload::VReveal { value: BitString::from_u64(1, 8), randomness: BitString::from_u64(2, 60) });
        let bytes = m.payload_bytes();
        assert_eq!(Message::decode(1, Kind::VReveal, 1, None, &bytes[..bytes.len() - 1]), Err(WireError::Truncated));
    }

    #[test]
    fn direction_serializes_with_arrows() {
        assert_eq!(serde_json::to_string(&Direction::VerifierToProver).unwrap(), "\"v→p\"");
    }
}
