//! The concurrent adversary: one black box plays the verifiers of every
//! session and decides when each of their messages goes out.
//!
//! The prover answers every verifier message immediately, so the only
//! freedom the adversary has is the order of its own messages and whether
//! it refuses a reveal. Time is logical: records are numbered by arrival.

use crate::bits::BitString;
use crate::body::{check_body_transcript, BodyContext, BodyTarget, Challenges};
use crate::commitments::{binding_params, to_biguint, verify_open, Commitment, Group, Opening, SchemeTag};
use crate::message::{BodyPayload, Direction, Message, Payload, Record, RecordLine, SessionId, WireError};
use crate::preamble::{
    Admitted, CompoundStatement, MainPart, Outcome, PreambleError, Protocol, ProverSession, ProverStrategy, VerifierMaterial, VerifierSession,
};
use crate::seed;
use rand::seq::SliceRandom;
use rand::RngCore;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Protocol(#[from] PreambleError),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("transcript line {line}: {msg}")]
    Json { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Order in which sessions' preamble rounds are scheduled.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    RoundRobin,
    /// Session j runs entirely between rounds 1 and 2 of session j − 1.
    Nested,
    /// A uniformly random interleaving drawn from the tape.
    RandomInterleave,
    /// Each round of every session goes out as one batch.
    Parallel,
    /// An explicit slot order, as read from a schedule file.
    Script(Arc<Schedule>),
}

/// When the adversary refuses to open a reveal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortPolicy {
    Never,
    /// Each reveal is refused independently with probability p.
    Prob(f64),
    /// Like `Prob(p)` until some other session has been refused, then 1 − p.
    Adaptive(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub schedule: ScheduleKind,
    pub abort: AbortPolicy,
}

impl Strategy {
    pub fn new(schedule: ScheduleKind, abort: AbortPolicy) -> Self {
        Strategy { schedule, abort }
    }

    pub fn honest(schedule: ScheduleKind) -> Self {
        Strategy { schedule, abort: AbortPolicy::Never }
    }
}

fn parse_prob(s: &str, name: &str) -> Option<f64> {
    let inner = s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')?;
    inner.trim().parse().ok().filter(|p: &f64| (0.0..=1.0).contains(p))
}

/// Parses `schedule[+abort]`, e.g. `nested+abort_prob(0.5)`. An abort
/// policy alone implies round robin; `script:` is resolved by the caller.
impl FromStr for Strategy {
    type Err = SchedulerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut schedule = None;
        let mut abort = AbortPolicy::Never;
        for part in s.split('+').map(str::trim) {
            match part {
                "round_robin" => schedule = Some(ScheduleKind::RoundRobin),
                "nested" => schedule = Some(ScheduleKind::Nested),
                "random_interleave" => schedule = Some(ScheduleKind::RandomInterleave),
                "parallel" => schedule = Some(ScheduleKind::Parallel),
                "adaptive_abort" => abort = AbortPolicy::Adaptive(0.5),
                "honest" => {}
                p if p.starts_with("abort_prob") => abort = AbortPolicy::Prob(parse_prob(p, "abort_prob").ok_or_else(|| SchedulerError::UnknownStrategy(s.into()))?),
                p if p.starts_with("adaptive_abort") => {
                    abort = AbortPolicy::Adaptive(parse_prob(p, "adaptive_abort").ok_or_else(|| SchedulerError::UnknownStrategy(s.into()))?)
                }
                _ => return Err(SchedulerError::UnknownStrategy(s.into())),
            }
        }
        Ok(Strategy { schedule: schedule.unwrap_or(ScheduleKind::RoundRobin), abort })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match &self.schedule {
            ScheduleKind::RoundRobin => "round_robin",
            ScheduleKind::Nested => "nested",
            ScheduleKind::RandomInterleave => "random_interleave",
            ScheduleKind::Parallel => "parallel",
            ScheduleKind::Script(_) => "custom_script",
        };
        match self.abort {
            AbortPolicy::Never => write!(f, "{s}"),
            AbortPolicy::Prob(p) => write!(f, "{s}+abort_prob({p})"),
            AbortPolicy::Adaptive(p) => write!(f, "{s}+adaptive_abort({p})"),
        }
    }
}

/// Slot order: entry `t` is the (session, preamble round) of slot `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub slots: Vec<(SessionId, u32)>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Slots (1-based) of each session's rounds, in order.
    pub fn session_slots(&self) -> BTreeMap<SessionId, Vec<(usize, u32)>> {
        let mut out: BTreeMap<SessionId, Vec<(usize, u32)>> = BTreeMap::new();
        for (i, &(s, r)) in self.slots.iter().enumerate() {
            out.entry(s).or_default().push((i + 1, r));
        }
        out
    }

    /// Rounds increase within each session and never exceed `m`.
    pub fn validate(&self, m: usize) -> Result<(), SchedulerError> {
        for (s, rounds) in self.session_slots() {
            if rounds.len() > m {
                return Err(SchedulerError::Schedule(format!("session {s} has {} slots, more than m = {m}", rounds.len())));
            }
            for w in rounds.windows(2) {
                if w[1].1 <= w[0].1 {
                    return Err(SchedulerError::Schedule(format!("session {s} rounds out of order at slot {}", w[1].0)));
                }
            }
            if rounds.iter().any(|&(_, r)| r == 0 || r as usize > m) {
                return Err(SchedulerError::Schedule(format!("session {s} has a round outside 1..={m}")));
            }
        }
        Ok(())
    }

    /// Lines `slot session round`.
    pub fn to_text(&self) -> String {
        self.slots.iter().enumerate().map(|(i, (s, r))| format!("{} {s} {r}\n", i + 1)).collect()
    }

    pub fn parse(text: &str) -> Result<Self, SchedulerError> {
        let mut slots = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<Result<_, _>>()
                .map_err(|e| SchedulerError::Schedule(format!("line {}: {e}", n + 1)))?;
            if f.len() != 3 || f[0] as usize != slots.len() + 1 {
                return Err(SchedulerError::Schedule(format!("line {}: expected `slot session round` with consecutive slots", n + 1)));
            }
            slots.push((f[1] as SessionId, f[2] as u32));
        }
        Ok(Schedule { slots })
    }

    /// The pattern a schedule kind produces when no session aborts.
    pub fn generate(kind: &ScheduleKind, sessions: usize, m: usize, tape: u64) -> Self {
        let batches = schedule_batches(kind, sessions, m, tape);
        Schedule { slots: batches.into_iter().flatten().collect() }
    }
}

fn schedule_batches(kind: &ScheduleKind, sessions: usize, m: usize, tape: u64) -> Vec<Vec<(SessionId, u32)>> {
    let m = m as u32;
    let ids = 1..=sessions as SessionId;
    match kind {
        ScheduleKind::RoundRobin => (1..=m).flat_map(|r| ids.clone().map(move |s| vec![(s, r)])).collect(),
        ScheduleKind::Parallel => (1..=m).map(|r| ids.clone().map(|s| (s, r)).collect()).collect(),
        ScheduleKind::Nested => {
            let mut out = Vec::new();
            for s in ids.clone() {
                out.push(vec![(s, 1)]);
            }
            for s in ids.rev() {
                for r in 2..=m {
                    out.push(vec![(s, r)]);
                }
            }
            out
        }
        ScheduleKind::RandomInterleave => {
            let mut rng = seed::rng_for(tape, "interleave", 0);
            let mut owners: Vec<SessionId> = ids.flat_map(|s| std::iter::repeat_n(s, m as usize)).collect();
            owners.shuffle(&mut rng);
            let mut next = vec![1u32; sessions + 1];
            owners
                .into_iter()
                .map(|s| {
                    let r = next[s as usize];
                    next[s as usize] += 1;
                    vec![(s, r)]
                })
                .collect()
        }
        ScheduleKind::Script(sched) => sched.slots.iter().map(|&e| vec![e]).collect(),
    }
}

/// A deterministic verifier strategy that can be snapshotted by cloning.
pub trait VerifierBlackBox: Clone {
    /// The next batch of verifier messages, or `None` when the adversary halts.
    fn next(&mut self) -> Option<Vec<Message>>;
    /// Delivers one prover message.
    fn observe(&mut self, msg: &Message) -> Result<(), SchedulerError>;
    fn outcomes(&self) -> BTreeMap<SessionId, Outcome>;
    fn protocol(&self) -> &Arc<Protocol>;
    fn tape(&self) -> u64;
}

fn message_digest(msg: &Message) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(msg.session_id.to_le_bytes());
    h.update([msg.kind as u8]);
    h.update(msg.round_index.to_le_bytes());
    h.update(msg.payload_bytes());
    h.finalize().into()
}

/// The adversaries built from a schedule kind and an abort policy, over
/// honest verifier sessions whose secrets come from the tape.
#[derive(Debug, Clone)]
pub struct Adversary {
    protocol: Arc<Protocol>,
    tape: u64,
    strategy: Strategy,
    batches: Arc<Vec<Vec<(SessionId, u32)>>>,
    cursor: usize,
    sessions: Vec<VerifierSession>,
    last_prover: Vec<[u8; 32]>,
    refused: Vec<bool>,
}

pub fn make_adversary(protocol: &Arc<Protocol>, strategy: Strategy, tape: u64) -> Adversary {
    let n = protocol.config.num_sessions;
    let batches = Arc::new(schedule_batches(&strategy.schedule, n, protocol.m(), tape));
    let sessions = (1..=n as SessionId)
        .map(|s| {
            let material = Arc::new(VerifierMaterial::generate(protocol, &protocol.group, seed::derive(tape, "session", s as u64), None));
            VerifierSession::new(s, protocol.clone(), protocol.group.clone(), material)
        })
        .collect();
    Adversary { protocol: protocol.clone(), tape, strategy, batches, cursor: 0, sessions, last_prover: vec![[0; 32]; n], refused: vec![false; n] }
}

impl Adversary {
    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn session(&self, id: SessionId) -> &VerifierSession {
        &self.sessions[id as usize - 1]
    }

    fn refuse(&self, idx: usize, round: u32) -> bool {
        let p = match self.strategy.abort {
            AbortPolicy::Never => return false,
            AbortPolicy::Prob(p) => p,
            AbortPolicy::Adaptive(p) => {
                if self.refused.iter().enumerate().any(|(j, &r)| r && j != idx) {
                    1.0 - p
                } else {
                    p
                }
            }
        };
        let u = seed::prf_unit(&self.tape.to_le_bytes(), &[b"refuse", &(idx as u64).to_le_bytes(), &round.to_le_bytes(), &self.last_prover[idx]]);
        u < p
    }

    fn emit(&mut self, idx: usize) -> Option<Message> {
        let refuse = match self.sessions[idx].pending_reveal() {
            Some(i) => self.refuse(idx, i),
            None => false,
        };
        if refuse {
            self.refused[idx] = true;
        }
        self.sessions[idx].next_message(refuse)
    }

    fn next_slot_round(&self, idx: usize) -> Option<u32> {
        self.sessions[idx].next_slot_round()
    }
}

impl VerifierBlackBox for Adversary {
    fn next(&mut self) -> Option<Vec<Message>> {
        // Messages outside the slot order go out as soon as they are due.
        for idx in 0..self.sessions.len() {
            if self.sessions[idx].ready() && self.next_slot_round(idx).is_none() {
                return self.emit(idx).map(|m| vec![m]);
            }
        }
        while self.cursor < self.batches.len() {
            let batch = &self.batches.clone()[self.cursor];
            self.cursor += 1;
            let mut out = Vec::new();
            for &(s, r) in batch {
                let idx = s as usize - 1;
                if idx < self.sessions.len() && self.next_slot_round(idx) == Some(r) {
                    out.extend(self.emit(idx));
                }
            }
            if !out.is_empty() {
                return Some(out);
            }
        }
        None
    }

    fn observe(&mut self, msg: &Message) -> Result<(), SchedulerError> {
        let idx = msg.session_id as usize - 1;
        self.last_prover[idx] = message_digest(msg);
        self.sessions[idx].observe(msg)?;
        Ok(())
    }

    fn outcomes(&self) -> BTreeMap<SessionId, Outcome> {
        self.sessions.iter().map(|s| (s.id, s.outcome())).collect()
    }

    fn protocol(&self) -> &Arc<Protocol> {
        &self.protocol
    }

    fn tape(&self) -> u64 {
        self.tape
    }
}

/// Something that happened on the prover side while answering a message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProverEvent {
    /// A reveal of `v_round` was accepted.
    Learned { session: SessionId, round: u32, value: BitString },
    Committed { session: SessionId, round: u32, forced: bool },
    /// The preamble finished; `witness` says whether the prover can prove T′.
    EnteredBody { session: SessionId, witness: bool },
    Rejected { session: SessionId },
}

/// The prover side of all sessions.
pub trait ProverPool: Clone {
    fn respond(
        &mut self,
        msg: &Message,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<Option<Message>, PreambleError>;
}

/// Runs a [`ProverSession`] per session id, creating sessions on demand.
#[derive(Debug, Clone)]
pub struct SessionPool {
    protocol: Arc<Protocol>,
    strategy: ProverStrategy,
    sessions: BTreeMap<SessionId, ProverSession>,
}

impl SessionPool {
    pub fn new(protocol: Arc<Protocol>, strategy: ProverStrategy) -> Self {
        SessionPool { protocol, strategy, sessions: BTreeMap::new() }
    }

    pub fn session(&self, id: SessionId) -> Option<&ProverSession> {
        self.sessions.get(&id)
    }
}

/// Drives one prover session on one message, reporting what happened.
pub fn step_session(
    session: &mut ProverSession,
    msg: &Message,
    rng: &mut dyn RngCore,
    solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
    events: &mut Vec<ProverEvent>,
) -> Result<Option<Message>, PreambleError> {
    let id = session.id;
    match session.admit(msg)? {
        Admitted::Silent => Ok(None),
        Admitted::Reject => {
            events.push(ProverEvent::Rejected { session: id });
            Ok(Some(Message::new(id, msg.round_index, Payload::Abort)))
        }
        Admitted::Main(main) => {
            let m = session.protocol().m();
            if let MainPart::Reveal(i) = main {
                events.push(ProverEvent::Learned { session: id, round: i, value: session.revealed()[i as usize - 1].clone() });
                if i as usize == m {
                    events.push(ProverEvent::EnteredBody { session: id, witness: session.has_witness() });
                }
            }
            let mut forced = false;
            let reply = session.respond(main, rng, &mut |a| {
                let v = solve(id, a);
                forced = v.is_some();
                v
            })?;
            if let Some(Message { payload: Payload::PCommit { .. }, round_index, .. }) = &reply {
                events.push(ProverEvent::Committed { session: id, round: *round_index, forced });
            }
            Ok(reply)
        }
    }
}

impl ProverPool for SessionPool {
    fn respond(
        &mut self,
        msg: &Message,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<Option<Message>, PreambleError> {
        let protocol = &self.protocol;
        let strategy = &self.strategy;
        let session = self.sessions.entry(msg.session_id).or_insert_with(|| ProverSession::new(msg.session_id, protocol.clone(), strategy.clone()));
        step_session(session, msg, rng, solve, events)
    }
}

/// One realized preamble slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotEntry {
    pub slot: usize,
    pub session: SessionId,
    pub round: u32,
    /// The verifier message was a refused reveal.
    pub refused: bool,
    /// The prover's commitment in this slot was forced by the simulator.
    pub forced: bool,
}

/// The part of a live interaction that is restored on rewind.
#[derive(Debug, Clone)]
pub struct LiveState<B, P> {
    pub blackbox: B,
    pub pool: P,
    queue: VecDeque<Message>,
    halted: bool,
    t: u64,
    first_slot: HashMap<SessionId, usize>,
}

/// Marker for rewinding: restores the state and truncates the logs.
#[derive(Debug, Clone)]
pub struct Snapshot<B, P> {
    state: LiveState<B, P>,
    records: usize,
    slots: usize,
}

/// A running interaction with an append-only history.
#[derive(Debug, Clone)]
pub struct Live<B, P> {
    pub state: LiveState<B, P>,
    pub records: Vec<Record>,
    /// Per record: number of enclosing first runs when it was produced.
    pub tags: Vec<u32>,
    pub slots: Vec<SlotEntry>,
    /// Current tag for new records.
    pub tag: u32,
}

impl<B: VerifierBlackBox, P: ProverPool> Live<B, P> {
    pub fn new(blackbox: B, pool: P) -> Self {
        Live {
            state: LiveState { blackbox, pool, queue: VecDeque::new(), halted: false, t: 0, first_slot: HashMap::new() },
            records: Vec::new(),
            tags: Vec::new(),
            slots: Vec::new(),
            tag: 0,
        }
    }

    pub fn halted(&self) -> bool {
        self.state.halted
    }

    pub fn next_slot(&self) -> usize {
        self.slots.len() + 1
    }

    /// Slot of the session's opening message in the current history.
    pub fn first_slot(&self, session: SessionId) -> Option<usize> {
        self.state.first_slot.get(&session).copied()
    }

    pub fn snapshot(&self) -> Snapshot<B, P> {
        Snapshot { state: self.state.clone(), records: self.records.len(), slots: self.slots.len() }
    }

    pub fn restore(&mut self, snap: Snapshot<B, P>) {
        self.state = snap.state;
        self.records.truncate(snap.records);
        self.tags.truncate(snap.records);
        self.slots.truncate(snap.slots);
    }

    fn push(&mut self, direction: Direction, message: Message) {
        self.state.t += 1;
        self.records.push(Record { t: self.state.t, direction, message });
        self.tags.push(self.tag);
    }

    fn deliver(
        &mut self,
        msg: Message,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<(), SchedulerError> {
        let protocol = self.state.blackbox.protocol().clone();
        let slot_round = protocol.slot_round(&msg);
        let refused = matches!(&msg.payload, Payload::VReveal { randomness, .. } if randomness.is_empty());
        if let Some(round) = slot_round {
            let slot = self.slots.len() + 1;
            if round == 1 {
                self.state.first_slot.insert(msg.session_id, slot);
            }
            self.slots.push(SlotEntry { slot, session: msg.session_id, round, refused, forced: false });
        }
        let before = events.len();
        let reply = self.state.pool.respond(&msg, rng, solve, events)?;
        if slot_round.is_some() && events[before..].iter().any(|e| matches!(e, ProverEvent::Committed { forced: true, .. })) {
            self.slots.last_mut().expect("pushed above").forced = true;
        }
        self.push(Direction::VerifierToProver, msg);
        if let Some(r) = reply {
            self.state.blackbox.observe(&r)?;
            self.push(Direction::ProverToVerifier, r);
        }
        Ok(())
    }

    /// Delivers messages outside the slot order until a slot message is at
    /// the head of the queue. Returns false once the adversary halts.
    pub fn reach_slot(
        &mut self,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<bool, SchedulerError> {
        loop {
            if self.state.halted {
                return Ok(false);
            }
            match self.state.queue.front() {
                Some(m) if self.state.blackbox.protocol().slot_round(m).is_some() => return Ok(true),
                Some(_) => {
                    let m = self.state.queue.pop_front().expect("non-empty");
                    self.deliver(m, rng, solve, events)?;
                }
                None => match self.state.blackbox.next() {
                    Some(batch) => self.state.queue.extend(batch),
                    None => self.state.halted = true,
                },
            }
        }
    }

    /// Plays the next slot: its verifier message and the prover's answer.
    pub fn play_slot(
        &mut self,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<bool, SchedulerError> {
        if !self.reach_slot(rng, solve, events)? {
            return Ok(false);
        }
        let m = self.state.queue.pop_front().expect("slot message at head");
        self.deliver(m, rng, solve, events)?;
        Ok(true)
    }

    /// Runs the interaction until the adversary halts.
    pub fn drain(
        &mut self,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<(), SchedulerError> {
        while self.play_slot(rng, solve, events)? {}
        Ok(())
    }

    pub fn into_transcript(self) -> Transcript {
        let outcomes = self.state.blackbox.outcomes();
        let tape = self.state.blackbox.tape();
        Transcript { records: self.records, tape, outcomes }
    }
}

/// The public record of an interaction plus the verifiers' verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<Record>,
    pub tape: u64,
    pub outcomes: BTreeMap<SessionId, Outcome>,
}

impl Transcript {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), SchedulerError> {
        for r in &self.records {
            let line = serde_json::to_string(&RecordLine::from(r)).expect("record lines serialize");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    /// Reads records back; outcomes are not part of the file.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<Record>, SchedulerError> {
        let mut out = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rl: RecordLine = serde_json::from_str(&line).map_err(|e| SchedulerError::Json { line: i + 1, msg: e.to_string() })?;
            out.push(rl.to_record()?);
        }
        Ok(out)
    }

    pub fn schedule(&self, protocol: &Protocol) -> Schedule {
        slotify(protocol, &self.records)
    }
}

/// Numbers the preamble verifier messages in order of appearance.
pub fn slotify(protocol: &Protocol, records: &[Record]) -> Schedule {
    Schedule {
        slots: records
            .iter()
            .filter(|r| r.direction == Direction::VerifierToProver)
            .filter_map(|r| protocol.slot_round(&r.message).map(|round| (r.message.session_id, round)))
            .collect(),
    }
}

/// Runs the real, non-rewinding interaction to completion.
pub fn run_with_pool<B: VerifierBlackBox, P: ProverPool>(blackbox: B, pool: P, prover_seed: u64) -> Result<Transcript, SchedulerError> {
    let mut live = Live::new(blackbox, pool);
    let mut rng = seed::rng(prover_seed);
    let mut events = Vec::new();
    live.drain(&mut rng, &mut |_, _| None, &mut events)?;
    Ok(live.into_transcript())
}

/// The real prover (honest or cheating) against an adversary.
pub fn run_interaction(protocol: &Arc<Protocol>, adversary: Adversary, prover: ProverStrategy, prover_seed: u64) -> Result<Transcript, SchedulerError> {
    run_with_pool(adversary, SessionPool::new(protocol.clone(), prover), prover_seed)
}

/// Result of checking a transcript from its public messages alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub sessions: usize,
    pub openings_checked: usize,
    pub bodies_entered: usize,
    pub bodies_accepted: usize,
    pub problems: Vec<String>,
}

impl VerifyReport {
    /// All openings valid, every abort justified, every entered body accepted.
    pub fn ok(&self) -> bool {
        self.problems.is_empty() && self.bodies_entered == self.bodies_accepted
    }
}

#[derive(Default)]
struct SessionView {
    group: Option<Arc<Group>>,
    rho: Option<BitString>,
    v_commitments: Vec<BitString>,
    pair_commitments: Vec<BitString>,
    p_commitments: Vec<BitString>,
    revealed: Vec<BitString>,
    expect_abort: bool,
    aborted: bool,
    in_body: bool,
    body: Vec<BodyPayload>,
}

/// Re-verifies a transcript offline: every reveal's opening, every abort,
/// the preamble order and every body.
pub fn verify_transcript(protocol: &Protocol, records: &[Record]) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut views: BTreeMap<SessionId, SessionView> = BTreeMap::new();
    let k = protocol.k();
    let m = protocol.m();
    for (n, rec) in records.iter().enumerate() {
        let msg = &rec.message;
        let view = views.entry(msg.session_id).or_default();
        let mut problem = |s: String| report.problems.push(format!("record {n} session {}: {s}", msg.session_id));
        if n > 0 && rec.t <= records[n - 1].t {
            problem("time does not increase".into());
        }
        match (rec.direction, &msg.payload) {
            (_, _) if view.aborted && rec.direction == Direction::ProverToVerifier => problem("prover spoke after aborting".into()),
            (Direction::VerifierToProver, Payload::Select { .. }) => {}
            (Direction::ProverToVerifier, Payload::Init { h }) => match protocol.group.with_h(to_biguint(h)) {
                Ok(g) => view.group = Some(Arc::new(g)),
                Err(e) => problem(format!("bad initialization message: {e}")),
            },
            (Direction::VerifierToProver, Payload::VCommit { rho, commitments, pair_commitments, .. }) => {
                view.rho = Some(rho.clone());
                view.v_commitments = commitments.clone();
                view.pair_commitments = pair_commitments.clone();
            }
            (Direction::ProverToVerifier, Payload::PCommit { commitment }) => {
                if msg.round_index as usize != view.p_commitments.len() + 1 {
                    problem(format!("commitment for round {} out of order", msg.round_index));
                }
                view.p_commitments.push(commitment.clone());
            }
            (Direction::VerifierToProver, Payload::VReveal { value, randomness }) => {
                let i = msg.round_index as usize;
                if i == 0 || i > view.v_commitments.len() || view.p_commitments.len() < i {
                    problem(format!("reveal of v{i} before the prover committed to p{i}"));
                    continue;
                }
                let group = view.group.clone().unwrap_or_else(|| protocol.group.clone());
                let c = Commitment { tag: SchemeTag::Hiding, payload: view.v_commitments[i - 1].clone() };
                let valid = verify_open(&protocol.v_params(&group), &c, &Opening { message: value.clone(), randomness: randomness.clone() });
                report.openings_checked += 1;
                if valid {
                    view.revealed.push(value.clone());
                    if i == m {
                        view.in_body = true;
                        report.bodies_entered += 1;
                    }
                } else {
                    view.expect_abort = true;
                }
            }
            (Direction::ProverToVerifier, Payload::Abort) => {
                if !view.expect_abort && !view.in_body {
                    problem("abort without an invalid reveal".into());
                }
                view.aborted = true;
            }
            (_, Payload::Body(b)) if view.in_body => view.body.push(b.clone()),
            (d, _) => problem(format!("unexpected {:?} in direction {d:?}", msg.kind)),
        }
        if view.expect_abort && rec.direction == Direction::ProverToVerifier && !view.aborted {
            report.problems.push(format!("record {n} session {}: prover continued after an invalid reveal", msg.session_id));
        }
    }
    for (id, view) in views {
        report.sessions += 1;
        if view.expect_abort && !view.aborted {
            report.problems.push(format!("session {id}: invalid reveal never answered by an abort"));
        }
        if !view.in_body {
            continue;
        }
        let Some(rho) = view.rho.clone() else { continue };
        let Ok(params) = binding_params(k, rho.clone(), protocol.expander) else {
            report.problems.push(format!("session {id}: malformed ρ"));
            continue;
        };
        let statement = Arc::new(CompoundStatement {
            base_graph: protocol.base_graph.clone(),
            prover_params: params,
            p_commitments: view.p_commitments.iter().map(|c| Commitment { tag: SchemeTag::Binding, payload: c.clone() }).collect(),
            revealed: view.revealed.clone(),
        });
        let challenges = if view.pair_commitments.is_empty() {
            Challenges::Edges { repetitions: 0 }
        } else {
            Challenges::Pairs { commitments: view.pair_commitments.clone(), rho_color: rho.slice(0, 6 * k) }
        };
        let ctx = BodyContext {
            tag: protocol.config.body_tag,
            k,
            group: view.group.clone().unwrap_or_else(|| protocol.group.clone()),
            target: BodyTarget::Compound(statement),
            challenges,
        };
        match check_body_transcript(ctx, &view.body) {
            Ok(true) => report.bodies_accepted += 1,
            Ok(false) => report.problems.push(format!("session {id}: body does not verify")),
            Err(e) => report.problems.push(format!("session {id}: body check failed: {e}")),
        }
    }
    report
}

/// Per-session outcome counts, for comparing interaction distributions.
pub fn outcome_counts(transcripts: &[Transcript]) -> BTreeMap<Outcome, usize> {
    let mut out = BTreeMap::new();
    for t in transcripts {
        for o in t.outcomes.values() {
            *out.entry(*o).or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::BodyTag;
    use crate::graph::Graph;
    use crate::preamble::SecurityConfig;

    fn protocol(sessions: usize, m: usize) -> Arc<Protocol> {
        Protocol::new(SecurityConfig::new(8, m, sessions, BodyTag::Oracle), Graph::triangle(), Group::toy61()).unwrap()
    }

    #[test]
    fn schedule_patterns() {
        let rr = Schedule::generate(&ScheduleKind::RoundRobin, 2, 2, 0);
        assert_eq!(rr.slots, vec![(1, 1), (2, 1), (1, 2), (2, 2)]);
        let nested = Schedule::generate(&ScheduleKind::Nested, 2, 2, 0);
        assert_eq!(nested.slots, vec![(1, 1), (2, 1), (2, 2), (1, 2)]);
        let ri = Schedule::generate(&ScheduleKind::RandomInterleave, 3, 4, 9);
        ri.validate(4).unwrap();
        assert_eq!(ri.len(), 12);
    }

    #[test]
    fn strategy_parsing() {
        let s: Strategy = "nested+abort_prob(0.5)".parse().unwrap();
        assert_eq!(s, Strategy::new(ScheduleKind::Nested, AbortPolicy::Prob(0.5)));
        let s: Strategy = "abort_prob(0.25)".parse().unwrap();
        assert_eq!(s.schedule, ScheduleKind::RoundRobin);
        assert!("zigzag".parse::<Strategy>().is_err());
        assert!("abort_prob(2)".parse::<Strategy>().is_err());
        assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
    }

    #[test]
    fn schedule_file_round_trip() {
        let s = Schedule::generate(&ScheduleKind::Nested, 3, 3, 0);
        assert_eq!(Schedule::parse(&s.to_text()).unwrap(), s);
        assert!(Schedule::parse("2 1 1\n").is_err());
    }

    #[test]
    fn honest_nested_run_slotifies_to_the_pattern() {
        let proto = protocol(2, 2);
        let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::Nested), 5);
        let t = run_interaction(&proto, adv, ProverStrategy::Honest(vec![0, 1, 2]), 1).unwrap();
        assert_eq!(t.schedule(&proto).slots, vec![(1, 1), (2, 1), (2, 2), (1, 2)]);
        assert!(t.outcomes.values().all(|o| *o == Outcome::Accepted));
        let report = verify_transcript(&proto, &t.records);
        assert!(report.ok(), "{report:?}");
        assert_eq!(report.bodies_entered, 2);
    }

    #[test]
    fn certain_refusal_aborts_everything_at_round_one() {
        let proto = protocol(3, 3);
        let adv = make_adversary(&proto, Strategy::new(ScheduleKind::RoundRobin, AbortPolicy::Prob(1.0)), 5);
        let t = run_interaction(&proto, adv, ProverStrategy::Honest(vec![0, 1, 2]), 1).unwrap();
        assert!(t.outcomes.values().all(|o| *o == Outcome::Aborted));
        let sched = t.schedule(&proto);
        assert_eq!(sched.len(), 6);
        assert!(verify_transcript(&proto, &t.records).ok());
    }

    #[test]
    fn transcript_jsonl_round_trip() {
        let proto = protocol(2, 2);
        let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::RoundRobin), 3);
        let t = run_interaction(&proto, adv, ProverStrategy::Honest(vec![0, 1, 2]), 1).unwrap();
        let back = Transcript::read_jsonl(t.to_jsonl().as_bytes()).unwrap();
        assert_eq!(back, t.records);
    }

    #[test]
    fn tampered_reveal_fails_offline_verification() {
        let proto = protocol(1, 2);
        let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::RoundRobin), 3);
        let mut t = run_interaction(&proto, adv, ProverStrategy::Honest(vec![0, 1, 2]), 1).unwrap();
        for r in &mut t.records {
            if let Payload::VReveal { value, .. } = &mut r.message.payload {
                value.flip(0);
                break;
            }
        }
        assert!(!verify_transcript(&proto, &t.records).ok());
    }
}
