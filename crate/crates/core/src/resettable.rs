//! Resettable sessions: provers with fixed random tapes that the adversary
//! may rerun at will.
//!
//! An incarnation `(i, j, k)` pairs input `i` with gatekeeper tape `j` and
//! logic tape `k`. Every session opens with the adversary selecting an
//! incarnation, the gatekeeper (P₁) answering with the receiver randomness
//! for the verifier's commitments, and then the determining message: it
//! carries a digest of those two messages, the commitments to `v₁..vₘ` and
//! the commitments to the body's challenge pairs, so every later verifier
//! message is fixed by it. P₁ checks each later message against those
//! commitments and forwards only the main part to the logic (P₂), whose
//! coins are a function of its tape and the main parts seen so far.

use crate::bits::BitString;
use crate::body::BodyTag;
use crate::commitments::{from_biguint, to_biguint, Group};
use crate::graph::{Graph, GraphError};
use crate::message::{Direction, Message, Payload, Record, RecordLine, SessionId};
use crate::preamble::{reduced_vertex_count, MainPart, Outcome, PreambleError, Protocol, ProverSession, ProverStrategy, SecurityConfig, VerifierMaterial, VerifierSession};
use crate::scheduler::{run_with_pool, verify_transcript, ProverEvent, ProverPool, SchedulerError, Transcript, VerifierBlackBox, VerifyReport};
use crate::seed;
use crate::simulator::{simulate_with, SimOptions, SimRun};
use num_bigint::BigUint;
use num_traits::One;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResetError {
    #[error("incarnation index {index} out of range (bound {bound})")]
    Range { index: usize, bound: usize },
    #[error("hybrid mode: tape index k = {k} used by incarnations {first:?} and {second:?}")]
    Hybrid { k: u32, first: [u32; 3], second: [u32; 3] },
    #[error("protocol-order error: {0}")]
    Order(String),
    #[error("bad input reference {0:?}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Preamble(#[from] PreambleError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error("registry file: {0}")]
    Json(String),
}

/// `triangle`, `k4`, `complete:N`, `cycle:N`, or a DIMACS file path.
pub fn resolve_graph(reference: &str) -> Result<Graph, ResetError> {
    let num = |s: &str| s.parse::<usize>().map_err(|_| ResetError::Input(reference.into()));
    match reference.split_once(':') {
        None if reference == "triangle" => Ok(Graph::triangle()),
        None if reference == "k4" => Ok(Graph::complete(4)),
        Some(("complete", n)) => Ok(Graph::complete(num(n)?)),
        Some(("cycle", n)) if num(n)? >= 3 => Ok(Graph::cycle(num(n)?)),
        _ => {
            let text = std::fs::read_to_string(reference).map_err(|_| ResetError::Input(reference.into()))?;
            Ok(Graph::parse_dimacs(&text)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryFile {
    pub seed: u64,
    pub inputs: Vec<String>,
    pub tape_counts: [usize; 2],
}

/// Inputs and tape counts, fixed before any session.
#[derive(Debug, Clone)]
pub struct Registry {
    pub seed: u64,
    pub inputs: Vec<String>,
    graphs: Vec<Arc<Graph>>,
    witnesses: Vec<Option<Vec<u8>>>,
    /// Number of P₁ tapes and of P₂ tapes.
    pub tape_counts: [usize; 2],
}

impl Registry {
    pub fn new(seed: u64, inputs: Vec<String>, tape_counts: [usize; 2]) -> Result<Self, ResetError> {
        let graphs: Vec<Arc<Graph>> = inputs.iter().map(|r| resolve_graph(r).map(Arc::new)).collect::<Result<_, _>>()?;
        let witnesses = graphs.iter().map(|g| g.solve_3col()).collect();
        Ok(Registry { seed, inputs, graphs, witnesses, tape_counts })
    }

    pub fn from_json(text: &str) -> Result<Self, ResetError> {
        let f: RegistryFile = serde_json::from_str(text).map_err(|e| ResetError::Json(e.to_string()))?;
        Registry::new(f.seed, f.inputs, f.tape_counts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RegistryFile { seed: self.seed, inputs: self.inputs.clone(), tape_counts: self.tape_counts }).expect("plain data")
    }

    pub fn graph(&self, i: usize) -> &Arc<Graph> {
        &self.graphs[i]
    }
}

/// A prover instance with fixed input and tapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incarnation {
    pub index: [u32; 3],
    /// Key of P₁'s tape.
    pub phi1: u64,
    /// Key of P₂'s tape.
    pub phi2: u64,
    pub graph: Arc<Graph>,
    pub witness: Option<Vec<u8>>,
}

pub fn make_incarnation(registry: &Registry, i: usize, j: usize, k: usize) -> Result<Incarnation, ResetError> {
    let check = |index: usize, bound: usize| if index < bound { Ok(()) } else { Err(ResetError::Range { index, bound }) };
    check(i, registry.inputs.len())?;
    check(j, registry.tape_counts[0])?;
    check(k, registry.tape_counts[1])?;
    Ok(Incarnation {
        index: [i as u32, j as u32, k as u32],
        phi1: seed::derive(registry.seed, "phi1", j as u64),
        phi2: seed::derive(registry.seed, "phi2", k as u64),
        graph: registry.graphs[i].clone(),
        witness: registry.witnesses[i].clone(),
    })
}

/// Digest binding the determining message to the selection and the
/// initialization message.
pub fn prefix_digest(select: &Message, init: &Message) -> [u8; 32] {
    let mut h = Sha256::new();
    for m in [select, init] {
        h.update([m.kind as u8]);
        h.update(m.payload_bytes());
    }
    h.finalize().into()
}

/// P₁'s initialization message: `h = g^t` with t drawn from its tape.
pub fn init_message(session: SessionId, incarnation: &Incarnation, group: &Group) -> Message {
    let bytes = seed::prf_bytes(&incarnation.phi1.to_le_bytes(), &[b"init"]);
    let t = BigUint::from_bytes_le(&bytes) % (&group.q - BigUint::one()) + BigUint::one();
    let h = group.pow(&group.g, &t);
    Message::new(session, 0, Payload::Init { h: from_biguint(&h, group.element_bits()) })
}

/// Settings shared by every session of a resetting run.
#[derive(Debug, Clone)]
pub struct ResetConfig {
    pub security: SecurityConfig,
    pub group: Arc<Group>,
    /// Committed challenge pairs per session; `None` means n⁴ for an
    /// n-vertex input graph.
    pub pair_count: Option<usize>,
    pub hybrid: bool,
}

impl ResetConfig {
    pub fn new(k: usize, m: usize, body_tag: BodyTag) -> Self {
        ResetConfig { security: SecurityConfig::new(k, m, 1, body_tag), group: Group::toy61(), pair_count: None, hybrid: false }
    }

    pub fn protocol_for(&self, graph: &Arc<Graph>) -> Result<Arc<Protocol>, ResetError> {
        Ok(Protocol::new(self.security.clone(), (**graph).clone(), self.group.clone())?)
    }

    /// `(count, vertex bound)` of the committed pairs, when the body uses them.
    pub fn pair_space(&self, graph: &Arc<Graph>) -> Result<Option<(usize, u32)>, ResetError> {
        if self.security.body_tag != BodyTag::G3c {
            return Ok(None);
        }
        let n = graph.num_vertices();
        let count = self.pair_count.unwrap_or(n.pow(4));
        let bound = reduced_vertex_count(graph, self.security.m, self.security.k)?;
        Ok(Some((count, bound as u32)))
    }
}

/// Decision of the gatekeeper on one verifier message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum P1Decision {
    /// P₁ answers by itself (the initialization message).
    Reply(Message),
    /// The main part goes to P₂.
    Accept(MainPart),
    Abort,
    Silent,
}

#[derive(Debug, Clone)]
enum Stage {
    AwaitSelect,
    AwaitDetermining { prefix: [u8; 32] },
    Running,
}

/// One admissible session of an incarnation.
#[derive(Debug, Clone)]
pub struct AdmissibleSession {
    pub id: SessionId,
    pub incarnation: Option<Arc<Incarnation>>,
    config: Arc<ResetConfig>,
    stage: Stage,
    inner: Option<ProverSession>,
    /// Digest of the main parts P₂ has received.
    mains: Sha256,
}

impl AdmissibleSession {
    pub fn new(id: SessionId, config: Arc<ResetConfig>) -> Self {
        AdmissibleSession { id, incarnation: None, config, stage: Stage::AwaitSelect, inner: None, mains: Sha256::new() }
    }

    pub fn inner(&self) -> Option<&ProverSession> {
        self.inner.as_ref()
    }

    /// P₁: selection, the determining message's prefix, and every opening.
    pub fn p1_step(&mut self, msg: &Message, registry: &Registry, strategy: &dyn Fn(&Incarnation) -> ProverStrategy) -> Result<P1Decision, ResetError> {
        match (&self.stage, &msg.payload) {
            (Stage::AwaitSelect, Payload::Select { incarnation: [i, j, k] }) => {
                let inc = Arc::new(make_incarnation(registry, *i as usize, *j as usize, *k as usize)?);
                let init = init_message(self.id, &inc, &self.config.group);
                let Payload::Init { h } = &init.payload else { unreachable!() };
                let group = Arc::new(self.config.group.with_h(to_biguint(h)).map_err(|e| ResetError::Order(e.to_string()))?);
                let protocol = self.config.protocol_for(&inc.graph)?;
                self.inner = Some(ProverSession::with_group(self.id, protocol, strategy(&inc), group));
                self.stage = Stage::AwaitDetermining { prefix: prefix_digest(msg, &init) };
                self.incarnation = Some(inc);
                Ok(P1Decision::Reply(init))
            }
            (Stage::AwaitSelect, _) => Err(ResetError::Order(format!("session {}: {:?} before selecting an incarnation", self.id, msg.kind))),
            (Stage::AwaitDetermining { prefix }, Payload::VCommit { prefix: got, .. }) => {
                if *got != Some(*prefix) {
                    self.stage = Stage::Running;
                    self.inner.as_mut().expect("created on selection").admit(&Message::new(self.id, 0, Payload::Abort)).ok();
                    return Ok(P1Decision::Abort);
                }
                self.stage = Stage::Running;
                self.admit_inner(msg)
            }
            (Stage::AwaitDetermining { .. }, _) => Err(ResetError::Order(format!("session {}: {:?} before the determining message", self.id, msg.kind))),
            (Stage::Running, _) => self.admit_inner(msg),
        }
    }

    fn admit_inner(&mut self, msg: &Message) -> Result<P1Decision, ResetError> {
        let inner = self.inner.as_mut().expect("created on selection");
        Ok(match inner.admit(msg)? {
            crate::preamble::Admitted::Main(main) => {
                self.mains.update(main_bytes(msg));
                P1Decision::Accept(main)
            }
            crate::preamble::Admitted::Reject => P1Decision::Abort,
            crate::preamble::Admitted::Silent => P1Decision::Silent,
        })
    }

    /// P₂'s coins for its next answer: its tape applied to the mains so far.
    pub fn p2_rng(&self) -> seed::Rng {
        let digest: [u8; 32] = self.mains.clone().finalize().into();
        let inc = self.incarnation.as_ref().expect("selected");
        seed::rng(seed::prf_u64(&inc.phi2.to_le_bytes(), &[&digest]))
    }
}

/// The main part of a verifier message: everything except the opening
/// randomness that authenticates it.
fn main_bytes(msg: &Message) -> Vec<u8> {
    match &msg.payload {
        Payload::VCommit { rho, commitments, pair_commitments, .. } => {
            let mut out = rho.to_bytes();
            for c in commitments.iter().chain(pair_commitments) {
                out.extend(c.to_bytes());
            }
            out
        }
        Payload::VReveal { value, .. } => value.to_bytes(),
        _ => msg.payload_bytes(),
    }
}

/// Where P₂'s coins come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coins {
    /// Fixed tapes: the real resettable prover.
    Tapes,
    /// The caller's generator (a simulator playing the incarnations).
    Caller,
}

/// All admissible sessions of a run.
#[derive(Debug, Clone)]
pub struct IncarnationPool {
    registry: Arc<Registry>,
    config: Arc<ResetConfig>,
    coins: Coins,
    /// Provers without a witness (the simulator) ignore the registry's witnesses.
    solver: bool,
    sessions: BTreeMap<SessionId, AdmissibleSession>,
    /// k index → incarnation first seen with it, in hybrid mode.
    k_owner: HashMap<u32, [u32; 3]>,
}

impl IncarnationPool {
    pub fn new(registry: Arc<Registry>, config: Arc<ResetConfig>, coins: Coins, solver: bool) -> Self {
        IncarnationPool { registry, config, coins, solver, sessions: BTreeMap::new(), k_owner: HashMap::new() }
    }

    pub fn session(&self, id: SessionId) -> Option<&AdmissibleSession> {
        self.sessions.get(&id)
    }
}

impl ProverPool for IncarnationPool {
    fn respond(
        &mut self,
        msg: &Message,
        rng: &mut dyn RngCore,
        solve: &mut dyn FnMut(SessionId, u32) -> Option<BitString>,
        events: &mut Vec<ProverEvent>,
    ) -> Result<Option<Message>, PreambleError> {
        if let (true, Payload::Select { incarnation }) = (self.config.hybrid, &msg.payload) {
            let owner = *self.k_owner.entry(incarnation[2]).or_insert(*incarnation);
            if owner != *incarnation {
                return Err(PreambleError::Config(ResetError::Hybrid { k: incarnation[2], first: owner, second: *incarnation }.to_string()));
            }
        }
        let config = self.config.clone();
        let session = self.sessions.entry(msg.session_id).or_insert_with(|| AdmissibleSession::new(msg.session_id, config));
        let solver = self.solver;
        let strategy = |inc: &Incarnation| match (&inc.witness, solver) {
            (Some(w), false) => ProverStrategy::Honest(w.clone()),
            (_, true) => ProverStrategy::Solver,
            (None, false) => ProverStrategy::Cheat(vec![0; inc.graph.num_vertices()]),
        };
        let decision = session.p1_step(msg, &self.registry, &strategy).map_err(|e| match e {
            ResetError::Preamble(p) => p,
            other => PreambleError::Order { session: msg.session_id, detail: other.to_string() },
        })?;
        match decision {
            P1Decision::Reply(m) => Ok(Some(m)),
            P1Decision::Silent => Ok(None),
            P1Decision::Abort => {
                events.push(ProverEvent::Rejected { session: msg.session_id });
                Ok(Some(Message::new(msg.session_id, msg.round_index, Payload::Abort)))
            }
            P1Decision::Accept(main) => {
                let mut tape_rng = session.p2_rng();
                let coins: &mut dyn RngCore = match self.coins {
                    Coins::Tapes => &mut tape_rng,
                    Coins::Caller => rng,
                };
                let inner = session.inner.as_mut().expect("created on selection");
                if let MainPart::Reveal(i) = main {
                    events.push(ProverEvent::Learned { session: msg.session_id, round: i, value: inner.revealed()[i as usize - 1].clone() });
                    if i as usize == inner.protocol().m() {
                        events.push(ProverEvent::EnteredBody { session: msg.session_id, witness: inner.has_witness() });
                    }
                }
                let id = msg.session_id;
                let mut forced = false;
                let reply = inner.respond(main, coins, &mut |a| {
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
}

/// One session the resetting adversary opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionPlan {
    pub incarnation: [u32; 3],
    /// Seed of the verifier's secrets in this session; equal seeds against
    /// the same incarnation replay identical messages.
    pub material_seed: u64,
    /// Refuse the reveal of this round instead of opening it.
    pub diverge_at: Option<u32>,
}

#[derive(Debug, Clone)]
enum ResetVerifier {
    Fresh,
    AwaitInit(Message),
    Running(Box<VerifierSession>),
    Dead,
}

/// An adversary that opens planned sessions against incarnations,
/// interleaving their messages round-robin.
#[derive(Debug, Clone)]
pub struct ResettingAdversary {
    config: Arc<ResetConfig>,
    registry: Arc<Registry>,
    protocols: Arc<Vec<Arc<Protocol>>>,
    pair_spaces: Arc<Vec<Option<(usize, u32)>>>,
    plans: Arc<Vec<SessionPlan>>,
    states: Vec<ResetVerifier>,
    cursor: usize,
    tape: u64,
}

impl ResettingAdversary {
    pub fn new(registry: Arc<Registry>, config: Arc<ResetConfig>, plans: Vec<SessionPlan>, tape: u64) -> Result<Self, ResetError> {
        let protocols: Vec<Arc<Protocol>> = (0..registry.inputs.len()).map(|i| config.protocol_for(registry.graph(i))).collect::<Result<_, _>>()?;
        let pair_spaces = (0..registry.inputs.len()).map(|i| config.pair_space(registry.graph(i))).collect::<Result<_, _>>()?;
        for p in &plans {
            make_incarnation(&registry, p.incarnation[0] as usize, p.incarnation[1] as usize, p.incarnation[2] as usize)?;
        }
        let states = vec![ResetVerifier::Fresh; plans.len()];
        Ok(ResettingAdversary { config, registry, protocols: Arc::new(protocols), pair_spaces: Arc::new(pair_spaces), plans: Arc::new(plans), states, cursor: 0, tape })
    }

    pub fn plans(&self) -> &[SessionPlan] {
        &self.plans
    }

    fn emit(&mut self, idx: usize) -> Option<Message> {
        let id = idx as SessionId + 1;
        match &mut self.states[idx] {
            ResetVerifier::Fresh => {
                let m = Message::new(id, 0, Payload::Select { incarnation: self.plans[idx].incarnation });
                self.states[idx] = ResetVerifier::AwaitInit(m.clone());
                Some(m)
            }
            ResetVerifier::Running(v) if v.ready() => {
                let refuse = v.pending_reveal().is_some() && v.pending_reveal() == self.plans[idx].diverge_at;
                v.next_message(refuse)
            }
            _ => None,
        }
    }
}

impl VerifierBlackBox for ResettingAdversary {
    fn next(&mut self) -> Option<Vec<Message>> {
        let n = self.states.len();
        for step in 0..n {
            let idx = (self.cursor + step) % n;
            if let Some(m) = self.emit(idx) {
                self.cursor = (idx + 1) % n;
                return Some(vec![m]);
            }
        }
        None
    }

    fn observe(&mut self, msg: &Message) -> Result<(), SchedulerError> {
        let idx = msg.session_id as usize - 1;
        let plan = self.plans[idx];
        let input = plan.incarnation[0] as usize;
        match (&mut self.states[idx], &msg.payload) {
            (ResetVerifier::AwaitInit(select), Payload::Init { h }) => {
                let prefix = prefix_digest(select, msg);
                self.states[idx] = match self.config.group.with_h(to_biguint(h)) {
                    Ok(g) => {
                        let group = Arc::new(g);
                        let protocol = &self.protocols[input];
                        let material = VerifierMaterial::generate(protocol, &group, seed::derive(self.tape, "material", plan.material_seed), self.pair_spaces[input]);
                        let mut v = VerifierSession::new(msg.session_id, protocol.clone(), group, Arc::new(material));
                        v.set_prefix(prefix);
                        ResetVerifier::Running(Box::new(v))
                    }
                    Err(_) => ResetVerifier::Dead,
                };
                Ok(())
            }
            (ResetVerifier::Running(v), _) => Ok(v.observe(msg)?),
            (_, Payload::Abort) => {
                self.states[idx] = ResetVerifier::Dead;
                Ok(())
            }
            _ => Err(SchedulerError::Protocol(PreambleError::Order { session: msg.session_id, detail: format!("unexpected {:?}", msg.kind) })),
        }
    }

    fn outcomes(&self) -> BTreeMap<SessionId, Outcome> {
        self.states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let o = match s {
                    ResetVerifier::Running(v) => v.outcome(),
                    ResetVerifier::Dead => Outcome::Aborted,
                    _ => Outcome::Unfinished,
                };
                (i as SessionId + 1, o)
            })
            .collect()
    }

    fn protocol(&self) -> &Arc<Protocol> {
        &self.protocols[0]
    }

    fn tape(&self) -> u64 {
        self.tape
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: SessionId,
    pub incarnation: [u32; 3],
    /// How many earlier sessions used the same incarnation.
    pub reset_index: usize,
}

#[derive(Debug, Clone)]
pub struct ResetTranscript {
    pub transcript: Transcript,
    pub sessions: Vec<SessionInfo>,
}

#[derive(Serialize)]
struct ResetRecordLine<'a> {
    #[serde(flatten)]
    record: RecordLine,
    incarnation: &'a [u32; 3],
    reset_index: usize,
}

impl ResetTranscript {
    /// Transcript lines extended with the session's incarnation and reset index.
    pub fn to_jsonl(&self) -> String {
        let info: HashMap<SessionId, &SessionInfo> = self.sessions.iter().map(|s| (s.session_id, s)).collect();
        let mut out = String::new();
        for r in &self.transcript.records {
            let s = info[&r.message.session_id];
            let line = ResetRecordLine { record: RecordLine::from(r), incarnation: &s.incarnation, reset_index: s.reset_index };
            out += &serde_json::to_string(&line).expect("plain data");
            out.push('\n');
        }
        out
    }

    /// The records of one session, without session ids and times, for
    /// comparing sessions with each other.
    pub fn session_view(&self, id: SessionId) -> Vec<(Direction, Vec<u8>)> {
        self.transcript
            .records
            .iter()
            .filter(|r| r.message.session_id == id)
            .map(|r| {
                let mut bytes = vec![r.message.kind as u8];
                bytes.extend(r.message.round_index.to_le_bytes());
                bytes.extend(r.message.payload_bytes());
                (r.direction, bytes)
            })
            .collect()
    }
}

fn session_infos(plans: &[SessionPlan]) -> Vec<SessionInfo> {
    let mut seen: HashMap<[u32; 3], usize> = HashMap::new();
    plans
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = seen.entry(p.incarnation).or_insert(0);
            let info = SessionInfo { session_id: i as SessionId + 1, incarnation: p.incarnation, reset_index: *c };
            *c += 1;
            info
        })
        .collect()
}

/// In hybrid mode no P₂ tape may serve two distinct incarnations.
pub fn check_hybrid(plans: &[SessionPlan]) -> Result<(), ResetError> {
    let mut owner: HashMap<u32, [u32; 3]> = HashMap::new();
    for p in plans {
        let first = *owner.entry(p.incarnation[2]).or_insert(p.incarnation);
        if first != p.incarnation {
            return Err(ResetError::Hybrid { k: p.incarnation[2], first, second: p.incarnation });
        }
    }
    Ok(())
}

/// Runs the resetting adversary against the real incarnations.
pub fn resetting_run(adversary: ResettingAdversary) -> Result<ResetTranscript, ResetError> {
    if adversary.config.hybrid {
        check_hybrid(&adversary.plans)?;
    }
    let sessions = session_infos(&adversary.plans);
    let pool = IncarnationPool::new(adversary.registry.clone(), adversary.config.clone(), Coins::Tapes, false);
    let transcript = run_with_pool(adversary, pool, 0)?;
    Ok(ResetTranscript { transcript, sessions })
}

/// Runs the ordinary simulator against the resetting adversary, playing
/// every incarnation without witnesses.
pub fn simulate_resetting(adversary: ResettingAdversary, seed_value: u64) -> Result<(SimRun, Vec<SessionInfo>), ResetError> {
    if adversary.config.hybrid {
        check_hybrid(&adversary.plans)?;
    }
    let sessions = session_infos(&adversary.plans);
    let slots = adversary.plans.len() * adversary.config.security.m;
    let pool = IncarnationPool::new(adversary.registry.clone(), adversary.config.clone(), Coins::Caller, true);
    let run = simulate_with(adversary, pool, slots, SimOptions { seed: seed_value, trace: false })?;
    Ok((run, sessions))
}

/// Offline check of every session against its own input graph.
pub fn verify_reset_transcript(t: &ResetTranscript, registry: &Registry, config: &ResetConfig) -> Result<VerifyReport, ResetError> {
    let mut total = VerifyReport::default();
    for info in &t.sessions {
        let protocol = config.protocol_for(registry.graph(info.incarnation[0] as usize))?;
        let records: Vec<Record> = t.transcript.records.iter().filter(|r| r.message.session_id == info.session_id).cloned().collect();
        let r = verify_transcript(&protocol, &records);
        total.sessions += r.sessions;
        total.openings_checked += r.openings_checked;
        total.bodies_entered += r.bodies_entered;
        total.bodies_accepted += r.bodies_accepted;
        total.problems.extend(r.problems);
    }
    Ok(total)
}

/// Surviving challenge edges of a session's committed pairs, against the
/// body's repetition count; a small count means a weak body.
pub fn surviving_edges(t: &ResetTranscript, id: SessionId) -> Option<usize> {
    t.transcript.records.iter().find_map(|r| match &r.message.payload {
        Payload::Body(crate::message::BodyPayload::EndpointOpen { opens }) if r.message.session_id == id => Some(opens.len()),
        _ => None,
    })
}

/// Makes P₁ face a tampered opening for one round: returns whether P₁
/// accepted a main part different from the true one.
pub fn forge_attempt(session: &AdmissibleSession, genuine: &Message, rng: &mut dyn RngCore, registry: &Registry) -> Result<bool, ResetError> {
    let Payload::VReveal { value, randomness } = &genuine.payload else {
        return Err(ResetError::Order("forgery needs a reveal".into()));
    };
    let mut v = value.clone();
    let mut r = randomness.clone();
    match rng.next_u32() % 3 {
        0 => v.flip(rng.next_u32() as usize % v.len()),
        1 => {
            v.flip(rng.next_u32() as usize % v.len());
            r = BitString::random(rng, r.len());
        }
        _ => {
            v = BitString::random(rng, v.len());
            r.flip(rng.next_u32() as usize % r.len());
        }
    }
    if v == *value {
        return Ok(false);
    }
    let mut probe = session.clone();
    let forged = Message::new(genuine.session_id, genuine.round_index, Payload::VReveal { value: v, randomness: r });
    Ok(matches!(probe.p1_step(&forged, registry, &|_| ProverStrategy::Solver)?, P1Decision::Accept(_)))
}

/// Replays session `id` of a genuine transcript through a fresh P₁/P₂ and,
/// before each reveal, makes `per_reveal` forgery attempts against it.
/// Returns (attempts, forgeries accepted).
pub fn forge_sweep(t: &ResetTranscript, id: SessionId, per_reveal: usize, rng: &mut dyn RngCore, registry: &Registry, config: Arc<ResetConfig>) -> Result<(usize, usize), ResetError> {
    let mut session = AdmissibleSession::new(id, config);
    let (mut attempts, mut accepted) = (0, 0);
    let strategy = |inc: &Incarnation| match &inc.witness {
        Some(w) => ProverStrategy::Honest(w.clone()),
        None => ProverStrategy::Solver,
    };
    for r in t.transcript.records.iter().filter(|r| r.message.session_id == id && r.direction == Direction::VerifierToProver) {
        if matches!(r.message.payload, Payload::VReveal { .. }) {
            for _ in 0..per_reveal {
                attempts += 1;
                accepted += usize::from(forge_attempt(&session, &r.message, rng, registry)?);
            }
        }
        if let P1Decision::Accept(main) = session.p1_step(&r.message, registry, &strategy)? {
            let mut coins = session.p2_rng();
            session.inner.as_mut().expect("selected").respond(main, &mut coins, &mut |_| None)?;
        }
    }
    Ok((attempts, accepted))
}
