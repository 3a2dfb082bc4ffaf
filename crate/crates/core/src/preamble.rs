//! Prover and honest-verifier state machines for the commitment preamble.
//!
//! The verifier opens with one message committing (hiding) to `v₁..vₘ` and
//! carrying ρ for the prover's binding commitments. Then for each round the
//! prover commits to a fresh `pᵢ` and the verifier reveals `vᵢ`. A bad
//! reveal makes the prover abort the session for good. After `vₘ` both
//! sides run the body on the statement "G is 3-colorable, or some `pᵢ`
//! opens to `vᵢ`".
//!
//! Message round indices: the opening commitment is round 1, `p_commit(i)`
//! and `v_reveal(i)` carry `i`. A preamble round slot is the verifier
//! message opening it, so slot round 1 is `v_commit` and slot round `r ≥ 2`
//! is `v_reveal(r - 1)`. The closing `v_reveal(m)` is not a slot.

use crate::bits::BitString;
use crate::body::{self, BodyContext, BodyError, BodyProver, BodyTag, BodyTarget, BodyVerifier, Challenges, ProverKnowledge, Verdict};
use crate::commitments::{binding_params, hiding_params, verify_open, Commitment, ExpanderTag, Group, Opening, SchemeParams, SchemeTag};
use crate::compiler::{self, CompileError};
use crate::graph::Graph;
use crate::message::{BodyPayload, Message, Payload, SessionId};
use crate::seed;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PreambleError {
    #[error("protocol-order error in session {session}: {detail}")]
    Order { session: SessionId, detail: String },
    #[error("state error: {0}")]
    State(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Body(#[from] BodyError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityConfig {
    /// Security parameter: bit length of `vᵢ` and `pᵢ`.
    pub k: usize,
    /// Number of preamble rounds.
    pub m: usize,
    pub num_sessions: usize,
    pub body_tag: BodyTag,
    /// Body repetitions; `None` means `|E| · ⌈log₂ k⌉` of the reduced instance.
    pub body_repetitions: Option<usize>,
}

impl SecurityConfig {
    pub fn new(k: usize, m: usize, num_sessions: usize, body_tag: BodyTag) -> Self {
        SecurityConfig { k, m, num_sessions, body_tag, body_repetitions: None }
    }

    pub fn validate(&self) -> Result<(), PreambleError> {
        if !(4..=62).contains(&self.k) {
            return Err(PreambleError::Config(format!("k = {} outside 4..=62", self.k)));
        }
        if self.m == 0 {
            return Err(PreambleError::Config("m must be at least 1".into()));
        }
        if self.num_sessions == 0 {
            return Err(PreambleError::Config("need at least one session".into()));
        }
        Ok(())
    }
}

/// Everything both sides agree on before any session starts.
#[derive(Debug, Clone)]
pub struct Protocol {
    pub config: SecurityConfig,
    /// Group for the verifier's hiding commitments.
    pub group: Arc<Group>,
    /// Expander for the prover's binding commitments.
    pub expander: ExpanderTag,
    pub base_graph: Arc<Graph>,
}

impl Protocol {
    /// Uses the circuit-friendly expander whenever the body needs the reduction.
    pub fn new(config: SecurityConfig, base_graph: Graph, group: Arc<Group>) -> Result<Arc<Self>, PreambleError> {
        config.validate()?;
        if config.k >= group.exponent_bits() {
            return Err(PreambleError::Config("k too large for the group".into()));
        }
        let expander = match config.body_tag {
            BodyTag::G3c => ExpanderTag::CircuitFriendly,
            BodyTag::Oracle => ExpanderTag::Mixer,
        };
        Ok(Arc::new(Protocol { config, group, expander, base_graph: Arc::new(base_graph) }))
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    pub fn v_params(&self, group: &Arc<Group>) -> SchemeParams {
        hiding_params(self.config.k, self.config.k, group.clone()).expect("validated against the group")
    }

    /// The preamble round a verifier message opens, if it is a slot.
    pub fn slot_round(&self, msg: &Message) -> Option<u32> {
        match msg.payload {
            Payload::VCommit { .. } => Some(1),
            Payload::VReveal { .. } if (msg.round_index as usize) < self.config.m => Some(msg.round_index + 1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompoundStatement {
    pub base_graph: Arc<Graph>,
    /// The prover's binding scheme (ρ from the verifier's first message).
    pub prover_params: SchemeParams,
    pub p_commitments: Vec<Commitment>,
    pub revealed: Vec<BitString>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CompoundWitness {
    Coloring(Vec<u8>),
    /// `p_index = v_index` with the seeds opening the prover's commitment.
    Equality { index: usize, seeds: BitString },
}

/// What a prover brings to a session.
#[derive(Debug, Clone)]
pub enum ProverStrategy {
    /// Knows a proper coloring of the base graph.
    Honest(Vec<u8>),
    /// Knows nothing; uses this fake coloring in the body.
    Cheat(Vec<u8>),
    /// Relies entirely on forced commitments (the simulator).
    Solver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProverPhase {
    AwaitVCommit,
    /// Committed to `p_i`, waiting for `v_i`.
    AwaitReveal(u32),
    Body,
    Aborted,
    Done,
}

/// The verified content of an accepted verifier message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MainPart {
    Start,
    Reveal(u32),
    Body(BodyPayload),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admitted {
    Main(MainPart),
    /// Bad opening or malformed message: the prover aborts.
    Reject,
    /// The session is over; the prover says nothing.
    Silent,
}

#[derive(Debug, Clone)]
pub struct ProverSession {
    pub id: SessionId,
    protocol: Arc<Protocol>,
    group: Arc<Group>,
    strategy: ProverStrategy,
    phase: ProverPhase,
    v_commitments: Vec<BitString>,
    pair_commitments: Vec<BitString>,
    prover_params: Option<SchemeParams>,
    p_commitments: Vec<Commitment>,
    p_openings: Vec<Opening>,
    revealed: Vec<BitString>,
    solved_index: Option<usize>,
    body: Option<BodyProver>,
}

impl ProverSession {
    pub fn new(id: SessionId, protocol: Arc<Protocol>, strategy: ProverStrategy) -> Self {
        let group = protocol.group.clone();
        Self::with_group(id, protocol, strategy, group)
    }

    /// A session whose verifier commits under `group` (admissible sessions
    /// pick their own second generator).
    pub fn with_group(id: SessionId, protocol: Arc<Protocol>, strategy: ProverStrategy, group: Arc<Group>) -> Self {
        ProverSession {
            id,
            protocol,
            group,
            strategy,
            phase: ProverPhase::AwaitVCommit,
            v_commitments: Vec::new(),
            pair_commitments: Vec::new(),
            prover_params: None,
            p_commitments: Vec::new(),
            p_openings: Vec::new(),
            revealed: Vec::new(),
            solved_index: None,
            body: None,
        }
    }

    pub fn protocol(&self) -> &Arc<Protocol> {
        &self.protocol
    }

    pub fn phase(&self) -> ProverPhase {
        self.phase
    }

    pub fn solved_index(&self) -> Option<usize> {
        self.solved_index
    }

    pub fn revealed(&self) -> &[BitString] {
        &self.revealed
    }

    pub fn p_values(&self) -> Vec<BitString> {
        self.p_openings.iter().map(|o| o.message.clone()).collect()
    }

    fn order(&self, detail: String) -> PreambleError {
        PreambleError::Order { session: self.id, detail }
    }

    /// Checks a verifier message against the session state. Only the
    /// returned main part may influence the response.
    pub fn admit(&mut self, msg: &Message) -> Result<Admitted, PreambleError> {
        let k = self.protocol.k();
        let m = self.protocol.m();
        match (self.phase, &msg.payload) {
            (ProverPhase::Aborted | ProverPhase::Done, _) => Ok(Admitted::Silent),
            (ProverPhase::AwaitVCommit, Payload::VCommit { rho, commitments, pair_commitments, .. }) => {
                let width = self.group.element_bits();
                let params = binding_params(k, rho.clone(), self.protocol.expander);
                match params {
                    Ok(p) if p.message_bits == k && commitments.len() == m && commitments.iter().all(|c| c.len() == width) => {
                        self.prover_params = Some(p);
                        self.v_commitments = commitments.clone();
                        self.pair_commitments = pair_commitments.clone();
                        Ok(Admitted::Main(MainPart::Start))
                    }
                    _ => {
                        self.phase = ProverPhase::Aborted;
                        Ok(Admitted::Reject)
                    }
                }
            }
            (ProverPhase::AwaitReveal(i), Payload::VReveal { value, randomness }) => {
                if msg.round_index != i {
                    return Err(self.order(format!("reveal for round {} while awaiting round {i}", msg.round_index)));
                }
                let c = Commitment { tag: SchemeTag::Hiding, payload: self.v_commitments[i as usize - 1].clone() };
                let o = Opening { message: value.clone(), randomness: randomness.clone() };
                if verify_open(&self.protocol.v_params(&self.group), &c, &o) {
                    self.revealed.push(value.clone());
                    Ok(Admitted::Main(MainPart::Reveal(i)))
                } else {
                    self.phase = ProverPhase::Aborted;
                    Ok(Admitted::Reject)
                }
            }
            (ProverPhase::Body, Payload::Body(b)) => {
                if let BodyPayload::ChallengeOpen { openings } = b {
                    if !self.pair_commitments.is_empty() && !self.pairs_authentic(openings) {
                        self.phase = ProverPhase::Aborted;
                        return Ok(Admitted::Reject);
                    }
                }
                Ok(Admitted::Main(MainPart::Body(b.clone())))
            }
            (phase, _) => Err(self.order(format!("{:?} message in phase {phase:?}", msg.kind))),
        }
    }

    /// Pre-committed challenge pairs must open exactly as committed.
    fn pairs_authentic(&self, openings: &[(BitString, BitString)]) -> bool {
        let params = hiding_params(self.protocol.k(), body::PAIR_BITS, self.group.clone()).expect("pair fits the group");
        openings.len() == self.pair_commitments.len()
            && openings.iter().zip(&self.pair_commitments).all(|((value, randomness), c)| {
                let c = Commitment { tag: SchemeTag::Hiding, payload: c.clone() };
                verify_open(&params, &c, &Opening { message: value.clone(), randomness: randomness.clone() })
            })
    }

    /// Produces the response to an admitted main part. `solve(a)` may return
    /// a value to commit as `p_a` instead of a fresh random string.
    pub fn respond<R: RngCore + ?Sized>(
        &mut self,
        main: MainPart,
        rng: &mut R,
        solve: &mut dyn FnMut(u32) -> Option<BitString>,
    ) -> Result<Option<Message>, PreambleError> {
        let m = self.protocol.m() as u32;
        match main {
            MainPart::Start => Ok(Some(self.commit_round(1, rng, solve))),
            MainPart::Reveal(i) if i < m => Ok(Some(self.commit_round(i + 1, rng, solve))),
            MainPart::Reveal(_) => {
                self.phase = ProverPhase::Body;
                let mut body = BodyProver::new(self.body_context()?, self.knowledge())?;
                let first = body.start(rng)?;
                self.body = Some(body);
                Ok(self.body_reply(first, false))
            }
            MainPart::Body(p) => {
                let body = self.body.as_mut().ok_or_else(|| PreambleError::State("body not started".into()))?;
                let reply = body.step(&p, rng)?;
                let aborted = reply.is_none();
                Ok(self.body_reply(reply, aborted))
            }
        }
    }

    fn body_reply(&mut self, reply: Option<BodyPayload>, aborted: bool) -> Option<Message> {
        if aborted {
            self.phase = ProverPhase::Aborted;
            return Some(Message::new(self.id, 0, Payload::Abort));
        }
        let reply = reply?;
        if matches!(reply, BodyPayload::OracleClaim { .. } | BodyPayload::EndpointOpen { .. }) {
            self.phase = ProverPhase::Done;
        }
        Some(Message::new(self.id, 0, Payload::Body(reply)))
    }

    /// Handles a verifier message end to end.
    pub fn step<R: RngCore + ?Sized>(
        &mut self,
        msg: &Message,
        rng: &mut R,
        solve: &mut dyn FnMut(u32) -> Option<BitString>,
    ) -> Result<Option<Message>, PreambleError> {
        match self.admit(msg)? {
            Admitted::Main(main) => self.respond(main, rng, solve),
            Admitted::Reject => Ok(Some(Message::new(self.id, msg.round_index, Payload::Abort))),
            Admitted::Silent => Ok(None),
        }
    }

    fn commit_round<R: RngCore + ?Sized>(&mut self, a: u32, rng: &mut R, solve: &mut dyn FnMut(u32) -> Option<BitString>) -> Message {
        let k = self.protocol.k();
        let params = self.prover_params.as_ref().expect("set by the opening commitment");
        let p = match solve(a) {
            Some(v) => {
                self.solved_index.get_or_insert(a as usize);
                v
            }
            None => BitString::random(rng, k),
        };
        let randomness = params.sample_randomness(rng);
        let c = params.commit_with(&p, &randomness).expect("shape fixed by params");
        self.p_commitments.push(c.clone());
        self.p_openings.push(Opening { message: p, randomness });
        self.phase = ProverPhase::AwaitReveal(a);
        Message::new(self.id, a, Payload::PCommit { commitment: c.payload })
    }

    fn knowledge(&self) -> ProverKnowledge {
        // a forced index first, then any lucky guess
        let lucky = self.p_openings.iter().zip(&self.revealed).position(|(p, v)| p.message == *v).map(|i| i + 1);
        if let Some(i) = self.solved_index.filter(|&i| i <= self.revealed.len() && self.p_openings[i - 1].message == self.revealed[i - 1]).or(lucky) {
            return ProverKnowledge::Witness(CompoundWitness::Equality { index: i, seeds: self.p_openings[i - 1].randomness.clone() });
        }
        match &self.strategy {
            ProverStrategy::Honest(c) => ProverKnowledge::Witness(CompoundWitness::Coloring(c.clone())),
            ProverStrategy::Cheat(fake) => ProverKnowledge::Cheat(fake.clone()),
            ProverStrategy::Solver => ProverKnowledge::Cheat(vec![0; self.protocol.base_graph.num_vertices()]),
        }
    }

    /// Whether the prover holds a valid witness for the current statement.
    pub fn has_witness(&self) -> bool {
        match self.knowledge() {
            ProverKnowledge::Witness(CompoundWitness::Equality { .. }) => true,
            ProverKnowledge::Witness(CompoundWitness::Coloring(c)) => self.protocol.base_graph.is_proper(&c),
            ProverKnowledge::Cheat(_) => false,
        }
    }

    pub fn compound_statement(&self) -> Result<CompoundStatement, PreambleError> {
        if !matches!(self.phase, ProverPhase::Body | ProverPhase::Done) && self.revealed.len() < self.protocol.m() {
            return Err(PreambleError::State("preamble not completed".into()));
        }
        Ok(CompoundStatement {
            base_graph: self.protocol.base_graph.clone(),
            prover_params: self.prover_params.clone().expect("set when the preamble started"),
            p_commitments: self.p_commitments.clone(),
            revealed: self.revealed.clone(),
        })
    }

    fn body_context(&self) -> Result<BodyContext, PreambleError> {
        let statement = Arc::new(self.compound_statement()?);
        let challenges = challenges_for(&self.protocol, &statement, &self.pair_commitments);
        Ok(BodyContext { tag: self.protocol.config.body_tag, k: self.protocol.k(), group: self.group.clone(), target: BodyTarget::Compound(statement), challenges })
    }
}

fn challenges_for(protocol: &Protocol, statement: &CompoundStatement, pair_commitments: &[BitString]) -> Challenges {
    if pair_commitments.is_empty() {
        Challenges::Edges { repetitions: protocol.config.body_repetitions.unwrap_or(0) }
    } else {
        let rho = statement.prover_params.rho().expect("binding");
        Challenges::Pairs { commitments: pair_commitments.to_vec(), rho_color: rho.slice(0, 6 * protocol.k()) }
    }
}

/// The verifier's secret choices for one session, fixed by its tape.
#[derive(Debug, Clone)]
pub struct VerifierMaterial {
    pub rho: BitString,
    pub v: Vec<BitString>,
    pub r: Vec<BitString>,
    pub commitments: Vec<BitString>,
    /// Body challenge pairs with their openings (admissible sessions).
    pub pairs: Vec<(BitString, BitString)>,
    pub pair_commitments: Vec<BitString>,
    pub body_seed: u64,
}

impl VerifierMaterial {
    /// Draws ρ, `v₁..vₘ` and the commitments from `seed`. `pair_space`
    /// gives `(count, vertex bound)` for pre-committed body pairs.
    pub fn generate(protocol: &Protocol, group: &Arc<Group>, seed: u64, pair_space: Option<(usize, u32)>) -> Self {
        let k = protocol.k();
        let m = protocol.m();
        let mut rng = seed::rng_for(seed, "material", 0);
        let rho = BitString::random(&mut rng, k * 3 * k);
        let params = protocol.v_params(group);
        let mut v = Vec::with_capacity(m);
        let mut r = Vec::with_capacity(m);
        let mut commitments = Vec::with_capacity(m);
        for _ in 0..m {
            let vi = BitString::random(&mut rng, k);
            let ri = params.sample_randomness(&mut rng);
            commitments.push(params.commit_with(&vi, &ri).expect("fixed shape").payload);
            v.push(vi);
            r.push(ri);
        }
        let mut pairs = Vec::new();
        let mut pair_commitments = Vec::new();
        if let Some((count, bound)) = pair_space {
            use rand::Rng as _;
            let pp = hiding_params(k, body::PAIR_BITS, group.clone()).expect("pair fits the group");
            for _ in 0..count {
                let pair = body::encode_pair(rng.gen_range(0..bound.max(1)), rng.gen_range(0..bound.max(1)));
                let pr = pp.sample_randomness(&mut rng);
                pair_commitments.push(pp.commit_with(&pair, &pr).expect("fixed shape").payload);
                pairs.push((pair, pr));
            }
        }
        VerifierMaterial { rho, v, r, commitments, pairs, pair_commitments, body_seed: seed::derive(seed, "body", 0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Rejected,
    Aborted,
    Unfinished,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum VerifierPhase {
    Start,
    AwaitCommit(u32),
    Reveal(u32),
    /// Sent a refusal; waiting for the prover's abort.
    Refused,
    Body,
    Finished(Outcome),
}

/// One session seen from the honest verifier's side.
#[derive(Debug, Clone)]
pub struct VerifierSession {
    pub id: SessionId,
    protocol: Arc<Protocol>,
    group: Arc<Group>,
    material: Arc<VerifierMaterial>,
    phase: VerifierPhase,
    p_commitments: Vec<BitString>,
    body: Option<BodyVerifier>,
    pending_body: Option<BodyPayload>,
    prefix: Option<[u8; 32]>,
}

impl VerifierSession {
    pub fn new(id: SessionId, protocol: Arc<Protocol>, group: Arc<Group>, material: Arc<VerifierMaterial>) -> Self {
        VerifierSession { id, protocol, group, material, phase: VerifierPhase::Start, p_commitments: Vec::new(), body: None, pending_body: None, prefix: None }
    }

    /// Commits the opening message to the digest of earlier messages.
    pub fn set_prefix(&mut self, prefix: [u8; 32]) {
        self.prefix = Some(prefix);
    }

    pub fn material(&self) -> &Arc<VerifierMaterial> {
        &self.material
    }

    pub fn outcome(&self) -> Outcome {
        match &self.phase {
            VerifierPhase::Finished(o) => *o,
            _ => Outcome::Unfinished,
        }
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.phase, VerifierPhase::Finished(_))
    }

    /// Whether the verifier has a message to send now.
    pub fn ready(&self) -> bool {
        match self.phase {
            VerifierPhase::Start | VerifierPhase::Reveal(_) => true,
            VerifierPhase::Body => self.pending_body.is_some(),
            _ => false,
        }
    }

    /// The slot round the next message opens, if it is ready and a slot.
    pub fn next_slot_round(&self) -> Option<u32> {
        match self.phase {
            VerifierPhase::Start => Some(1),
            VerifierPhase::Reveal(i) if (i as usize) < self.protocol.m() => Some(i + 1),
            _ => None,
        }
    }

    /// The round the next message reveals, if it is a reveal.
    pub fn pending_reveal(&self) -> Option<u32> {
        match self.phase {
            VerifierPhase::Reveal(i) => Some(i),
            _ => None,
        }
    }

    /// Emits the next message; `refuse` replaces a reveal by an invalid one.
    pub fn next_message(&mut self, refuse: bool) -> Option<Message> {
        let m = self.protocol.m() as u32;
        match self.phase.clone() {
            VerifierPhase::Start => {
                self.phase = VerifierPhase::AwaitCommit(1);
                Some(Message::new(
                    self.id,
                    1,
                    Payload::VCommit {
                        rho: self.material.rho.clone(),
                        commitments: self.material.commitments.clone(),
                        pair_commitments: self.material.pair_commitments.clone(),
                        prefix: self.prefix,
                    },
                ))
            }
            VerifierPhase::Reveal(i) => {
                let idx = i as usize - 1;
                if refuse {
                    self.phase = VerifierPhase::Refused;
                    let value = self.material.v[idx].clone();
                    return Some(Message::new(self.id, i, Payload::VReveal { value, randomness: BitString::zeros(0) }));
                }
                let msg = Message::new(self.id, i, Payload::VReveal { value: self.material.v[idx].clone(), randomness: self.material.r[idx].clone() });
                if i < m {
                    self.phase = VerifierPhase::AwaitCommit(i + 1);
                } else {
                    self.enter_body();
                }
                Some(msg)
            }
            VerifierPhase::Body => self.pending_body.take().map(|b| Message::new(self.id, 0, Payload::Body(b))),
            _ => None,
        }
    }

    fn statement(&self) -> Result<CompoundStatement, PreambleError> {
        let params = binding_params(self.protocol.k(), self.material.rho.clone(), self.protocol.expander).map_err(|e| PreambleError::State(e.to_string()))?;
        Ok(CompoundStatement {
            base_graph: self.protocol.base_graph.clone(),
            prover_params: params,
            p_commitments: self.p_commitments.iter().map(|c| Commitment { tag: SchemeTag::Binding, payload: c.clone() }).collect(),
            revealed: self.material.v.clone(),
        })
    }

    fn enter_body(&mut self) {
        self.phase = VerifierPhase::Body;
        let built = self.statement().and_then(|statement| {
            let statement = Arc::new(statement);
            let mut challenges = challenges_for(&self.protocol, &statement, &self.material.pair_commitments);
            let target = BodyTarget::Compound(statement.clone());
            if let Challenges::Edges { repetitions } = &mut challenges {
                if *repetitions == 0 && self.protocol.config.body_tag == BodyTag::G3c {
                    let (_, inst) = body::reduce(&statement)?;
                    *repetitions = body::default_repetitions(inst.graph.edges().len(), self.protocol.k());
                }
            }
            let ctx = BodyContext { tag: self.protocol.config.body_tag, k: self.protocol.k(), group: self.group.clone(), target, challenges };
            let mut rng = seed::rng(self.material.body_seed);
            Ok(BodyVerifier::new(ctx, self.material.pairs.clone(), &mut rng)?)
        });
        match built {
            Ok(mut v) => {
                self.pending_body = v.start();
                self.body = Some(v);
            }
            Err(_) => self.phase = VerifierPhase::Finished(Outcome::Rejected),
        }
    }

    /// Consumes a prover message for this session.
    pub fn observe(&mut self, msg: &Message) -> Result<(), PreambleError> {
        let order = |detail: String| PreambleError::Order { session: msg.session_id, detail };
        if let Payload::Abort = msg.payload {
            if !self.is_finished() {
                self.phase = VerifierPhase::Finished(Outcome::Aborted);
            }
            return Ok(());
        }
        match (self.phase.clone(), &msg.payload) {
            (VerifierPhase::AwaitCommit(i), Payload::PCommit { commitment }) if msg.round_index == i => {
                let k = self.protocol.k();
                if commitment.len() != k * 3 * k {
                    self.phase = VerifierPhase::Finished(Outcome::Rejected);
                } else {
                    self.p_commitments.push(commitment.clone());
                    self.phase = VerifierPhase::Reveal(i);
                }
                Ok(())
            }
            (VerifierPhase::Body, Payload::Body(b)) => {
                let body = self.body.as_mut().expect("body verifier exists in body phase");
                match body.step(b) {
                    Ok(Some(reply)) => self.pending_body = Some(reply),
                    Ok(None) => {
                        let outcome = if body.verdict() == Verdict::Accept { Outcome::Accepted } else { Outcome::Rejected };
                        self.phase = VerifierPhase::Finished(outcome);
                    }
                    Err(e) => {
                        self.phase = VerifierPhase::Finished(Outcome::Rejected);
                        return Err(e.into());
                    }
                }
                Ok(())
            }
            (phase, _) => Err(order(format!("verifier in {phase:?} got {:?}", msg.kind))),
        }
    }
}

/// One honest-verifier transition: consume the prover message (if any),
/// then emit the next message (if it is the verifier's turn).
pub fn honest_verifier_step(session: &mut VerifierSession, incoming: Option<&Message>) -> Result<Option<Message>, PreambleError> {
    if let Some(m) = incoming {
        session.observe(m)?;
    }
    Ok(if session.ready() { session.next_message(false) } else { None })
}

/// Number of vertices of the reduced instance for `(G, m, k)`; the shape of
/// the reduction does not depend on transcript values.
pub fn reduced_vertex_count(graph: &Arc<Graph>, m: usize, k: usize) -> Result<usize, PreambleError> {
    Ok(reduced_instance_size(graph, m, k)?.0)
}

/// Vertices and edges of the reduced instance for `(G, m, k)`.
pub fn reduced_instance_size(graph: &Arc<Graph>, m: usize, k: usize) -> Result<(usize, usize), PreambleError> {
    let params = binding_params(k, BitString::zeros(k * 3 * k), ExpanderTag::CircuitFriendly).map_err(|e| PreambleError::Config(e.to_string()))?;
    let statement = CompoundStatement {
        base_graph: graph.clone(),
        prover_params: params,
        p_commitments: vec![Commitment { tag: SchemeTag::Binding, payload: BitString::zeros(k * 3 * k) }; m],
        revealed: vec![BitString::zeros(k); m],
    };
    let circuit = compiler::compile_compound(&statement)?;
    let g = compiler::circuit_to_3col(&circuit).graph;
    Ok((g.num_vertices(), g.edges().len()))
}
