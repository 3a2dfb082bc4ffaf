//! The constant-round proof body.
//!
//! `Oracle` is a test double: the prover hands over its witness and the
//! verifier checks it directly. `G3c` is the committed-challenge 3-coloring
//! proof: the verifier first commits to its challenges, the prover commits
//! to R independently permuted colorings, the verifier opens the challenges
//! and the prover opens the two endpoint colors of each challenged edge.
//!
//! Challenges come either as R edge indices committed at the start of the
//! body, or as vertex pairs committed earlier (admissible sessions), in
//! which case pairs that are not edges are skipped.

use crate::bits::BitString;
use crate::commitments::{binding_params, hiding_params, verify_open, Commitment, ExpanderTag, Group, Opening, SchemeParams, SchemeTag};
use crate::compiler::{self, map_witness, validate_witness, ColoringInstance, CompileError};
use crate::graph::Graph;
use crate::message::{BodyPayload, EndpointOpening};
use crate::preamble::{CompoundStatement, CompoundWitness};
use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BodyError {
    #[error("protocol-order error: {0}")]
    Order(String),
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyTag {
    Oracle,
    G3c,
}

impl std::str::FromStr for BodyTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(BodyTag::Oracle),
            "g3c" => Ok(BodyTag::G3c),
            other => Err(format!("unknown body tag {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pending,
    Accept,
    Reject,
}

/// Bits used to commit a challenge edge index.
pub const EDGE_INDEX_BITS: usize = 32;
/// Bits used to commit a vertex pair `u | v << 24`.
pub const PAIR_BITS: usize = 48;

pub fn encode_pair(u: u32, v: u32) -> BitString {
    BitString::from_u64(u as u64 | (v as u64) << 24, PAIR_BITS)
}

pub fn decode_pair(b: &BitString) -> (u32, u32) {
    let x = b.to_u64();
    ((x & 0xff_ffff) as u32, (x >> 24) as u32)
}

/// Default repetition count: `|E| · ⌈log₂ k⌉`.
pub fn default_repetitions(edges: usize, k: usize) -> usize {
    edges * (usize::BITS - (k.max(2) - 1).leading_zeros()) as usize
}

/// How challenges reach the body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Challenges {
    /// R edge indices, committed in the body's first verifier message.
    Edges { repetitions: usize },
    /// Vertex pairs committed before the body, with the color ρ.
    Pairs { commitments: Vec<BitString>, rho_color: BitString },
}

/// What the body proves.
#[derive(Debug, Clone)]
pub enum BodyTarget {
    /// The compound statement, reduced to a coloring instance.
    Compound(Arc<CompoundStatement>),
    /// A plain graph, colored directly (used to study the body alone).
    Graph(Arc<Graph>),
}

/// Public data shared by both body roles.
#[derive(Debug, Clone)]
pub struct BodyContext {
    pub tag: BodyTag,
    pub k: usize,
    pub group: Arc<Group>,
    pub target: BodyTarget,
    pub challenges: Challenges,
}

impl BodyContext {
    fn validate(&self, w: &CompoundWitness) -> bool {
        match (&self.target, w) {
            (BodyTarget::Compound(s), w) => validate_witness(s, w),
            (BodyTarget::Graph(g), CompoundWitness::Coloring(c)) => g.is_proper(c),
            (BodyTarget::Graph(_), CompoundWitness::Equality { .. }) => false,
        }
    }

    /// The instance the coloring proof runs on.
    fn instance(&self) -> Result<Arc<ColoringInstance>, CompileError> {
        match &self.target {
            BodyTarget::Compound(s) => Ok(reduce(s)?.1),
            BodyTarget::Graph(g) => Ok(Arc::new(ColoringInstance::bare((**g).clone()))),
        }
    }

    fn edge_params(&self) -> SchemeParams {
        hiding_params(self.k, EDGE_INDEX_BITS, self.group.clone()).expect("edge index fits the group")
    }
    fn pair_params(&self) -> SchemeParams {
        hiding_params(self.k, PAIR_BITS, self.group.clone()).expect("pair fits the group")
    }
}

/// Reduced instance for a statement, compiled once per body.
pub fn reduce(statement: &CompoundStatement) -> Result<(compiler::Circuit, Arc<ColoringInstance>), CompileError> {
    let circuit = compiler::compile_compound(statement)?;
    let instance = Arc::new(compiler::circuit_to_3col(&circuit));
    Ok((circuit, instance))
}

fn color_params(k: usize, rho_color: &BitString) -> Result<SchemeParams, BodyError> {
    if rho_color.len() != 2 * 3 * k {
        return Err(BodyError::Order(format!("color ρ has {} bits, expected {}", rho_color.len(), 6 * k)));
    }
    binding_params(k, rho_color.clone(), ExpanderTag::Mixer).map_err(|e| BodyError::Order(e.to_string()))
}

fn color_bits(c: u8) -> BitString {
    BitString::from_u64(c as u64, 2)
}

/// What the prover knows about the statement.
#[derive(Debug, Clone)]
pub enum ProverKnowledge {
    Witness(CompoundWitness),
    /// No witness: the prover cheats with the least violating coloring of
    /// the reduced instance, built from this fake base-graph coloring.
    Cheat(Vec<u8>),
}

#[derive(Debug, Clone)]
enum ProverPhase {
    AwaitChallengeCommit,
    AwaitChallengeOpen,
    Done,
}

#[derive(Debug, Clone)]
pub struct BodyProver {
    ctx: BodyContext,
    knowledge: ProverKnowledge,
    instance: Option<Arc<ColoringInstance>>,
    coloring: Vec<u8>,
    phase: ProverPhase,
    challenge_commitments: Vec<BitString>,
    rho_color: BitString,
    /// Per repetition, per vertex: the two k-bit seeds.
    seeds: Vec<Vec<[u64; 2]>>,
    permuted: Vec<[u8; 3]>,
}

impl BodyProver {
    /// Validates the witness and prepares the coloring of the reduced instance.
    pub fn new(ctx: BodyContext, knowledge: ProverKnowledge) -> Result<Self, BodyError> {
        let mut instance = None;
        let mut coloring = Vec::new();
        if let ProverKnowledge::Witness(w) = &knowledge {
            if !ctx.validate(w) {
                return Err(BodyError::InvalidWitness("witness does not satisfy the statement".into()));
            }
        }
        if ctx.tag == BodyTag::G3c {
            match &ctx.target {
                BodyTarget::Compound(statement) => {
                    let (circuit, inst) = reduce(statement)?;
                    coloring = match &knowledge {
                        ProverKnowledge::Witness(w) => map_witness(statement, w, &circuit, &inst)?,
                        ProverKnowledge::Cheat(fake) => {
                            let w = CompoundWitness::Coloring(fake.clone());
                            let inputs = compiler::witness_inputs(&w, &circuit);
                            compiler::least_violating_coloring(&circuit, &inst, &inputs)
                        }
                    };
                    instance = Some(inst);
                }
                BodyTarget::Graph(g) => {
                    coloring = match &knowledge {
                        ProverKnowledge::Witness(CompoundWitness::Coloring(c)) => c.clone(),
                        ProverKnowledge::Cheat(fake) => fake.clone(),
                        ProverKnowledge::Witness(_) => unreachable!("validated above"),
                    };
                    if coloring.len() != g.num_vertices() {
                        return Err(BodyError::InvalidWitness("coloring length".into()));
                    }
                    instance = Some(Arc::new(ColoringInstance::bare((**g).clone())));
                }
            }
        }
        Ok(BodyProver {
            ctx,
            knowledge,
            instance,
            coloring,
            phase: ProverPhase::AwaitChallengeCommit,
            challenge_commitments: Vec::new(),
            rho_color: BitString::zeros(0),
            seeds: Vec::new(),
            permuted: Vec::new(),
        })
    }

    pub fn instance(&self) -> Option<&Arc<ColoringInstance>> {
        self.instance.as_ref()
    }

    /// The prover's first body message, if it speaks first.
    pub fn start<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Option<BodyPayload>, BodyError> {
        match (self.ctx.tag, &self.ctx.challenges) {
            (BodyTag::Oracle, _) => {
                self.phase = ProverPhase::Done;
                let witness = match &self.knowledge {
                    ProverKnowledge::Witness(w) => Some(w.clone()),
                    ProverKnowledge::Cheat(_) => None,
                };
                Ok(Some(BodyPayload::OracleClaim { witness }))
            }
            (BodyTag::G3c, Challenges::Pairs { commitments, rho_color }) => {
                self.challenge_commitments = commitments.clone();
                self.rho_color = rho_color.clone();
                let reps = commitments.len();
                self.phase = ProverPhase::AwaitChallengeOpen;
                Ok(Some(self.commit_colorings(reps, rng)?))
            }
            (BodyTag::G3c, Challenges::Edges { .. }) => Ok(None),
        }
    }

    fn commit_colorings<R: RngCore + ?Sized>(&mut self, reps: usize, rng: &mut R) -> Result<BodyPayload, BodyError> {
        let k = self.ctx.k;
        let params = color_params(k, &self.rho_color)?;
        let rho = params.rho().unwrap();
        let rho_words: [[u64; 3]; 2] = std::array::from_fn(|j| {
            let s = rho.slice(j * 3 * k, 3 * k);
            std::array::from_fn(|w| s.words().get(w).copied().unwrap_or(0))
        });
        let mask = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        let mut out = Vec::with_capacity(reps);
        self.seeds.clear();
        self.permuted.clear();
        for _ in 0..reps {
            let mut perm = [0u8, 1, 2];
            perm.shuffle(rng);
            let mut payload = BitString::zeros(0);
            let mut seeds = Vec::with_capacity(self.coloring.len());
            for &c in &self.coloring {
                let pc = perm[c as usize % 3];
                let pair = [rng.next_u64() & mask, rng.next_u64() & mask];
                for (j, &s) in pair.iter().enumerate() {
                    let mut e = params.expander.expand_words(s, k);
                    if (pc >> j) & 1 == 1 {
                        for w in 0..3 {
                            e[w] ^= rho_words[j][w];
                        }
                    }
                    let mut left = 3 * k;
                    for w in e {
                        let n = left.min(64);
                        payload.push_word(w, n);
                        left -= n;
                    }
                }
                seeds.push(pair);
            }
            out.push(payload);
            self.seeds.push(seeds);
            self.permuted.push(perm);
        }
        Ok(BodyPayload::ColoringCommit { reps: out })
    }

    fn endpoint(&self, rep: usize, v: u32) -> EndpointOpening {
        let k = self.ctx.k;
        let c = self.permuted[rep][self.coloring[v as usize] as usize % 3];
        let [s0, s1] = self.seeds[rep][v as usize];
        let mut seeds = BitString::zeros(0);
        seeds.push_word(s0, k);
        seeds.push_word(s1, k);
        EndpointOpening { vertex: v, color: color_bits(c), seeds }
    }

    /// Handles one verifier body message. `Ok(None)` after a bad challenge
    /// opening means the prover aborts.
    pub fn step<R: RngCore + ?Sized>(&mut self, incoming: &BodyPayload, rng: &mut R) -> Result<Option<BodyPayload>, BodyError> {
        match (&self.phase, incoming) {
            (ProverPhase::AwaitChallengeCommit, BodyPayload::ChallengeCommit { rho_color, commitments }) if self.ctx.tag == BodyTag::G3c => {
                self.rho_color = rho_color.clone();
                self.challenge_commitments = commitments.clone();
                self.phase = ProverPhase::AwaitChallengeOpen;
                Ok(Some(self.commit_colorings(commitments.len(), rng)?))
            }
            (ProverPhase::AwaitChallengeOpen, BodyPayload::ChallengeOpen { openings }) => {
                self.phase = ProverPhase::Done;
                if openings.len() != self.challenge_commitments.len() {
                    return Ok(None);
                }
                let inst = self.instance.as_ref().expect("g3c body has an instance").clone();
                let pairs_mode = matches!(self.ctx.challenges, Challenges::Pairs { .. });
                let params = if pairs_mode { self.ctx.pair_params() } else { self.ctx.edge_params() };
                let mut opens = Vec::new();
                for (rep, ((value, randomness), com)) in openings.iter().zip(&self.challenge_commitments).enumerate() {
                    let opening = Opening { message: value.clone(), randomness: randomness.clone() };
                    let c = Commitment { tag: SchemeTag::Hiding, payload: com.clone() };
                    if !verify_open(&params, &c, &opening) {
                        return Ok(None);
                    }
                    let (u, v) = if pairs_mode {
                        let (u, v) = decode_pair(value);
                        if u == v || !inst.graph.has_edge(u, v) {
                            continue;
                        }
                        (u, v)
                    } else {
                        match inst.graph.edges().get(value.to_u64() as usize) {
                            Some(&e) => e,
                            None => return Ok(None),
                        }
                    };
                    opens.push((self.endpoint(rep, u), self.endpoint(rep, v)));
                }
                Ok(Some(BodyPayload::EndpointOpen { opens }))
            }
            (phase, msg) => Err(BodyError::Order(format!("prover in {phase:?} got {:?}", msg.kind()))),
        }
    }
}

#[derive(Debug, Clone)]
enum VerifierPhase {
    Start,
    AwaitColoring,
    AwaitEndpoints,
    Done,
}

#[derive(Debug, Clone)]
pub struct BodyVerifier {
    ctx: BodyContext,
    instance: Option<Arc<ColoringInstance>>,
    phase: VerifierPhase,
    rho_color: BitString,
    /// Challenge values with their openings.
    challenge_openings: Vec<(BitString, BitString)>,
    coloring_commit: Vec<BitString>,
    verdict: Verdict,
}

impl BodyVerifier {
    /// For edge challenges the verifier samples R edges and ρ now. For pair
    /// challenges pass the pair openings made in the determining message.
    pub fn new<R: RngCore + ?Sized>(ctx: BodyContext, pair_openings: Vec<(BitString, BitString)>, rng: &mut R) -> Result<Self, BodyError> {
        let mut v = BodyVerifier {
            instance: None,
            phase: VerifierPhase::Start,
            rho_color: BitString::zeros(0),
            challenge_openings: pair_openings,
            coloring_commit: Vec::new(),
            verdict: Verdict::Pending,
            ctx,
        };
        if v.ctx.tag == BodyTag::G3c {
            let inst = v.ctx.instance()?;
            match v.ctx.challenges.clone() {
                Challenges::Edges { repetitions } => {
                    let ne = inst.graph.edges().len() as u64;
                    v.rho_color = BitString::random(rng, 6 * v.ctx.k);
                    let params = v.ctx.edge_params();
                    v.challenge_openings = (0..repetitions)
                        .map(|_| {
                            let e = BitString::from_u64(rng.gen_range(0..ne.max(1)), EDGE_INDEX_BITS);
                            (e, params.sample_randomness(rng))
                        })
                        .collect();
                }
                Challenges::Pairs { rho_color, .. } => {
                    v.rho_color = rho_color;
                    v.phase = VerifierPhase::AwaitColoring;
                }
            }
            v.instance = Some(inst);
        }
        Ok(v)
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn instance(&self) -> Option<&Arc<ColoringInstance>> {
        self.instance.as_ref()
    }

    /// The verifier's opening body message, when it speaks first.
    pub fn start(&mut self) -> Option<BodyPayload> {
        if self.ctx.tag != BodyTag::G3c || !matches!(self.phase, VerifierPhase::Start) {
            return None;
        }
        let params = self.ctx.edge_params();
        let commitments = self
            .challenge_openings
            .iter()
            .map(|(e, r)| params.commit_with(e, r).expect("edge commitment").payload)
            .collect();
        self.phase = VerifierPhase::AwaitColoring;
        Some(BodyPayload::ChallengeCommit { rho_color: self.rho_color.clone(), commitments })
    }

    fn finish(&mut self, accept: bool) {
        self.phase = VerifierPhase::Done;
        self.verdict = if accept { Verdict::Accept } else { Verdict::Reject };
    }

    pub fn abort(&mut self) {
        if self.verdict == Verdict::Pending {
            self.finish(false);
        }
    }

    /// Handles one prover body message.
    pub fn step(&mut self, incoming: &BodyPayload) -> Result<Option<BodyPayload>, BodyError> {
        match (&self.phase, incoming) {
            (VerifierPhase::Start, BodyPayload::OracleClaim { witness }) if self.ctx.tag == BodyTag::Oracle => {
                let ok = witness.as_ref().is_some_and(|w| self.ctx.validate(w));
                self.finish(ok);
                Ok(None)
            }
            (VerifierPhase::AwaitColoring, BodyPayload::ColoringCommit { reps }) => {
                let n = self.instance.as_ref().unwrap().graph.num_vertices();
                let expected = n * 2 * 3 * self.ctx.k;
                if reps.len() != self.challenge_openings.len() || reps.iter().any(|r| r.len() != expected) {
                    self.finish(false);
                    return Ok(None);
                }
                self.coloring_commit = reps.clone();
                self.phase = VerifierPhase::AwaitEndpoints;
                Ok(Some(BodyPayload::ChallengeOpen { openings: self.challenge_openings.clone() }))
            }
            (VerifierPhase::AwaitEndpoints, BodyPayload::EndpointOpen { opens }) => {
                let accept = self.check_endpoints(opens)?;
                self.finish(accept);
                Ok(None)
            }
            (phase, msg) => Err(BodyError::Order(format!("verifier in {phase:?} got {:?}", msg.kind()))),
        }
    }

    /// The challenged edges in repetition order, skipping non-edge pairs.
    fn challenged(&self) -> Vec<(usize, u32, u32)> {
        let inst = self.instance.as_ref().unwrap();
        let pairs = matches!(self.ctx.challenges, Challenges::Pairs { .. });
        let mut out = Vec::new();
        for (rep, (value, _)) in self.challenge_openings.iter().enumerate() {
            if pairs {
                let (u, v) = decode_pair(value);
                if u != v && inst.graph.has_edge(u, v) {
                    out.push((rep, u.min(v), u.max(v)));
                }
            } else if let Some(&(u, v)) = inst.graph.edges().get(value.to_u64() as usize) {
                out.push((rep, u, v));
            }
        }
        out
    }

    fn check_endpoints(&self, opens: &[(EndpointOpening, EndpointOpening)]) -> Result<bool, BodyError> {
        let challenged = self.challenged();
        if opens.len() != challenged.len() {
            return Ok(false);
        }
        let k = self.ctx.k;
        let params = color_params(k, &self.rho_color)?;
        let width = 2 * 3 * k;
        for ((rep, u, v), (a, b)) in challenged.into_iter().zip(opens) {
            let (lo, hi) = (a.vertex.min(b.vertex), a.vertex.max(b.vertex));
            if (lo, hi) != (u, v) {
                return Err(BodyError::Order(format!("opened ({}, {}) but challenged ({u}, {v})", a.vertex, b.vertex)));
            }
            for e in [a, b] {
                let payload = self.coloring_commit[rep].slice(e.vertex as usize * width, width);
                let c = Commitment { tag: SchemeTag::Binding, payload };
                let o = Opening { message: e.color.clone(), randomness: e.seeds.clone() };
                if !verify_open(&params, &c, &o) || e.color.to_u64() > 2 {
                    return Ok(false);
                }
            }
            if a.color == b.color {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Runs the body as a prover holding `witness`; identical to the honest
/// prover given the same witness and randomness.
pub fn simulate_body_as_prover(ctx: BodyContext, witness: CompoundWitness) -> Result<BodyProver, BodyError> {
    BodyProver::new(ctx, ProverKnowledge::Witness(witness))
}

/// Runs one full body exchange in memory, returning the verdict and the
/// messages in order (prover messages at odd positions when V speaks first).
pub fn run_body<R: RngCore + ?Sized>(
    mut prover: BodyProver,
    mut verifier: BodyVerifier,
    rng: &mut R,
) -> Result<(Verdict, Vec<BodyPayload>), BodyError> {
    let mut log = Vec::new();
    let mut to_prover = verifier.start();
    let mut to_verifier = if to_prover.is_none() { prover.start(rng)? } else { None };
    loop {
        if let Some(m) = to_prover.take() {
            log.push(m.clone());
            match prover.step(&m, rng)? {
                Some(r) => to_verifier = Some(r),
                None => {
                    verifier.abort();
                    return Ok((verifier.verdict(), log));
                }
            }
        }
        match to_verifier.take() {
            Some(m) => {
                log.push(m.clone());
                to_prover = verifier.step(&m)?;
                if to_prover.is_none() {
                    return Ok((verifier.verdict(), log));
                }
            }
            None => return Ok((verifier.verdict(), log)),
        }
    }
}

/// Re-checks a finished body exchange from its public messages alone: the
/// challenge openings must match their commitments and the endpoint
/// openings must satisfy the verifier's final test.
pub fn check_body_transcript(ctx: BodyContext, messages: &[BodyPayload]) -> Result<bool, BodyError> {
    if ctx.tag == BodyTag::Oracle {
        return Ok(match messages {
            [BodyPayload::OracleClaim { witness: Some(w) }] => ctx.validate(w),
            _ => false,
        });
    }
    let (rho_color, commitments, params, rest) = match (&ctx.challenges, messages) {
        (Challenges::Edges { .. }, [BodyPayload::ChallengeCommit { rho_color, commitments }, rest @ ..]) => {
            (rho_color.clone(), commitments.clone(), ctx.edge_params(), rest)
        }
        (Challenges::Pairs { commitments, rho_color }, rest) => (rho_color.clone(), commitments.clone(), ctx.pair_params(), rest),
        _ => return Ok(false),
    };
    let [BodyPayload::ColoringCommit { reps }, BodyPayload::ChallengeOpen { openings }, BodyPayload::EndpointOpen { opens }] = rest else {
        return Ok(false);
    };
    if openings.len() != commitments.len() {
        return Ok(false);
    }
    for ((value, randomness), c) in openings.iter().zip(&commitments) {
        let c = Commitment { tag: SchemeTag::Hiding, payload: c.clone() };
        if !verify_open(&params, &c, &Opening { message: value.clone(), randomness: randomness.clone() }) {
            return Ok(false);
        }
    }
    let inst = ctx.instance()?;
    let expected = inst.graph.num_vertices() * 2 * 3 * ctx.k;
    if reps.len() != openings.len() || reps.iter().any(|r| r.len() != expected) {
        return Ok(false);
    }
    let checker = BodyVerifier {
        ctx,
        instance: Some(inst),
        phase: VerifierPhase::AwaitEndpoints,
        rho_color,
        challenge_openings: openings.clone(),
        coloring_commit: reps.clone(),
        verdict: Verdict::Pending,
    };
    match checker.check_endpoints(opens) {
        Ok(ok) => Ok(ok),
        Err(BodyError::Order(_)) => Ok(false),
        Err(e) => Err(e),
    }
}
