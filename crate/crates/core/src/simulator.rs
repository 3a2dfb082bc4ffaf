//! The black-box rewinding simulator.
//!
//! The rewinding schedule is fixed in advance and depends only on the number
//! of preamble slots. An interval is run, rewound to just before the
//! prover's answer at its first slot, and run again. Whatever the verifier
//! revealed during the first run is remembered, so in the second run the
//! prover can commit to `p_a = v_a` and hold a witness for the compound
//! statement. Only second runs survive into the output.

use crate::bits::BitString;
use crate::message::SessionId;
use crate::preamble::{Protocol, ProverStrategy};
use crate::scheduler::{Adversary, Live, ProverEvent, ProverPool, SchedulerError, SessionPool, Transcript, VerifierBlackBox};
use crate::seed;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Last slot of the first half of `[lo, hi]`; the first half holds ⌈len/2⌉ slots.
pub fn split(lo: usize, hi: usize) -> usize {
    lo + (hi - lo + 1).div_ceil(2) - 1
}

/// The execution order of the rewinding schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewindPlan {
    pub num_slots: usize,
    /// Slot executions in order.
    pub trace: Vec<usize>,
    /// Rewinds `(i, j)`: after slot j, back to just before the prover's slot-i answer.
    pub rewinds: Vec<(usize, usize)>,
}

impl RewindPlan {
    /// Each rewound interval with its split point, in first-execution order.
    pub fn intervals(&self) -> Vec<(usize, usize, usize)> {
        plan_intervals(self.num_slots)
    }
}

pub fn rewind_plan(num_slots: usize) -> RewindPlan {
    assert!(num_slots >= 1, "a plan needs at least one slot");
    fn run(lo: usize, hi: usize, plan: &mut RewindPlan) {
        if lo == hi {
            plan.trace.push(lo);
            return;
        }
        let mid = split(lo, hi);
        rewound(lo, mid, plan);
        rewound(mid + 1, hi, plan);
    }
    fn rewound(lo: usize, hi: usize, plan: &mut RewindPlan) {
        run(lo, hi, plan);
        if lo < hi {
            plan.rewinds.push((lo, hi));
            run(lo, hi, plan);
        }
    }
    let mut plan = RewindPlan { num_slots, trace: Vec::new(), rewinds: Vec::new() };
    run(1, num_slots, &mut plan);
    plan
}

/// Distinct rewound intervals `(lo, hi, mid)`: everything below the top
/// except singletons. They are pairwise nested or disjoint.
pub fn plan_intervals(num_slots: usize) -> Vec<(usize, usize, usize)> {
    fn walk(lo: usize, hi: usize, top: bool, out: &mut Vec<(usize, usize, usize)>) {
        if lo == hi {
            return;
        }
        let mid = split(lo, hi);
        if !top {
            out.push((lo, hi, mid));
        }
        walk(lo, mid, false, out);
        walk(mid + 1, hi, false, out);
    }
    let mut out = Vec::new();
    walk(1, num_slots, true, &mut out);
    out
}

/// Total slot executions of the plan over `num_slots` slots.
pub fn round_budget(num_slots: usize) -> u64 {
    fn run(n: usize) -> u64 {
        if n == 1 {
            1
        } else {
            rewound(n.div_ceil(2)) + rewound(n / 2)
        }
    }
    fn rewound(n: usize) -> u64 {
        if n == 1 {
            1
        } else {
            2 * run(n)
        }
    }
    assert!(num_slots >= 1, "a plan needs at least one slot");
    run(num_slots)
}

/// A session reached its proof body without a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureReport {
    pub session_id: SessionId,
    pub slot: usize,
    pub completed_preambles: usize,
    pub solve_table_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunLabel {
    Top,
    First,
    Second,
}

/// One slot execution, for the optional instrumented trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLine {
    pub slot: usize,
    pub execution_index: u64,
    pub run: RunLabel,
    pub interval: [usize; 2],
}

/// A may-solve interval as it played out: the session had round `a` in the
/// first half and round `a + 1` in the second half of the surviving run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalObservation {
    pub session: SessionId,
    pub interval: (usize, usize),
    pub round: u32,
    /// The first run revealed `v_a`, so the second run committed to it.
    pub first_good: bool,
    /// The verifier refused the reveal in the surviving run.
    pub second_bad: bool,
}

impl IntervalObservation {
    pub fn solved(&self) -> bool {
        self.first_good || self.second_bad
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimStats {
    pub slot_executions: u64,
    pub rewinds: u64,
    /// Preamble completions per session over the whole simulation.
    pub completions: BTreeMap<SessionId, usize>,
    pub forced_commits: u64,
    /// Forced commits whose value was learned before a rewind to or before
    /// the session's first round; must stay zero.
    pub stale_uses: u64,
    pub observations: Vec<IntervalObservation>,
    /// Output records produced inside some first run; must stay zero.
    pub first_run_records_in_output: usize,
}

#[derive(Debug, Clone)]
pub enum SimOutcome {
    Transcript(Transcript),
    Failure(FailureReport),
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub outcome: SimOutcome,
    pub stats: SimStats,
    pub trace: Vec<TraceLine>,
}

impl SimRun {
    pub fn transcript(&self) -> Option<&Transcript> {
        match &self.outcome {
            SimOutcome::Transcript(t) => Some(t),
            SimOutcome::Failure(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&FailureReport> {
        match &self.outcome {
            SimOutcome::Failure(f) => Some(f),
            SimOutcome::Transcript(_) => None,
        }
    }
}

struct Learned {
    value: BitString,
    /// Slot of the session's first round when the value was learned.
    tag: usize,
    /// Number of rewinds executed before it was learned.
    since: usize,
}

enum Stop {
    Failure(FailureReport),
    Error(SchedulerError),
}

impl From<SchedulerError> for Stop {
    fn from(e: SchedulerError) -> Self {
        Stop::Error(e)
    }
}

struct Engine<B, P> {
    live: Live<B, P>,
    table: HashMap<(SessionId, u32), Learned>,
    /// Target slot of every rewind so far.
    rewind_targets: Vec<usize>,
    rng: seed::Rng,
    m: u32,
    stats: SimStats,
    want_trace: bool,
    trace: Vec<TraceLine>,
    labels: Vec<(RunLabel, usize, usize)>,
}

impl<B: VerifierBlackBox, P: ProverPool> Engine<B, P> {
    /// Applies `f` to the live interaction with the solve table plugged in.
    fn with_live<T>(&mut self, f: impl FnOnce(&mut Live<B, P>, &mut seed::Rng, &mut dyn FnMut(SessionId, u32) -> Option<BitString>, &mut Vec<ProverEvent>) -> Result<T, SchedulerError>) -> Result<T, Stop> {
        let mut events = Vec::new();
        let table = &self.table;
        let targets = &self.rewind_targets;
        let mut stale = 0u64;
        let mut solve = |s: SessionId, a: u32| {
            let e = table.get(&(s, a))?;
            if targets[e.since..].iter().any(|&t| t <= e.tag) {
                stale += 1;
            }
            Some(e.value.clone())
        };
        let out = f(&mut self.live, &mut self.rng, &mut solve, &mut events)?;
        self.stats.stale_uses += stale;
        for ev in events {
            match ev {
                ProverEvent::Learned { session, round, value } => {
                    if let Some(tag) = self.live.first_slot(session) {
                        self.table.insert((session, round), Learned { value, tag, since: self.rewind_targets.len() });
                    }
                }
                ProverEvent::Committed { forced: true, .. } => self.stats.forced_commits += 1,
                ProverEvent::EnteredBody { session, witness } => {
                    let total: usize = {
                        let c = self.stats.completions.entry(session).or_insert(0);
                        *c += 1;
                        self.stats.completions.values().sum()
                    };
                    if !witness {
                        return Err(Stop::Failure(FailureReport {
                            session_id: session,
                            slot: self.live.slots.len(),
                            completed_preambles: total,
                            solve_table_size: self.table.len(),
                        }));
                    }
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn play(&mut self, slot: usize) -> Result<(), Stop> {
        if self.live.halted() || self.live.next_slot() != slot {
            return Ok(());
        }
        let played = self.with_live(|live, rng, solve, events| live.play_slot(rng, solve, events))?;
        if played {
            self.stats.slot_executions += 1;
            if self.want_trace {
                let (run, lo, hi) = *self.labels.last().expect("top label");
                self.trace.push(TraceLine { slot, execution_index: self.stats.slot_executions, run, interval: [lo, hi] });
            }
        }
        Ok(())
    }

    fn run(&mut self, lo: usize, hi: usize) -> Result<(), Stop> {
        if lo == hi {
            return self.play(lo);
        }
        let mid = split(lo, hi);
        self.rewound(lo, mid)?;
        self.rewound(mid + 1, hi)
    }

    fn rewound(&mut self, lo: usize, hi: usize) -> Result<(), Stop> {
        if lo == hi {
            return self.play(lo);
        }
        // Bring the verifier's slot-lo message in; the rewind restores to
        // just after it, before the prover answers.
        let reached = self.with_live(|live, rng, solve, events| live.reach_slot(rng, solve, events))?;
        if !reached || self.live.next_slot() != lo {
            return Ok(());
        }
        let snap = self.live.snapshot();
        self.labels.push((RunLabel::First, lo, hi));
        self.live.tag += 1;
        self.run(lo, hi)?;
        self.live.tag -= 1;
        self.labels.pop();

        self.live.restore(snap);
        self.stats.rewinds += 1;
        self.rewind_targets.push(lo);
        self.table.retain(|_, e| e.tag < lo);

        self.labels.push((RunLabel::Second, lo, hi));
        self.run(lo, hi)?;
        self.labels.pop();
        self.observe(lo, hi);
        Ok(())
    }

    fn observe(&mut self, lo: usize, hi: usize) {
        let mid = split(lo, hi);
        let end = self.live.slots.len().min(hi);
        if end < lo {
            return;
        }
        let mut by_session: BTreeMap<SessionId, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.live.slots[lo - 1..end].iter().enumerate() {
            by_session.entry(e.session).or_default().push(lo - 1 + i);
        }
        for (session, idx) in by_session {
            if let [i, j] = idx[..] {
                let (a, b) = (self.live.slots[i], self.live.slots[j]);
                if a.slot <= mid && b.slot > mid && a.round >= 2 && b.round == a.round + 1 && b.round < self.m {
                    self.stats.observations.push(IntervalObservation {
                        session,
                        interval: (lo, hi),
                        round: a.round,
                        first_good: a.forced,
                        second_bad: b.refused,
                    });
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub seed: u64,
    pub trace: bool,
}

/// Runs the simulator against `blackbox` with `pool` answering for the
/// prover, over a plan of `num_slots` slots.
pub fn simulate_with<B: VerifierBlackBox, P: ProverPool>(blackbox: B, pool: P, num_slots: usize, opts: SimOptions) -> Result<SimRun, SchedulerError> {
    let m = blackbox.protocol().m() as u32;
    let mut engine = Engine {
        live: Live::new(blackbox, pool),
        table: HashMap::new(),
        rewind_targets: Vec::new(),
        rng: seed::rng_for(opts.seed, "simulator", 0),
        m,
        stats: SimStats::default(),
        want_trace: opts.trace,
        trace: Vec::new(),
        labels: vec![(RunLabel::Top, 1, num_slots.max(1))],
    };
    let result = engine.run(1, num_slots.max(1)).and_then(|_| engine.with_live(|live, rng, solve, events| live.drain(rng, solve, events)));
    let outcome = match result {
        Ok(()) => {
            engine.stats.first_run_records_in_output = engine.live.tags.iter().filter(|&&t| t > 0).count();
            SimOutcome::Transcript(engine.live.into_transcript())
        }
        Err(Stop::Failure(f)) => SimOutcome::Failure(f),
        Err(Stop::Error(e)) => return Err(e),
    };
    Ok(SimRun { outcome, stats: engine.stats, trace: engine.trace })
}

/// Simulates the protocol's sessions against an adversary, without any
/// witness for the base graph.
pub fn simulate(protocol: &Arc<Protocol>, adversary: Adversary, opts: SimOptions) -> Result<SimRun, SchedulerError> {
    let n = protocol.m() * protocol.config.num_sessions;
    simulate_with(adversary, SessionPool::new(protocol.clone(), ProverStrategy::Solver), n, opts)
}
