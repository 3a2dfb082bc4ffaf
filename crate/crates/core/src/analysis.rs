//! Checks of the combinatorial and probabilistic facts the simulator rests
//! on: how many rewind intervals can solve a session, the counting bound
//! behind it, and the sequential game that bounds bad luck across
//! repeated rewinds.

use crate::message::SessionId;
use crate::preamble::{Protocol, ProverStrategy};
use crate::scheduler::{make_adversary, Schedule, SchedulerError, SessionPool, Strategy};
use crate::seed;
use crate::simulator::{plan_intervals, simulate_with, split, SimOptions};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("interval ({0}, {1}) is not a rewound interval of the plan")]
    NotInPlan(usize, usize),
    #[error("session {0} does not complete its preamble in the schedule")]
    Incomplete(SessionId),
    #[error("parameter error: {0}")]
    Params(String),
}

/// Rounds of one session as `(slot, round)` pairs.
fn session_rounds(schedule: &Schedule, session: SessionId) -> Vec<(usize, u32)> {
    schedule.slots.iter().enumerate().filter(|(_, (s, _))| *s == session).map(|(i, &(_, r))| (i + 1, r)).collect()
}

/// Whether `(lo, hi)` may solve the session: exactly two of its rounds lie
/// inside, the earlier in the first half and the later in the second, and
/// its first and last rounds lie outside on either side.
///
/// "First half" refers to the earlier of the two rounds inside the interval;
/// the session's own first round is required to precede the interval.
pub fn may_solve(interval: (usize, usize), schedule: &Schedule, session: SessionId) -> Result<bool, AnalysisError> {
    let (lo, hi) = interval;
    let n = schedule.len();
    if !plan_intervals(n).iter().any(|&(a, b, _)| (a, b) == (lo, hi)) {
        return Err(AnalysisError::NotInPlan(lo, hi));
    }
    Ok(may_solve_unchecked(lo, hi, &session_rounds(schedule, session)))
}

fn may_solve_unchecked(lo: usize, hi: usize, rounds: &[(usize, u32)]) -> bool {
    let (Some(first), Some(last)) = (rounds.first(), rounds.last()) else { return false };
    let mid = split(lo, hi);
    let inside: Vec<usize> = rounds.iter().map(|&(s, _)| s).filter(|&s| lo <= s && s <= hi).collect();
    inside.len() == 2 && first.0 < lo && last.0 > hi && inside[0] <= mid && inside[1] > mid
}

/// Plan intervals that may solve the session.
pub fn may_solve_intervals(schedule: &Schedule, session: SessionId) -> Vec<(usize, usize)> {
    let rounds = session_rounds(schedule, session);
    plan_intervals(schedule.len()).into_iter().filter(|&(lo, hi, _)| may_solve_unchecked(lo, hi, &rounds)).map(|(lo, hi, _)| (lo, hi)).collect()
}

pub fn count_may_solve(schedule: &Schedule, session: SessionId, m: usize) -> Result<usize, AnalysisError> {
    if session_rounds(schedule, session).len() < m {
        return Err(AnalysisError::Incomplete(session));
    }
    Ok(may_solve_intervals(schedule, session).len())
}

/// `⌈m / (log₂(mk) + 1)⌉ − 2`, which may be negative (vacuous).
pub fn lemma_bound(m: usize, k: usize) -> i64 {
    let l = ((m * k) as f64).log2();
    (m as f64 / (l + 1.0)).ceil() as i64 - 2
}

/// Whether no two intervals overlap.
pub fn pairwise_disjoint(intervals: &[(usize, usize)]) -> bool {
    intervals.iter().enumerate().all(|(i, &(a, b))| intervals[i + 1..].iter().all(|&(c, d)| b < c || d < a))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub session: SessionId,
    pub count: usize,
    pub bound: i64,
    pub schedule: String,
}

/// Checks the bound (and disjointness) for every completed session.
pub fn check_lemma(schedule: &Schedule, m: usize, k: usize) -> Vec<LemmaViolation> {
    let bound = lemma_bound(m, k);
    let mut out = Vec::new();
    for (session, rounds) in schedule.session_slots() {
        if rounds.len() < m {
            continue;
        }
        let iv = may_solve_intervals(schedule, session);
        if (iv.len() as i64) < bound || !pairwise_disjoint(&iv) {
            out.push(LemmaViolation { session, count: iv.len(), bound, schedule: schedule.to_text() });
        }
    }
    out
}

/// Smallest may-solve count over all sessions of a schedule.
pub fn min_count(schedule: &Schedule) -> usize {
    schedule.session_slots().keys().map(|&s| may_solve_intervals(schedule, s).len()).min().unwrap_or(0)
}

/// Every interleaving of k sessions with m rounds each, up to renaming
/// sessions (sessions are numbered in order of first appearance).
pub fn exhaustive_schedules(m: usize, k: usize, mut visit: impl FnMut(&Schedule)) {
    fn rec(m: usize, k: usize, used: &mut Vec<u32>, opened: usize, cur: &mut Vec<(SessionId, u32)>, visit: &mut dyn FnMut(&Schedule), buf: &mut Schedule) {
        if cur.len() == m * k {
            buf.slots.clone_from(cur);
            visit(buf);
            return;
        }
        for s in 0..k.min(opened + 1) {
            if (used[s] as usize) < m {
                used[s] += 1;
                cur.push((s as SessionId + 1, used[s]));
                rec(m, k, used, opened.max(s + 1), cur, visit, buf);
                cur.pop();
                used[s] -= 1;
            }
        }
    }
    let mut buf = Schedule::default();
    rec(m, k, &mut vec![0; k], 0, &mut Vec::new(), &mut visit, &mut buf);
}

/// A uniformly random interleaving.
pub fn random_schedule(m: usize, k: usize, rng: &mut seed::Rng) -> Schedule {
    let mut owners: Vec<SessionId> = (1..=k as SessionId).flat_map(|s| std::iter::repeat_n(s, m)).collect();
    owners.shuffle(rng);
    let mut next = vec![0u32; k + 1];
    Schedule {
        slots: owners
            .into_iter()
            .map(|s| {
                next[s as usize] += 1;
                (s, next[s as usize])
            })
            .collect(),
    }
}

/// Structured schedules plus ones found by local search that try to starve
/// some session of may-solve intervals.
pub fn crafted_schedules(m: usize, k: usize, seed_value: u64) -> Vec<(String, Schedule)> {
    use crate::scheduler::ScheduleKind::*;
    let mut out = vec![
        ("round_robin".to_string(), Schedule::generate(&RoundRobin, k, m, 0)),
        ("nested".to_string(), Schedule::generate(&Nested, k, m, 0)),
        ("sequential".to_string(), Schedule { slots: (1..=k as SessionId).flat_map(|s| (1..=m as u32).map(move |r| (s, r))).collect() }),
    ];
    // Reverse-nested: the innermost session opens first and closes last.
    let mut rev = Vec::new();
    for s in 1..=k as SessionId {
        rev.push((s, 1));
        for r in 2..m as u32 {
            rev.push((s, r));
        }
    }
    for s in (1..=k as SessionId).rev() {
        rev.push((s, m as u32));
    }
    out.push(("open_early_close_late".to_string(), Schedule { slots: rev }));
    let mut rng = seed::rng_for(seed_value, "crafted", (m * 1000 + k) as u64);
    for attempt in 0..4 {
        out.push((format!("local_search_{attempt}"), local_search(m, k, &mut rng, 400)));
    }
    out
}

/// Swaps adjacent slots of different sessions while that does not increase
/// the smallest may-solve count.
fn local_search(m: usize, k: usize, rng: &mut seed::Rng, steps: usize) -> Schedule {
    let mut best = random_schedule(m, k, rng);
    let mut best_score = min_count(&best);
    let n = m * k;
    for _ in 0..steps {
        let i = rng.gen_range(0..n - 1);
        if best.slots[i].0 == best.slots[i + 1].0 {
            continue;
        }
        let mut cand = best.clone();
        cand.slots.swap(i, i + 1);
        renumber(&mut cand);
        let score = min_count(&cand);
        if score <= best_score {
            best = cand;
            best_score = score;
        }
    }
    best
}

fn renumber(s: &mut Schedule) {
    let mut next: BTreeMap<SessionId, u32> = BTreeMap::new();
    for e in &mut s.slots {
        let r = next.entry(e.0).or_insert(0);
        *r += 1;
        e.1 = *r;
    }
}

/// Result of the exhaustive count over placements of r rounds in 2^h slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim64Certificate {
    pub r: usize,
    pub h: u32,
    pub min_count: usize,
    pub bound: usize,
    /// Slots (1-based) of a placement attaining the minimum.
    pub witness_placement: Vec<usize>,
}

impl Claim64Certificate {
    pub fn holds(&self) -> bool {
        self.min_count >= self.bound
    }
}

/// Good intervals of a placement: every interval of the full binary split
/// of 2^h slots, the whole range included, holding exactly two rounds with
/// one in each half.
pub fn good_intervals(mask: u64, h: u32) -> usize {
    let mut count = 0;
    for level in 1..=h {
        let size = 1usize << level;
        let half = size / 2;
        for start in (0..1usize << h).step_by(size) {
            let left = ((mask >> start) & ((1u64 << half) - 1)).count_ones();
            let right = ((mask >> (start + half)) & ((1u64 << half) - 1)).count_ones();
            if left == 1 && right == 1 {
                count += 1;
            }
        }
    }
    count
}

/// Minimum number of good intervals over all placements of r rounds in 2^h
/// slots, by dynamic programming over subtrees, with a placement attaining it.
pub fn verify_claim_6_4(r: usize, h: u32) -> Result<Claim64Certificate, AnalysisError> {
    if h > 5 || r < 2 || r > 1 << h {
        return Err(AnalysisError::Params(format!("need 2 ≤ r ≤ 2^h and h ≤ 5, got r = {r}, h = {h}")));
    }
    // best[d][c]: min good count inside a block of 2^d slots holding c rounds.
    let mut best: Vec<Vec<usize>> = vec![vec![0, 0]];
    for d in 1..=h as usize {
        let prev = &best[d - 1];
        let size = 1usize << d;
        let mut row = vec![usize::MAX; size + 1];
        for (c1, &a) in prev.iter().enumerate() {
            for (c2, &b) in prev.iter().enumerate() {
                let v = a + b + usize::from(c1 == 1 && c2 == 1);
                row[c1 + c2] = row[c1 + c2].min(v);
            }
        }
        best.push(row);
    }
    let mut placement = Vec::new();
    reconstruct(&best, h as usize, r, 0, &mut placement);
    let min = best[h as usize][r];
    debug_assert_eq!(good_intervals(placement.iter().fold(0u64, |m, &s| m | 1 << (s - 1)), h), min);
    Ok(Claim64Certificate { r, h, min_count: min, bound: r.div_ceil(h as usize + 1), witness_placement: placement })
}

fn reconstruct(best: &[Vec<usize>], d: usize, c: usize, offset: usize, out: &mut Vec<usize>) {
    if d == 0 {
        if c == 1 {
            out.push(offset + 1);
        }
        return;
    }
    let prev = &best[d - 1];
    let half = 1usize << (d - 1);
    for c1 in 0..=c.min(half) {
        let c2 = c - c1;
        if c2 > half {
            continue;
        }
        if prev[c1] + prev[c2] + usize::from(c1 == 1 && c2 == 1) == best[d][c] {
            reconstruct(best, d - 1, c1, offset, out);
            reconstruct(best, d - 1, c2, offset + half, out);
            return;
        }
    }
    unreachable!("the DP minimum is attained by some split");
}

/// Minimum good count for every r by enumerating all 2^(2^h) placements.
/// For h = 5 the two 16-slot halves are tabulated once and every pair of
/// half placements is visited.
pub fn brute_force_min_counts(h: u32) -> Vec<usize> {
    let n = 1usize << h;
    if h <= 4 {
        let mut mins = vec![usize::MAX; n + 1];
        for mask in 0u64..1 << n {
            let c = mask.count_ones() as usize;
            mins[c] = mins[c].min(good_intervals(mask, h));
        }
        return mins;
    }
    assert_eq!(h, 5, "enumeration supports h ≤ 5");
    let half_good: Vec<u8> = (0u64..1 << 16).map(|m| good_intervals(m, 4) as u8).collect();
    let half_pop: Vec<u8> = (0u32..1 << 16).map(|m| m.count_ones() as u8).collect();
    let mut mins = [u8::MAX; 33];
    for left in 0..1usize << 16 {
        let (gl, pl) = (half_good[left], half_pop[left]);
        for right in 0..1usize << 16 {
            let pr = half_pop[right];
            let v = gl + half_good[right] + u8::from(pl == 1 && pr == 1);
            let slot = &mut mins[(pl + pr) as usize];
            if v < *slot {
                *slot = v;
            }
        }
    }
    mins.iter().map(|&v| v as usize).collect()
}

/// Outcome of one test in the sequential game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestOutcome {
    Win,
    Neutral,
}

/// Picks each test's probability from the history so far.
pub trait AdversaryStrategy {
    fn name(&self) -> String;
    fn probability(&mut self, test: usize, history: &[TestOutcome]) -> f64;
}

pub struct Constant(pub f64);

impl AdversaryStrategy for Constant {
    fn name(&self) -> String {
        format!("const:{}", self.0)
    }
    fn probability(&mut self, _: usize, _: &[TestOutcome]) -> f64 {
        self.0
    }
}

/// Cautious until one win short of the goal, then bold.
pub struct Threshold {
    pub a: usize,
    pub low: f64,
    pub high: f64,
}

impl AdversaryStrategy for Threshold {
    fn name(&self) -> String {
        format!("threshold:{}:{}", self.low, self.high)
    }
    fn probability(&mut self, _: usize, history: &[TestOutcome]) -> f64 {
        let wins = history.iter().filter(|&&o| o == TestOutcome::Win).count();
        if wins + 1 >= self.a {
            self.high
        } else {
            self.low
        }
    }
}

/// A probability per (wins so far, tests left), e.g. from [`grid_search`].
#[derive(Debug, Clone)]
pub struct Tabled {
    pub b: usize,
    /// `table[w][t]`: probability with w wins and t tests already played.
    pub table: Vec<Vec<f64>>,
}

impl AdversaryStrategy for Tabled {
    fn name(&self) -> String {
        "grid_optimal".into()
    }
    fn probability(&mut self, test: usize, history: &[TestOutcome]) -> f64 {
        let wins = history.iter().filter(|&&o| o == TestOutcome::Win).count();
        self.table[wins.min(self.table.len() - 1)][test.min(self.b - 1)]
    }
}

/// Best history-dependent strategy with probabilities on a grid of step
/// 1/grid, found by backward induction over (wins, tests played). Returns
/// the strategy and its exact win probability.
pub fn grid_search(a: usize, b: usize, epsilon: f64, grid: usize) -> (Tabled, f64) {
    // value[w][t]: win probability with w wins after t tests.
    let mut value = vec![vec![0.0; b + 1]; a + 1];
    let mut table = vec![vec![0.0; b]; a];
    for t in (0..=b).rev() {
        value[a][t] = 1.0;
    }
    for t in (0..b).rev() {
        for w in (0..a).rev() {
            let mut best = (0.0, 0.0);
            for g in 0..=grid {
                let p = g as f64 / grid as f64;
                let win = (p + epsilon).min(1.0);
                let v = (1.0 - p) * (win * value[w + 1][t + 1] + (1.0 - win) * value[w][t + 1]);
                if v > best.0 {
                    best = (v, p);
                }
            }
            value[w][t] = best.0;
            table[w][t] = best.1;
        }
    }
    (Tabled { b, table }, value[0][0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Wins needed.
    pub a: usize,
    /// Test budget.
    pub b: usize,
    pub trials: u64,
    pub seed: u64,
    /// Extra win probability per test.
    pub epsilon: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.a == 0 || self.a >= self.b || self.trials == 0 {
            return Err(AnalysisError::Params(format!("need 1 ≤ a < b and trials ≥ 1, got a = {}, b = {}", self.a, self.b)));
        }
        Ok(())
    }

    /// `(2/3)^a`.
    pub fn bound(&self) -> f64 {
        (2.0f64 / 3.0).powi(self.a as i32)
    }

    /// Binomial standard deviation of an estimate of the bound.
    pub fn sigma(&self) -> f64 {
        let b = self.bound();
        (b * (1.0 - b) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub strategy: String,
    pub a: usize,
    pub b: usize,
    pub trials: u64,
    pub win_rate: f64,
    pub death_rate: f64,
    pub bound: f64,
    pub sigma: f64,
}

impl ExperimentResult {
    pub fn within_bound(&self) -> bool {
        self.win_rate <= self.bound + 3.0 * self.sigma
    }
}

/// Each test: the adversary dies with probability p; otherwise it wins the
/// test with probability p + ε. It wins the game with a wins before dying
/// and before the budget runs out.
pub fn sequential_experiment(config: &ExperimentConfig, strategy: &mut dyn AdversaryStrategy) -> Result<ExperimentResult, AnalysisError> {
    config.validate()?;
    let mut rng = seed::rng_for(config.seed, "trial", 0);
    let (mut won, mut died) = (0u64, 0u64);
    let mut history = Vec::with_capacity(config.b);
    for _ in 0..config.trials {
        history.clear();
        let mut wins = 0;
        for t in 0..config.b {
            let p = strategy.probability(t, &history).clamp(0.0, 1.0);
            if rng.gen::<f64>() < p {
                died += 1;
                break;
            }
            if rng.gen::<f64>() < p + config.epsilon {
                wins += 1;
                history.push(TestOutcome::Win);
                if wins == config.a {
                    won += 1;
                    break;
                }
            } else {
                history.push(TestOutcome::Neutral);
            }
        }
    }
    let n = config.trials as f64;
    Ok(ExperimentResult {
        strategy: strategy.name(),
        a: config.a,
        b: config.b,
        trials: config.trials,
        win_rate: won as f64 / n,
        death_rate: died as f64 / n,
        bound: config.bound(),
        sigma: config.sigma(),
    })
}

/// The strategy set used for bound checks: constants 0.1..0.9, a threshold
/// rule and the grid-searched optimum.
pub fn standard_strategies(a: usize, b: usize, epsilon: f64) -> Vec<Box<dyn AdversaryStrategy>> {
    let mut out: Vec<Box<dyn AdversaryStrategy>> = (1..=9).map(|i| Box::new(Constant(i as f64 / 10.0)) as Box<dyn AdversaryStrategy>).collect();
    out.push(Box::new(Threshold { a, low: 0.2, high: 0.5 }));
    out.push(Box::new(grid_search(a, b, epsilon, 100).0));
    out
}

/// Spearman rank correlation with average ranks for ties, and its two-sided
/// p-value from the t approximation.
pub fn spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return (0.0, 1.0);
    }
    let rho = cov / (vx * vy).sqrt();
    if rho.abs() >= 1.0 {
        return (rho, 0.0);
    }
    let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).expect("n > 2");
    (rho, 2.0 * (1.0 - dist.cdf(t.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub sessions: usize,
    pub adversary: String,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Spearman correlation of failure against m, per (sessions, adversary).
    pub trends: Vec<(usize, String, f64, f64)>,
}

/// Runs the simulator over a grid of (m, sessions, adversary), using the
/// same adversary tapes in every cell.
pub fn simulator_success_sweep(base: &Protocol, ms: &[usize], sessions: &[usize], adversaries: &[Strategy], trials: u64, seed_value: u64) -> Result<SweepResult, SchedulerError> {
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for &k in sessions {
        for adv in adversaries {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for &m in ms {
                let mut config = base.config.clone();
                config.m = m;
                config.num_sessions = k;
                let proto = Arc::new(Protocol { config, ..base.clone() });
                let mut failures = 0;
                for t in 0..trials {
                    let tape = seed::derive(seed_value, "tape", t);
                    let adversary = make_adversary(&proto, adv.clone(), tape);
                    let pool = SessionPool::new(proto.clone(), ProverStrategy::Solver);
                    let run = simulate_with(adversary, pool, m * k, SimOptions { seed: seed::derive(seed_value, "simulator", t), trace: false })?;
                    let failed = run.failure().is_some();
                    failures += u64::from(failed);
                    xs.push(m as f64);
                    ys.push(f64::from(u8::from(failed)));
                }
                let rate = failures as f64 / trials as f64;
                rows.push(SweepRow { m, sessions: k, adversary: adv.to_string(), trials, failures, rate, stderr: (rate * (1.0 - rate) / trials as f64).sqrt() });
            }
            let (rho, p) = spearman(&xs, &ys);
            trends.push((k, adv.to_string(), rho, p));
        }
    }
    Ok(SweepResult { rows, trends })
}

/// CSV with one row per (config, adversary, metric, value, stderr).
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::from("config,adversary,metric,value,stderr\n");
    for r in &result.rows {
        s += &format!("m={};sessions={},{},failure_rate,{},{}\n", r.m, r.sessions, r.adversary, r.rate, r.stderr);
    }
    for (k, adv, rho, p) in &result.trends {
        s += &format!("sessions={k},{adv},spearman_rho,{rho},\n");
        s += &format!("sessions={k},{adv},spearman_p,{p},\n");
    }
    s
}

pub fn experiment_csv(results: &[ExperimentResult]) -> String {
    let mut s = String::from("config,adversary,metric,value,stderr\n");
    for r in results {
        let cfg = format!("a={};b={};trials={}", r.a, r.b, r.trials);
        let se = (r.win_rate * (1.0 - r.win_rate) / r.trials as f64).sqrt();
        s += &format!("{cfg},{},win_rate,{},{se}\n", r.strategy, r.win_rate);
        s += &format!("{cfg},{},bound,{},{}\n", r.strategy, r.bound, r.sigma);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched(slots: &[(SessionId, u32)]) -> Schedule {
        Schedule { slots: slots.to_vec() }
    }

    #[test]
    fn may_solve_examples() {
        // Session 1 at slots 1, 5, 6, 8 of an 8-slot schedule.
        let s = sched(&[(1, 1), (2, 1), (2, 2), (2, 3), (1, 2), (1, 3), (2, 4), (1, 4)]);
        assert!(may_solve((5, 6), &s, 1).unwrap());
        assert!(!may_solve((1, 4), &s, 1).unwrap());
        assert_eq!(may_solve((1, 8), &s, 1), Err(AnalysisError::NotInPlan(1, 8)));
        // Session 1 at slots 1, 3, 6, 8: nothing qualifies.
        let s = sched(&[(1, 1), (2, 1), (1, 2), (2, 2), (2, 3), (1, 3), (2, 4), (1, 4)]);
        assert!(may_solve_intervals(&s, 1).is_empty());
        assert_eq!(lemma_bound(4, 2), -1);
    }

    #[test]
    fn lemma_bound_arithmetic() {
        assert_eq!(lemma_bound(64, 4), 6);
        assert_eq!(lemma_bound(16, 4), 1);
        assert_eq!(lemma_bound(32, 4), 2);
    }

    #[test]
    fn claim_examples() {
        assert_eq!(verify_claim_6_4(2, 1).unwrap().min_count, 1);
        assert_eq!(verify_claim_6_4(4, 2).unwrap().min_count, 2);
        assert!(verify_claim_6_4(3, 2).unwrap().min_count >= 1);
        assert!(verify_claim_6_4(1, 2).is_err());
        assert!(verify_claim_6_4(5, 2).is_err());
    }

    #[test]
    fn dp_matches_enumeration_small() {
        for h in 1..=4 {
            let brute = brute_force_min_counts(h);
            for r in 2..=1usize << h {
                assert_eq!(verify_claim_6_4(r, h).unwrap().min_count, brute[r], "r = {r}, h = {h}");
            }
        }
    }

    #[test]
    fn exhaustive_enumeration_counts() {
        let mut n = 0;
        exhaustive_schedules(2, 2, |_| n += 1);
        // 4!/(2!2!) = 6 interleavings, halved by renaming.
        assert_eq!(n, 3);
        let mut n = 0;
        exhaustive_schedules(2, 3, |_| n += 1);
        assert_eq!(n, 90 / 6);
    }

    #[test]
    fn sequential_edge_cases() {
        let cfg = ExperimentConfig { a: 1, b: 10, trials: 1000, seed: 1, epsilon: 0.0 };
        assert_eq!(sequential_experiment(&cfg, &mut Constant(1.0)).unwrap().win_rate, 0.0);
        assert_eq!(sequential_experiment(&cfg, &mut Constant(0.0)).unwrap().win_rate, 0.0);
    }

    #[test]
    fn grid_optimum_for_one_win_is_below_one_half() {
        let (_, v) = grid_search(1, 64, 0.0, 100);
        assert!(v < 0.5 && v > 0.45, "{v}");
    }

    #[test]
    fn spearman_basics() {
        let (rho, p) = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]);
        assert!((rho - 0.8207826816681233).abs() < 1e-12, "{rho}");
        assert!((p - 0.08858700531354381).abs() < 1e-9, "{p}");
    }
}
