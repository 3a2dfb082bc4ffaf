//! Command-line front end.
//!
//! Every command takes `--seed`; all randomness is derived from it:
//! trial `t` uses adversary tape `derive(seed, "tape", t)`, simulator seed
//! `derive(seed, "simulator", t)` and prover seed `derive(seed, "prover", t)`.
//! Identical arguments give byte-identical output files.
//!
//! `--config FILE` reads flat `key=value` lines (`#` starts a comment) and
//! applies them as flags before those on the command line, which win. A
//! `command=` line names the subcommand when none is given.
//!
//! Exit codes: 0 when every asserted bound held, 1 on a violation (with the
//! violating certificate written), 2 on a configuration error.

use crate::analysis::{self, ExperimentConfig, ExperimentResult};
use crate::body::{default_repetitions, BodyTag};
use crate::commitments::Group;
use crate::graph::Graph;
use crate::preamble::{reduced_instance_size, Outcome, Protocol, ProverStrategy, SecurityConfig};
use crate::resettable::{self, Registry, ResetConfig, ResettingAdversary, SessionPlan};
use crate::scheduler::{make_adversary, run_interaction, verify_transcript, Schedule, ScheduleKind, Strategy, Transcript, VerifyReport};
use crate::seed;
use crate::simulator::{simulate, SimOptions, TraceLine};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(name = "czk", about = "Concurrent zero-knowledge laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Honest (or cheating) prover against an adversary.
    Prove(ProveArgs),
    /// Rewinding simulator runs.
    Simulate(SimulateArgs),
    /// May-solve counts of a schedule file against the lower bound.
    AnalyzeSchedule(ScheduleArgs),
    /// Exhaustive good-interval certificates.
    Claim64(Claim64Args),
    /// The sequential abort game.
    Seqexp(SeqexpArgs),
    /// Simulator failure rates over a grid.
    Sweep(SweepArgs),
    /// Resetting adversary against fixed-tape incarnations.
    Resettable(ResetArgs),
    /// Offline re-verification of a transcript file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args, Clone)]
struct ProtocolArgs {
    /// `triangle`, `k4`, `complete:N`, `cycle:N` or a DIMACS file.
    #[arg(long, default_value = "triangle")]
    graph: String,
    /// Security parameter.
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 2)]
    sessions: usize,
    /// `oracle` or `g3c`.
    #[arg(long, default_value = "oracle")]
    body: String,
    #[arg(long)]
    repetitions: Option<usize>,
    /// `toy61` or `default256`.
    #[arg(long, default_value = "toy61")]
    group: String,
}

#[derive(Debug, Args)]
struct ProveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value = "round_robin")]
    adversary: String,
    /// Prove without the witness.
    #[arg(long)]
    cheat: bool,
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value = "round_robin")]
    adversary: String,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Write the slot-execution trace of trial 0.
    #[arg(long)]
    trace: bool,
    /// Assert the failure rate is at most this.
    #[arg(long)]
    max_failure_rate: Option<f64>,
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    sessions: usize,
}

#[derive(Debug, Args)]
struct Claim64Args {
    #[command(flatten)]
    common: Common,
    /// Largest h; every 1 ≤ h' ≤ h and 2 ≤ r ≤ 2^h' is certified.
    #[arg(long, default_value_t = 5)]
    h: u32,
}

#[derive(Debug, Args)]
struct SeqexpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4)]
    a: usize,
    #[arg(long, default_value_t = 64)]
    b: usize,
    /// `const:P`, `threshold`, `grid` or `all`.
    #[arg(long, default_value = "all")]
    strategy: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Comma-separated preamble lengths.
    #[arg(long, default_value = "4,8,16")]
    ms: String,
    /// Comma-separated session counts.
    #[arg(long = "session-counts", default_value = "4")]
    session_counts: String,
    /// Comma-separated adversary strategies.
    #[arg(long, default_value = "nested+abort_prob(0.5)")]
    adversaries: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
}

#[derive(Debug, Args)]
struct ResetArgs {
    #[command(flatten)]
    common: Common,
    /// Registry JSON; without it one is built from `--inputs` and `--tapes`.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long, default_value = "triangle")]
    inputs: String,
    /// P₁ and P₂ tape counts, `J,K`.
    #[arg(long, default_value = "2,2")]
    tapes: String,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value = "g3c")]
    body: String,
    /// Sessions against incarnation (0,0,0) with identical messages.
    #[arg(long, default_value_t = 3)]
    resets: usize,
    /// One more session against (0,0,0) that refuses this round's reveal.
    #[arg(long)]
    diverge_at: Option<u32>,
    /// Committed challenge pairs per session (default n⁴).
    #[arg(long)]
    pair_count: Option<usize>,
    #[arg(long)]
    hybrid: bool,
    /// Run the simulator instead of the real incarnations.
    #[arg(long)]
    simulate: bool,
    #[arg(long)]
    verify: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long)]
    transcript: PathBuf,
}

/// A failed command: configuration problems exit 2, violated bounds exit 1.
#[derive(Debug)]
enum Failure {
    Config(String),
    Violation(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run(argv: &[String]) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return code;
        }
    };
    let result = match cli.command {
        Command::Prove(a) => prove(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::AnalyzeSchedule(a) => analyze_schedule(a),
        Command::Claim64(a) => claim64(a),
        Command::Seqexp(a) => seqexp(a),
        Command::Sweep(a) => sweep(a),
        Command::Resettable(a) => resettable_cmd(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Violation(msg)) => {
            eprintln!("bound violated: {msg}");
            1
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

/// Splices `--config FILE` contents into the argument list, right after the
/// subcommand.
fn expand_config(argv: &[String]) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    let mut file = None;
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            file = Some(it.next().ok_or("--config needs a file")?.clone());
        } else if let Some(f) = a.strip_prefix("--config=") {
            file = Some(f.to_string());
        } else {
            args.push(a.clone());
        }
    }
    let Some(file) = file else { return Ok(args) };
    let text = fs::read_to_string(&file).map_err(|e| format!("config {file}: {e}"))?;
    let mut command = None;
    let mut flags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(format!("config {file} line {}: expected key=value", n + 1))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match (key.as_str(), value) {
            ("command", v) => command = Some(v.to_string()),
            (_, "true") => flags.push(format!("--{key}")),
            (_, "false") => {}
            (_, v) => {
                flags.push(format!("--{key}"));
                flags.push(v.to_string());
            }
        }
    }
    // flags on the command line win over the file
    let given: Vec<&str> = args.iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap_or(a)).collect();
    let mut kept = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        let takes_value = flags.get(i + 1).is_some_and(|v| !v.starts_with("--"));
        let width = if takes_value { 2 } else { 1 };
        if !given.contains(&&flags[i][2..]) {
            kept.extend_from_slice(&flags[i..i + width]);
        }
        i += width;
    }
    let flags = kept;
    let has_command = args.get(1).is_some_and(|a| !a.starts_with('-'));
    if !has_command {
        let c = command.ok_or(format!("config {file}: no command given"))?;
        args.insert(1.min(args.len()), c);
    }
    let at = 2.min(args.len());
    args.splice(at..at, flags);
    Ok(args)
}

fn write(dir: &Path, name: &str, contents: &str) -> CmdResult {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value") + "\n"
}

/// Vertex commitments one g3c body may make before the command refuses.
const BODY_WORK_LIMIT: usize = 20_000_000;

fn build_protocol(p: &ProtocolArgs) -> Result<(Arc<Protocol>, Graph), Failure> {
    let graph = resettable::resolve_graph(&p.graph)?;
    let group = match p.group.as_str() {
        "toy61" => Group::toy61(),
        "default256" => Group::default256(),
        other => return Err(Failure::Config(format!("unknown group {other:?}"))),
    };
    let tag: BodyTag = p.body.parse().map_err(Failure::Config)?;
    let mut config = SecurityConfig::new(p.k, p.m, p.sessions, tag);
    config.body_repetitions = p.repetitions;
    config.validate()?;
    if tag == BodyTag::G3c {
        let (vertices, edges) = reduced_instance_size(&Arc::new(graph.clone()), p.m, p.k)?;
        let reps = p.repetitions.unwrap_or(default_repetitions(edges, p.k));
        if reps.saturating_mul(vertices) > BODY_WORK_LIMIT {
            return Err(Failure::Config(format!(
                "the g3c body would commit {reps} colorings of {vertices} vertices per session; pass a smaller --repetitions"
            )));
        }
    }
    Ok((Protocol::new(config, graph.clone(), group)?, graph))
}

fn parse_strategy(s: &str) -> Result<Strategy, Failure> {
    if let Some(path) = s.strip_prefix("script:") {
        let schedule = Schedule::parse(&fs::read_to_string(path)?)?;
        return Ok(Strategy::honest(ScheduleKind::Script(Arc::new(schedule))));
    }
    Ok(s.parse()?)
}

fn report_json(r: &VerifyReport) -> serde_json::Value {
    json!({
        "ok": r.ok(),
        "sessions": r.sessions,
        "openings_checked": r.openings_checked,
        "bodies_entered": r.bodies_entered,
        "bodies_accepted": r.bodies_accepted,
        "problems": r.problems,
    })
}

fn outcome_map(outcomes: &BTreeMap<u32, Outcome>) -> serde_json::Value {
    json!(outcomes.iter().map(|(s, o)| (s.to_string(), *o)).collect::<BTreeMap<_, _>>())
}

fn prove(a: ProveArgs) -> CmdResult {
    let (protocol, graph) = build_protocol(&a.protocol)?;
    let strategy = parse_strategy(&a.adversary)?;
    let prover = match (a.cheat, graph.solve_3col()) {
        (false, Some(w)) => ProverStrategy::Honest(w),
        (false, None) => return Err(Failure::Config(format!("{} is not 3-colorable; use --cheat", a.protocol.graph))),
        (true, _) => ProverStrategy::Cheat(vec![0; graph.num_vertices()]),
    };
    let s = a.common.seed;
    let adversary = make_adversary(&protocol, strategy, seed::derive(s, "tape", 0));
    let t = run_interaction(&protocol, adversary, prover, seed::derive(s, "prover", 0))?;
    write(&a.common.out, "transcript.jsonl", &t.to_jsonl())?;
    let mut verdicts = json!({ "outcomes": outcome_map(&t.outcomes) });
    let report = a.verify.then(|| verify_transcript(&protocol, &t.records));
    if let Some(r) = &report {
        verdicts["verify"] = report_json(r);
    }
    write(&a.common.out, "verdicts.json", &pretty(&verdicts))?;
    match report {
        Some(r) if !r.ok() => Err(Failure::Violation(format!("transcript failed re-verification: {:?}", r.problems))),
        _ => Ok(()),
    }
}

fn simulate_cmd(a: SimulateArgs) -> CmdResult {
    let (protocol, _) = build_protocol(&a.protocol)?;
    let strategy = parse_strategy(&a.adversary)?;
    if a.trials == 0 {
        return Err(Failure::Config("trials must be at least 1".into()));
    }
    let s = a.common.seed;
    let mut failures = Vec::new();
    let mut first_transcript: Option<(u64, Transcript)> = None;
    let mut trace: Vec<TraceLine> = Vec::new();
    let (mut rewinds, mut executions, mut forced, mut stale, mut leaked) = (0u64, 0u64, 0u64, 0u64, 0usize);
    let (mut observations, mut solved) = (0usize, 0usize);
    let (mut verified, mut verify_failed) = (0usize, Vec::new());
    for t in 0..a.trials {
        let adversary = make_adversary(&protocol, strategy.clone(), seed::derive(s, "tape", t));
        let run = simulate(&protocol, adversary, SimOptions { seed: seed::derive(s, "simulator", t), trace: a.trace && t == 0 })?;
        rewinds += run.stats.rewinds;
        executions += run.stats.slot_executions;
        forced += run.stats.forced_commits;
        stale += run.stats.stale_uses;
        leaked += run.stats.first_run_records_in_output;
        observations += run.stats.observations.len();
        solved += run.stats.observations.iter().filter(|o| o.solved()).count();
        if t == 0 {
            trace = run.trace.clone();
        }
        if let Some(f) = run.failure() {
            failures.push(json!({ "trial": t, "report": f }));
        }
        if let Some(tr) = run.transcript() {
            if a.verify {
                let r = verify_transcript(&protocol, &tr.records);
                verified += 1;
                if !r.ok() {
                    verify_failed.push(json!({ "trial": t, "problems": r.problems }));
                }
            }
            if first_transcript.is_none() {
                first_transcript = Some((t, tr.clone()));
            }
        }
    }
    let out = &a.common.out;
    if let Some((_, tr)) = &first_transcript {
        write(out, "transcript.jsonl", &tr.to_jsonl())?;
    }
    if a.trace {
        let lines: String = trace.iter().map(|l| serde_json::to_string(l).expect("trace line") + "\n").collect();
        write(out, "trace.jsonl", &lines)?;
    }
    let rate = failures.len() as f64 / a.trials as f64;
    let mut stats = json!({
        "adversary": strategy.to_string(),
        "m": protocol.m(),
        "sessions": protocol.config.num_sessions,
        "trials": a.trials,
        "failures": failures.len(),
        "failure_rate": rate,
        "failure_reports": failures,
        "transcript_trial": first_transcript.as_ref().map(|(t, _)| *t),
        "rewinds": rewinds,
        "slot_executions": executions,
        "forced_commits": forced,
        "stale_uses": stale,
        "first_run_records_in_output": leaked,
        "interval_observations": observations,
        "solved_observations": solved,
    });
    if a.verify {
        stats["verified_transcripts"] = json!(verified);
        stats["verify_failures"] = json!(verify_failed);
    }
    write(out, "stats.json", &pretty(&stats))?;
    if !verify_failed.is_empty() {
        return Err(Failure::Violation(format!("{} simulated transcripts failed re-verification", verify_failed.len())));
    }
    if stale > 0 || leaked > 0 {
        return Err(Failure::Violation(format!("stale solve-table uses {stale}, first-run records in output {leaked}")));
    }
    match a.max_failure_rate {
        Some(max) if rate > max => Err(Failure::Violation(format!("failure rate {rate} above {max}"))),
        _ => Ok(()),
    }
}

fn analyze_schedule(a: ScheduleArgs) -> CmdResult {
    let schedule = Schedule::parse(&fs::read_to_string(&a.schedule)?)?;
    schedule.validate(a.m)?;
    let bound = analysis::lemma_bound(a.m, a.sessions);
    let mut counts = BTreeMap::new();
    for (session, slots) in schedule.session_slots() {
        if slots.len() == a.m {
            counts.insert(session.to_string(), analysis::count_may_solve(&schedule, session, a.m)?);
        }
    }
    let violations = analysis::check_lemma(&schedule, a.m, a.sessions);
    let report = json!({
        "m": a.m,
        "sessions": a.sessions,
        "slots": schedule.len(),
        "bound": bound,
        "counts": counts,
        "violations": violations.iter().map(|v| json!({ "session": v.session, "count": v.count, "bound": v.bound })).collect::<Vec<_>>(),
    });
    write(&a.common.out, "schedule_report.json", &pretty(&report))?;
    println!("bound {bound}; counts {}", serde_json::to_string(&counts)?);
    if let Some(v) = violations.first() {
        let cert = json!({ "session": v.session, "count": v.count, "bound": v.bound, "schedule": v.schedule });
        write(&a.common.out, "violation.json", &pretty(&cert))?;
        return Err(Failure::Violation(format!("session {} has {} may-solve intervals, bound {}", v.session, v.count, v.bound)));
    }
    Ok(())
}

fn claim64(a: Claim64Args) -> CmdResult {
    if !(1..=5).contains(&a.h) {
        return Err(Failure::Config(format!("h = {} outside 1..=5", a.h)));
    }
    let mut certs = Vec::new();
    for h in 1..=a.h {
        for r in 2..=(1usize << h) {
            certs.push(analysis::verify_claim_6_4(r, h)?);
        }
    }
    write(&a.common.out, "claim64.json", &(serde_json::to_string_pretty(&certs)? + "\n"))?;
    let bad: Vec<_> = certs.iter().filter(|c| !c.holds()).collect();
    println!("{} certificates, {} violations", certs.len(), bad.len());
    if let Some(c) = bad.first() {
        write(&a.common.out, "violation.json", &(serde_json::to_string_pretty(c)? + "\n"))?;
        return Err(Failure::Violation(format!("r = {}, h = {}: min {} < {}", c.r, c.h, c.min_count, c.bound)));
    }
    Ok(())
}

fn seqexp(a: SeqexpArgs) -> CmdResult {
    let config = ExperimentConfig { a: a.a, b: a.b, trials: a.trials, seed: a.common.seed, epsilon: a.epsilon };
    config.validate()?;
    let mut strategies = analysis::standard_strategies(a.a, a.b, a.epsilon);
    let chosen: Vec<usize> = match a.strategy.as_str() {
        "all" => (0..strategies.len()).collect(),
        "threshold" => vec![9],
        "grid" => vec![10],
        s => {
            let p: f64 = s.strip_prefix("const:").and_then(|p| p.parse().ok()).ok_or(Failure::Config(format!("unknown strategy {s:?}")))?;
            strategies.push(Box::new(analysis::Constant(p)));
            vec![strategies.len() - 1]
        }
    };
    let mut results: Vec<ExperimentResult> = Vec::new();
    for i in chosen {
        results.push(analysis::sequential_experiment(&config, strategies[i].as_mut())?);
    }
    write(&a.common.out, "seqexp.csv", &analysis::experiment_csv(&results))?;
    for r in &results {
        println!("{:<22} win_rate {:.5}  bound {:.4}", r.strategy, r.win_rate, r.bound);
    }
    match results.iter().find(|r| !r.within_bound()) {
        Some(r) => Err(Failure::Violation(format!("{} wins at rate {} > {} + 3σ", r.strategy, r.win_rate, r.bound))),
        None => Ok(()),
    }
}

fn list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, Failure> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| Failure::Config(format!("bad list entry {x:?}")))).collect()
}

fn sweep(a: SweepArgs) -> CmdResult {
    let (protocol, _) = build_protocol(&a.protocol)?;
    let ms: Vec<usize> = list(&a.ms)?;
    let sessions: Vec<usize> = list(&a.session_counts)?;
    let adversaries = a.adversaries.split(',').map(|s| parse_strategy(s.trim())).collect::<Result<Vec<_>, _>>()?;
    let result = analysis::simulator_success_sweep(&protocol, &ms, &sessions, &adversaries, a.trials, a.common.seed)?;
    write(&a.common.out, "sweep.csv", &analysis::sweep_csv(&result))?;
    for r in &result.rows {
        println!("m={:<3} sessions={} {:<28} failure {:.4}", r.m, r.sessions, r.adversary, r.rate);
    }
    Ok(())
}

fn resettable_cmd(a: ResetArgs) -> CmdResult {
    let registry = match &a.registry {
        Some(path) => Registry::from_json(&fs::read_to_string(path)?)?,
        None => {
            let tapes: Vec<usize> = list(&a.tapes)?;
            let [j, k] = tapes[..] else { return Err(Failure::Config("--tapes takes J,K".into())) };
            Registry::new(a.common.seed, a.inputs.split(',').map(|s| s.trim().to_string()).collect(), [j, k])?
        }
    };
    let registry = Arc::new(registry);
    let mut config = ResetConfig::new(a.k, a.m, a.body.parse().map_err(Failure::Config)?);
    config.pair_count = a.pair_count;
    config.hybrid = a.hybrid;
    let config = Arc::new(config);
    let base = SessionPlan { incarnation: [0, 0, 0], material_seed: 0, diverge_at: None };
    let mut plans = vec![base; a.resets];
    if let Some(r) = a.diverge_at {
        plans.push(SessionPlan { diverge_at: Some(r), ..base });
    }
    let adversary = ResettingAdversary::new(registry.clone(), config.clone(), plans, seed::derive(a.common.seed, "tape", 0))?;
    let out = &a.common.out;
    if a.simulate {
        let (run, sessions) = resettable::simulate_resetting(adversary, seed::derive(a.common.seed, "simulator", 0))?;
        if let Some(t) = run.transcript() {
            let rt = resettable::ResetTranscript { transcript: t.clone(), sessions };
            write(out, "transcript.jsonl", &rt.to_jsonl())?;
        }
        let stats = json!({ "failure": run.failure(), "rewinds": run.stats.rewinds, "forced_commits": run.stats.forced_commits });
        write(out, "stats.json", &pretty(&stats))?;
        return match run.failure() {
            Some(f) => Err(Failure::Violation(format!("simulator failed in session {}", f.session_id))),
            None => Ok(()),
        };
    }
    let t = resettable::resetting_run(adversary)?;
    write(out, "transcript.jsonl", &t.to_jsonl())?;
    let first = t.session_view(1);
    let identical = (1..=a.resets as u32).all(|id| t.session_view(id) == first);
    let mut stats = json!({
        "sessions": t.sessions.len(),
        "outcomes": outcome_map(&t.transcript.outcomes),
        "resets_identical": identical,
    });
    if let Some(n) = resettable::surviving_edges(&t, 1) {
        stats["surviving_edges"] = json!(n);
        if n < 2 {
            eprintln!("warning: only {n} committed pairs survived as edges; the body is weak at this pair count");
        }
    }
    let report = a.verify.then(|| resettable::verify_reset_transcript(&t, &registry, &config)).transpose()?;
    if let Some(r) = &report {
        stats["verify"] = report_json(r);
    }
    write(out, "stats.json", &pretty(&stats))?;
    if !identical {
        return Err(Failure::Violation("identical resets produced different transcripts".into()));
    }
    match report {
        Some(r) if !r.ok() => Err(Failure::Violation(format!("transcript failed re-verification: {:?}", r.problems))),
        _ => Ok(()),
    }
}

fn verify_cmd(a: VerifyArgs) -> CmdResult {
    let (protocol, _) = build_protocol(&a.protocol)?;
    let file = fs::File::open(&a.transcript)?;
    let records = Transcript::read_jsonl(std::io::BufReader::new(file))?;
    let report = verify_transcript(&protocol, &records);
    write(&a.common.out, "verify.json", &pretty(&report_json(&report)))?;
    println!("sessions {}, openings {}, bodies {}/{} accepted", report.sessions, report.openings_checked, report.bodies_accepted, report.bodies_entered);
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("{:?}", report.problems)))
    }
}
