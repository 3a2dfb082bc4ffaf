//! Simulate four sessions against a nested, aborting verifier without any
//! witness, for a few preamble lengths.

use concurrent_zk::body::BodyTag;
use concurrent_zk::commitments::Group;
use concurrent_zk::graph::Graph;
use concurrent_zk::preamble::{Protocol, SecurityConfig};
use concurrent_zk::scheduler::{make_adversary, verify_transcript, AbortPolicy, ScheduleKind, Strategy};
use concurrent_zk::seed;
use concurrent_zk::simulator::{simulate, SimOptions};

fn main() {
    let strategy = Strategy::new(ScheduleKind::Nested, AbortPolicy::Prob(0.5));
    for m in [4, 8, 16] {
        let protocol = Protocol::new(SecurityConfig::new(8, m, 4, BodyTag::Oracle), Graph::triangle(), Group::toy61()).unwrap();
        let (mut failures, mut rewinds, mut forced) = (0, 0, 0);
        let trials = 200;
        for t in 0..trials {
            let adversary = make_adversary(&protocol, strategy.clone(), seed::derive(3, "tape", t));
            let run = simulate(&protocol, adversary, SimOptions { seed: t, trace: false }).unwrap();
            rewinds += run.stats.rewinds;
            forced += run.stats.forced_commits;
            match run.transcript() {
                Some(tr) => assert!(verify_transcript(&protocol, &tr.records).ok()),
                None => failures += 1,
            }
        }
        println!("m = {m:>2}: failures {failures}/{trials}, {} rewinds and {:.1} forced commits per run", rewinds / trials, forced as f64 / trials as f64);
    }
}
