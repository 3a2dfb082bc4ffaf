//! Three sessions under a nested schedule with an honest prover, checked
//! offline from the transcript alone.

use concurrent_zk::body::BodyTag;
use concurrent_zk::commitments::Group;
use concurrent_zk::graph::Graph;
use concurrent_zk::preamble::{Protocol, ProverStrategy, SecurityConfig};
use concurrent_zk::scheduler::{make_adversary, run_interaction, verify_transcript, AbortPolicy, ScheduleKind, Strategy};

fn main() {
    let protocol = Protocol::new(SecurityConfig::new(8, 4, 3, BodyTag::Oracle), Graph::cycle(5), Group::toy61()).unwrap();
    let coloring = vec![0, 1, 0, 1, 2];
    for strategy in [Strategy::honest(ScheduleKind::Nested), Strategy::new(ScheduleKind::Nested, AbortPolicy::Prob(0.2))] {
        let adversary = make_adversary(&protocol, strategy.clone(), 7);
        let t = run_interaction(&protocol, adversary, ProverStrategy::Honest(coloring.clone()), 7).unwrap();
        let slots: Vec<String> = t.schedule(&protocol).slots.iter().map(|(s, r)| format!("{s}.{r}")).collect();
        println!("{strategy}: {} records", t.records.len());
        println!("  slots {}", slots.join(" "));
        println!("  outcomes {:?}", t.outcomes);
        println!("  offline check ok: {}", verify_transcript(&protocol, &t.records).ok());
    }
}
