use concurrent_zk::body::BodyTag;
use concurrent_zk::commitments::Group;
use concurrent_zk::graph::Graph;
use concurrent_zk::message::Direction;
use concurrent_zk::preamble::{Outcome, Protocol, ProverStrategy, SecurityConfig};
use concurrent_zk::scheduler::*;
use proptest::prelude::{any, prop_assert, prop_assert_eq, prop_oneof, proptest, Just, ProptestConfig};
use proptest::strategy::Strategy as _;
use std::sync::Arc;

fn protocol(k: usize, m: usize, sessions: usize) -> Arc<Protocol> {
    Protocol::new(SecurityConfig::new(k, m, sessions, BodyTag::Oracle), Graph::triangle(), Group::toy61()).unwrap()
}

fn honest() -> ProverStrategy {
    ProverStrategy::Honest(vec![0, 1, 2])
}

#[test]
fn nested_schedule_of_four_sessions_has_sixteen_slots() {
    let proto = protocol(4, 4, 4);
    let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::Nested), 1);
    let t = run_interaction(&proto, adv, honest(), 2).unwrap();
    let sched = t.schedule(&proto);
    assert_eq!(sched.len(), 16);
    assert_eq!(sched, Schedule::generate(&ScheduleKind::Nested, 4, 4, 0));
    // the innermost session runs its whole preamble between rounds 1 and 2 of the one around it
    assert_eq!(&sched.slots[..7], &[(1, 1), (2, 1), (3, 1), (4, 1), (4, 2), (4, 3), (4, 4)]);
    assert!(t.outcomes.values().all(|o| *o == Outcome::Accepted));
}

#[test]
fn every_pattern_completes_with_an_honest_prover() {
    for kind in [ScheduleKind::RoundRobin, ScheduleKind::Nested, ScheduleKind::RandomInterleave, ScheduleKind::Parallel] {
        let proto = protocol(8, 3, 3);
        let adv = make_adversary(&proto, Strategy::honest(kind.clone()), 11);
        let t = run_interaction(&proto, adv, honest(), 4).unwrap();
        assert_eq!(t.outcomes.len(), 3, "{kind:?}");
        assert!(t.outcomes.values().all(|o| *o == Outcome::Accepted), "{kind:?}");
        assert!(verify_transcript(&proto, &t.records).ok(), "{kind:?}");
    }
}

#[test]
fn certain_refusal_stops_every_session_before_a_body() {
    let proto = protocol(8, 4, 3);
    let adv = make_adversary(&proto, Strategy::new(ScheduleKind::Nested, AbortPolicy::Prob(1.0)), 1);
    let t = run_interaction(&proto, adv, honest(), 1).unwrap();
    assert!(t.outcomes.values().all(|o| *o == Outcome::Aborted));
    let report = verify_transcript(&proto, &t.records);
    assert!(report.ok());
    assert_eq!(report.bodies_entered, 0);
}

#[test]
fn cheating_prover_is_rejected_by_the_oracle_body() {
    let proto = protocol(8, 2, 2);
    let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::RoundRobin), 1);
    let t = run_interaction(&proto, adv, ProverStrategy::Cheat(vec![0, 0, 0]), 1).unwrap();
    assert!(t.outcomes.values().all(|o| *o == Outcome::Rejected));
}

#[test]
fn records_alternate_and_time_increases() {
    let proto = protocol(8, 3, 2);
    let adv = make_adversary(&proto, Strategy::honest(ScheduleKind::RandomInterleave), 7);
    let t = run_interaction(&proto, adv, honest(), 1).unwrap();
    assert!(t.records.windows(2).all(|w| w[0].t < w[1].t));
    for w in t.records.windows(2) {
        if w[0].direction == Direction::VerifierToProver && w[0].message.session_id == w[1].message.session_id {
            assert_eq!(w[1].direction, Direction::ProverToVerifier);
        }
    }
}

#[test]
fn same_tape_same_transcript() {
    let proto = protocol(8, 3, 3);
    let run = |tape| {
        let adv = make_adversary(&proto, Strategy::new(ScheduleKind::RandomInterleave, AbortPolicy::Prob(0.3)), tape);
        run_interaction(&proto, adv, honest(), 9).unwrap().to_jsonl()
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

fn strategy_strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    let kind = prop_oneof![Just(ScheduleKind::RoundRobin), Just(ScheduleKind::Nested), Just(ScheduleKind::RandomInterleave), Just(ScheduleKind::Parallel)];
    let abort = prop_oneof![Just(AbortPolicy::Never), (0u32..=100).prop_map(|p| AbortPolicy::Prob(p as f64 / 100.0)), (0u32..=100).prop_map(|p| AbortPolicy::Adaptive(p as f64 / 100.0))];
    (kind, abort).prop_map(|(s, a)| Strategy::new(s, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn strategies_print_and_parse_back(s in strategy_strategy()) {
        prop_assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
    }

    #[test]
    fn generated_schedules_are_valid(kind in 0usize..4, sessions in 1usize..6, m in 1usize..6, tape in any::<u64>()) {
        let kind = [ScheduleKind::RoundRobin, ScheduleKind::Nested, ScheduleKind::RandomInterleave, ScheduleKind::Parallel][kind].clone();
        let s = Schedule::generate(&kind, sessions, m, tape);
        prop_assert!(s.validate(m).is_ok());
        prop_assert_eq!(s.len(), sessions * m);
        prop_assert_eq!(Schedule::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn transcripts_survive_jsonl(tape in any::<u64>(), p in 0u32..=10) {
        let proto = protocol(4, 2, 2);
        let adv = make_adversary(&proto, Strategy::new(ScheduleKind::RandomInterleave, AbortPolicy::Prob(p as f64 / 10.0)), tape);
        let t = run_interaction(&proto, adv, honest(), tape).unwrap();
        let back = Transcript::read_jsonl(t.to_jsonl().as_bytes()).unwrap();
        prop_assert!(verify_transcript(&proto, &back).ok());
        prop_assert_eq!(back, t.records);
    }
}
