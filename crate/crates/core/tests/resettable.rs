use concurrent_zk::body::BodyTag;
use concurrent_zk::preamble::Outcome;
use concurrent_zk::resettable::*;
use concurrent_zk::seed;
use proptest::prelude::{prop_assert, prop_assert_eq, prop_assert_ne, proptest, ProptestConfig};
use std::sync::Arc;

fn setup(m: usize, tag: BodyTag, pairs: usize) -> (Arc<Registry>, Arc<ResetConfig>) {
    let registry = Arc::new(Registry::new(3, vec!["triangle".into(), "cycle:5".into(), "complete:3".into()], [4, 4]).unwrap());
    let mut config = ResetConfig::new(4, m, tag);
    config.pair_count = Some(pairs);
    (registry, Arc::new(config))
}

#[test]
fn graph_references_resolve() {
    assert_eq!(resolve_graph("triangle").unwrap().num_vertices(), 3);
    assert_eq!(resolve_graph("k4").unwrap().edges().len(), 6);
    assert_eq!(resolve_graph("cycle:7").unwrap().edges().len(), 7);
    assert!(resolve_graph("cycle:x").is_err());
    assert!(resolve_graph("/no/such/file.col").is_err());
}

#[test]
fn registries_parse_and_carry_witnesses_when_they_exist() {
    assert!(Registry::from_json("{").is_err());
    let k4 = Registry::new(0, vec!["k4".into()], [1, 1]).unwrap();
    assert!(make_incarnation(&k4, 0, 0, 0).unwrap().witness.is_none());
}

#[test]
fn g3c_sessions_in_pair_mode_accept_and_verify() {
    let (reg, cfg) = setup(2, BodyTag::G3c, 40);
    let plans: Vec<_> = (0..3).map(|i| SessionPlan { incarnation: [i, 1, 2], material_seed: i as u64, diverge_at: None }).collect();
    let t = resetting_run(ResettingAdversary::new(reg.clone(), cfg.clone(), plans, 6).unwrap()).unwrap();
    assert!(t.transcript.outcomes.values().all(|o| *o == Outcome::Accepted));
    assert!(verify_reset_transcript(&t, &reg, &cfg).unwrap().ok());
    for id in 1..=3 {
        assert!(surviving_edges(&t, id).is_some());
    }
}

#[test]
fn simulated_resetting_sessions_reverify() {
    let (reg, cfg) = setup(6, BodyTag::Oracle, 16);
    let mut c = (*cfg).clone();
    c.hybrid = true;
    let c = Arc::new(c);
    let plans: Vec<_> = (0..3).map(|i| SessionPlan { incarnation: [i, 0, i], material_seed: 1, diverge_at: None }).collect();
    let (run, info) = simulate_resetting(ResettingAdversary::new(reg.clone(), c.clone(), plans, 2).unwrap(), 5).unwrap();
    let t = run.transcript().expect("m = 6 solves three sessions");
    assert_eq!(info.len(), 3);
    let rt = ResetTranscript { transcript: t.clone(), sessions: info };
    assert!(verify_reset_transcript(&rt, &reg, &c).unwrap().ok());
}

#[test]
fn forged_openings_are_never_accepted() {
    let (reg, cfg) = setup(3, BodyTag::Oracle, 16);
    let plan = SessionPlan { incarnation: [2, 3, 3], material_seed: 8, diverge_at: None };
    let t = resetting_run(ResettingAdversary::new(reg.clone(), cfg.clone(), vec![plan], 1).unwrap()).unwrap();
    let mut rng = seed::rng(99);
    let (attempts, accepted) = forge_sweep(&t, 1, 500, &mut rng, &reg, cfg).unwrap();
    assert_eq!(attempts, 1500);
    assert_eq!(accepted, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identical_plans_replay_bit_for_bit(i in 0usize..3, j in 0usize..4, k in 0usize..4, material in 0u64..1000, tape in 0u64..1000) {
        let (reg, cfg) = setup(3, BodyTag::Oracle, 16);
        let plan = SessionPlan { incarnation: [i as u32, j as u32, k as u32], material_seed: material, diverge_at: None };
        let t = resetting_run(ResettingAdversary::new(reg, cfg, vec![plan, plan], tape).unwrap()).unwrap();
        prop_assert_eq!(t.session_view(1), t.session_view(2));
        prop_assert_eq!(t.sessions[1].reset_index, 1);
    }

    #[test]
    fn divergence_keeps_the_prefix(d in 1u32..=5, material in 0u64..1000) {
        let (reg, cfg) = setup(5, BodyTag::Oracle, 16);
        let base = SessionPlan { incarnation: [1, 2, 3], material_seed: material, diverge_at: None };
        let plans = vec![base, SessionPlan { diverge_at: Some(d), ..base }];
        let t = resetting_run(ResettingAdversary::new(reg, cfg, plans, 0).unwrap()).unwrap();
        let (a, b) = (t.session_view(1), t.session_view(2));
        let common = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
        prop_assert_eq!(common, 2 * d as usize + 2);
        prop_assert_ne!(&a[common], &b[common]);
        prop_assert!(t.transcript.outcomes[&2] == Outcome::Aborted);
    }
}
