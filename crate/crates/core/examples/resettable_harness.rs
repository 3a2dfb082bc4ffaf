//! Reset one incarnation several times with identical messages, diverge
//! once, and let the simulator answer instead of the real incarnations.

use concurrent_zk::body::BodyTag;
use concurrent_zk::resettable::{resetting_run, simulate_resetting, verify_reset_transcript, Registry, ResetConfig, ResettingAdversary, SessionPlan};
use std::sync::Arc;

fn main() {
    let registry = Arc::new(Registry::new(4, vec!["triangle".into(), "cycle:5".into()], [2, 2]).unwrap());
    let mut config = ResetConfig::new(4, 8, BodyTag::Oracle);
    config.pair_count = Some(16);
    let config = Arc::new(config);
    let plan = SessionPlan { incarnation: [1, 0, 1], material_seed: 3, diverge_at: None };
    let plans = vec![plan, plan, plan, SessionPlan { diverge_at: Some(3), ..plan }];

    let t = resetting_run(ResettingAdversary::new(registry.clone(), config.clone(), plans.clone(), 1).unwrap()).unwrap();
    for id in 2..=4 {
        let same = t.session_view(1).iter().zip(t.session_view(id)).take_while(|(a, b)| **a == *b).count();
        println!("session {id} agrees with session 1 for {same} messages");
    }
    println!("outcomes {:?}", t.transcript.outcomes);
    println!("offline check ok: {}", verify_reset_transcript(&t, &registry, &config).unwrap().ok());

    let (run, _) = simulate_resetting(ResettingAdversary::new(registry, config, plans, 1).unwrap(), 9).unwrap();
    match (run.transcript(), run.failure()) {
        (Some(t), _) => println!("simulated: {} records, {} rewinds, outcomes {:?}", t.records.len(), run.stats.rewinds, t.outcomes),
        (_, Some(f)) => println!("simulator failed: {f:?}"),
        _ => unreachable!(),
    }
}
