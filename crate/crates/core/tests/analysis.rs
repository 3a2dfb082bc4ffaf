use concurrent_zk::analysis::*;
use concurrent_zk::message::SessionId;
use concurrent_zk::scheduler::{Schedule, ScheduleKind};
use concurrent_zk::seed;
use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

/// Session 1 at the given slots, session 2 everywhere else.
fn two_sessions(n: usize, first: &[usize]) -> Schedule {
    let mut next = [0u32; 3];
    Schedule {
        slots: (1..=n)
            .map(|slot| {
                let s: SessionId = if first.contains(&slot) { 1 } else { 2 };
                next[s as usize] += 1;
                (s, next[s as usize])
            })
            .collect(),
    }
}

#[test]
fn may_solve_needs_two_inner_rounds_split_across_halves() {
    let s = two_sessions(8, &[1, 5, 6, 8]);
    assert!(may_solve((5, 6), &s, 1).unwrap());
    assert!(!may_solve((1, 4), &s, 1).unwrap());
    assert!(!may_solve((5, 8), &s, 1).unwrap());
    assert_eq!(may_solve_intervals(&s, 1), vec![(5, 6)]);
    assert!(matches!(may_solve((2, 3), &s, 1), Err(AnalysisError::NotInPlan(2, 3))));
}

#[test]
fn a_schedule_with_no_may_solve_interval_is_consistent_with_the_vacuous_bound() {
    let s = two_sessions(8, &[1, 3, 6, 8]);
    assert!(may_solve_intervals(&s, 1).is_empty());
    assert_eq!(lemma_bound(4, 2), -1);
    assert_eq!(count_may_solve(&s, 1, 4).unwrap(), 0);
    assert!(matches!(count_may_solve(&s, 1, 5), Err(AnalysisError::Incomplete(1))));
}

#[test]
fn lemma_bounds_at_desk_scale() {
    assert_eq!(lemma_bound(64, 4), 6);
    assert_eq!(lemma_bound(32, 4), 2);
    assert_eq!(lemma_bound(16, 4), 1);
}

#[test]
fn lemma_holds_on_every_small_schedule() {
    for (m, k) in [(2, 2), (3, 2), (4, 2), (6, 2), (4, 3), (3, 3), (3, 4), (2, 6), (12, 1)] {
        let mut seen = 0;
        exhaustive_schedules(m, k, |s| {
            seen += 1;
            assert!(check_lemma(s, m, k).is_empty(), "m = {m}, k = {k}: {s:?}");
        });
        assert!(seen > 0);
    }
}

#[test]
fn lemma_holds_on_crafted_families() {
    for (m, k) in [(16, 4), (32, 4), (64, 4)] {
        for (name, s) in crafted_schedules(m, k, 1) {
            assert!(check_lemma(&s, m, k).is_empty(), "{name} at m = {m}");
        }
    }
    let rr = Schedule::generate(&ScheduleKind::RoundRobin, 4, 64, 0);
    assert!(min_count(&rr) >= 6);
}

#[test]
fn claim_small_cases() {
    let c = verify_claim_6_4(2, 1).unwrap();
    assert_eq!((c.min_count, c.bound), (1, 1));
    let c = verify_claim_6_4(4, 2).unwrap();
    assert_eq!((c.min_count, c.bound), (2, 2));
    let c = verify_claim_6_4(3, 2).unwrap();
    assert!(c.min_count >= 1);
    assert_eq!(c.witness_placement.len(), 3);
    assert!(verify_claim_6_4(1, 3).is_err());
    assert!(verify_claim_6_4(9, 3).is_err());
}

#[test]
fn dynamic_programme_agrees_with_enumeration() {
    for h in 1..=4 {
        let brute = brute_force_min_counts(h);
        for r in 2..=1usize << h {
            let c = verify_claim_6_4(r, h).unwrap();
            assert_eq!(c.min_count, brute[r], "r = {r}, h = {h}");
            assert!(c.holds());
            let mask = c.witness_placement.iter().fold(0u64, |m, &s| m | 1 << (s - 1));
            assert_eq!(good_intervals(mask, h), c.min_count);
        }
    }
}

#[test]
fn sequential_game_edge_cases() {
    let cfg = ExperimentConfig { a: 1, b: 64, trials: 1000, seed: 0, epsilon: 0.0 };
    let r = sequential_experiment(&cfg, &mut Constant(1.0)).unwrap();
    assert_eq!((r.win_rate, r.death_rate), (0.0, 1.0));
    let r = sequential_experiment(&cfg, &mut Constant(0.0)).unwrap();
    assert_eq!((r.win_rate, r.death_rate), (0.0, 0.0));
    assert!(ExperimentConfig { a: 4, b: 4, ..cfg }.validate().is_err());
}

#[test]
fn one_win_game_matches_its_closed_form() {
    // per test: win (1−p)p, carry on (1−p)², otherwise die
    for p in [0.2, 0.5, 0.7] {
        let cfg = ExperimentConfig { a: 1, b: 10, trials: 50_000, seed: 3, epsilon: 0.0 };
        let q: f64 = (1.0 - p) * (1.0 - p);
        let exact = (1.0 - p) * p * (1.0 - q.powi(10)) / (1.0 - q);
        let r = sequential_experiment(&cfg, &mut Constant(p)).unwrap();
        let sigma = (exact * (1.0 - exact) / cfg.trials as f64).sqrt();
        assert!((r.win_rate - exact).abs() <= 4.0 * sigma, "p = {p}: {} vs {exact}", r.win_rate);
    }
}

#[test]
fn constant_half_stays_under_the_bound() {
    let cfg = ExperimentConfig { a: 4, b: 64, trials: 100_000, seed: 1, epsilon: 0.0 };
    let r = sequential_experiment(&cfg, &mut Constant(0.5)).unwrap();
    assert!((cfg.bound() - 0.19753).abs() < 1e-4);
    assert!(r.within_bound(), "{r:?}");
}

#[test]
fn best_grid_strategy_is_below_two_thirds_per_win() {
    for a in 1..=6 {
        let (mut strategy, value) = grid_search(a, 64, 0.0, 100);
        assert!(value <= (2.0f64 / 3.0).powi(a as i32), "a = {a}: {value}");
        let cfg = ExperimentConfig { a, b: 64, trials: 20_000, seed: a as u64, epsilon: 0.0 };
        let r = sequential_experiment(&cfg, &mut strategy).unwrap();
        let sigma = (value * (1.0 - value) / cfg.trials as f64).sqrt().max(1e-3);
        assert!((r.win_rate - value).abs() <= 4.0 * sigma, "a = {a}: {} vs {value}", r.win_rate);
    }
}

#[test]
fn spearman_matches_reference_values() {
    let (rho, p) = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]);
    assert!((rho - 0.8207826816681233).abs() < 1e-12);
    assert!((p - 0.08858700531354381).abs() < 1e-9);
    let (rho, _) = spearman(&[1.0, 2.0, 3.0, 4.0], &[4.0, 3.0, 2.0, 1.0]);
    assert!((rho + 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn may_solve_intervals_are_disjoint(m in 2usize..12, k in 1usize..5, tape in any::<u64>()) {
        let mut rng = seed::rng(tape);
        let s = random_schedule(m, k, &mut rng);
        for session in 1..=k as SessionId {
            prop_assert!(pairwise_disjoint(&may_solve_intervals(&s, session)));
        }
        prop_assert!(check_lemma(&s, m, k).is_empty());
    }
}
