//! Count the intervals that may solve each session of a few schedules and
//! compare with the lower bound.

use concurrent_zk::analysis::{crafted_schedules, lemma_bound, may_solve_intervals};

fn main() {
    let (m, k) = (32, 4);
    println!("m = {m}, k = {k}: bound {}", lemma_bound(m, k));
    for (name, schedule) in crafted_schedules(m, k, 1) {
        let counts: Vec<String> = (1..=k as u32).map(|s| may_solve_intervals(&schedule, s).len().to_string()).collect();
        println!("  {name:<22} per session {}", counts.join(" "));
    }
}
