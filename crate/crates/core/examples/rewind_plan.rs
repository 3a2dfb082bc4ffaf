//! The fixed rewinding order over n slots and its cost.

use concurrent_zk::simulator::{plan_intervals, rewind_plan, round_budget};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let plan = rewind_plan(n);
    let order: Vec<String> = plan.trace.iter().map(usize::to_string).collect();
    println!("order: {}", order.join(","));
    let rewinds: Vec<String> = plan.rewinds.iter().map(|(i, j)| format!("({i}←{j})")).collect();
    println!("rewinds: {}", rewinds.join(" "));
    println!("{} intervals, {} slot executions (n² = {})", plan_intervals(n).len(), round_budget(n), n * n);
}
