//! Exhaustive good-interval minimum for r rounds in 2^h slots, with a
//! placement attaining it.

use concurrent_zk::analysis::{brute_force_min_counts, verify_claim_6_4};

fn main() {
    let h = 4;
    let brute = brute_force_min_counts(h);
    for r in 2..=1usize << h {
        let c = verify_claim_6_4(r, h).unwrap();
        assert_eq!(c.min_count, brute[r]);
        println!("r = {r:>2}: min {} ≥ {} at slots {:?}", c.min_count, c.bound, c.witness_placement);
    }
}
