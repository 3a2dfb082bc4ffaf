//! The abort game: no strategy should win a tests before dying much more
//! often than (2/3)^a.

use concurrent_zk::analysis::{sequential_experiment, standard_strategies, ExperimentConfig};

fn main() {
    let config = ExperimentConfig { a: 4, b: 64, trials: 100_000, seed: 5, epsilon: 0.0 };
    for mut s in standard_strategies(config.a, config.b, config.epsilon) {
        let r = sequential_experiment(&config, s.as_mut()).unwrap();
        println!("{:<16} win {:.4} die {:.4} (bound {:.4})", r.strategy, r.win_rate, r.death_rate, r.bound);
    }
}
