//! The constant-round body on its own: an honest coloring always passes,
//! a fake one on K₄ survives each repetition with probability 5/6.

use concurrent_zk::body::{run_body, BodyContext, BodyProver, BodyTag, BodyTarget, BodyVerifier, Challenges, ProverKnowledge, Verdict};
use concurrent_zk::commitments::Group;
use concurrent_zk::graph::Graph;
use concurrent_zk::preamble::CompoundWitness;
use concurrent_zk::seed;
use std::sync::Arc;

fn run(graph: Graph, knowledge: ProverKnowledge, repetitions: usize, s: u64) -> Verdict {
    let ctx = BodyContext { tag: BodyTag::G3c, k: 8, group: Group::toy61(), target: BodyTarget::Graph(Arc::new(graph)), challenges: Challenges::Edges { repetitions } };
    let mut rng = seed::rng(s);
    let prover = BodyProver::new(ctx.clone(), knowledge).unwrap();
    let verifier = BodyVerifier::new(ctx, Vec::new(), &mut rng).unwrap();
    run_body(prover, verifier, &mut rng).unwrap().0
}

fn main() {
    let honest = run(Graph::cycle(5), ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 1, 0, 1, 2])), 10, 0);
    println!("honest on C₅: {honest:?}");
    let trials = 5000;
    for r in [1, 3, 6, 12] {
        let accepted = (0..trials).filter(|&s| run(Graph::complete(4), ProverKnowledge::Cheat(vec![0, 1, 2, 0]), r, s) == Verdict::Accept).count();
        println!("K₄ cheat, R = {r:>2}: {:.4} (5/6)^R = {:.4}", accepted as f64 / trials as f64, (5.0f64 / 6.0).powi(r as i32));
    }
}
