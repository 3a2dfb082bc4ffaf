#![allow(dead_code)]

use concurrent_zk::bits::BitString;
use concurrent_zk::commitments::{binding_params, commit, ExpanderTag, Opening};
use concurrent_zk::compiler::{Circuit, GateOp, InputLabel};
use concurrent_zk::graph::Graph;
use concurrent_zk::preamble::CompoundStatement;
use concurrent_zk::seed;
use rand::Rng;
use std::sync::Arc;

/// A completed preamble over `graph` with random `p`s; `equal` rounds get
/// `vᵢ = pᵢ`. Returns the statement and the prover's openings.
pub fn statement(graph: Graph, k: usize, m: usize, equal: &[usize], s: u64) -> (CompoundStatement, Vec<Opening>) {
    let mut rng = seed::rng(s);
    let params = binding_params(k, BitString::random(&mut rng, k * 3 * k), ExpanderTag::CircuitFriendly).unwrap();
    let mut commitments = Vec::new();
    let mut openings = Vec::new();
    let mut revealed = Vec::new();
    for i in 1..=m {
        let p = BitString::random(&mut rng, k);
        let (c, o) = commit(&params, &p, &mut rng).unwrap();
        revealed.push(if equal.contains(&i) { p } else { BitString::random(&mut rng, k) });
        commitments.push(c);
        openings.push(o);
    }
    (CompoundStatement { base_graph: Arc::new(graph), prover_params: params, p_commitments: commitments, revealed }, openings)
}

/// A random circuit over `inputs` free inputs with `gates` gates.
pub fn random_circuit(rng: &mut impl Rng, inputs: usize, gates: usize) -> Circuit {
    let mut c = Circuit::default();
    for i in 0..inputs {
        c.input(InputLabel::Free(i as u32));
    }
    for _ in 0..gates {
        let w = c.num_wires();
        let (a, b) = (rng.gen_range(0..w), rng.gen_range(0..w));
        match rng.gen_range(0..4) {
            0 => c.and(a, b),
            1 => c.or(a, b),
            2 => c.xor(a, b),
            _ => c.not(a),
        };
    }
    c.output = c.num_wires() - 1;
    c
}

/// Circuits with at most 12 inputs: hand-made satisfiable and
/// unsatisfiable ones, then random ones from a fixed seed.
pub fn circuit_corpus() -> Vec<(String, Circuit)> {
    let mut out = Vec::new();
    let mut contradiction = Circuit::default();
    let x = contradiction.input(InputLabel::Free(0));
    let nx = contradiction.not(x);
    contradiction.output = contradiction.and(x, nx);
    out.push(("x_and_not_x".to_string(), contradiction));

    let mut parity = Circuit::default();
    let xs: Vec<usize> = (0..12).map(|i| parity.input(InputLabel::Free(i))).collect();
    parity.output = parity.tree(GateOp::Xor, xs);
    out.push(("parity12".to_string(), parity));

    let mut all = Circuit::default();
    let xs: Vec<usize> = (0..10).map(|i| all.input(InputLabel::Free(i))).collect();
    let conj = all.tree(GateOp::And, xs.clone());
    let disj = all.tree(GateOp::Or, xs);
    let nd = all.not(disj);
    all.output = all.and(conj, nd);
    out.push(("all_and_none".to_string(), all));

    let mut rng = seed::rng(2024);
    for i in 0..200 {
        let inputs = rng.gen_range(1..=12);
        let gates = rng.gen_range(1..=24);
        out.push((format!("random{i}"), random_circuit(&mut rng, inputs, gates)));
    }
    out
}

/// Exhaustive satisfiability over all input assignments.
pub fn satisfiable(c: &Circuit) -> Option<Vec<bool>> {
    let n = c.inputs.len();
    (0u32..1 << n).map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>()).find(|x| c.evaluate(x)[c.output])
}
