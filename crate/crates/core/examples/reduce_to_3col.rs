//! Compile a finished preamble's compound statement to a circuit, reduce
//! it to 3-coloring and lift both kinds of witness.

use concurrent_zk::bits::BitString;
use concurrent_zk::commitments::{binding_params, commit, ExpanderTag};
use concurrent_zk::compiler::{circuit_to_3col, compile_compound, map_witness};
use concurrent_zk::graph::Graph;
use concurrent_zk::preamble::{CompoundStatement, CompoundWitness};
use concurrent_zk::seed;
use std::sync::Arc;

fn main() {
    let (k, m) = (4, 2);
    let mut rng = seed::rng(2);
    let params = binding_params(k, BitString::random(&mut rng, k * 3 * k), ExpanderTag::CircuitFriendly).unwrap();
    let (mut commitments, mut openings, mut revealed) = (Vec::new(), Vec::new(), Vec::new());
    for i in 1..=m {
        let p = BitString::random(&mut rng, k);
        let (c, o) = commit(&params, &p, &mut rng).unwrap();
        // the second reveal happens to match the prover's commitment
        revealed.push(if i == 2 { p } else { BitString::random(&mut rng, k) });
        commitments.push(c);
        openings.push(o);
    }
    let statement = CompoundStatement { base_graph: Arc::new(Graph::triangle()), prover_params: params, p_commitments: commitments, revealed };
    let circuit = compile_compound(&statement).unwrap();
    let instance = circuit_to_3col(&circuit);
    println!("{} gates → {} vertices, {} edges", circuit.gates.len(), instance.graph.num_vertices(), instance.graph.edges().len());
    let witnesses = [("coloring", CompoundWitness::Coloring(vec![0, 1, 2])), ("equality", CompoundWitness::Equality { index: 2, seeds: openings[1].randomness.clone() })];
    for (name, w) in witnesses {
        let coloring = map_witness(&statement, &w, &circuit, &instance).unwrap();
        println!("{name} branch → proper coloring: {}", instance.graph.is_proper(&coloring));
    }
}
