mod common;

use common::statement;
use concurrent_zk::body::*;
use concurrent_zk::commitments::Group;
use concurrent_zk::graph::Graph;
use concurrent_zk::message::BodyPayload;
use concurrent_zk::preamble::CompoundWitness;
use concurrent_zk::seed;
use std::sync::Arc;

fn graph_ctx(tag: BodyTag, g: Graph, repetitions: usize) -> BodyContext {
    BodyContext { tag, k: 8, group: Group::toy61(), target: BodyTarget::Graph(Arc::new(g)), challenges: Challenges::Edges { repetitions } }
}

fn run(ctx: BodyContext, knowledge: ProverKnowledge, s: u64) -> (Verdict, Vec<BodyPayload>) {
    let mut rng = seed::rng(s);
    let prover = BodyProver::new(ctx.clone(), knowledge).unwrap();
    let verifier = BodyVerifier::new(ctx, Vec::new(), &mut rng).unwrap();
    run_body(prover, verifier, &mut rng).unwrap()
}

#[test]
fn honest_colorings_are_accepted_for_any_repetition_count() {
    for r in [1, 3, 12] {
        let (v, log) = run(graph_ctx(BodyTag::G3c, Graph::cycle(5), r), ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 1, 0, 1, 2])), r as u64);
        assert_eq!(v, Verdict::Accept);
        assert!(check_body_transcript(graph_ctx(BodyTag::G3c, Graph::cycle(5), r), &log).unwrap());
    }
    let (v, _) = run(graph_ctx(BodyTag::Oracle, Graph::triangle(), 1), ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 1, 2])), 0);
    assert_eq!(v, Verdict::Accept);
}

#[test]
fn compound_statement_accepts_either_branch() {
    let (st, openings) = statement(Graph::triangle(), 4, 1, &[1], 9);
    let st = Arc::new(st);
    for w in [CompoundWitness::Coloring(vec![2, 0, 1]), CompoundWitness::Equality { index: 1, seeds: openings[0].randomness.clone() }] {
        for tag in [BodyTag::Oracle, BodyTag::G3c] {
            let ctx = BodyContext { tag, k: 4, group: Group::toy61(), target: BodyTarget::Compound(st.clone()), challenges: Challenges::Edges { repetitions: 4 } };
            assert_eq!(run(ctx, ProverKnowledge::Witness(w.clone()), 1).0, Verdict::Accept);
        }
    }
}

#[test]
fn oracle_body_rejects_a_missing_witness() {
    let (v, _) = run(graph_ctx(BodyTag::Oracle, Graph::complete(4), 1), ProverKnowledge::Cheat(vec![0, 1, 2, 0]), 0);
    assert_eq!(v, Verdict::Reject);
}

#[test]
fn invalid_witnesses_are_refused_up_front() {
    let ctx = graph_ctx(BodyTag::G3c, Graph::triangle(), 2);
    assert!(matches!(BodyProver::new(ctx, ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 0, 1]))), Err(BodyError::InvalidWitness(_))));
}

#[test]
fn cheating_on_k4_decays_like_five_sixths_per_repetition() {
    // the best fake coloring of K₄ clashes on exactly one of six edges
    let trials = 10_000;
    let accepted = (0..trials).filter(|&t| run(graph_ctx(BodyTag::G3c, Graph::complete(4), 6), ProverKnowledge::Cheat(vec![0, 1, 2, 0]), t).0 == Verdict::Accept).count();
    let bound = (5.0f64 / 6.0).powi(6);
    let rate = accepted as f64 / trials as f64;
    let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
    assert!((rate - bound).abs() <= 4.0 * sigma, "rate {rate} vs {bound}");
}

#[test]
fn opening_an_unchallenged_vertex_is_an_order_error() {
    let ctx = graph_ctx(BodyTag::G3c, Graph::cycle(5), 2);
    let mut rng = seed::rng(4);
    let mut prover = BodyProver::new(ctx.clone(), ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 1, 0, 1, 2]))).unwrap();
    let mut verifier = BodyVerifier::new(ctx, Vec::new(), &mut rng).unwrap();
    let commit = verifier.start().unwrap();
    let colorings = prover.step(&commit, &mut rng).unwrap().unwrap();
    let open = verifier.step(&colorings).unwrap().unwrap();
    let Some(BodyPayload::EndpointOpen { mut opens }) = prover.step(&open, &mut rng).unwrap() else { panic!("expected endpoint openings") };
    let v = opens[0].0.vertex;
    opens[0].0.vertex = (v + 2) % 5;
    if (opens[0].0.vertex, opens[0].1.vertex) == (opens[0].1.vertex, v) {
        opens[0].0.vertex = (v + 3) % 5;
    }
    assert!(matches!(verifier.step(&BodyPayload::EndpointOpen { opens }), Err(BodyError::Order(_))));
}

#[test]
fn tampered_body_transcripts_fail_the_offline_check() {
    let ctx = graph_ctx(BodyTag::G3c, Graph::cycle(5), 3);
    let (_, mut log) = run(ctx.clone(), ProverKnowledge::Witness(CompoundWitness::Coloring(vec![0, 1, 0, 1, 2])), 8);
    let mut reordered = log.clone();
    reordered.swap(1, 2);
    assert!(!check_body_transcript(ctx.clone(), &reordered).unwrap());
    if let BodyPayload::ChallengeOpen { openings } = &mut log[2] {
        openings[0].0.flip(0);
    }
    assert!(!check_body_transcript(ctx, &log).unwrap());
}

#[test]
fn pairs_round_trip() {
    for (u, v) in [(0, 0), (1, 2), (0xff_ffff, 7)] {
        assert_eq!(decode_pair(&encode_pair(u, v)), (u, v));
    }
}

#[test]
fn default_repetitions_scale_with_log_k() {
    assert_eq!(default_repetitions(6, 8), 18);
    assert_eq!(default_repetitions(6, 4), 12);
    assert_eq!(default_repetitions(10, 5), 30);
}
