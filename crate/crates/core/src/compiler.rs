//! Reduction of the compound statement to a single 3-coloring instance.
//!
//! The pipeline is circuit → CNF (Tseitin) → graph. The circuit computes
//! `C_G(coloring) ∨ ⋁ᵢ C_open,i(seeds)`; its size depends only on the base
//! graph, `m` and `k`, never on the transcript values, because constants are
//! compared through two dedicated constant wires.

use crate::commitments::{verify_open, Expander, ExpanderPattern, Opening};
use crate::graph::Graph;
use crate::preamble::{CompoundStatement, CompoundWitness};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("the reduction needs circuit-friendly prover commitments")]
    UnsupportedReduction,
    #[error("witness does not satisfy the statement: {0}")]
    InvalidWitness(String),
    #[error("malformed statement: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateOp {
    And,
    Or,
    Xor,
    Not,
}

/// A gate reading wires `a` and `b` (`b` is ignored by `Not`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputLabel {
    /// Bit `bit` (1 = high) of the color of a base-graph vertex.
    ColorBit { vertex: u32, bit: u8 },
    /// Seed bit `seed_bit` for bit `bit` of the prover string of `round` (1-based).
    SeedBit { round: u32, bit: u32, seed_bit: u32 },
    Const(bool),
    /// An unconstrained input, used by test circuits.
    Free(u32),
}

/// Wires `0..inputs.len()` are inputs; gate `g` drives wire `inputs.len() + g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Circuit {
    pub inputs: Vec<InputLabel>,
    pub gates: Vec<Gate>,
    pub output: usize,
}

impl Circuit {
    pub fn num_wires(&self) -> usize {
        self.inputs.len() + self.gates.len()
    }

    pub fn input(&mut self, label: InputLabel) -> usize {
        assert!(self.gates.is_empty(), "declare inputs before gates");
        self.inputs.push(label);
        self.inputs.len() - 1
    }

    fn gate(&mut self, op: GateOp, a: usize, b: usize) -> usize {
        let w = self.num_wires();
        assert!(a < w && b < w, "gate reads an undeclared wire");
        self.gates.push(Gate { op, a, b });
        w
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.gate(GateOp::And, a, b)
    }
    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.gate(GateOp::Or, a, b)
    }
    pub fn xor(&mut self, a: usize, b: usize) -> usize {
        self.gate(GateOp::Xor, a, b)
    }
    pub fn not(&mut self, a: usize) -> usize {
        self.gate(GateOp::Not, a, a)
    }

    /// Balanced fold with `op`; `n - 1` gates for `n` wires.
    pub fn tree(&mut self, op: GateOp, mut wires: Vec<usize>) -> usize {
        assert!(!wires.is_empty());
        while wires.len() > 1 {
            let mut next = Vec::with_capacity(wires.len().div_ceil(2));
            for pair in wires.chunks(2) {
                next.push(if pair.len() == 2 { self.gate(op, pair[0], pair[1]) } else { pair[0] });
            }
            wires = next;
        }
        wires[0]
    }

    /// All wire values for the given input values.
    pub fn evaluate(&self, inputs: &[bool]) -> Vec<bool> {
        assert_eq!(inputs.len(), self.inputs.len());
        let mut w = Vec::with_capacity(self.num_wires());
        w.extend_from_slice(inputs);
        for g in &self.gates {
            let (a, b) = (w[g.a], w[g.b]);
            w.push(match g.op {
                GateOp::And => a & b,
                GateOp::Or => a | b,
                GateOp::Xor => a ^ b,
                GateOp::Not => !a,
            });
        }
        w
    }

    /// Input values with constants filled in and every other input zero.
    pub fn default_inputs(&self) -> Vec<bool> {
        self.inputs.iter().map(|l| matches!(l, InputLabel::Const(true))).collect()
    }
}

/// Variables are `1..=num_vars`; a literal is `±var`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| lit_value(l, assignment)))
    }

    /// Splits clauses wider than three with fresh chaining variables.
    pub fn reduce_width(&self) -> Cnf {
        let mut out = Cnf { num_vars: self.num_vars, clauses: Vec::new() };
        for c in &self.clauses {
            if c.len() <= 3 {
                out.clauses.push(c.clone());
                continue;
            }
            out.num_vars += 1;
            let mut y = out.num_vars as i32;
            out.clauses.push(vec![c[0], c[1], y]);
            for &l in &c[2..c.len() - 2] {
                out.num_vars += 1;
                let y2 = out.num_vars as i32;
                out.clauses.push(vec![-y, l, y2]);
                y = y2;
            }
            out.clauses.push(vec![-y, c[c.len() - 2], c[c.len() - 1]]);
        }
        out
    }
}

fn lit_value(l: i32, assignment: &[bool]) -> bool {
    let v = assignment[(l.unsigned_abs() - 1) as usize];
    if l > 0 {
        v
    } else {
        !v
    }
}

/// Tseitin encoding. Wire `w` becomes variable `w + 1`. Constant inputs get
/// unit clauses, and a final unit clause asserts the output.
pub fn tseitin(circuit: &Circuit) -> Cnf {
    let var = |w: usize| (w + 1) as i32;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for (i, l) in circuit.inputs.iter().enumerate() {
        if let InputLabel::Const(b) = l {
            clauses.push(vec![if *b { var(i) } else { -var(i) }]);
        }
    }
    let ni = circuit.inputs.len();
    for (g, gate) in circuit.gates.iter().enumerate() {
        let (c, a, b) = (var(ni + g), var(gate.a), var(gate.b));
        match gate.op {
            GateOp::And => {
                clauses.push(vec![-c, a]);
                clauses.push(vec![-c, b]);
                clauses.push(vec![c, -a, -b]);
            }
            GateOp::Or => {
                clauses.push(vec![c, -a]);
                clauses.push(vec![c, -b]);
                clauses.push(vec![-c, a, b]);
            }
            GateOp::Xor => {
                clauses.push(vec![-c, a, b]);
                clauses.push(vec![-c, -a, -b]);
                clauses.push(vec![c, -a, b]);
                clauses.push(vec![c, a, -b]);
            }
            GateOp::Not => {
                clauses.push(vec![c, a]);
                clauses.push(vec![-c, -a]);
            }
        }
    }
    clauses.push(vec![var(circuit.output)]);
    let clauses = clauses.into_iter().filter_map(normalize_clause).collect();
    Cnf { num_vars: circuit.num_wires() as u32, clauses }
}

/// Drops repeated literals; returns `None` for tautologies.
fn normalize_clause(mut c: Vec<i32>) -> Option<Vec<i32>> {
    let mut seen: Vec<i32> = Vec::with_capacity(c.len());
    c.retain(|l| {
        if seen.contains(l) {
            false
        } else {
            seen.push(*l);
            true
        }
    });
    if c.iter().any(|l| c.contains(&-l)) {
        None
    } else {
        Some(c)
    }
}

pub const TRUE_COLOR: u8 = 0;
pub const FALSE_COLOR: u8 = 1;
pub const BASE_COLOR: u8 = 2;

/// Gadget vertices realizing one clause, with the edges among them and to
/// the literal and palette vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClauseGadget {
    pub literals: Vec<i32>,
    pub vertices: Vec<u32>,
    pub edges: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColoringInstance {
    pub graph: Graph,
    /// Vertex ids of the palette anchors `[P_T, P_F, P_B]`.
    pub palette: [u32; 3],
    /// `(x, x̄)` vertices of variable `v` at index `v - 1`.
    pub var_vertices: Vec<(u32, u32)>,
    pub gadgets: Vec<ClauseGadget>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    palette: [u32; 3],
    variables: Vec<(u32, u32)>,
}

impl ColoringInstance {
    /// A plain graph with no palette or variable structure.
    pub fn bare(graph: Graph) -> Self {
        ColoringInstance { graph, palette: [0; 3], var_vertices: Vec::new(), gadgets: Vec::new() }
    }

    pub fn literal_vertex(&self, lit: i32) -> u32 {
        let (pos, neg) = self.var_vertices[(lit.unsigned_abs() - 1) as usize];
        if lit > 0 {
            pos
        } else {
            neg
        }
    }

    /// JSON sidecar for the DIMACS export: palette anchors and variable map.
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string(&Sidecar { palette: self.palette, variables: self.var_vertices.clone() }).unwrap()
    }

    /// Colors the instance from a satisfying assignment of its CNF.
    pub fn color_from_assignment(&self, assignment: &[bool]) -> Result<Vec<u8>, CompileError> {
        if assignment.len() != self.var_vertices.len() {
            return Err(CompileError::Malformed("assignment length".into()));
        }
        let n = self.graph.num_vertices();
        let mut colors = vec![u8::MAX; n];
        colors[self.palette[0] as usize] = TRUE_COLOR;
        colors[self.palette[1] as usize] = FALSE_COLOR;
        colors[self.palette[2] as usize] = BASE_COLOR;
        for (i, &(pos, neg)) in self.var_vertices.iter().enumerate() {
            let (p, q) = if assignment[i] { (TRUE_COLOR, FALSE_COLOR) } else { (FALSE_COLOR, TRUE_COLOR) };
            colors[pos as usize] = p;
            colors[neg as usize] = q;
        }
        for g in &self.gadgets {
            if !color_gadget(g, &mut colors) {
                return Err(CompileError::InvalidWitness(format!("clause {:?} unsatisfied", g.literals)));
            }
        }
        debug_assert!(self.graph.is_proper(&colors));
        Ok(colors)
    }
}

/// Backtracking over the (at most six) gadget vertices.
fn color_gadget(g: &ClauseGadget, colors: &mut [u8]) -> bool {
    fn go(g: &ClauseGadget, idx: usize, colors: &mut [u8]) -> bool {
        if idx == g.vertices.len() {
            return g.edges.iter().all(|&(a, b)| colors[a as usize] != colors[b as usize]);
        }
        let v = g.vertices[idx];
        for c in 0..3u8 {
            let ok = g.edges.iter().all(|&(a, b)| {
                let other = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    return true;
                };
                colors[other as usize] != c
            });
            if ok {
                colors[v as usize] = c;
                if go(g, idx + 1, colors) {
                    return true;
                }
                colors[v as usize] = u8::MAX;
            }
        }
        false
    }
    go(g, 0, colors)
}

/// CNF → 3-coloring. Vertices 0, 1, 2 are the palette `T, F, B`; variable
/// `v` owns vertices `3 + 2(v-1)` (positive) and `4 + 2(v-1)` (negative).
pub fn cnf_to_3col(cnf: &Cnf) -> ColoringInstance {
    let cnf = cnf.reduce_width();
    let (pt, pf, pb) = (0u32, 1u32, 2u32);
    let mut edges = vec![(pt, pf), (pt, pb), (pf, pb)];
    let mut var_vertices = Vec::with_capacity(cnf.num_vars as usize);
    for v in 0..cnf.num_vars {
        let (x, nx) = (3 + 2 * v, 4 + 2 * v);
        edges.extend([(x, nx), (x, pb), (nx, pb)]);
        var_vertices.push((x, nx));
    }
    let mut next = 3 + 2 * cnf.num_vars;
    let lit_vertex = |l: i32| {
        let (x, nx) = var_vertices[(l.unsigned_abs() - 1) as usize];
        if l > 0 {
            x
        } else {
            nx
        }
    };
    let mut gadgets = Vec::new();
    for clause in &cnf.clauses {
        assert!(!clause.is_empty(), "empty clause");
        let mut gadget = ClauseGadget { literals: clause.clone(), vertices: Vec::new(), edges: Vec::new() };
        let mut out = lit_vertex(clause[0]);
        for &l in &clause[1..] {
            let (g1, g2, g3) = (next, next + 1, next + 2);
            next += 3;
            gadget.vertices.extend([g1, g2, g3]);
            gadget.edges.extend([(g1, out), (g2, lit_vertex(l)), (g1, g2), (g1, g3), (g2, g3)]);
            out = g3;
        }
        if clause.len() == 1 {
            // A lone literal is already adjacent to P_B.
            gadget.edges.push((out, pf));
        } else {
            gadget.edges.extend([(out, pf), (out, pb)]);
        }
        edges.extend(gadget.edges.iter().copied());
        gadgets.push(gadget);
    }
    let graph = Graph::new(next as usize, edges).expect("reduction emits valid edges");
    ColoringInstance { graph, palette: [pt, pf, pb], var_vertices, gadgets }
}

pub fn circuit_to_3col(circuit: &Circuit) -> ColoringInstance {
    cnf_to_3col(&tseitin(circuit))
}

/// Builds `C_G ∨ ⋁ C_open,i` for a completed preamble.
pub fn compile_compound(statement: &CompoundStatement) -> Result<Circuit, CompileError> {
    let params = &statement.prover_params;
    let pattern: Arc<ExpanderPattern> = match &params.expander {
        Expander::CircuitFriendly(p) => p.clone(),
        Expander::Mixer => return Err(CompileError::UnsupportedReduction),
    };
    let k = params.k;
    let m = statement.revealed.len();
    if statement.p_commitments.len() != m {
        return Err(CompileError::Malformed("commitment and reveal counts differ".into()));
    }
    let rho = params.rho().ok_or_else(|| CompileError::Malformed("prover scheme must be binding".into()))?;
    let g = &statement.base_graph;
    let mut c = Circuit::default();

    let color_base = c.inputs.len();
    for v in 0..g.num_vertices() as u32 {
        c.input(InputLabel::ColorBit { vertex: v, bit: 1 });
        c.input(InputLabel::ColorBit { vertex: v, bit: 0 });
    }
    let seed_base = c.inputs.len();
    for i in 1..=m as u32 {
        for j in 0..k as u32 {
            for l in 0..k as u32 {
                c.input(InputLabel::SeedBit { round: i, bit: j, seed_bit: l });
            }
        }
    }
    let k0 = c.input(InputLabel::Const(false));
    let k1 = c.input(InputLabel::Const(true));

    let hi = |v: u32| color_base + 2 * v as usize;
    let lo = |v: u32| color_base + 2 * v as usize + 1;
    let mut checks = Vec::new();
    for v in 0..g.num_vertices() as u32 {
        let both = c.and(hi(v), lo(v));
        checks.push(c.not(both));
    }
    for &(u, v) in g.edges() {
        let dh = c.xor(hi(u), hi(v));
        let dl = c.xor(lo(u), lo(v));
        checks.push(c.or(dh, dl));
    }
    let mut branches = Vec::new();
    if !checks.is_empty() {
        branches.push(c.tree(GateOp::And, checks));
    }

    for i in 0..m {
        let payload = &statement.p_commitments[i].payload;
        let v = &statement.revealed[i];
        if payload.len() != k * 3 * k || v.len() != k {
            return Err(CompileError::Malformed(format!("round {} has the wrong shape", i + 1)));
        }
        let mut bit_checks = Vec::with_capacity(k);
        for j in 0..k {
            let mut target = payload.slice(j * 3 * k, 3 * k);
            if v.get(j) {
                target.xor_assign(&rho.slice(j * 3 * k, 3 * k));
            }
            let seed = |l: usize| seed_base + (i * k + j) * k + l;
            let mut eqs = Vec::with_capacity(3 * k);
            for (o, &[a, b, cc]) in pattern.taps().iter().enumerate() {
                let prod = c.and(seed(b), seed(cc));
                let e = c.xor(seed(a), prod);
                let against = if target.get(o) { k0 } else { k1 };
                eqs.push(c.xor(e, against));
            }
            bit_checks.push(c.tree(GateOp::And, eqs));
        }
        branches.push(c.tree(GateOp::And, bit_checks));
    }
    if branches.is_empty() {
        return Err(CompileError::Malformed("empty statement".into()));
    }
    let mut out = branches[0];
    for &b in &branches[1..] {
        out = c.or(out, b);
    }
    c.output = out;
    Ok(c)
}

/// Input wire values realizing `witness` (unused branch wires zeroed).
pub fn witness_inputs(witness: &CompoundWitness, circuit: &Circuit) -> Vec<bool> {
    circuit
        .inputs
        .iter()
        .map(|l| match (l, witness) {
            (InputLabel::Const(b), _) => *b,
            (InputLabel::ColorBit { vertex, bit }, CompoundWitness::Coloring(col)) => {
                col.get(*vertex as usize).is_some_and(|&c| (c >> bit) & 1 == 1)
            }
            (InputLabel::SeedBit { round, bit, seed_bit }, CompoundWitness::Equality { index, seeds }) if *round as usize == *index => {
                let k = isqrt(seeds.len());
                seeds.get(*bit as usize * k + *seed_bit as usize)
            }
            _ => false,
        })
        .collect()
}

fn isqrt(n: usize) -> usize {
    let mut r = 0;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Checks the witness against the statement, then lifts it to a proper
/// coloring of the reduced instance.
pub fn map_witness(
    statement: &CompoundStatement,
    witness: &CompoundWitness,
    circuit: &Circuit,
    instance: &ColoringInstance,
) -> Result<Vec<u8>, CompileError> {
    if !validate_witness(statement, witness) {
        return Err(CompileError::InvalidWitness("branch does not hold".into()));
    }
    let wires = circuit.evaluate(&witness_inputs(witness, circuit));
    if !wires[circuit.output] {
        return Err(CompileError::InvalidWitness("circuit output is false".into()));
    }
    let mut assignment = wires;
    assignment.resize(instance.var_vertices.len(), false);
    instance.color_from_assignment(&assignment)
}

pub fn validate_witness(statement: &CompoundStatement, witness: &CompoundWitness) -> bool {
    match witness {
        CompoundWitness::Coloring(col) => statement.base_graph.is_proper(col),
        CompoundWitness::Equality { index, seeds } => {
            let i = *index;
            if i == 0 || i > statement.revealed.len() {
                return false;
            }
            let opening = Opening { message: statement.revealed[i - 1].clone(), randomness: seeds.clone() };
            verify_open(&statement.prover_params, &statement.p_commitments[i - 1], &opening)
        }
    }
}

/// The fake-coloring assignment that violates as few instance edges as
/// possible: every gate evaluated honestly, only the output clause broken.
pub fn least_violating_coloring(circuit: &Circuit, instance: &ColoringInstance, inputs: &[bool]) -> Vec<u8> {
    let mut assignment = circuit.evaluate(inputs);
    assignment.resize(instance.var_vertices.len(), false);
    let n = instance.graph.num_vertices();
    let mut colors = vec![u8::MAX; n];
    colors[instance.palette[0] as usize] = TRUE_COLOR;
    colors[instance.palette[1] as usize] = FALSE_COLOR;
    colors[instance.palette[2] as usize] = BASE_COLOR;
    for (i, &(pos, neg)) in instance.var_vertices.iter().enumerate() {
        let (p, q) = if assignment[i] { (TRUE_COLOR, FALSE_COLOR) } else { (FALSE_COLOR, TRUE_COLOR) };
        colors[pos as usize] = p;
        colors[neg as usize] = q;
    }
    for g in &instance.gadgets {
        if !color_gadget(g, &mut colors) {
            // Unsatisfied clause: leave the literal coloring and give the
            // gadget vertices any locally best colors.
            for &v in &g.vertices {
                colors[v as usize] = u8::MAX;
            }
            for &v in &g.vertices {
                let mut best = (usize::MAX, 0u8);
                for c in 0..3u8 {
                    let clashes = g
                        .edges
                        .iter()
                        .filter(|&&(a, b)| (a == v && colors[b as usize] == c) || (b == v && colors[a as usize] == c))
                        .count();
                    best = best.min((clashes, c));
                }
                colors[v as usize] = best.1;
            }
        }
    }
    colors
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_clause_instance_shape() {
        let inst = cnf_to_3col(&Cnf { num_vars: 1, clauses: vec![vec![1]] });
        assert_eq!(inst.graph.num_vertices(), 5);
        assert_eq!(inst.graph.edges().len(), 7);
        let col = inst.graph.brute_force_3col().unwrap();
        // x must share no color with P_F or P_B, so it takes P_T's color.
        assert_eq!(col[3], col[0]);
    }

    #[test]
    fn three_literal_clause_instance_shape() {
        let inst = cnf_to_3col(&Cnf { num_vars: 3, clauses: vec![vec![1, 2, 3]] });
        assert_eq!(inst.graph.num_vertices(), 15);
        assert_eq!(inst.graph.edges().len(), 24);
        assert!(inst.graph.brute_force_3col().is_some());
    }

    #[test]
    fn contradiction_is_not_colorable() {
        let inst = cnf_to_3col(&Cnf { num_vars: 1, clauses: vec![vec![1], vec![-1]] });
        assert!(inst.graph.num_vertices() <= 9);
        assert!(inst.graph.brute_force_3col().is_none());
    }

    #[test]
    fn width_reduction_preserves_satisfiability() {
        let cnf = Cnf { num_vars: 5, clauses: vec![vec![1, 2, 3, 4, 5], vec![-1], vec![-2], vec![-3], vec![-4]] };
        let r = cnf.reduce_width();
        assert!(r.clauses.iter().all(|c| c.len() <= 3));
        let inst = cnf_to_3col(&cnf);
        assert!(inst.graph.solve_3col().is_some());
        let unsat = Cnf { num_vars: 4, clauses: vec![vec![1, 2, 3, 4], vec![-1], vec![-2], vec![-3], vec![-4]] };
        assert!(cnf_to_3col(&unsat).graph.solve_3col().is_none());
    }

    #[test]
    fn tseitin_gate_clause_counts() {
        let mut c = Circuit::default();
        let a = c.input(InputLabel::Free(0));
        let b = c.input(InputLabel::Free(1));
        let x = c.and(a, b);
        let y = c.or(a, b);
        let z = c.xor(x, y);
        c.output = c.not(z);
        // 3 + 3 + 4 + 2 gate clauses and the output unit clause.
        assert_eq!(tseitin(&c).clauses.len(), 13);
    }
}
