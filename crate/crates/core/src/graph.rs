//! Undirected simple graphs, 3-coloring checks and a small exact solver.

use rand::{Rng as _, RngCore};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a vertex outside 0..{2}")]
    VertexRange(u32, u32, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Edges are stored as `(u, v)` with `u < v`, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, GraphError> {
        let mut es = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(GraphError::VertexRange(u, v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            es.push((u.min(v), u.max(v)));
        }
        es.sort_unstable();
        es.dedup();
        Ok(Graph { n, edges: es })
    }

    pub fn triangle() -> Self {
        Graph::complete(3)
    }

    pub fn complete(n: usize) -> Self {
        let mut es = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                es.push((u, v));
            }
        }
        Graph { n, edges: es }
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n as u32).map(|i| (i, (i + 1) % n as u32))).expect("cycle needs n >= 3")
    }

    /// A graph with a planted proper 3-coloring; each compatible pair
    /// becomes an edge with probability `density`.
    pub fn planted<R: RngCore + ?Sized>(n: usize, density: f64, rng: &mut R) -> (Self, Vec<u8>) {
        let coloring: Vec<u8> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let mut es = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if coloring[u] != coloring[v] && rng.gen_bool(density) {
                    es.push((u as u32, v as u32));
                }
            }
        }
        (Graph { n, edges: es }, coloring)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }

    /// Whether `coloring` assigns every vertex a color in {0,1,2} and no
    /// edge is monochromatic.
    pub fn is_proper(&self, coloring: &[u8]) -> bool {
        coloring.len() == self.n
            && coloring.iter().all(|&c| c < 3)
            && self.edges.iter().all(|&(u, v)| coloring[u as usize] != coloring[v as usize])
    }

    pub fn violated_edges(&self, coloring: &[u8]) -> usize {
        self.edges.iter().filter(|&&(u, v)| coloring[u as usize] == coloring[v as usize]).count()
    }

    /// Exact 3-coloring search: DSatur ordering with forward checking, the
    /// pair rule, and color symmetry broken.
    pub fn solve_3col(&self) -> Option<Vec<u8>> {
        let mut adj = self.adjacency();
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut colors = vec![u8::MAX; self.n];
        // allowed[v] is a bitmask of colors still available to v.
        let mut allowed = vec![0b111u8; self.n];
        if search(&adj, &mut colors, &mut allowed) {
            Some(colors)
        } else {
            None
        }
    }

    /// Exhaustive 3-colorability over all 3^n assignments, for tiny graphs.
    pub fn brute_force_3col(&self) -> Option<Vec<u8>> {
        assert!(self.n <= 20, "brute force limited to 20 vertices");
        let total = 3u64.pow(self.n as u32);
        let mut c = vec![0u8; self.n];
        for mut code in 0..total {
            for slot in c.iter_mut() {
                *slot = (code % 3) as u8;
                code /= 3;
            }
            if self.is_proper(&c) {
                return Some(c);
            }
        }
        None
    }

    /// `p edge |V| |E|` followed by `e u v` lines, vertices 1-based.
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p edge {} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "e {} {}", u + 1, v + 1);
        }
        s
    }

    pub fn parse_dimacs(text: &str) -> Result<Self, GraphError> {
        let mut n = None;
        let mut es = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |msg: &str| GraphError::Parse { line: i + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.first() {
                None | Some(&"c") => {}
                Some(&"p") => {
                    if toks.len() != 4 || toks[1] != "edge" {
                        return Err(err("expected `p edge V E`"));
                    }
                    n = Some(toks[2].parse::<usize>().map_err(|e| err(&e.to_string()))?);
                }
                Some(&"e") => {
                    if toks.len() != 3 {
                        return Err(err("expected `e u v`"));
                    }
                    let u: u32 = toks[1].parse().map_err(|e: std::num::ParseIntError| err(&e.to_string()))?;
                    let v: u32 = toks[2].parse().map_err(|e: std::num::ParseIntError| err(&e.to_string()))?;
                    if u == 0 || v == 0 {
                        return Err(err("vertices are 1-based"));
                    }
                    es.push((u - 1, v - 1));
                }
                Some(t) => return Err(err(&format!("unknown line type {t:?}"))),
            }
        }
        let n = n.ok_or(GraphError::Parse { line: 0, msg: "missing problem line".into() })?;
        Graph::new(n, es)
    }
}

/// Colors every vertex left with a single option and applies the pair rule
/// until nothing changes: two adjacent vertices with the same two options
/// use both colors, so their common neighbors lose them. False on a wipeout.
fn propagate(adj: &[Vec<u32>], colors: &mut [u8], allowed: &mut [u8]) -> bool {
    loop {
        let mut changed = false;
        for v in 0..colors.len() {
            if colors[v] != u8::MAX {
                continue;
            }
            match allowed[v].count_ones() {
                0 => return false,
                1 => {
                    let c = allowed[v].trailing_zeros() as u8;
                    colors[v] = c;
                    for &w in &adj[v] {
                        let w = w as usize;
                        if colors[w] == c {
                            return false;
                        }
                        allowed[w] &= !(1 << c);
                    }
                    changed = true;
                }
                _ => {}
            }
        }
        for u in 0..colors.len() {
            if colors[u] != u8::MAX || allowed[u].count_ones() != 2 {
                continue;
            }
            for &w in &adj[u] {
                let w = w as usize;
                if w < u || colors[w] != u8::MAX || allowed[w] != allowed[u] {
                    continue;
                }
                let mask = allowed[u];
                for &x in &adj[u] {
                    let x = x as usize;
                    if x != w && colors[x] == u8::MAX && allowed[x] & mask != 0 && adj[w].binary_search(&(x as u32)).is_ok() {
                        allowed[x] &= !mask;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(adj: &[Vec<u32>], colors: &mut Vec<u8>, allowed: &mut Vec<u8>) -> bool {
    if !propagate(adj, colors, allowed) {
        return false;
    }
    // Most constrained uncolored vertex, ties broken by degree.
    let mut best = None;
    let mut key = (u32::MAX, 0usize);
    for v in 0..colors.len() {
        if colors[v] == u8::MAX {
            let k = (allowed[v].count_ones(), usize::MAX - adj[v].len());
            if k < key {
                key = k;
                best = Some(v);
            }
        }
    }
    let Some(v) = best else { return true };
    // Colors are interchangeable until used: try at most one unused color.
    let used = colors.iter().filter(|&&c| c != u8::MAX).fold(0u8, |m, &c| m | 1 << c);
    let mut fresh_tried = false;
    for c in 0..3u8 {
        if allowed[v] & (1 << c) == 0 {
            continue;
        }
        if used & (1 << c) == 0 {
            if fresh_tried {
                continue;
            }
            fresh_tried = true;
        }
        let (saved_colors, saved_allowed) = (colors.clone(), allowed.clone());
        allowed[v] = 1 << c;
        if search(adj, colors, allowed) {
            return true;
        }
        *colors = saved_colors;
        *allowed = saved_allowed;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graph_colorability() {
        assert!(Graph::triangle().solve_3col().is_some());
        assert!(Graph::complete(4).solve_3col().is_none());
        assert!(Graph::complete(4).brute_force_3col().is_none());
        assert!(Graph::cycle(5).solve_3col().is_some());
    }

    #[test]
    fn solver_agrees_with_brute_force_on_random_graphs() {
        let mut rng = crate::seed::rng(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..9);
            let mut es = Vec::new();
            for u in 0..n as u32 {
                for v in u + 1..n as u32 {
                    if rng.gen_bool(0.5) {
                        es.push((u, v));
                    }
                }
            }
            let g = Graph::new(n, es).unwrap();
            let fast = g.solve_3col();
            assert_eq!(fast.is_some(), g.brute_force_3col().is_some());
            if let Some(c) = fast {
                assert!(g.is_proper(&c));
            }
        }
    }

    #[test]
    fn dimacs_round_trip() {
        let g = Graph::cycle(5);
        assert_eq!(Graph::parse_dimacs(&g.to_dimacs()).unwrap(), g);
        assert!(Graph::parse_dimacs("p edge 2 1\ne 1 1\n").is_err());
    }
}
