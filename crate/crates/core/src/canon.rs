//! Canonical forms of labeled graphs modulo vertex/edge renaming, end swaps
//! and the sign-change group (negate every label at a vertex, or both labels
//! of an edge).
//!
//! Vertex orders come from colour refinement plus individualization, with
//! interchangeable twin vertices explored once. For every complete order the
//! vertex signs are searched exhaustively; edge signs and end swaps are
//! normalized locally per edge.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Serialize, Serializer};

use crate::error::MoveError;
use crate::graph::{End, LabeledGraph, VertexId};

type EdgeCode = (u32, i64, u32, i64);

/// Canonical representative of a labeled graph's equivalence class, plus a
/// 128-bit digest of it.
#[derive(Debug, Clone)]
pub struct CanonicalKey {
    vertex_count: u32,
    code: Vec<EdgeCode>,
    digest: u128,
}

impl CanonicalKey {
    pub fn digest(&self) -> u128 {
        self.digest
    }

    pub fn digest_hex(&self) -> String {
        format!("{:032x}", self.digest)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count as usize
    }

    /// The canonical representative, with vertices `c0, c1, …` and edges
    /// `k0, k1, …` in code order.
    pub fn representative(&self) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for i in 0..self.vertex_count {
            g.add_vertex(format!("c{i}").as_str());
        }
        for (n, &(u, a, w, b)) in self.code.iter().enumerate() {
            g.insert_edge(
                format!("k{n}").as_str().into(),
                End::new(format!("c{u}").as_str(), a),
                End::new(format!("c{w}").as_str(), b),
            );
        }
        g
    }
}

// Equality is decided on the full code, never on the digest alone.
impl PartialEq for CanonicalKey {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.code == other.code
    }
}

impl Eq for CanonicalKey {}

impl Hash for CanonicalKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u128(self.digest);
    }
}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.vertex_count, &self.code).cmp(&(other.vertex_count, &other.code))
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digest_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.digest_hex())
    }
}

fn digest_of(vertex_count: u32, code: &[EdgeCode]) -> u128 {
    let mut bytes = Vec::with_capacity(4 + code.len() * 24);
    bytes.extend_from_slice(&vertex_count.to_le_bytes());
    for &(u, a, w, b) in code {
        bytes.extend_from_slice(&u.to_le_bytes());
        bytes.extend_from_slice(&a.to_le_bytes());
        bytes.extend_from_slice(&w.to_le_bytes());
        bytes.extend_from_slice(&b.to_le_bytes());
    }
    xxhash_rust::xxh3::xxh3_128(&bytes)
}

struct Indexed {
    n: usize,
    edges: Vec<(usize, i64, usize, i64)>,
}

impl Indexed {
    fn new(graph: &LabeledGraph) -> Self {
        let ids: Vec<&VertexId> = graph.vertices().collect();
        let pos = |v: &VertexId| ids.binary_search(&v).expect("validated graph");
        let edges = graph
            .edges()
            .map(|(_, [a, b])| (pos(&a.vertex), a.label, pos(&b.vertex), b.label))
            .collect();
        Indexed { n: ids.len(), edges }
    }

    fn refine(&self, colors: &[u32]) -> Vec<u32> {
        let mut colors = colors.to_vec();
        loop {
            let mut sigs: Vec<(u32, Vec<(i64, i64, u32, bool)>)> = colors
                .iter()
                .map(|&c| (c, Vec::new()))
                .collect();
            for &(u, a, w, b) in &self.edges {
                let lp = u == w;
                sigs[u].1.push((a.abs(), b.abs(), colors[w], lp));
                sigs[w].1.push((b.abs(), a.abs(), colors[u], lp));
            }
            for s in &mut sigs {
                s.1.sort_unstable();
            }
            let next = rank(&sigs);
            let before = distinct(&colors);
            colors = next;
            if distinct(&colors) == before {
                return colors;
            }
        }
    }

    /// Twin test: swapping `v` and `w` (with a sign flip on one of them) is
    /// an automorphism fixing every other vertex.
    fn twins(&self, v: usize, w: usize) -> bool {
        let profile = |x: usize, flip: i64| {
            let mut p = Vec::new();
            for &(u, a, y, b) in &self.edges {
                if u == x && y == x {
                    p.push((usize::MAX, a.abs().min(b.abs()), a.abs().max(b.abs()), (a * b).signum()));
                } else if u == x || y == x {
                    let (here, other, there) = if u == x { (a, b, y) } else { (b, a, u) };
                    if there == v || there == w {
                        return None;
                    }
                    p.push((there, here.abs(), other.abs(), flip * (here * other).signum()));
                }
            }
            p.sort_unstable();
            Some(p)
        };
        match (profile(v, 1), profile(w, 1), profile(w, -1)) {
            (Some(pv), Some(pw), Some(pw_neg)) => pv == pw || pv == pw_neg,
            _ => false,
        }
    }

    fn search(&self, colors: Vec<u32>, best: &mut Option<Vec<EdgeCode>>) {
        let colors = self.refine(&colors);
        if distinct(&colors) == self.n {
            let code = self.best_code_for_order(&colors);
            if best.as_ref().map_or(true, |b| code < *b) {
                *best = Some(code);
            }
            return;
        }
        let target = first_nonsingleton(&colors);
        let cell: Vec<usize> = (0..self.n).filter(|&v| colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if tried.iter().any(|&t| self.twins(t, v)) {
                continue;
            }
            tried.push(v);
            let split: Vec<u32> = (0..self.n)
                .map(|x| 2 * colors[x] + u32::from(colors[x] == target && x != v))
                .collect();
            self.search(split, best);
        }
    }

    fn best_code_for_order(&self, order: &[u32]) -> Vec<EdgeCode> {
        // the vertex placed first keeps sign +1: flipping every vertex equals
        // flipping every edge
        let first = order.iter().position(|&c| c == 0).unwrap_or(0);
        let free: Vec<usize> = (0..self.n).filter(|&v| v != first).collect();
        let mut best: Option<Vec<EdgeCode>> = None;
        let mut signs = vec![1i64; self.n];
        for mask in 0u64..(1u64 << free.len()) {
            for (bit, &v) in free.iter().enumerate() {
                signs[v] = if mask >> bit & 1 == 1 { -1 } else { 1 };
            }
            let mut code: Vec<EdgeCode> = self
                .edges
                .iter()
                .map(|&(u, a, w, b)| {
                    let (pu, pw) = (order[u], order[w]);
                    let (a, b) = (signs[u] * a, signs[w] * b);
                    [(pu, a, pw, b), (pu, -a, pw, -b), (pw, b, pu, a), (pw, -b, pu, -a)]
                        .into_iter()
                        .min()
                        .unwrap()
                })
                .collect();
            code.sort_unstable();
            if best.as_ref().map_or(true, |b| code < *b) {
                best = Some(code);
            }
        }
        best.unwrap_or_default()
    }
}

fn rank<T: Ord>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<&T> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).unwrap() as u32)
        .collect()
}

fn distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn first_nonsingleton(colors: &[u32]) -> u32 {
    let mut counts = std::collections::BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_insert(0usize) += 1;
    }
    counts.into_iter().find(|&(_, n)| n > 1).map(|(c, _)| c).unwrap()
}

pub fn canonical_form(graph: &LabeledGraph) -> Result<CanonicalKey, MoveError> {
    graph.require_valid()?;
    let ix = Indexed::new(graph);
    let mut best = None;
    ix.search(vec![0; ix.n], &mut best);
    let code = best.unwrap_or_default();
    let vertex_count = ix.n as u32;
    Ok(CanonicalKey { vertex_count, digest: digest_of(vertex_count, &code), code })
}

/// Equality of canonical forms.
pub fn equivalent(g1: &LabeledGraph, g2: &LabeledGraph) -> Result<bool, MoveError> {
    Ok(canonical_form(g1)? == canonical_form(g2)?)
}
