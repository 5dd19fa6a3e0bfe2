//! Enumeration of the slides, inductions and A±-moves applicable to a
//! reduced graph.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::MoveError;
use crate::graph::{EndRef, LabeledGraph, Side};
use crate::moves::{self, AInverse, AMove, Direction, Induction, Move, Slide};

/// Search limits shared by move enumeration and exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub max_label: i64,
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_depth: usize,
    pub max_frontier: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_label: 64, max_vertices: 12, max_edges: 16, max_depth: 8, max_frontier: 100_000 }
    }
}

impl Bounds {
    /// Limits that never prune a move result.
    pub fn unbounded() -> Self {
        Bounds {
            max_label: i64::MAX,
            max_vertices: usize::MAX,
            max_edges: usize::MAX,
            max_depth: usize::MAX,
            max_frontier: usize::MAX,
        }
    }

    pub fn admits(&self, g: &LabeledGraph) -> bool {
        g.max_abs_label() <= self.max_label
            && g.vertex_count() <= self.max_vertices
            && g.edge_count() <= self.max_edges
    }
}

/// Pull sets are enumerated exhaustively up to this many optional ends;
/// beyond it only the empty and the full pull set are produced.
pub const MAX_FREE_PULL_ENDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub mv: Move,
    pub trivial: bool,
    pub unmarked_identity: bool,
    pub graph: LabeledGraph,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub moves: Vec<Candidate>,
    /// Applicable moves dropped because the result exceeded the bounds.
    pub pruned: usize,
}

/// Every applicable move of `graph` within `bounds`, in a fixed order.
pub fn enumerate_moves(graph: &LabeledGraph, bounds: &Bounds) -> Result<Enumeration, MoveError> {
    let mut out = Enumeration::default();
    visit_moves(graph, bounds, |c| {
        out.moves.push(c);
        ControlFlow::Continue(())
    })
    .map(|pruned| {
        out.pruned = pruned;
        out
    })
}

/// Streams candidates to `visit`; stops early on `Break`. Returns the number
/// of moves pruned by the bounds.
pub fn visit_moves(
    graph: &LabeledGraph,
    bounds: &Bounds,
    mut visit: impl FnMut(Candidate) -> ControlFlow<()>,
) -> Result<usize, MoveError> {
    graph.require_valid()?;
    if !graph.is_reduced() {
        return Err(MoveError::NotReduced);
    }
    let mut pruned = 0;
    let mut stopped = false;
    let mut emit = |mv: Move| -> Result<(), MoveError> {
        if stopped {
            return Ok(());
        }
        let report = match moves::apply(graph, &mv) {
            Ok(r) => r,
            Err(MoveError::Overflow) => {
                pruned += 1;
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        if !bounds.admits(&report.graph) {
            pruned += 1;
            return Ok(());
        }
        let c = Candidate {
            mv,
            trivial: report.trivial,
            unmarked_identity: report.unmarked_identity,
            graph: report.graph,
        };
        if visit(c).is_break() {
            stopped = true;
        }
        Ok(())
    };
    for mv in slides(graph) {
        emit(mv)?;
    }
    for mv in inductions(graph) {
        emit(mv)?;
    }
    for mv in a_moves(graph) {
        emit(mv)?;
    }
    for mv in a_inverses(graph) {
        emit(mv)?;
    }
    Ok(pruned)
}

fn slides(g: &LabeledGraph) -> Vec<Move> {
    let mut out = Vec::new();
    for v in g.vertices() {
        let ends = g.ends_at(v);
        for over in &ends {
            let a = g.label(over).unwrap();
            let eligible: Vec<EndRef> = ends
                .iter()
                .filter(|r| r.edge != over.edge && g.label(r).unwrap() % a == 0)
                .cloned()
                .collect();
            for r in &eligible {
                out.push(Move::Slide(Slide { slid: vec![r.clone()], over: vec![over.clone()] }));
            }
            if eligible.len() > 1 {
                out.push(Move::Slide(Slide { slid: eligible, over: vec![over.clone()] }));
            }
        }
    }
    out
}

fn divisors(n: i64) -> impl Iterator<Item = i64> {
    let n = n.abs();
    (1..=n).filter(move |k| n % k == 0)
}

fn subsets(forced: &[EndRef], free: &[EndRef]) -> Vec<Vec<EndRef>> {
    let mut out = Vec::new();
    if free.len() <= MAX_FREE_PULL_ENDS {
        for mask in 0u32..(1 << free.len()) {
            let mut s: Vec<EndRef> = forced.to_vec();
            s.extend(free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, r)| r.clone()));
            s.sort();
            out.push(s);
        }
    } else {
        let mut all: Vec<EndRef> = forced.iter().chain(free).cloned().collect();
        all.sort();
        out.push(forced.to_vec());
        out.push(all);
    }
    out
}

/// Inductions with `1 < k < |m|`: the extreme indices only reproduce slides
/// over the loop.
fn inductions(g: &LabeledGraph) -> Vec<Move> {
    let mut out = Vec::new();
    for unit in g.strict_ascending_loops() {
        let lp = unit.edge.clone();
        let [a, b] = g.edge(&lp).unwrap();
        let (u, other) = if unit.side == Side::Zero { (a.label, b.label) } else { (b.label, a.label) };
        let m = u * other;
        let others: Vec<EndRef> = g.ends_at(&a.vertex).into_iter().filter(|r| r.edge != lp).collect();
        for k in divisors(m).filter(|&k| k > 1 && k < m.abs()) {
            let cofactor = m / k;
            let free: Vec<EndRef> = others.iter().filter(|r| g.label(r).unwrap() % k == 0).cloned().collect();
            for pulled in subsets(&[], &free) {
                out.push(Move::Induction(Induction {
                    lp: lp.clone(),
                    unit_side: unit.side,
                    k,
                    pulled,
                    direction: Direction::Forward,
                }));
            }
            let (free, forced): (Vec<EndRef>, Vec<EndRef>) =
                others.iter().cloned().partition(|r| g.label(r).unwrap() % cofactor == 0);
            for pulled in subsets(&forced, &free) {
                out.push(Move::Induction(Induction {
                    lp: lp.clone(),
                    unit_side: unit.side,
                    k,
                    pulled,
                    direction: Direction::Reverse,
                }));
            }
        }
    }
    out
}

fn a_moves(g: &LabeledGraph) -> Vec<Move> {
    let mut out = Vec::new();
    for (id, [x, y]) in g.edges() {
        if x.vertex != y.vertex {
            continue;
        }
        for small_side in Side::BOTH {
            let (c, c2) = if small_side == Side::Zero { (x.label, y.label) } else { (y.label, x.label) };
            if c.abs() < 2 || c2 % c != 0 || (c2 / c).abs() < 2 {
                continue;
            }
            for b in divisors(c2 / c).filter(|&b| b > 1) {
                out.push(Move::AMove(AMove {
                    lp: id.clone(),
                    small_side,
                    b,
                    new_vertex: g.fresh_vertex_id("n"),
                    new_edge: g.fresh_edge_id("f"),
                    edge_side: Side::Zero,
                    unit: 1,
                }));
            }
        }
    }
    out
}

fn a_inverses(g: &LabeledGraph) -> Vec<Move> {
    let mut out = Vec::new();
    for unit in g.strict_ascending_loops() {
        let v = &g.end(&unit).unwrap().vertex;
        if g.valence(v) != 3 {
            continue;
        }
        let Some(third) = g.ends_at(v).into_iter().find(|r| r.edge != unit.edge) else { continue };
        let mv = AInverse { lp: unit.edge.clone(), edge: third.edge };
        if moves::a_inverse(g, &mv).is_ok() {
            out.push(Move::AInverse(mv));
        }
    }
    out
}
