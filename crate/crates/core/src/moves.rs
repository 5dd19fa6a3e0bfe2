//! Collapse, expansion, slide, induction and A±-moves with exact label
//! arithmetic.
//!
//! Edge and vertex ids persist through every move: collapse removes one edge
//! and merges its initial vertex into its terminal vertex, everything else is
//! relabeled in place. An induction keeps every id. An A-move creates one
//! vertex and one edge, and its inverse removes them again.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::MoveError;
use crate::graph::{EdgeId, End, EndRef, LabeledGraph, Side, VertexId};
use crate::iso::Isomorphism;

fn is_zero(s: &Side) -> bool {
    *s == Side::Zero
}

fn default_unit() -> i64 {
    1
}

fn is_one(x: &i64) -> bool {
    *x == 1
}

/// Expansion at `vertex`: a new vertex joined by a new edge with labels
/// `(unit at new_vertex, multiplier at vertex)`; each pulled end `n` moves to
/// the new vertex with label `n / (unit·multiplier)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub vertex: VertexId,
    pub multiplier: i64,
    #[serde(default = "default_unit", skip_serializing_if = "is_one")]
    pub unit: i64,
    pub pulled: Vec<EndRef>,
    pub new_vertex: VertexId,
    pub new_edge: EdgeId,
    /// Side of the new edge that sits at the new vertex.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub new_vertex_side: Side,
}

impl Default for Side {
    fn default() -> Self {
        Side::Zero
    }
}

/// Slide of the ends `slid` along `over`. With one stage this is an ordinary
/// slide; with several, the ends are carried across each stage in turn (a
/// slide over an edge path).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slide {
    pub slid: Vec<EndRef>,
    pub over: Vec<EndRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

/// Induction along the ascending loop `lp` whose unit end is `unit_side`,
/// passing to the index-`k` subgroup (forward) or back (reverse).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Induction {
    #[serde(rename = "loop")]
    pub lp: EdgeId,
    pub unit_side: Side,
    pub k: i64,
    pub pulled: Vec<EndRef>,
    pub direction: Direction,
}

/// A-move on the loop `lp` with labels `(c at small_side, c·m)`: the loop
/// becomes a strict ascending loop `(1, m)` at a new vertex joined to the old
/// one by an edge `(b at new vertex, c at old vertex)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AMove {
    #[serde(rename = "loop")]
    pub lp: EdgeId,
    pub small_side: Side,
    pub b: i64,
    pub new_vertex: VertexId,
    pub new_edge: EdgeId,
    /// Side of the new edge at the new vertex.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub edge_side: Side,
    /// Label (±1) put on the small side; the other side gets `unit·m`.
    #[serde(default = "default_unit", skip_serializing_if = "is_one")]
    pub unit: i64,
}

/// A⁻¹-move removing the strict ascending loop `lp` and its only other edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AInverse {
    #[serde(rename = "loop")]
    pub lp: EdgeId,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    /// Collapse of the oriented edge whose initial end is `end`.
    Collapse { end: EndRef },
    Expansion(Expansion),
    Slide(Slide),
    Induction(Induction),
    AMove(AMove),
    AInverse(AInverse),
}

impl Move {
    pub fn kind(&self) -> &'static str {
        match self {
            Move::Collapse { .. } => "collapse",
            Move::Expansion(_) => "expansion",
            Move::Slide(_) => "slide",
            Move::Induction(_) => "induction",
            Move::AMove(_) => "a_move",
            Move::AInverse(_) => "a_inverse",
        }
    }

    pub fn is_elementary(&self) -> bool {
        matches!(self, Move::Collapse { .. } | Move::Expansion(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveReport {
    pub graph: LabeledGraph,
    /// The move yields the same G-tree (structural criteria only).
    pub trivial: bool,
    /// Labels came out identical although the move is not trivial as a tree
    /// move (only the marking changes).
    pub unmarked_identity: bool,
    /// The unit end of the loop was −1 and the move was computed after an
    /// edge sign change.
    pub sign_normalized: bool,
    /// Each surviving input end and its image end.
    pub tracking: BTreeMap<EndRef, EndRef>,
}

impl MoveReport {
    fn plain(before: &LabeledGraph, graph: LabeledGraph) -> Self {
        let tracking = identity_tracking(before, &graph);
        MoveReport { graph, trivial: false, unmarked_identity: false, sign_normalized: false, tracking }
    }
}

fn identity_tracking(before: &LabeledGraph, after: &LabeledGraph) -> BTreeMap<EndRef, EndRef> {
    before
        .edge_ids()
        .filter(|e| after.has_edge(e))
        .flat_map(|e| Side::BOTH.map(|s| EndRef::new(e.clone(), s)))
        .map(|r| (r.clone(), r))
        .collect()
}

fn mul(a: i64, b: i64) -> Result<i64, MoveError> {
    a.checked_mul(b).ok_or(MoveError::Overflow)
}

fn divide(end: &EndRef, label: i64, divisor: i64) -> Result<i64, MoveError> {
    if divisor == 0 || label % divisor != 0 {
        return Err(MoveError::Divisibility { end: end.clone(), label, divisor });
    }
    Ok(label / divisor)
}

fn distinct(ends: &[EndRef]) -> Result<BTreeSet<EndRef>, MoveError> {
    let set: BTreeSet<EndRef> = ends.iter().cloned().collect();
    if set.len() != ends.len() {
        return Err(MoveError::pre("an end is listed twice"));
    }
    Ok(set)
}

fn loop_at(graph: &LabeledGraph, lp: &EdgeId) -> Result<(VertexId, [i64; 2]), MoveError> {
    let [a, b] = graph.edge(lp).ok_or_else(|| MoveError::UnknownEdge(lp.clone()))?;
    if a.vertex != b.vertex {
        return Err(MoveError::NotLoop(lp.clone()));
    }
    Ok((a.vertex.clone(), [a.label, b.label]))
}

pub fn collapse(graph: &LabeledGraph, end: &EndRef) -> Result<MoveReport, MoveError> {
    let [e0, e1] = graph.edge(&end.edge).ok_or_else(|| MoveError::UnknownEdge(end.edge.clone()))?;
    let (init, term) = if end.side == Side::Zero { (e0, e1) } else { (e1, e0) };
    if init.vertex == term.vertex || init.label.abs() != 1 {
        return Err(MoveError::NotCollapsible(end.clone()));
    }
    let factor = mul(init.label, term.label)?;
    let (u, w) = (init.vertex.clone(), term.vertex.clone());
    let mut g = graph.clone();
    g.remove_edge(&end.edge);
    for r in g.ends_at(&u) {
        let x = g.end_mut(&r).unwrap();
        x.label = mul(x.label, factor)?;
        x.vertex = w.clone();
    }
    g.remove_vertex(&u);
    Ok(MoveReport::plain(graph, g))
}

pub fn expand(graph: &LabeledGraph, ex: &Expansion) -> Result<MoveReport, MoveError> {
    if !graph.has_vertex(&ex.vertex) {
        return Err(MoveError::UnknownVertex(ex.vertex.clone()));
    }
    if graph.has_vertex(&ex.new_vertex) {
        return Err(MoveError::IdInUse(ex.new_vertex.to_string()));
    }
    if graph.has_edge(&ex.new_edge) {
        return Err(MoveError::IdInUse(ex.new_edge.to_string()));
    }
    if ex.multiplier == 0 {
        return Err(MoveError::pre("expansion multiplier must be nonzero"));
    }
    if ex.unit.abs() != 1 {
        return Err(MoveError::pre("expansion unit must be 1 or -1"));
    }
    distinct(&ex.pulled)?;
    let divisor = ex.unit * ex.multiplier;
    let mut g = graph.clone();
    for r in &ex.pulled {
        let end = graph.require_end(r)?;
        if end.vertex != ex.vertex {
            return Err(MoveError::EndNotAtVertex { end: r.clone(), vertex: ex.vertex.clone() });
        }
        let label = divide(r, end.label, divisor)?;
        let x = g.end_mut(r).unwrap();
        x.label = label;
        x.vertex = ex.new_vertex.clone();
    }
    g.add_vertex(ex.new_vertex.clone());
    let near = End { vertex: ex.new_vertex.clone(), label: ex.unit };
    let far = End { vertex: ex.vertex.clone(), label: ex.multiplier };
    let (e0, e1) = if ex.new_vertex_side == Side::Zero { (near, far) } else { (far, near) };
    g.insert_edge(ex.new_edge.clone(), e0, e1);
    Ok(MoveReport::plain(graph, g))
}

/// Collapses greedily until reduced; returns the reduced graph and the
/// collapses performed (each oriented by its initial end).
pub fn reduce(graph: &LabeledGraph) -> Result<(LabeledGraph, Vec<Move>), MoveError> {
    graph.require_valid()?;
    let mut g = graph.clone();
    let mut done = Vec::new();
    while let Some(end) = g.collapsible_edges().into_iter().next() {
        g = collapse(&g, &end)?.graph;
        done.push(Move::Collapse { end });
    }
    Ok((g, done))
}

fn slide_stage(g: &mut LabeledGraph, slid: &BTreeSet<EndRef>, over: &EndRef) -> Result<(), MoveError> {
    let o = g.require_end(over)?.clone();
    let far = g.require_end(&over.opposite())?.clone();
    for r in slid {
        if r.edge == over.edge {
            return Err(MoveError::SelfSlide(r.clone()));
        }
        let end = g.require_end(r)?;
        if end.vertex != o.vertex {
            return Err(MoveError::EndNotAtVertex { end: r.clone(), vertex: o.vertex.clone() });
        }
        divide(r, end.label, o.label)?;
    }
    for r in slid {
        let x = g.end_mut(r).unwrap();
        x.label = mul(x.label / o.label, far.label)?;
        x.vertex = far.vertex.clone();
    }
    Ok(())
}

pub fn slide(graph: &LabeledGraph, slid: &[EndRef], over: &EndRef) -> Result<MoveReport, MoveError> {
    apply_slide(graph, &Slide { slid: slid.to_vec(), over: vec![over.clone()] })
}

pub fn apply_slide(graph: &LabeledGraph, s: &Slide) -> Result<MoveReport, MoveError> {
    if s.slid.is_empty() {
        return Err(MoveError::pre("slide needs at least one end"));
    }
    if s.over.is_empty() {
        return Err(MoveError::pre("slide needs an edge to slide over"));
    }
    let slid = distinct(&s.slid)?;
    let mut g = graph.clone();
    for stage in &s.over {
        slide_stage(&mut g, &slid, stage)?;
    }
    let mut report = MoveReport::plain(graph, g);
    report.trivial = s.over.len() == 1 && slide_is_trivial(graph, &slid, &s.over[0]);
    Ok(report)
}

/// Sliding every other end at a vertex over a loop whose two inclusions are
/// equal isomorphisms gives back the same tree.
fn slide_is_trivial(graph: &LabeledGraph, slid: &BTreeSet<EndRef>, over: &EndRef) -> bool {
    let Some([a, b]) = graph.edge(&over.edge) else { return false };
    if a.vertex != b.vertex || a.label.abs() != 1 || a.label != b.label {
        return false;
    }
    let others: BTreeSet<EndRef> =
        graph.ends_at(&a.vertex).into_iter().filter(|r| r.edge != over.edge).collect();
    &others == slid
}

pub fn induction(graph: &LabeledGraph, m: &Induction) -> Result<MoveReport, MoveError> {
    let (v, labels) = loop_at(graph, &m.lp)?;
    let unit = labels[m.unit_side.index()];
    if unit.abs() != 1 {
        return Err(MoveError::NotAscending(m.lp.clone()));
    }
    let monodromy = labels[m.unit_side.flip().index()] * unit;
    if m.k < 1 {
        return Err(MoveError::pre("induction index k must be at least 1"));
    }
    if monodromy % m.k != 0 {
        return Err(MoveError::pre(format!("k = {} does not divide the monodromy {monodromy}", m.k)));
    }
    let cofactor = monodromy / m.k;
    let pulled = distinct(&m.pulled)?;
    for r in &pulled {
        if r.edge == m.lp {
            return Err(MoveError::pre("the loop's own ends cannot be pulled"));
        }
        let end = graph.require_end(r)?;
        if end.vertex != v {
            return Err(MoveError::EndNotAtVertex { end: r.clone(), vertex: v.clone() });
        }
    }
    let mut g = graph.clone();
    for r in graph.ends_at(&v) {
        if r.edge == m.lp {
            continue;
        }
        let n = graph.label(&r).unwrap();
        let is_pulled = pulled.contains(&r);
        let new = match (m.direction, is_pulled) {
            (Direction::Forward, true) => divide(&r, n, m.k)?,
            (Direction::Forward, false) => mul(n, cofactor)?,
            (Direction::Reverse, true) => mul(n, m.k)?,
            (Direction::Reverse, false) => divide(&r, n, cofactor)?,
        };
        g.end_mut(&r).unwrap().label = new;
    }
    let mut report = MoveReport::plain(graph, g);
    report.sign_normalized = unit == -1;
    let same = report.graph == *graph;
    report.trivial = same && graph.is_single_ascending_loop();
    report.unmarked_identity = same && !report.trivial;
    Ok(report)
}

pub fn a_move(graph: &LabeledGraph, m: &AMove) -> Result<MoveReport, MoveError> {
    let (w, labels) = loop_at(graph, &m.lp)?;
    let c = labels[m.small_side.index()];
    let c2 = labels[m.small_side.flip().index()];
    if c.abs() < 2 || c2 % c != 0 || (c2 / c).abs() < 2 {
        return Err(MoveError::pre(
            "no strict divisibility: need the small label c with |c| ≥ 2 dividing the other with ratio of absolute value ≥ 2",
        ));
    }
    let monodromy = c2 / c;
    if m.unit.abs() != 1 {
        return Err(MoveError::pre(format!("unit must be 1 or -1, got {}", m.unit)));
    }
    if m.b.abs() < 2 || monodromy % m.b != 0 {
        return Err(MoveError::pre(format!("b = {} must have |b| ≥ 2 and divide {monodromy}", m.b)));
    }
    if graph.has_vertex(&m.new_vertex) {
        return Err(MoveError::IdInUse(m.new_vertex.to_string()));
    }
    if graph.has_edge(&m.new_edge) {
        return Err(MoveError::IdInUse(m.new_edge.to_string()));
    }
    let mut g = graph.clone();
    g.add_vertex(m.new_vertex.clone());
    let small = EndRef::new(m.lp.clone(), m.small_side);
    *g.end_mut(&small).unwrap() = End { vertex: m.new_vertex.clone(), label: m.unit };
    *g.end_mut(&small.opposite()).unwrap() = End { vertex: m.new_vertex.clone(), label: m.unit * monodromy };
    let near = End { vertex: m.new_vertex.clone(), label: m.b };
    let far = End { vertex: w, label: c };
    let (e0, e1) = if m.edge_side == Side::Zero { (near, far) } else { (far, near) };
    g.insert_edge(m.new_edge.clone(), e0, e1);
    Ok(MoveReport::plain(graph, g))
}

pub fn a_inverse(graph: &LabeledGraph, m: &AInverse) -> Result<MoveReport, MoveError> {
    let (v, labels) = loop_at(graph, &m.lp)?;
    let unit_side = if labels[0].abs() == 1 {
        Side::Zero
    } else if labels[1].abs() == 1 {
        Side::One
    } else {
        return Err(MoveError::pre("loop is not ascending"));
    };
    let unit = labels[unit_side.index()];
    let monodromy = labels[unit_side.flip().index()] * unit;
    if monodromy.abs() < 2 {
        return Err(MoveError::pre("loop is not a strict ascending loop"));
    }
    let [x0, x1] = graph.edge(&m.edge).ok_or_else(|| MoveError::UnknownEdge(m.edge.clone()))?;
    let (near, far) = if x0.vertex == v {
        (x0, x1)
    } else if x1.vertex == v {
        (x1, x0)
    } else {
        return Err(MoveError::pre(format!("edge `{}` is not incident to the loop vertex", m.edge)));
    };
    if far.vertex == v {
        return Err(MoveError::pre(format!("edge `{}` must join the loop vertex to another vertex", m.edge)));
    }
    if graph.valence(&v) != 3 {
        return Err(MoveError::pre("other edges are incident to the loop vertex"));
    }
    let (b, c) = (near.label, far.label);
    if b.abs() < 2 {
        return Err(MoveError::pre("B not proper in A: |b| must be at least 2"));
    }
    if c.abs() < 2 {
        return Err(MoveError::pre("B not proper in C: |c| must be at least 2"));
    }
    if monodromy % b != 0 {
        return Err(MoveError::pre(format!("b = {b} does not divide the monodromy {monodromy}")));
    }
    let w = far.vertex.clone();
    let mut g = graph.clone();
    g.remove_edge(&m.edge);
    g.remove_vertex(&v);
    let unit_end = EndRef::new(m.lp.clone(), unit_side);
    *g.end_mut(&unit_end).unwrap() = End { vertex: w.clone(), label: c };
    *g.end_mut(&unit_end.opposite()).unwrap() = End { vertex: w, label: mul(c, monodromy)? };
    Ok(MoveReport::plain(graph, g))
}

pub fn apply(graph: &LabeledGraph, mv: &Move) -> Result<MoveReport, MoveError> {
    match mv {
        Move::Collapse { end } => collapse(graph, end),
        Move::Expansion(e) => expand(graph, e),
        Move::Slide(s) => apply_slide(graph, s),
        Move::Induction(i) => induction(graph, i),
        Move::AMove(a) => a_move(graph, a),
        Move::AInverse(a) => a_inverse(graph, a),
    }
}

/// Applies a sequence of moves, returning every intermediate graph
/// (including the start).
pub fn replay(start: &LabeledGraph, moves: &[Move]) -> Result<Vec<LabeledGraph>, (usize, MoveError)> {
    let mut out = vec![start.clone()];
    for (i, mv) in moves.iter().enumerate() {
        let next = apply(out.last().unwrap(), mv).map_err(|e| (i, e))?.graph;
        out.push(next);
    }
    Ok(out)
}

/// The move undoing `mv`, where `before` is the graph `mv` was applied to.
/// Applying the result to `apply(before, mv)` gives back `before` exactly.
pub fn inverse(before: &LabeledGraph, mv: &Move) -> Result<Move, MoveError> {
    Ok(match mv {
        Move::Collapse { end } => {
            let init = before.require_end(end)?;
            let term = before.require_end(&end.opposite())?;
            let pulled = before
                .ends_at(&init.vertex)
                .into_iter()
                .filter(|r| r.edge != end.edge)
                .collect();
            Move::Expansion(Expansion {
                vertex: term.vertex.clone(),
                multiplier: term.label,
                unit: init.label,
                pulled,
                new_vertex: init.vertex.clone(),
                new_edge: end.edge.clone(),
                new_vertex_side: end.side,
            })
        }
        Move::Expansion(e) => Move::Collapse { end: EndRef::new(e.new_edge.clone(), e.new_vertex_side) },
        Move::Slide(s) => Move::Slide(Slide {
            slid: s.slid.clone(),
            over: s.over.iter().rev().map(EndRef::opposite).collect(),
        }),
        Move::Induction(i) => Move::Induction(Induction {
            direction: match i.direction {
                Direction::Forward => Direction::Reverse,
                Direction::Reverse => Direction::Forward,
            },
            ..i.clone()
        }),
        Move::AMove(a) => Move::AInverse(AInverse { lp: a.lp.clone(), edge: a.new_edge.clone() }),
        Move::AInverse(a) => {
            let (v, labels) = loop_at(before, &a.lp)?;
            let unit_side = if labels[0].abs() == 1 { Side::Zero } else { Side::One };
            let [x0, _] = before.edge(&a.edge).ok_or_else(|| MoveError::UnknownEdge(a.edge.clone()))?;
            let edge_side = if x0.vertex == v { Side::Zero } else { Side::One };
            let b = before.edge(&a.edge).unwrap()[edge_side.index()].label;
            Move::AMove(AMove {
                lp: a.lp.clone(),
                small_side: unit_side,
                b,
                new_vertex: v,
                new_edge: a.edge.clone(),
                edge_side,
                unit: labels[unit_side.index()],
            })
        }
    })
}

/// Re-expresses `mv` (a move on the source of `iso`) as a move on `target`.
/// Fresh ids are kept when free in `target`, otherwise regenerated.
pub fn transport(mv: &Move, iso: &Isomorphism, target: &LabeledGraph) -> Result<Move, MoveError> {
    let end = |r: &EndRef| iso.map_end(r).ok_or_else(|| MoveError::UnknownEdge(r.edge.clone()));
    let ends = |rs: &[EndRef]| rs.iter().map(end).collect::<Result<Vec<_>, _>>();
    let edge_and_side = |e: &EdgeId, s: Side| end(&EndRef::new(e.clone(), s));
    let fresh_v = |v: &VertexId| if target.has_vertex(v) { target.fresh_vertex_id("n") } else { v.clone() };
    let fresh_e = |e: &EdgeId| if target.has_edge(e) { target.fresh_edge_id("f") } else { e.clone() };
    Ok(match mv {
        Move::Collapse { end: r } => Move::Collapse { end: end(r)? },
        Move::Expansion(e) => Move::Expansion(Expansion {
            vertex: iso.map_vertex(&e.vertex).cloned().ok_or_else(|| MoveError::UnknownVertex(e.vertex.clone()))?,
            pulled: ends(&e.pulled)?,
            new_vertex: fresh_v(&e.new_vertex),
            new_edge: fresh_e(&e.new_edge),
            ..e.clone()
        }),
        Move::Slide(s) => Move::Slide(Slide { slid: ends(&s.slid)?, over: ends(&s.over)? }),
        Move::Induction(i) => {
            let r = edge_and_side(&i.lp, i.unit_side)?;
            Move::Induction(Induction { lp: r.edge, unit_side: r.side, pulled: ends(&i.pulled)?, ..i.clone() })
        }
        Move::AMove(a) => {
            let r = edge_and_side(&a.lp, a.small_side)?;
            Move::AMove(AMove {
                lp: r.edge,
                small_side: r.side,
                new_vertex: fresh_v(&a.new_vertex),
                new_edge: fresh_e(&a.new_edge),
                ..a.clone()
            })
        }
        Move::AInverse(a) => Move::AInverse(AInverse {
            lp: iso.map_edge(&a.lp).cloned().ok_or_else(|| MoveError::UnknownEdge(a.lp.clone()))?,
            edge: iso.map_edge(&a.edge).cloned().ok_or_else(|| MoveError::UnknownEdge(a.edge.clone()))?,
        }),
    })
}
