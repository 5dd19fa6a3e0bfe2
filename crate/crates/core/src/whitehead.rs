//! Whitehead moves between reduced graphs: finding them inside a peak of a
//! deformation, and factoring them into slides, inductions and A±-moves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::canon::equivalent;
use crate::deformation::{normalize_deformation_avoiding, transport_chain, ElementaryDeformation};
use crate::error::EngineError;
use crate::forest::{check_forest, collapse_forest, components, maximal_stable_subtree, Forest};
use crate::graph::{EdgeId, EndRef, LabeledGraph, Side, VertexId};
use crate::moves::{self, AInverse, Direction, Induction, Move, Slide};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WhiteheadType {
    I,
    II,
}

/// A peak graph with one edge collapsed on one side and one or two edges
/// collapsed on the other. Unless `reversed`, the move goes from the
/// `single` side to the `set` side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadMove {
    pub peak: LabeledGraph,
    pub single: EndRef,
    pub set: Vec<EndRef>,
    pub reversed: bool,
}

impl WhiteheadMove {
    pub fn kind(&self) -> WhiteheadType {
        if self.set.len() == 1 {
            WhiteheadType::I
        } else {
            WhiteheadType::II
        }
    }

    fn single_side(&self) -> Result<LabeledGraph, EngineError> {
        Ok(moves::collapse(&self.peak, &self.single)?.graph)
    }

    fn set_side(&self) -> Result<LabeledGraph, EngineError> {
        let chain: Vec<Move> = self.set.iter().map(|end| Move::Collapse { end: end.clone() }).collect();
        Ok(moves::replay(&self.peak, &chain).map_err(|(_, e)| e)?.pop().unwrap())
    }

    pub fn source(&self) -> Result<LabeledGraph, EngineError> {
        if self.reversed {
            self.set_side()
        } else {
            self.single_side()
        }
    }

    pub fn target(&self) -> Result<LabeledGraph, EngineError> {
        if self.reversed {
            self.single_side()
        } else {
            self.set_side()
        }
    }
}

/// Which of the four possible conclusions a pair of edges realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Conclusion {
    /// Collapse `e′` after un-collapsing `e`.
    One,
    /// Collapse `e′` and a further edge after un-collapsing `e`.
    Two,
    /// Collapse `e` after un-collapsing `e′`.
    Three,
    /// Collapse `e` and a further edge after un-collapsing `e′`.
    Four,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub conclusion: Conclusion,
    /// Edge of the first forest.
    pub e: EdgeId,
    /// Edge of the second forest.
    pub e_prime: EdgeId,
    /// The additional collapsed edge of conclusions two and four.
    pub extra: Option<EdgeId>,
    /// Found by the constructive scan (as opposed to the exhaustive
    /// fallback over all pairs).
    pub via_scan: bool,
    pub whitehead: WhiteheadMove,
}

fn unit_ends(g: &LabeledGraph, e: &EdgeId) -> Vec<EndRef> {
    match g.edge(e) {
        Some([a, b]) if a.vertex != b.vertex => Side::BOTH
            .into_iter()
            .filter(|s| [a, b][s.index()].label.abs() == 1)
            .map(|s| EndRef::new(e.clone(), s))
            .collect(),
        _ => Vec::new(),
    }
}

/// With `e` un-collapsed from the first forest, tries `e′` alone and then `e′`
/// with one more edge.
fn resolve_pair(
    peak: &LabeledGraph,
    forest: &Forest,
    e: &EdgeId,
    ep: &EdgeId,
    avoid: Option<&EdgeId>,
) -> Result<Option<(WhiteheadMove, Option<EdgeId>)>, EngineError> {
    let Ok((ge, _)) = collapse_forest(peak, &forest.without(e)) else { return Ok(None) };
    let Some(e_end) = unit_ends(&ge, e).into_iter().next() else { return Ok(None) };
    let ep_ends = unit_ends(&ge, ep);
    if ep_ends.is_empty() || !moves::collapse(&ge, &e_end)?.graph.is_reduced() {
        return Ok(None);
    }
    let wm = |set: Vec<EndRef>| WhiteheadMove { peak: ge.clone(), single: e_end.clone(), set, reversed: false };
    for r in &ep_ends {
        if moves::collapse(&ge, r)?.graph.is_reduced() {
            return Ok(Some((wm(vec![r.clone()]), None)));
        }
    }
    for r in &ep_ends {
        let h = moves::collapse(&ge, r)?.graph;
        let mut options: Vec<EndRef> = h.collapsible_edges().into_iter().filter(|f| &f.edge != e).collect();
        options.sort_by_key(|f| (Some(&f.edge) == avoid, f.clone()));
        for f in options {
            if moves::collapse(&h, &f)?.graph.is_reduced() {
                let extra = f.edge.clone();
                return Ok(Some((wm(vec![r.clone(), f]), Some(extra))));
            }
        }
    }
    Ok(None)
}

fn component_index(comps: &[crate::forest::Component]) -> BTreeMap<VertexId, usize> {
    comps
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.vertices.iter().map(move |v| (v.clone(), i)))
        .collect()
}

/// Edges of the path inside `edges` from `from` to the first vertex
/// satisfying `stop`.
fn forest_path(
    g: &LabeledGraph,
    edges: &BTreeSet<EdgeId>,
    from: &VertexId,
    stop: impl Fn(&VertexId) -> bool,
) -> Option<Vec<EdgeId>> {
    let mut prev: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
    let mut seen = BTreeSet::from([from.clone()]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(x) = queue.pop_front() {
        if stop(&x) {
            let mut path = Vec::new();
            let mut cur = x;
            while let Some((p, e)) = prev.get(&cur) {
                path.push(e.clone());
                cur = p.clone();
            }
            path.reverse();
            return Some(path);
        }
        for e in edges {
            let [a, b] = g.edge(e).unwrap();
            let next = if a.vertex == x {
                &b.vertex
            } else if b.vertex == x {
                &a.vertex
            } else {
                continue;
            };
            if seen.insert(next.clone()) {
                prev.insert(next.clone(), (x.clone(), e.clone()));
                queue.push_back(next.clone());
            }
        }
    }
    None
}

type Found = (WhiteheadMove, EdgeId, EdgeId, Option<EdgeId>);

/// Unit-labelled edges of `fp` that do not become loops after collapsing
/// `f`: un-collapse the first edge on the way to the stable subtree.
fn scan_unit_edges(
    peak: &LabeledGraph,
    f: &Forest,
    fp: &Forest,
    avoid: Option<&EdgeId>,
) -> Result<Option<Found>, EngineError> {
    let comps = components(peak, f)?;
    let comp_of = component_index(&comps);
    for ep in fp.edges() {
        for side in Side::BOTH {
            let r = EndRef::new(ep.clone(), side);
            if peak.label(&r).unwrap().abs() != 1 {
                continue;
            }
            let iv = &peak.end(&r).unwrap().vertex;
            let tv = &peak.end(&r.opposite()).unwrap().vertex;
            let Some(&ci) = comp_of.get(iv) else { continue };
            if comp_of.get(tv) == Some(&ci) {
                continue;
            }
            let f0: Forest = comps[ci].edges.iter().cloned().collect();
            let f1 = maximal_stable_subtree(peak, &f0)?;
            if f1.vertices.contains(iv) {
                continue;
            }
            let Some(path) = forest_path(peak, &comps[ci].edges, iv, |v| f1.vertices.contains(v)) else { continue };
            let e = &path[0];
            if let Some((wm, extra)) = resolve_pair(peak, f, e, ep, avoid)? {
                return Ok(Some((wm, e.clone(), ep.clone(), extra)));
            }
        }
    }
    Ok(None)
}

/// Every edge of each forest maps to a loop after collapsing the other:
/// start from a stable vertex of a component of `f`.
fn scan_all_loops(
    peak: &LabeledGraph,
    f: &Forest,
    fp: &Forest,
    avoid: Option<&EdgeId>,
) -> Result<Option<Found>, EngineError> {
    for comp in components(peak, f)? {
        let f0: Forest = comp.edges.iter().cloned().collect();
        let f1 = maximal_stable_subtree(peak, &f0)?;
        for v in &f1.vertices {
            for ep in fp.edges() {
                for side in Side::BOTH {
                    let r = EndRef::new(ep.clone(), side);
                    if &peak.end(&r).unwrap().vertex != v {
                        continue;
                    }
                    let tv = &peak.end(&r.opposite()).unwrap().vertex;
                    if tv == v || !comp.vertices.contains(tv) {
                        continue;
                    }
                    let Some(path) = forest_path(peak, &comp.edges, v, |x| x == tv) else { continue };
                    let e = path.last().unwrap();
                    if let Some((wm, extra)) = resolve_pair(peak, f, e, ep, avoid)? {
                        return Ok(Some((wm, e.clone(), ep.clone(), extra)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Finds edges `e ∈ F`, `e′ ∈ F′` realizing one of the four conclusions for
/// the peak `peak` with collapse forests `f` (toward the start) and `fp`
/// (toward the end).
pub fn find_whitehead_pair(peak: &LabeledGraph, f: &Forest, fp: &Forest) -> Result<PairOutcome, EngineError> {
    find_whitehead_pair_avoiding(peak, f, fp, None)
}

/// As [`find_whitehead_pair`], preferring an extra edge other than `avoid`.
pub fn find_whitehead_pair_avoiding(
    peak: &LabeledGraph,
    f: &Forest,
    fp: &Forest,
    avoid: Option<&EdgeId>,
) -> Result<PairOutcome, EngineError> {
    if f.is_empty() || fp.is_empty() {
        return Err(EngineError::TrivialForest);
    }
    if let Some(e) = f.intersection(fp).edges().next() {
        return Err(EngineError::SharedEdge(e.clone()));
    }
    check_forest(peak, f)?;
    check_forest(peak, fp)?;
    if !collapse_forest(peak, f)?.0.is_reduced() || !collapse_forest(peak, fp)?.0.is_reduced() {
        return Err(EngineError::NotReducedResult);
    }
    let forward = |(wm, e, ep, extra): Found, via_scan| PairOutcome {
        conclusion: if extra.is_some() { Conclusion::Two } else { Conclusion::One },
        e,
        e_prime: ep,
        extra,
        via_scan,
        whitehead: wm,
    };
    // the symmetric search returns (move, F′-edge, F-edge, extra)
    let backward = |(wm, ep, e, extra): Found, via_scan| PairOutcome {
        conclusion: if extra.is_some() { Conclusion::Four } else { Conclusion::Three },
        e,
        e_prime: ep,
        extra,
        via_scan,
        whitehead: WhiteheadMove { reversed: true, ..wm },
    };
    if let Some(x) = scan_unit_edges(peak, f, fp, avoid)? {
        return Ok(forward(x, true));
    }
    if let Some(x) = scan_unit_edges(peak, fp, f, avoid)? {
        return Ok(backward(x, true));
    }
    if let Some(x) = scan_all_loops(peak, f, fp, avoid)? {
        return Ok(forward(x, true));
    }
    for e in f.edges() {
        for ep in fp.edges() {
            if let Some((wm, extra)) = resolve_pair(peak, f, e, ep, avoid)? {
                return Ok(forward((wm, e.clone(), ep.clone(), extra), false));
            }
        }
    }
    for ep in fp.edges() {
        for e in f.edges() {
            if let Some((wm, extra)) = resolve_pair(peak, fp, ep, e, avoid)? {
                return Ok(backward((wm, ep.clone(), e.clone(), extra), false));
            }
        }
    }
    Err(EngineError::Internal(format!(
        "no Whitehead pair in peak {peak} with forests {:?} / {:?}",
        f.edges().collect::<Vec<_>>(),
        fp.edges().collect::<Vec<_>>()
    )))
}

fn collapse_edge(g: &LabeledGraph, e: &EdgeId) -> Result<LabeledGraph, EngineError> {
    let end = unit_ends(g, e)
        .into_iter()
        .next()
        .ok_or_else(|| EngineError::Internal(format!("edge `{e}` is not collapsible in the peak")))?;
    Ok(moves::collapse(g, &end)?.graph)
}

/// Whitehead moves from `peak` collapsed along `f` to `peak` collapsed along
/// `fp`, by repeatedly extracting a pair and shrinking the forests.
pub fn peak_to_whitehead(
    peak: &LabeledGraph,
    f: &Forest,
    fp: &Forest,
    avoid: Option<&EdgeId>,
) -> Result<Vec<WhiteheadMove>, EngineError> {
    let (mut peak, mut f, mut fp) = (peak.clone(), f.clone(), fp.clone());
    let mut front = Vec::new();
    let mut back = Vec::new();
    while !(f.is_empty() && fp.is_empty()) {
        if f.is_empty() || fp.is_empty() {
            return Err(EngineError::Internal("one forest emptied before the other".into()));
        }
        let o = find_whitehead_pair_avoiding(&peak, &f, &fp, avoid)?;
        match o.conclusion {
            Conclusion::One | Conclusion::Two => {
                f.remove(&o.e);
                fp.remove(&o.e_prime);
                match &o.extra {
                    Some(x) if fp.contains(x) => {
                        fp.remove(x);
                        peak = collapse_forest(&peak, &Forest::new([o.e_prime.clone(), x.clone()]))?.0;
                    }
                    Some(x) => {
                        f.insert(x.clone());
                        peak = collapse_edge(&peak, &o.e_prime)?;
                    }
                    None => peak = collapse_edge(&peak, &o.e_prime)?,
                }
                front.push(o.whitehead);
            }
            Conclusion::Three | Conclusion::Four => {
                f.remove(&o.e);
                fp.remove(&o.e_prime);
                match &o.extra {
                    Some(x) if f.contains(x) => {
                        f.remove(x);
                        peak = collapse_forest(&peak, &Forest::new([o.e.clone(), x.clone()]))?.0;
                    }
                    Some(x) => {
                        fp.insert(x.clone());
                        peak = collapse_edge(&peak, &o.e)?;
                    }
                    None => peak = collapse_edge(&peak, &o.e)?,
                }
                back.push(o.whitehead);
            }
        }
    }
    back.reverse();
    front.extend(back);
    Ok(front)
}

/// The normalized deformation and the Whitehead moves read off its peaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadSequence {
    pub normalized: ElementaryDeformation,
    pub moves: Vec<WhiteheadMove>,
}

pub fn deformation_to_whitehead(d: &ElementaryDeformation) -> Result<WhiteheadSequence, EngineError> {
    deformation_to_whitehead_avoiding(d, None)
}

pub fn deformation_to_whitehead_avoiding(
    d: &ElementaryDeformation,
    avoid: Option<&EdgeId>,
) -> Result<WhiteheadSequence, EngineError> {
    let normalized = normalize_deformation_avoiding(d, avoid)?;
    let mut out = Vec::new();
    for p in normalized.peaks() {
        let peak = &normalized.graphs()[p.peak];
        out.extend(peak_to_whitehead(peak, &p.expanded, &p.collapsed, avoid)?);
    }
    Ok(WhiteheadSequence { normalized, moves: out })
}

/// Moves valid from `start`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub start: LabeledGraph,
    pub moves: Vec<Move>,
}

impl Factorization {
    pub fn graphs(&self) -> Result<Vec<LabeledGraph>, EngineError> {
        moves::replay(&self.start, &self.moves).map_err(|(i, e)| EngineError::BadStep { step: i, reason: e.to_string() })
    }

    fn inverted(&self) -> Result<Factorization, EngineError> {
        let graphs = self.graphs()?;
        let moves = self
            .moves
            .iter()
            .zip(&graphs)
            .rev()
            .map(|(mv, before)| moves::inverse(before, mv))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Factorization { start: graphs.last().unwrap().clone(), moves })
    }

    fn check(self, target: &LabeledGraph) -> Result<Factorization, EngineError> {
        let graphs = self.graphs()?;
        if let Some(g) = graphs.iter().find(|g| !g.is_reduced()) {
            return Err(EngineError::Internal(format!("unreduced intermediate graph {g}")));
        }
        if !equivalent(graphs.last().unwrap(), target)? {
            return Err(EngineError::Internal("factorization misses the Whitehead target".into()));
        }
        Ok(self)
    }
}

fn vertex_of(g: &LabeledGraph, r: &EndRef) -> VertexId {
    g.end(r).unwrap().vertex.clone()
}

fn side_at(g: &LabeledGraph, e: &EdgeId, v: &VertexId) -> Option<Side> {
    let [a, b] = g.edge(e)?;
    if &a.vertex == v {
        Some(Side::Zero)
    } else if &b.vertex == v {
        Some(Side::One)
    } else {
        None
    }
}

fn is_unit_at(g: &LabeledGraph, e: &EdgeId, v: &VertexId) -> bool {
    side_at(g, e, v).is_some_and(|s| g.label(&EndRef::new(e.clone(), s)).unwrap().abs() == 1)
}

fn ends_except(g: &LabeledGraph, v: &VertexId, skip: &[&EdgeId]) -> Vec<EndRef> {
    g.ends_at(v).into_iter().filter(|r| !skip.contains(&&r.edge)).collect()
}

fn type_i_forward(peak: &LabeledGraph, e: &EdgeId, ep: &EdgeId) -> Result<Factorization, EngineError> {
    let cfg = |m: &str| EngineError::Configuration(m.to_string());
    let ve: BTreeSet<VertexId> = peak.edge(e).ok_or_else(|| cfg("unknown edge"))?.iter().map(|x| x.vertex.clone()).collect();
    let vp: BTreeSet<VertexId> = peak.edge(ep).ok_or_else(|| cfg("unknown edge"))?.iter().map(|x| x.vertex.clone()).collect();
    if ve.len() != 2 || vp.len() != 2 {
        return Err(cfg("Whitehead edges must not be loops"));
    }
    let shared: Vec<&VertexId> = ve.intersection(&vp).collect();
    let slide_over_ep = |start: &LabeledGraph, p: &VertexId| -> Vec<Move> {
        let slid = ends_except(peak, p, &[e, ep]);
        if slid.is_empty() {
            return Vec::new();
        }
        let over = EndRef::new(ep.clone(), side_at(peak, ep, p).unwrap());
        debug_assert!(start.has_edge(ep));
        vec![Move::Slide(Slide { slid, over: vec![over] })]
    };
    let collapse_from = |p: &VertexId| -> Result<LabeledGraph, EngineError> {
        Ok(moves::collapse(peak, &EndRef::new(e.clone(), side_at(peak, e, p).unwrap()))?.graph)
    };
    match shared.len() {
        1 => {
            let p = shared[0];
            if !is_unit_at(peak, e, p) || !is_unit_at(peak, ep, p) {
                return Err(cfg("edges must both have unit labels at their common vertex"));
            }
            let start = collapse_from(p)?;
            let moves = slide_over_ep(&start, p);
            Ok(Factorization { start, moves })
        }
        2 => {
            if let Some(p) = shared.iter().find(|p| is_unit_at(peak, e, p) && is_unit_at(peak, ep, p)) {
                let start = collapse_from(p)?;
                let moves = slide_over_ep(&start, p);
                return Ok(Factorization { start, moves });
            }
            let p = *shared
                .iter()
                .find(|p| is_unit_at(peak, e, p))
                .ok_or_else(|| cfg("e has no unit label"))?;
            let q = *shared.iter().find(|q| **q != p).unwrap();
            if !is_unit_at(peak, ep, q) {
                return Err(cfg("e′ has no unit label"));
            }
            let start = collapse_from(p)?;
            let d = peak.label(&EndRef::new(e.clone(), side_at(peak, e, q).unwrap())).unwrap();
            let mut moves = vec![Move::Induction(Induction {
                lp: ep.clone(),
                unit_side: side_at(peak, ep, q).unwrap(),
                k: d.abs(),
                pulled: Vec::new(),
                direction: Direction::Forward,
            })];
            moves.extend(slide_over_ep(&start, p));
            Ok(Factorization { start, moves })
        }
        _ => Err(cfg("Whitehead edges share no vertex")),
    }
}

/// Slides (and possibly one induction) realizing a type I Whitehead move.
pub fn factor_whitehead_i(wm: &WhiteheadMove) -> Result<Factorization, EngineError> {
    if wm.kind() != WhiteheadType::I {
        return Err(EngineError::Configuration("not a type I move".into()));
    }
    let (a, b) = (&wm.single.edge, &wm.set[0].edge);
    let fac = if wm.reversed { type_i_forward(&wm.peak, b, a)? } else { type_i_forward(&wm.peak, a, b)? };
    fac.check(&wm.target()?)
}

fn type_ii_forward(peak: &LabeledGraph, single: &EndRef, set: &[EndRef]) -> Result<Factorization, EngineError> {
    let cfg = |m: &str| EngineError::Configuration(m.to_string());
    let e = &single.edge;
    let p = vertex_of(peak, single);
    let q = vertex_of(peak, &single.opposite());
    if p == q || !is_unit_at(peak, e, &p) {
        return Err(cfg("e must be a non-loop with a unit label at the common vertex"));
    }
    let parallel = |x: &EdgeId| side_at(peak, x, &p).is_some() && side_at(peak, x, &q).is_some();
    let (fp, ep) = match (parallel(&set[0].edge), parallel(&set[1].edge)) {
        (true, false) => (&set[0].edge, &set[1].edge),
        (false, true) => (&set[1].edge, &set[0].edge),
        _ => return Err(cfg("exactly one collapsed edge must be parallel to e")),
    };
    if side_at(peak, ep, &p).is_none() {
        return Err(cfg("e′ must start at the common vertex"));
    }
    // f′ needs a unit label at q only: with a proper label at p it still
    // collapses after e′, and the same slides and A⁻¹-move apply
    if !is_unit_at(peak, ep, &p) || !is_unit_at(peak, fp, &q) {
        return Err(cfg("e′ and f′ must have the unit labels of the type II configuration"));
    }
    let start = moves::collapse(peak, &EndRef::new(e.clone(), side_at(peak, e, &p).unwrap()))?.graph;
    let ep_end = EndRef::new(ep.clone(), side_at(peak, ep, &p).unwrap());
    let fp_unit = EndRef::new(fp.clone(), side_at(peak, fp, &q).unwrap());
    let h = ends_except(peak, &p, &[e, ep, fp]);
    let g = ends_except(peak, &q, &[e, fp]);
    let mut out = Vec::new();
    if !h.is_empty() {
        out.push(Move::Slide(Slide { slid: h, over: vec![ep_end.clone()] }));
    }
    if !g.is_empty() {
        out.push(Move::Slide(Slide { slid: g, over: vec![fp_unit, ep_end] }));
    }
    out.push(Move::AInverse(AInverse { lp: fp.clone(), edge: ep.clone() }));
    Ok(Factorization { start, moves: out })
}

/// Slides and one A±-move realizing a type II Whitehead move.
pub fn factor_whitehead_ii(wm: &WhiteheadMove) -> Result<Factorization, EngineError> {
    if wm.kind() != WhiteheadType::II {
        return Err(EngineError::Configuration("not a type II move".into()));
    }
    let forward = type_ii_forward(&wm.peak, &wm.single, &wm.set)?;
    let fac = if wm.reversed { forward.inverted()? } else { forward };
    fac.check(&wm.target()?)
}

pub fn factor_whitehead(wm: &WhiteheadMove) -> Result<Factorization, EngineError> {
    match wm.kind() {
        WhiteheadType::I => factor_whitehead_i(wm),
        WhiteheadType::II => factor_whitehead_ii(wm),
    }
}

/// Everything produced while turning a deformation into moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MovePipeline {
    pub normalized: ElementaryDeformation,
    pub whitehead: Vec<WhiteheadMove>,
    pub factorizations: Vec<Factorization>,
    /// Slides, inductions and A±-moves, valid from the deformation's start.
    pub moves: Vec<Move>,
    /// The graphs the moves pass through, starting with the start graph.
    pub graphs: Vec<LabeledGraph>,
}

/// Slides, inductions and A±-moves from the start of `d` to (a graph
/// equivalent to) its end, every intermediate graph reduced.
pub fn deformation_to_moves(d: &ElementaryDeformation) -> Result<MovePipeline, EngineError> {
    deformation_to_moves_avoiding(d, None)
}

/// As [`deformation_to_moves`]; choices avoid the edge `avoid` where the
/// construction allows.
pub fn deformation_to_moves_avoiding(
    d: &ElementaryDeformation,
    avoid: Option<&EdgeId>,
) -> Result<MovePipeline, EngineError> {
    let WhiteheadSequence { normalized, moves: whitehead } = deformation_to_whitehead_avoiding(d, avoid)?;
    let mut cur = d.start().clone();
    let mut all = Vec::new();
    let mut graphs = vec![cur.clone()];
    let mut factorizations = Vec::new();
    for wm in &whitehead {
        let fac = factor_whitehead(wm)?;
        let (moved, gs) = transport_chain(&cur, &fac.start, &fac.moves)?;
        all.extend(moved);
        graphs.extend(gs.into_iter().skip(1));
        cur = graphs.last().unwrap().clone();
        factorizations.push(fac);
    }
    if let Some(g) = graphs.iter().find(|g| !g.is_reduced()) {
        return Err(EngineError::Internal(format!("unreduced intermediate graph {g}")));
    }
    if !equivalent(&cur, d.end())? {
        return Err(EngineError::Internal("moves do not reach the deformation's end".into()));
    }
    Ok(MovePipeline { normalized, whitehead, factorizations, moves: all, graphs })
}
