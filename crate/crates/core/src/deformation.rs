//! Elementary deformations (sequences of collapses and expansions), their
//! normalization to peak form, and a seeded random generator.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::equivalent;
use crate::error::{EngineError, MoveError};
use crate::forest::{collapse_forest, Forest};
use crate::graph::{EdgeId, EndRef, LabeledGraph};
use crate::iso::{find_isomorphism_with_hint, Isomorphism};
use crate::moves::{self, Expansion, Move};

/// A replayable sequence of collapses and expansions with every
/// intermediate graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryDeformation {
    steps: Vec<Move>,
    graphs: Vec<LabeledGraph>,
}

/// One expansion run followed by one collapse run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeakBlock {
    pub start: usize,
    pub peak: usize,
    pub end: usize,
    /// Edges created by the expansions.
    pub expanded: Forest,
    /// Edges removed by the collapses.
    pub collapsed: Forest,
}

impl ElementaryDeformation {
    pub fn new(start: LabeledGraph, steps: Vec<Move>) -> Result<Self, EngineError> {
        start.require_valid()?;
        let mut graphs = vec![start];
        for (i, mv) in steps.iter().enumerate() {
            if !mv.is_elementary() {
                return Err(EngineError::BadStep { step: i, reason: format!("{} is not a collapse or expansion", mv.kind()) });
            }
            let next = moves::apply(graphs.last().unwrap(), mv)
                .map_err(|e| EngineError::BadStep { step: i, reason: e.to_string() })?
                .graph;
            graphs.push(next);
        }
        Ok(ElementaryDeformation { steps, graphs })
    }

    pub fn trivial(start: LabeledGraph) -> Self {
        ElementaryDeformation { steps: Vec::new(), graphs: vec![start] }
    }

    pub fn start(&self) -> &LabeledGraph {
        &self.graphs[0]
    }

    pub fn end(&self) -> &LabeledGraph {
        self.graphs.last().unwrap()
    }

    pub fn steps(&self) -> &[Move] {
        &self.steps
    }

    pub fn graphs(&self) -> &[LabeledGraph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Splits the steps into maximal expansion-then-collapse blocks.
    pub fn peaks(&self) -> Vec<PeakBlock> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.steps.len() {
            let start = i;
            let mut expanded = Forest::default();
            while let Some(Move::Expansion(e)) = self.steps.get(i) {
                expanded.insert(e.new_edge.clone());
                i += 1;
            }
            let peak = i;
            let mut collapsed = Forest::default();
            while let Some(Move::Collapse { end }) = self.steps.get(i) {
                collapsed.insert(end.edge.clone());
                i += 1;
            }
            out.push(PeakBlock { start, peak, end: i, expanded, collapsed });
        }
        out
    }
}

fn edge_hint(iso: &Isomorphism) -> BTreeMap<EdgeId, EdgeId> {
    iso.edges.iter().map(|(a, (b, _))| (a.clone(), b.clone())).collect()
}

fn new_edge(mv: &Move) -> Option<&EdgeId> {
    match mv {
        Move::Expansion(e) => Some(&e.new_edge),
        Move::AMove(a) => Some(&a.new_edge),
        _ => None,
    }
}

/// Replays `chain` (valid from `chain_start`) on `target`, an isomorphic
/// copy of `chain_start` possibly differing by ids and sign changes. Returns
/// the moves as applied to `target` and the graphs they pass through.
pub fn transport_chain(
    target: &LabeledGraph,
    chain_start: &LabeledGraph,
    chain: &[Move],
) -> Result<(Vec<Move>, Vec<LabeledGraph>), EngineError> {
    let mut iso = find_isomorphism_with_hint(chain_start, target, &BTreeMap::new())
        .ok_or_else(|| EngineError::Internal(format!("{chain_start} is not equivalent to {target}")))?;
    let mut src = chain_start.clone();
    let mut cur = target.clone();
    let mut out = Vec::with_capacity(chain.len());
    let mut graphs = vec![cur.clone()];
    for mv in chain {
        let next_src = moves::apply(&src, mv)?.graph;
        let moved = moves::transport(mv, &iso, &cur)?;
        let next_cur = moves::apply(&cur, &moved)?.graph;
        let mut hint = edge_hint(&iso);
        if let (Some(a), Some(b)) = (new_edge(mv), new_edge(&moved)) {
            hint.insert(a.clone(), b.clone());
        }
        iso = find_isomorphism_with_hint(&next_src, &next_cur, &hint)
            .ok_or_else(|| EngineError::Internal(format!("transport of {} lost the isomorphism", mv.kind())))?;
        src = next_src;
        cur = next_cur;
        out.push(moved);
        graphs.push(cur.clone());
    }
    Ok((out, graphs))
}

/// Greedy collapses down to a reduced graph, preferring edges other than
/// `avoid`.
fn reduce_avoiding(g: &LabeledGraph, avoid: Option<&EdgeId>) -> Result<Vec<Move>, MoveError> {
    let mut cur = g.clone();
    let mut out = Vec::new();
    loop {
        let options = cur.collapsible_edges();
        let Some(end) = options.iter().find(|r| Some(&r.edge) != avoid).or(options.first()).cloned() else {
            return Ok(out);
        };
        cur = moves::collapse(&cur, &end)?.graph;
        out.push(Move::Collapse { end });
    }
}

struct Block {
    start: LabeledGraph,
    expansions: Vec<Move>,
    collapses: Vec<Move>,
}

fn inverse_chain(start: &LabeledGraph, chain: &[Move]) -> Result<Vec<Move>, MoveError> {
    let graphs = moves::replay(start, chain).map_err(|(_, e)| e)?;
    chain.iter().zip(&graphs).rev().map(|(mv, before)| moves::inverse(before, mv)).collect()
}

/// Rewrites `d` so that every valley is reduced and the two collapse forests
/// at each peak share no edge. Endpoints are unchanged.
pub fn normalize_deformation(d: &ElementaryDeformation) -> Result<ElementaryDeformation, EngineError> {
    normalize_deformation_avoiding(d, None)
}

/// As [`normalize_deformation`]; valley collapses avoid `avoid` when possible.
pub fn normalize_deformation_avoiding(
    d: &ElementaryDeformation,
    avoid: Option<&EdgeId>,
) -> Result<ElementaryDeformation, EngineError> {
    if !d.start().is_reduced() || !d.end().is_reduced() {
        return Err(EngineError::EndpointNotReduced);
    }
    let mut blocks: Vec<Block> = d
        .peaks()
        .iter()
        .map(|p| Block {
            start: d.graphs[p.start].clone(),
            expansions: d.steps[p.start..p.peak].to_vec(),
            collapses: d.steps[p.peak..p.end].to_vec(),
        })
        .collect();

    // reduce the valleys: collapse, then undo the collapses at the start of
    // the next block
    for i in 0..blocks.len().saturating_sub(1) {
        let valley = blocks[i + 1].start.clone();
        if valley.is_reduced() {
            continue;
        }
        let extra = reduce_avoiding(&valley, avoid)?;
        let undo = inverse_chain(&valley, &extra)?;
        let reduced = moves::replay(&valley, &extra).map_err(|(_, e)| e)?.pop().unwrap();
        blocks[i].collapses.extend(extra);
        let next = &mut blocks[i + 1];
        next.start = reduced;
        next.expansions.splice(0..0, undo);
    }

    let mut cur = d.start().clone();
    let mut steps = Vec::new();
    for b in &blocks {
        let (chain_start, chain) = cancel_shared(b)?;
        if chain.is_empty() {
            continue;
        }
        let (moved, graphs) = transport_chain(&cur, &chain_start, &chain)?;
        steps.extend(moved);
        cur = graphs.last().unwrap().clone();
    }
    let out = ElementaryDeformation::new(d.start().clone(), steps)?;
    if !equivalent(out.end(), d.end())? {
        return Err(EngineError::Internal("normalization changed the endpoint".into()));
    }
    Ok(out)
}

/// Removes edges collapsed on both sides of a block's peak. Returns the
/// chain's start graph (equivalent to the block's start) and its moves.
fn cancel_shared(b: &Block) -> Result<(LabeledGraph, Vec<Move>), EngineError> {
    let peak = moves::replay(&b.start, &b.expansions).map_err(|(_, e)| e)?.pop().unwrap();
    let mut far_side = BTreeMap::new();
    let mut order = Vec::new();
    for mv in &b.expansions {
        if let Move::Expansion(e) = mv {
            far_side.insert(e.new_edge.clone(), e.new_vertex_side);
            order.push(e.new_edge.clone());
        }
    }
    let expanded: Forest = far_side.keys().cloned().collect();
    let collapsed: Forest = b
        .collapses
        .iter()
        .map(|m| match m {
            Move::Collapse { end } => end.edge.clone(),
            _ => unreachable!(),
        })
        .collect();
    let shared = expanded.intersection(&collapsed);
    if shared.is_empty() {
        let mut chain = b.expansions.clone();
        chain.extend(b.collapses.iter().cloned());
        return Ok((b.start.clone(), chain));
    }
    // undo the shared expansions, latest first
    let mut p = peak;
    for e in order.iter().rev().filter(|e| shared.contains(e)) {
        p = moves::collapse(&p, &EndRef::new(e.clone(), far_side[e]))?.graph;
    }
    let left = expanded.difference(&shared);
    let right = collapsed.difference(&shared);
    match (left.is_empty(), right.is_empty()) {
        (true, true) => return Ok((p, Vec::new())),
        (false, false) => {}
        _ => return Err(EngineError::Internal("one-sided forest after cancellation".into())),
    }
    let (x, left_order) = collapse_forest(&p, &left)?;
    let left_moves: Vec<Move> = left_order.into_iter().map(|end| Move::Collapse { end }).collect();
    let mut chain = inverse_chain(&p, &left_moves)?;
    let (_, right_order) = collapse_forest(&p, &right)?;
    chain.extend(right_order.into_iter().map(|end| Move::Collapse { end }));
    Ok((x, chain))
}

/// Limits for [`random_deformation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorBounds {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_label: i64,
    pub max_steps: usize,
}

impl Default for GeneratorBounds {
    fn default() -> Self {
        GeneratorBounds { max_vertices: 6, max_edges: 8, max_label: 12, max_steps: 8 }
    }
}

const PEAK_ATTEMPTS: usize = 24;

fn divisors(n: i64) -> Vec<i64> {
    let n = n.abs();
    (1..=n).filter(|k| n % k == 0).collect()
}

fn random_expansion(rng: &mut ChaCha8Rng, g: &LabeledGraph, bounds: &GeneratorBounds) -> Option<Move> {
    if g.vertex_count() >= bounds.max_vertices || g.edge_count() >= bounds.max_edges {
        return None;
    }
    let vertices: Vec<_> = g.vertices().cloned().collect();
    let w = vertices.choose(rng)?.clone();
    let ends = g.ends_at(&w);
    let mut pulled: Vec<EndRef> = ends.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    let gcd = pulled.iter().fold(0i64, |acc, r| gcd(acc, g.label(r).unwrap()));
    let choices: Vec<i64> = if gcd == 0 {
        (1..=4.min(bounds.max_label)).collect()
    } else {
        divisors(gcd).into_iter().filter(|&d| d <= bounds.max_label).collect()
    };
    // the gcd itself turns a pulled end into a unit end, which lets a
    // pre-existing edge collapse afterwards
    let mut multiplier = if gcd > 1 && gcd <= bounds.max_label && rng.gen_bool(0.6) { gcd } else { *choices.choose(rng)? };
    if rng.gen_bool(0.25) {
        multiplier = -multiplier;
    }
    let unit = if rng.gen_bool(0.2) { -1 } else { 1 };
    pulled.sort();
    Some(Move::Expansion(Expansion {
        vertex: w,
        multiplier,
        unit,
        pulled,
        new_vertex: g.fresh_vertex_id("x"),
        new_edge: g.fresh_edge_id("y"),
        new_vertex_side: if rng.gen_bool(0.5) { crate::graph::Side::Zero } else { crate::graph::Side::One },
    }))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// One expansion run followed by random collapses down to a reduced graph,
/// within `budget` steps and the bounds, never collapsing `avoid`.
fn random_peak(
    rng: &mut ChaCha8Rng,
    start: &LabeledGraph,
    bounds: &GeneratorBounds,
    budget: usize,
    avoid: Option<&EdgeId>,
) -> Option<Vec<Move>> {
    let max_expansions = (budget / 2).clamp(1, 3);
    let n = rng.gen_range(1..=max_expansions);
    let mut g = start.clone();
    let mut steps = Vec::new();
    for _ in 0..n {
        let mv = random_expansion(rng, &g, bounds)?;
        g = moves::apply(&g, &mv).ok()?.graph;
        steps.push(mv);
    }
    while !g.is_reduced() {
        if steps.len() >= budget {
            return None;
        }
        let mut options: Vec<EndRef> = g.collapsible_edges().into_iter().filter(|r| Some(&r.edge) != avoid).collect();
        options.shuffle(rng);
        if rng.gen_bool(0.75) {
            // edges that predate the peak first, so the peak does not just
            // undo itself
            options.sort_by_key(|r| !start.has_edge(&r.edge));
        }
        let next = options.into_iter().find_map(|end| {
            let r = moves::collapse(&g, &end).ok()?;
            (r.graph.max_abs_label() <= bounds.max_label).then_some((end, r.graph))
        });
        let (end, next) = next?;
        g = next;
        steps.push(Move::Collapse { end });
    }
    Some(steps)
}

/// Seeded random elementary deformation from the reduced graph `start`:
/// peaks of expansions followed by collapses back to a reduced graph, at
/// most `bounds.max_steps` steps in total. `avoid` is never collapsed.
pub fn random_deformation(
    seed: u64,
    bounds: &GeneratorBounds,
    start: &LabeledGraph,
    avoid: Option<&EdgeId>,
) -> Result<ElementaryDeformation, EngineError> {
    start.require_valid()?;
    if !start.is_reduced() {
        return Err(EngineError::EndpointNotReduced);
    }
    if start.vertex_count() > bounds.max_vertices
        || start.edge_count() > bounds.max_edges
        || start.max_abs_label() > bounds.max_label
    {
        return Err(EngineError::BoundsTooTight("start graph exceeds the bounds".into()));
    }
    if let Some(e) = avoid {
        if !start.has_edge(e) {
            return Err(EngineError::Move(MoveError::UnknownEdge(e.clone())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = start.clone();
    let mut steps = Vec::new();
    let mut peaks = 0;
    while bounds.max_steps - steps.len() >= 2 {
        let budget = bounds.max_steps - steps.len();
        // prefer a peak that changes the graph; keep the first valid one as
        // a fallback
        let mut chosen: Option<(Vec<Move>, LabeledGraph)> = None;
        for _ in 0..PEAK_ATTEMPTS {
            let Some(peak) = random_peak(&mut rng, &g, bounds, budget, avoid) else { continue };
            let end = moves::replay(&g, &peak).map_err(|(_, e)| e)?.pop().unwrap();
            let changes = !equivalent(&end, &g)?;
            if chosen.is_none() || changes {
                chosen = Some((peak, end));
            }
            if changes {
                break;
            }
        }
        let Some((peak, end)) = chosen else { break };
        g = end;
        steps.extend(peak);
        peaks += 1;
        if rng.gen_bool(0.3) {
            break;
        }
    }
    if peaks == 0 && bounds.max_steps >= 2 {
        return Err(EngineError::BoundsTooTight("no expansion fits within the bounds".into()));
    }
    ElementaryDeformation::new(start.clone(), steps)
}
