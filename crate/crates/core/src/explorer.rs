//! Bounded exploration of the reduced graphs reachable by slides, inductions
//! and A±-moves, path search between them, and rigidity.
//!
//! Searches run over canonical representatives, so results never depend on
//! the ids of the input or on the traversal order.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{canonical_form, CanonicalKey};
use crate::deformation::transport_chain;
use crate::enumerate::{enumerate_moves, visit_moves, Bounds};
use crate::error::{EngineError, MoveError};
use crate::graph::{EndRef, LabeledGraph, Side};
use crate::moves::{self, Expansion, Move};

fn check_bounds(b: &Bounds) -> Result<(), EngineError> {
    if b.max_label < 1 || b.max_vertices < 1 || b.max_edges < 1 || b.max_frontier < 1 {
        return Err(EngineError::Configuration("bounds must be positive".into()));
    }
    Ok(())
}

fn check_input(g: &LabeledGraph, b: &Bounds) -> Result<(), EngineError> {
    check_bounds(b)?;
    g.require_valid()?;
    if !g.is_reduced() {
        return Err(MoveError::NotReduced.into());
    }
    if !b.admits(g) {
        return Err(EngineError::OutOfBounds(g.to_string()));
    }
    Ok(())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, EngineError> {
    if jobs == 0 {
        return Err(EngineError::Configuration("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| EngineError::Internal(e.to_string()))
}

struct Step {
    parent: CanonicalKey,
    mv: Move,
    child: CanonicalKey,
}

struct Expanded {
    steps: Vec<Step>,
    pruned: usize,
}

/// Nontrivial moves from the representative of `key` with reduced results.
fn expand(key: &CanonicalKey, bounds: &Bounds) -> Result<Expanded, EngineError> {
    let g = key.representative();
    let e = enumerate_moves(&g, bounds)?;
    let mut steps = Vec::new();
    for c in e.moves {
        if c.trivial || !c.graph.is_reduced() {
            continue;
        }
        steps.push(Step { parent: key.clone(), mv: c.mv, child: canonical_form(&c.graph)? });
    }
    Ok(Expanded { steps, pruned: e.pruned })
}

fn expand_level(
    pool: &rayon::ThreadPool,
    frontier: &[CanonicalKey],
    bounds: &Bounds,
) -> Result<Vec<Expanded>, EngineError> {
    pool.install(|| frontier.par_iter().map(|k| expand(k, bounds)).collect())
}

/// Canonical classes reachable within the bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub keys: BTreeSet<CanonicalKey>,
    /// No bound was hit: `keys` is the complete orbit.
    pub exhausted: bool,
    /// Number of BFS levels expanded.
    pub depth: usize,
}

/// Breadth-first closure of `g` under nontrivial moves whose results are
/// reduced and within `bounds`.
pub fn reduced_orbit(g: &LabeledGraph, bounds: &Bounds, jobs: usize) -> Result<Orbit, EngineError> {
    check_input(g, bounds)?;
    let pool = pool(jobs)?;
    let start = canonical_form(g)?;
    let mut keys = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    let mut exhausted = true;
    let mut depth = 0;
    while !frontier.is_empty() {
        let level = expand_level(&pool, &frontier, bounds)?;
        let mut next = BTreeSet::new();
        for x in level {
            if x.pruned > 0 {
                exhausted = false;
            }
            for s in x.steps {
                if !keys.contains(&s.child) {
                    next.insert(s.child);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        if depth == bounds.max_depth {
            exhausted = false;
            break;
        }
        depth += 1;
        if keys.len() + next.len() > bounds.max_frontier {
            exhausted = false;
            let room = bounds.max_frontier.saturating_sub(keys.len());
            next = next.into_iter().take(room).collect();
        }
        keys.extend(next.iter().cloned());
        frontier = next.into_iter().collect();
    }
    Ok(Orbit { keys, exhausted, depth })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOutcome {
    /// Moves valid from the first graph, ending at a graph equivalent to the
    /// second.
    Found { moves: Vec<Move>, graphs: Vec<LabeledGraph> },
    /// Inconclusive: the bounds stopped the search.
    NotFoundWithinBounds,
}

struct Search {
    parent: BTreeMap<CanonicalKey, Option<(CanonicalKey, Move)>>,
    frontier: Vec<CanonicalKey>,
    depth: usize,
}

impl Search {
    fn new(k: CanonicalKey) -> Self {
        Search { parent: BTreeMap::from([(k.clone(), None)]), frontier: vec![k], depth: 0 }
    }

    fn chain(&self, mut k: CanonicalKey) -> Vec<(CanonicalKey, Move, CanonicalKey)> {
        let mut out = Vec::new();
        while let Some(Some((p, mv))) = self.parent.get(&k) {
            out.push((p.clone(), mv.clone(), k.clone()));
            k = p.clone();
        }
        out
    }
}

/// Bidirectional breadth-first search for moves from `g1` to `g2`.
pub fn find_path(g1: &LabeledGraph, g2: &LabeledGraph, bounds: &Bounds, jobs: usize) -> Result<PathOutcome, EngineError> {
    check_input(g1, bounds)?;
    check_input(g2, bounds)?;
    let pool = pool(jobs)?;
    let (k1, k2) = (canonical_form(g1)?, canonical_form(g2)?);
    let mut sides = [Search::new(k1.clone()), Search::new(k2.clone())];
    let mut meet = (k1 == k2).then(|| k1.clone());
    while meet.is_none() {
        let total = sides[0].depth + sides[1].depth;
        if total >= bounds.max_depth {
            break;
        }
        let i = if sides[0].frontier.len() <= sides[1].frontier.len() { 0 } else { 1 };
        if sides[i].frontier.is_empty() {
            break;
        }
        let level = expand_level(&pool, &sides[i].frontier, bounds)?;
        let mut next = Vec::new();
        for s in level.into_iter().flat_map(|x| x.steps) {
            if sides[i].parent.contains_key(&s.child) {
                continue;
            }
            if sides[0].parent.len() + sides[1].parent.len() >= bounds.max_frontier {
                break;
            }
            sides[i].parent.insert(s.child.clone(), Some((s.parent, s.mv)));
            if meet.is_none() && sides[1 - i].parent.contains_key(&s.child) {
                meet = Some(s.child.clone());
            }
            next.push(s.child);
        }
        sides[i].frontier = next;
        sides[i].depth += 1;
    }
    let Some(m) = meet else { return Ok(PathOutcome::NotFoundWithinBounds) };

    // (graph the move is valid on, move); each result is equivalent to the
    // next entry's graph
    let mut steps: Vec<(LabeledGraph, Move)> = Vec::new();
    for (p, mv, _) in sides[0].chain(m.clone()).into_iter().rev() {
        steps.push((p.representative(), mv));
    }
    for (p, mv, _) in sides[1].chain(m) {
        let before = p.representative();
        let after = moves::apply(&before, &mv)?.graph;
        steps.push((after.clone(), moves::inverse(&before, &mv)?));
    }
    let mut cur = g1.clone();
    let mut out = Vec::new();
    let mut graphs = vec![cur.clone()];
    for (src, mv) in steps {
        let (moved, gs) = transport_chain(&cur, &src, &[mv])?;
        out.extend(moved);
        cur = gs.last().unwrap().clone();
        graphs.push(cur.clone());
    }
    if canonical_form(&cur)? != k2 {
        return Err(EngineError::Internal("path does not reach the target".into()));
    }
    Ok(PathOutcome::Found { moves: out, graphs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RigidityStatus {
    Rigid,
    NotRigid,
    AscendingHnnExcluded,
    UnitUnitLoopExcluded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityWitness {
    /// Ends `(ε, φ)` at a common vertex with `|φ|` dividing `|ε|` and neither
    /// exemption applying.
    Pair { epsilon: EndRef, phi: EndRef },
    Move(Move),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RigidityVerdict {
    pub status: RigidityStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RigidityWitness>,
}

impl RigidityVerdict {
    fn plain(status: RigidityStatus) -> Self {
        RigidityVerdict { status, witness: None }
    }
}

/// Rigidity from the divisibility conditions on pairs of ends.
pub fn is_rigid_conditions(g: &LabeledGraph) -> Result<RigidityVerdict, EngineError> {
    g.require_valid()?;
    if !g.is_reduced() {
        return Err(MoveError::NotReduced.into());
    }
    if g.is_single_ascending_loop() {
        return Ok(RigidityVerdict::plain(RigidityStatus::AscendingHnnExcluded));
    }
    let unit_unit = |r: &EndRef| {
        g.is_loop(&r.edge) && Side::BOTH.iter().all(|&s| g.label(&EndRef::new(r.edge.clone(), s)).unwrap().abs() == 1)
    };
    for v in g.vertices() {
        let ends = g.ends_at(v);
        for eps in &ends {
            for phi in &ends {
                if eps == phi {
                    continue;
                }
                let (a, b) = (g.label(eps).unwrap().abs(), g.label(phi).unwrap().abs());
                if a % b != 0 {
                    continue;
                }
                let same_loop = eps.edge == phi.edge && a == b;
                let three = unit_unit(phi) && ends.len() == 3;
                if !same_loop && !three {
                    return Ok(RigidityVerdict {
                        status: RigidityStatus::NotRigid,
                        witness: Some(RigidityWitness::Pair { epsilon: eps.clone(), phi: phi.clone() }),
                    });
                }
            }
        }
    }
    Ok(RigidityVerdict::plain(RigidityStatus::Rigid))
}

/// Rigidity from move enumeration: rigid iff every applicable move is
/// trivial.
pub fn is_rigid_moves(g: &LabeledGraph) -> Result<RigidityVerdict, EngineError> {
    g.require_valid()?;
    if !g.is_reduced() {
        return Err(MoveError::NotReduced.into());
    }
    if g.is_single_ascending_loop() {
        return Ok(RigidityVerdict::plain(RigidityStatus::AscendingHnnExcluded));
    }
    if g.has_unit_unit_loop() {
        return Ok(RigidityVerdict::plain(RigidityStatus::UnitUnitLoopExcluded));
    }
    let mut witness = None;
    let pruned = visit_moves(g, &Bounds::unbounded(), |c| {
        if c.trivial {
            ControlFlow::Continue(())
        } else {
            witness = Some(c.mv);
            ControlFlow::Break(())
        }
    })?;
    match witness {
        Some(mv) => Ok(RigidityVerdict { status: RigidityStatus::NotRigid, witness: Some(RigidityWitness::Move(mv)) }),
        None if pruned > 0 => Err(EngineError::Internal("label overflow while enumerating moves".into())),
        None => Ok(RigidityVerdict::plain(RigidityStatus::Rigid)),
    }
}

/// A graph with a strict ascending loop in the deformation space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AscendingWitness {
    /// Reduced graph of the explored orbit.
    pub reduced: LabeledGraph,
    /// Expansion of `reduced` creating the loop, if it is not already there.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<Move>,
    pub graph: LabeledGraph,
    /// Unit end of the strict ascending loop in `graph`.
    pub unit_end: EndRef,
}

fn witness_in(g: &LabeledGraph) -> Result<Option<AscendingWitness>, EngineError> {
    if let Some(r) = g.strict_ascending_loops().into_iter().next() {
        return Ok(Some(AscendingWitness { reduced: g.clone(), expansion: None, graph: g.clone(), unit_end: r }));
    }
    // a loop (c, c′) with c | c′ becomes (1, c′/c) once both ends are pulled
    // into a new vertex attached by (1, c)
    for (id, [x, y]) in g.edges() {
        if x.vertex != y.vertex {
            continue;
        }
        for small in Side::BOTH {
            let (c, c2) = if small == Side::Zero { (x.label, y.label) } else { (y.label, x.label) };
            if c.abs() < 2 || c2 % c != 0 || c2.abs() <= c.abs() {
                continue;
            }
            let mv = Move::Expansion(Expansion {
                vertex: x.vertex.clone(),
                multiplier: c,
                unit: 1,
                pulled: Side::BOTH.iter().map(|&s| EndRef::new(id.clone(), s)).collect(),
                new_vertex: g.fresh_vertex_id("x"),
                new_edge: g.fresh_edge_id("y"),
                new_vertex_side: Side::Zero,
            });
            let out = moves::apply(g, &mv)?.graph;
            let unit_end = EndRef::new(id.clone(), small);
            debug_assert!(out.strict_ascending_loops().contains(&unit_end));
            return Ok(Some(AscendingWitness { reduced: g.clone(), expansion: Some(mv), graph: out, unit_end }));
        }
    }
    Ok(None)
}

/// Searches the bounded orbit, and graphs one expansion away from it, for a
/// strict ascending loop. `None` is inconclusive.
pub fn ascending_witness(g: &LabeledGraph, bounds: &Bounds, jobs: usize) -> Result<Option<AscendingWitness>, EngineError> {
    if let Some(w) = witness_in(g)? {
        return Ok(Some(w));
    }
    let orbit = reduced_orbit(g, bounds, jobs)?;
    for k in &orbit.keys {
        if let Some(w) = witness_in(&k.representative())? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
