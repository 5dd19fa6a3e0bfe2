//! Forests of a labeled graph: collapsibility, components and the maximal
//! stable subtree of a component.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::graph::{EdgeId, EndRef, LabeledGraph, Side, VertexId};
use crate::moves::collapse;

/// A set of geometric edges of some host graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Forest(BTreeSet<EdgeId>);

impl Forest {
    pub fn new<I: IntoIterator<Item = E>, E: Into<EdgeId>>(edges: I) -> Self {
        Forest(edges.into_iter().map(Into::into).collect())
    }

    pub fn edges(&self) -> impl Iterator<Item = &EdgeId> + '_ {
        self.0.iter()
    }

    pub fn contains(&self, e: &EdgeId) -> bool {
        self.0.contains(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// At least one edge.
    pub fn is_nontrivial(&self) -> bool {
        !self.0.is_empty()
    }

    pub fn insert(&mut self, e: EdgeId) -> bool {
        self.0.insert(e)
    }

    pub fn remove(&mut self, e: &EdgeId) -> bool {
        self.0.remove(e)
    }

    pub fn without(&self, e: &EdgeId) -> Forest {
        let mut f = self.clone();
        f.0.remove(e);
        f
    }

    pub fn intersection(&self, other: &Forest) -> Forest {
        Forest(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &Forest) -> Forest {
        Forest(self.0.difference(&other.0).cloned().collect())
    }
}

impl FromIterator<EdgeId> for Forest {
    fn from_iter<T: IntoIterator<Item = EdgeId>>(iter: T) -> Self {
        Forest(iter.into_iter().collect())
    }
}

struct UnionFind(BTreeMap<VertexId, VertexId>);

impl UnionFind {
    fn find(&mut self, v: &VertexId) -> VertexId {
        let p = self.0.get(v).cloned().unwrap_or_else(|| v.clone());
        if &p == v {
            return p;
        }
        let root = self.find(&p);
        self.0.insert(v.clone(), root.clone());
        root
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: &VertexId, b: &VertexId) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0.insert(ra, rb);
        true
    }
}

/// Errors unless every edge of `f` exists in `g` and `f` has no cycle.
pub fn check_forest(g: &LabeledGraph, f: &Forest) -> Result<(), EngineError> {
    let mut uf = UnionFind(BTreeMap::new());
    for e in f.edges() {
        let [a, b] = g.edge(e).ok_or_else(|| EngineError::NotForest(format!("unknown edge `{e}`")))?;
        if !uf.union(&a.vertex, &b.vertex) {
            return Err(EngineError::NotForest(format!("edge `{e}` closes a cycle")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeId>,
}

/// Edge components of `f`, ordered by their smallest edge id.
pub fn components(g: &LabeledGraph, f: &Forest) -> Result<Vec<Component>, EngineError> {
    check_forest(g, f)?;
    let mut uf = UnionFind(BTreeMap::new());
    for e in f.edges() {
        let [a, b] = g.edge(e).unwrap();
        uf.union(&a.vertex, &b.vertex);
    }
    let mut by_root: BTreeMap<VertexId, Component> = BTreeMap::new();
    for e in f.edges() {
        let [a, b] = g.edge(e).unwrap();
        let root = uf.find(&a.vertex);
        let c = by_root
            .entry(root)
            .or_insert_with(|| Component { vertices: BTreeSet::new(), edges: BTreeSet::new() });
        c.edges.insert(e.clone());
        c.vertices.insert(a.vertex.clone());
        c.vertices.insert(b.vertex.clone());
    }
    let mut out: Vec<Component> = by_root.into_values().collect();
    out.sort_by(|x, y| x.edges.first().cmp(&y.edges.first()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Collapsibility {
    /// Collapsing `order` (initial ends) in sequence is valid and gives `result`.
    Collapsible { order: Vec<EndRef>, result: LabeledGraph },
    /// No remaining edge can be collapsed.
    Blocked { remaining: Vec<EdgeId> },
}

/// Greedy iterated collapse of `f`: repeatedly collapse the first currently
/// collapsible edge. Succeeds exactly when `f` is collapsible.
pub fn is_collapsible_forest(g: &LabeledGraph, f: &Forest) -> Result<Collapsibility, EngineError> {
    is_collapsible_forest_avoiding(g, f, None)
}

/// As [`is_collapsible_forest`], never collapsing a given end first when
/// another choice exists.
pub(crate) fn is_collapsible_forest_avoiding(
    g: &LabeledGraph,
    f: &Forest,
    avoid_vertex: Option<&VertexId>,
) -> Result<Collapsibility, EngineError> {
    check_forest(g, f)?;
    let mut cur = g.clone();
    let mut remaining: BTreeSet<EdgeId> = f.0.clone();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let mut options = Vec::new();
        for e in &remaining {
            for side in Side::BOTH {
                let r = EndRef::new(e.clone(), side);
                if cur.label(&r).unwrap().abs() == 1 {
                    options.push(r);
                }
            }
        }
        // prefer not to merge away a designated vertex
        let pick = options
            .iter()
            .find(|r| Some(&cur.end(r).unwrap().vertex) != avoid_vertex)
            .or(options.first())
            .cloned();
        let Some(r) = pick else {
            return Ok(Collapsibility::Blocked { remaining: remaining.into_iter().collect() });
        };
        cur = collapse(&cur, &r)?.graph;
        remaining.remove(&r.edge);
        order.push(r);
    }
    Ok(Collapsibility::Collapsible { order, result: cur })
}

/// Collapses `f` greedily, failing when it is not collapsible.
pub fn collapse_forest(g: &LabeledGraph, f: &Forest) -> Result<(LabeledGraph, Vec<EndRef>), EngineError> {
    match is_collapsible_forest(g, f)? {
        Collapsibility::Collapsible { order, result } => Ok((result, order)),
        Collapsibility::Blocked { remaining } => Err(EngineError::NotCollapsibleForest(remaining)),
    }
}

/// Vertices and edges of the maximal stable subtree of one forest component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableSubtree {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeId>,
}

/// The stable subtree of the component `f0`: the vertices toward which the
/// whole component collapses without enlarging any vertex group (every edge
/// has a unit label at its end farther from the vertex), and the edges
/// between them.
pub fn maximal_stable_subtree(g: &LabeledGraph, f0: &Forest) -> Result<StableSubtree, EngineError> {
    let comps = components(g, f0)?;
    if comps.len() != 1 {
        return Err(EngineError::NotForest(format!("expected one component, found {}", comps.len())));
    }
    let comp = &comps[0];
    let mut adjacency: BTreeMap<&VertexId, Vec<(&EdgeId, Side)>> = BTreeMap::new();
    for e in &comp.edges {
        let [a, b] = g.edge(e).unwrap();
        adjacency.entry(&a.vertex).or_default().push((e, Side::Zero));
        adjacency.entry(&b.vertex).or_default().push((e, Side::One));
    }
    let stable = |root: &VertexId| {
        let mut seen = BTreeSet::from([root.clone()]);
        let mut queue = VecDeque::from([root.clone()]);
        while let Some(x) = queue.pop_front() {
            for &(e, side) in &adjacency[&x] {
                let far = &g.edge(e).unwrap()[side.flip().index()];
                if seen.contains(&far.vertex) {
                    continue;
                }
                if far.label.abs() != 1 {
                    return false;
                }
                seen.insert(far.vertex.clone());
                queue.push_back(far.vertex.clone());
            }
        }
        true
    };
    let vertices: BTreeSet<VertexId> = comp.vertices.iter().filter(|v| stable(v)).cloned().collect();
    let edges = comp
        .edges
        .iter()
        .filter(|e| {
            let [a, b] = g.edge(e).unwrap();
            vertices.contains(&a.vertex) && vertices.contains(&b.vertex)
        })
        .cloned()
        .collect();
    Ok(StableSubtree { vertices, edges })
}

/// Edge types of the collapsible edges at the unit end of `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeType {
    /// Terminal vertex differs from that of `e`.
    One,
    /// Parallel to `e`, non-unit at the far end.
    Two,
    /// Parallel to `e`, unit at both ends.
    Three,
}

/// Type of the collapsible oriented edge `f` relative to `e`, both starting
/// at the same vertex with unit labels there.
pub fn classify_collapsible_edge(g: &LabeledGraph, e: &EndRef, f: &EndRef) -> Result<EdgeType, EngineError> {
    let ie = g.end(e).ok_or_else(|| EngineError::Configuration(format!("unknown end {e}")))?;
    let te = g.end(&e.opposite()).unwrap();
    let i_f = g.end(f).ok_or_else(|| EngineError::Configuration(format!("unknown end {f}")))?;
    let tf = g.end(&f.opposite()).unwrap();
    if ie.label.abs() != 1 {
        return Err(EngineError::Configuration(format!("{e} does not have a unit label")));
    }
    if i_f.vertex == tf.vertex || i_f.label.abs() != 1 {
        return Err(EngineError::Configuration(format!("{f} is not collapsible")));
    }
    if i_f.vertex != ie.vertex {
        return Err(EngineError::Configuration(format!("{f} does not start at the initial vertex of {e}")));
    }
    Ok(if tf.vertex != te.vertex {
        EdgeType::One
    } else if tf.label.abs() != 1 {
        EdgeType::Two
    } else {
        EdgeType::Three
    })
}
