//! Labeled graphs: the quotient graph of groups of a cocompact GBS tree.
//!
//! Every vertex and edge group is infinite cyclic. An edge end carries a
//! nonzero integer label `n`, meaning the edge group includes into the vertex
//! group as `n·Z`. Loops and parallel edges are allowed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MoveError;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(VertexId);
string_id!(EdgeId);

/// One of the two ends of a geometric edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Side {
    Zero,
    One,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Zero, Side::One];

    pub fn flip(self) -> Side {
        match self {
            Side::Zero => Side::One,
            Side::One => Side::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Zero => 0,
            Side::One => 1,
        }
    }
}

impl From<Side> for u8 {
    fn from(s: Side) -> u8 {
        s.index() as u8
    }
}

impl TryFrom<u8> for Side {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(Side::Zero),
            1 => Ok(Side::One),
            other => Err(format!("side must be 0 or 1, got {other}")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Reference to an edge end. Read as an oriented edge, the referenced end is
/// the initial side and the opposite end the terminal side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EndRef {
    pub edge: EdgeId,
    pub side: Side,
}

impl EndRef {
    pub fn new(edge: impl Into<EdgeId>, side: Side) -> Self {
        Self { edge: edge.into(), side }
    }

    /// The opposite end of the same geometric edge.
    pub fn opposite(&self) -> EndRef {
        EndRef { edge: self.edge.clone(), side: self.side.flip() }
    }
}

impl fmt::Display for EndRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.edge, self.side)
    }
}

/// An edge end: the vertex it is attached to and its inclusion multiplier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct End {
    pub vertex: VertexId,
    pub label: i64,
}

impl End {
    pub fn new(vertex: impl Into<VertexId>, label: i64) -> Self {
        Self { vertex: vertex.into(), label }
    }
}

/// "=" when the inclusion of the edge group into the initial vertex group is
/// surjective, "≠" otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndClass {
    #[serde(rename = "=")]
    Equal,
    #[serde(rename = "≠")]
    Proper,
}

impl fmt::Display for EndClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndClass::Equal => f.write_str("="),
            EndClass::Proper => f.write_str("≠"),
        }
    }
}

/// A violated structural invariant, as reported by [`LabeledGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Empty,
    ZeroLabel { edge: EdgeId, side: Side },
    DanglingEnd { edge: EdgeId, side: Side, vertex: VertexId },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => f.write_str("empty graph"),
            Violation::ZeroLabel { edge, side } => {
                write!(f, "zero label on end {side} of edge `{edge}`")
            }
            Violation::DanglingEnd { edge, side, vertex } => write!(
                f,
                "end {side} of edge `{edge}` references unknown vertex `{vertex}`"
            ),
            Violation::Disconnected { components } => {
                write!(f, "disconnected graph ({components} components)")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, [End; 2]>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from `(edge, u, a, w, b)` tuples: edge `edge` with label
    /// `a` at `u` and `b` at `w`. Vertices are the ones mentioned.
    pub fn from_edges(edges: &[(&str, &str, i64, &str, i64)]) -> Self {
        let mut g = Self::new();
        for &(id, u, a, w, b) in edges {
            g.add_vertex(u);
            g.add_vertex(w);
            g.insert_edge(id.into(), End::new(u, a), End::new(w, b));
        }
        g
    }

    /// Single vertex `v` with one loop `l` labeled `(a, b)`.
    pub fn single_loop(a: i64, b: i64) -> Self {
        Self::from_edges(&[("l", "v", a, "v", b)])
    }

    pub fn with_vertex(mut self, v: &str) -> Self {
        self.add_vertex(v);
        self
    }

    pub fn add_vertex(&mut self, v: impl Into<VertexId>) -> bool {
        self.vertices.insert(v.into())
    }

    /// Inserts or replaces an edge without checking anything; use
    /// [`validate`](Self::validate) afterwards.
    pub fn insert_edge(&mut self, id: EdgeId, e0: End, e1: End) {
        self.edges.insert(id, [e0, e1]);
    }

    pub(crate) fn remove_edge(&mut self, id: &EdgeId) -> Option<[End; 2]> {
        self.edges.remove(id)
    }

    pub(crate) fn remove_vertex(&mut self, v: &VertexId) -> bool {
        self.vertices.remove(v)
    }

    pub(crate) fn end_mut(&mut self, r: &EndRef) -> Option<&mut End> {
        self.edges.get_mut(&r.edge).map(|e| &mut e[r.side.index()])
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.vertices.iter()
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &[End; 2])> + '_ {
        self.edges.iter()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &EdgeId> + '_ {
        self.edges.keys()
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&[End; 2]> {
        self.edges.get(id)
    }

    pub fn has_edge(&self, id: &EdgeId) -> bool {
        self.edges.contains_key(id)
    }

    pub fn end(&self, r: &EndRef) -> Option<&End> {
        self.edges.get(&r.edge).map(|e| &e[r.side.index()])
    }

    pub(crate) fn require_end(&self, r: &EndRef) -> Result<&End, MoveError> {
        self.end(r).ok_or_else(|| MoveError::UnknownEdge(r.edge.clone()))
    }

    pub fn label(&self, r: &EndRef) -> Option<i64> {
        self.end(r).map(|e| e.label)
    }

    pub fn is_loop(&self, id: &EdgeId) -> bool {
        self.edges.get(id).is_some_and(|[a, b]| a.vertex == b.vertex)
    }

    /// All ends attached to `v`, in edge-id then side order.
    pub fn ends_at(&self, v: &VertexId) -> Vec<EndRef> {
        let mut out = Vec::new();
        for (id, ends) in &self.edges {
            for side in Side::BOTH {
                if &ends[side.index()].vertex == v {
                    out.push(EndRef { edge: id.clone(), side });
                }
            }
        }
        out
    }

    pub fn valence(&self, v: &VertexId) -> usize {
        self.edges
            .values()
            .map(|[a, b]| usize::from(&a.vertex == v) + usize::from(&b.vertex == v))
            .sum()
    }

    /// Returns every violated invariant; an empty list means the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertices.is_empty() {
            out.push(Violation::Empty);
        }
        for (id, ends) in &self.edges {
            for side in Side::BOTH {
                let end = &ends[side.index()];
                if end.label == 0 {
                    out.push(Violation::ZeroLabel { edge: id.clone(), side });
                }
                if !self.vertices.contains(&end.vertex) {
                    out.push(Violation::DanglingEnd {
                        edge: id.clone(),
                        side,
                        vertex: end.vertex.clone(),
                    });
                }
            }
        }
        let components = self.component_count();
        if components > 1 {
            out.push(Violation::Disconnected { components });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn require_valid(&self) -> Result<(), MoveError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(MoveError::InvalidGraph(v))
        }
    }

    fn component_count(&self) -> usize {
        let mut adj: BTreeMap<&VertexId, Vec<&VertexId>> =
            self.vertices.iter().map(|v| (v, Vec::new())).collect();
        for [a, b] in self.edges.values() {
            if let (true, true) = (adj.contains_key(&a.vertex), adj.contains_key(&b.vertex)) {
                adj.get_mut(&a.vertex).unwrap().push(&b.vertex);
                adj.get_mut(&b.vertex).unwrap().push(&a.vertex);
            }
        }
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &start in adj.keys() {
            if !seen.insert(start) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    /// First Betti number of the underlying graph.
    pub fn betti(&self) -> Result<usize, MoveError> {
        self.require_valid()?;
        Ok(self.edges.len() + 1 - self.vertices.len())
    }

    /// Class of the oriented edge whose initial end is `r`.
    pub fn end_label_class(&self, r: &EndRef) -> Result<EndClass, MoveError> {
        let end = self.require_end(r)?;
        Ok(if end.label.abs() == 1 { EndClass::Equal } else { EndClass::Proper })
    }

    /// Oriented edges (initial ends) that can be collapsed: non-loops with a
    /// unit label at the initial end.
    pub fn collapsible_edges(&self) -> Vec<EndRef> {
        let mut out = Vec::new();
        for (id, ends) in &self.edges {
            if ends[0].vertex == ends[1].vertex {
                continue;
            }
            for side in Side::BOTH {
                if ends[side.index()].label.abs() == 1 {
                    out.push(EndRef { edge: id.clone(), side });
                }
            }
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.edges
            .values()
            .all(|[a, b]| a.vertex == b.vertex || (a.label.abs() != 1 && b.label.abs() != 1))
    }

    pub fn max_abs_label(&self) -> i64 {
        self.edges
            .values()
            .flat_map(|[a, b]| [a.label.abs(), b.label.abs()])
            .max()
            .unwrap_or(0)
    }

    /// Smallest `prefix{n}` not already used as a vertex id.
    pub fn fresh_vertex_id(&self, prefix: &str) -> VertexId {
        (0..)
            .map(|n| VertexId(format!("{prefix}{n}")))
            .find(|id| !self.vertices.contains(id))
            .unwrap()
    }

    pub fn fresh_edge_id(&self, prefix: &str) -> EdgeId {
        (0..)
            .map(|n| EdgeId(format!("{prefix}{n}")))
            .find(|id| !self.edges.contains_key(id))
            .unwrap()
    }

    /// Whether the graph is one vertex carrying one loop with a unit end: the
    /// quotient of the Bass–Serre tree of an ascending HNN extension.
    pub fn is_single_ascending_loop(&self) -> bool {
        self.vertices.len() == 1
            && self.edges.len() == 1
            && self.edges.values().all(|[a, b]| a.label.abs() == 1 || b.label.abs() == 1)
    }

    /// Loops whose unit end is at `Side` and other label has absolute value ≥ 2.
    pub fn strict_ascending_loops(&self) -> Vec<EndRef> {
        let mut out = Vec::new();
        for (id, [a, b]) in &self.edges {
            if a.vertex != b.vertex {
                continue;
            }
            if a.label.abs() == 1 && b.label.abs() >= 2 {
                out.push(EndRef::new(id.clone(), Side::Zero));
            } else if b.label.abs() == 1 && a.label.abs() >= 2 {
                out.push(EndRef::new(id.clone(), Side::One));
            }
        }
        out
    }

    pub fn has_unit_unit_loop(&self) -> bool {
        self.edges
            .values()
            .any(|[a, b]| a.vertex == b.vertex && a.label.abs() == 1 && b.label.abs() == 1)
    }
}

impl fmt::Display for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<_> = self.vertices.iter().map(|v| v.as_str()).collect();
        write!(f, "V{{{}}}", vs.join(","))?;
        for (id, [a, b]) in &self.edges {
            write!(f, " {id}:({} at {}, {} at {})", a.label, a.vertex, b.label, b.vertex)?;
        }
        Ok(())
    }
}
