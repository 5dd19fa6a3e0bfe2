//! JSON documents: graphs, move scripts and deformations.

use std::collections::BTreeSet;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::canon::canonical_form;
use crate::graph::{End, LabeledGraph, Violation};
use crate::moves::Move;

pub const FORMAT: u32 = 1;

/// A rejected document. `line`/`column` are 1-based and present for syntax
/// and shape errors; `path` names the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub path: Option<String>,
    pub message: String,
}

impl DocumentError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        DocumentError { line: None, column: None, path: Some(path.into()), message: message.into() }
    }
}

impl fmt::Display for DocumentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, "line {l} column {c}: ")?;
        }
        if let Some(p) = &self.path {
            write!(f, "{p}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for DocumentError {}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, DocumentError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        DocumentError {
            line: Some(inner.line()),
            column: Some(inner.column()),
            path: (path != ".").then_some(path),
            message: inner.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        }
    })?;
    de.end().map_err(|e| DocumentError {
        line: Some(e.line()),
        column: Some(e.column()),
        path: None,
        message: "trailing characters".into(),
    })?;
    Ok(value)
}

fn check_format(format: Option<u32>) -> Result<(), DocumentError> {
    match format {
        None | Some(FORMAT) => Ok(()),
        Some(other) => Err(DocumentError::at("format", format!("unsupported format {other}, expected {FORMAT}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndDocument {
    pub vertex: String,
    pub label: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub id: String,
    pub ends: [EndDocument; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDocument>,
}

impl GraphDocument {
    /// Vertices and edges in id order.
    pub fn from_graph(g: &LabeledGraph) -> Self {
        GraphDocument {
            format: Some(FORMAT),
            vertices: g.vertices().map(|v| v.as_str().to_string()).collect(),
            edges: g
                .edges()
                .map(|(id, [a, b])| EdgeDocument {
                    id: id.as_str().to_string(),
                    ends: [a, b].map(|e| EndDocument { vertex: e.vertex.as_str().to_string(), label: e.label }),
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let doc: GraphDocument = from_json(text)?;
        check_format(doc.format)?;
        Ok(doc)
    }

    /// The graph as written, plus every problem with it.
    pub fn build(&self) -> (LabeledGraph, Vec<DocumentError>) {
        let mut problems = Vec::new();
        let mut g = LabeledGraph::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if !g.add_vertex(v.as_str()) {
                problems.push(DocumentError::at(format!("vertices[{i}]"), format!("duplicate vertex `{v}`")));
            }
        }
        let mut ids = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            if !ids.insert(e.id.as_str()) {
                problems.push(DocumentError::at(format!("edges[{i}].id"), format!("duplicate edge `{}`", e.id)));
            }
            let [a, b] = &e.ends;
            g.insert_edge(e.id.as_str().into(), End::new(a.vertex.as_str(), a.label), End::new(b.vertex.as_str(), b.label));
        }
        for v in g.validate() {
            problems.push(self.locate(&v));
        }
        (g, problems)
    }

    fn locate(&self, v: &Violation) -> DocumentError {
        let index = |edge: &str| self.edges.iter().position(|e| e.id == edge).unwrap_or(0);
        match v {
            Violation::ZeroLabel { edge, side } => DocumentError::at(
                format!("edges[{}].ends[{}].label", index(edge.as_str()), side.index()),
                format!("zero label on edge `{edge}`"),
            ),
            Violation::DanglingEnd { edge, side, vertex } => DocumentError::at(
                format!("edges[{}].ends[{}].vertex", index(edge.as_str()), side.index()),
                format!("edge `{edge}` references unknown vertex `{vertex}`"),
            ),
            Violation::Empty => DocumentError::at("vertices", "graph has no vertices"),
            Violation::Disconnected { components } => {
                DocumentError::at("edges", format!("graph is disconnected ({components} components)"))
            }
        }
    }

    pub fn to_graph(&self) -> Result<LabeledGraph, DocumentError> {
        let (g, problems) = self.build();
        match problems.into_iter().next() {
            Some(p) => Err(p),
            None => Ok(g),
        }
    }
}

/// Parses and validates a graph document.
pub fn parse_graph(text: &str) -> Result<LabeledGraph, DocumentError> {
    GraphDocument::parse(text)?.to_graph()
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn serialize_graph(g: &LabeledGraph) -> String {
    to_json(&GraphDocument::from_graph(g))
}

/// A move, optionally with the canonical digest expected after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    #[serde(flatten)]
    pub mv: Move,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub steps: Vec<ScriptStep>,
    /// Every graph passed through, starting with the start graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<GraphDocument>>,
}

impl MoveScript {
    /// Script for `moves` from the graphs they pass through (`graphs[0]`
    /// is the start), with expected digests.
    pub fn with_digests(moves: &[Move], graphs: &[LabeledGraph], trace: bool) -> Self {
        let steps = moves
            .iter()
            .zip(&graphs[1..])
            .map(|(mv, g)| ScriptStep {
                mv: mv.clone(),
                expect: canonical_form(g).ok().map(|k| k.digest_hex()),
            })
            .collect();
        MoveScript {
            format: Some(FORMAT),
            steps,
            trace: trace.then(|| graphs.iter().map(GraphDocument::from_graph).collect()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let s: MoveScript = from_json(text)?;
        check_format(s.format)?;
        Ok(s)
    }

    pub fn moves(&self) -> Vec<Move> {
        self.steps.iter().map(|s| s.mv.clone()).collect()
    }
}

/// Start graph and elementary steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub start: GraphDocument,
    pub steps: Vec<Move>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<GraphDocument>>,
}

impl DeformationDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        let d: DeformationDocument = from_json(text)?;
        check_format(d.format)?;
        Ok(d)
    }
}
