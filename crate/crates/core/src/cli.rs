//! The `gbs-deform` command line.
//!
//! Exit codes: 0 on success (including negative answers such as `NOT_RIGID`
//! or `NOT_FOUND_WITHIN_BOUNDS`), 2 for bad input, 3 for an internal
//! invariant failure.

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::abelian::abelianization;
use crate::canon::canonical_form;
use crate::deformation::{random_deformation, ElementaryDeformation, GeneratorBounds};
use crate::document::{to_json, DeformationDocument, DocumentError, GraphDocument, MoveScript};
use crate::dot::to_dot;
use crate::enumerate::{enumerate_moves, Bounds};
use crate::error::{EngineError, MoveError};
use crate::explorer::{ascending_witness, find_path, is_rigid_conditions, is_rigid_moves, reduced_orbit, PathOutcome};
use crate::graph::{EdgeId, LabeledGraph};
use crate::moves;
use crate::whitehead::deformation_to_moves_avoiding;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Debug, Parser)]
#[command(name = "gbs-deform", version, about = "Deformation moves on labeled graphs of infinite cyclic groups")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Largest absolute end label explored
    #[arg(long, global = true, default_value_t = 64)]
    max_label: i64,
    #[arg(long, global = true, default_value_t = 12)]
    max_vertices: usize,
    #[arg(long, global = true, default_value_t = 16)]
    max_edges: usize,
    /// Breadth-first search depth
    #[arg(long, global = true, default_value_t = 8)]
    max_depth: usize,
    /// Cap on the number of graphs held by a search
    #[arg(long, global = true, default_value_t = 100_000)]
    max_frontier: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include every intermediate graph in the output
    #[arg(long, global = true)]
    trace: bool,
    /// Worker threads for searches
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

impl Opts {
    fn bounds(&self) -> Bounds {
        Bounds {
            max_label: self.max_label,
            max_vertices: self.max_vertices,
            max_edges: self.max_edges,
            max_depth: self.max_depth,
            max_frontier: self.max_frontier,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a graph document and report its invariants
    Validate { graph: PathBuf },
    /// Collapse edges until the graph is reduced
    Reduce { graph: PathBuf },
    /// List the slides, inductions and A±-moves of a reduced graph
    Moves { graph: PathBuf },
    /// Replay a move script
    Apply { graph: PathBuf, script: PathBuf },
    /// Turn an elementary deformation into slides, inductions and A±-moves
    Factor {
        deformation: PathBuf,
        /// Prefer choices that leave this edge alone
        #[arg(long)]
        avoid: Option<String>,
    },
    /// Search for moves between two reduced graphs
    Path { from: PathBuf, to: PathBuf },
    /// Enumerate the reduced graphs reachable within the bounds
    Orbit { graph: PathBuf },
    /// Rigidity by the end-pair conditions and by move enumeration
    Rigid { graph: PathBuf },
    /// Seeded random elementary deformation starting at a reduced graph
    RandomDeform {
        graph: PathBuf,
        /// Maximal number of elementary steps
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value_t = 6)]
        vertex_bound: usize,
        #[arg(long, default_value_t = 8)]
        edge_bound: usize,
        #[arg(long, default_value_t = 12)]
        label_bound: i64,
        /// Never collapse this edge
        #[arg(long)]
        avoid: Option<String>,
    },
    /// Graphviz rendering of a graph
    ExportDot { graph: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Internal(m) => Failure::Internal(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<MoveError> for Failure {
    fn from(e: MoveError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    let mut s = String::new();
    let r = if path == Path::new("-") {
        io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn in_file(path: &Path) -> impl Fn(DocumentError) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<LabeledGraph, Failure> {
    GraphDocument::parse(&read(path)?).and_then(|d| d.to_graph()).map_err(in_file(path))
}

fn graph_output(g: &LabeledGraph, format: Format) -> String {
    match format {
        Format::Json => to_json(&GraphDocument::from_graph(g)),
        Format::Dot => to_dot(g),
    }
}

fn json_only(opts: &Opts, command: &str) -> Result<(), Failure> {
    match opts.format {
        Format::Json => Ok(()),
        Format::Dot => Err(Failure::Input(format!("`{command}` has no dot output"))),
    }
}

fn docs(graphs: &[LabeledGraph]) -> Value {
    serde_json::to_value(graphs.iter().map(GraphDocument::from_graph).collect::<Vec<_>>()).unwrap()
}

fn execute(cli: &Cli) -> Result<(String, i32), Failure> {
    let opts = &cli.opts;
    let bounds = opts.bounds();
    match &cli.command {
        Command::Validate { graph } => {
            json_only(opts, "validate")?;
            let doc = GraphDocument::parse(&read(graph)?).map_err(in_file(graph))?;
            let (g, problems) = doc.build();
            if !problems.is_empty() {
                let v = json!({
                    "valid": false,
                    "violations": problems.iter().map(ToString::to_string).collect::<Vec<_>>(),
                });
                return Ok((to_json(&v), EXIT_INPUT));
            }
            let v = json!({
                "valid": true,
                "vertices": g.vertex_count(),
                "edges": g.edge_count(),
                "reduced": g.is_reduced(),
                "betti": g.betti()?,
                "abelianization": abelianization(&g)?,
                "canonical": canonical_form(&g)?.digest_hex(),
            });
            Ok((to_json(&v), EXIT_OK))
        }
        Command::Reduce { graph } => {
            let g = load_graph(graph)?;
            let (r, steps) = moves::reduce(&g)?;
            if opts.trace && opts.format == Format::Json {
                let graphs = moves::replay(&g, &steps).map_err(|(_, e)| e)?;
                return Ok((to_json(&MoveScript::with_digests(&steps, &graphs, true)), EXIT_OK));
            }
            Ok((graph_output(&r, opts.format), EXIT_OK))
        }
        Command::Moves { graph } => {
            json_only(opts, "moves")?;
            let g = load_graph(graph)?;
            let e = enumerate_moves(&g, &bounds)?;
            let mut list = Vec::new();
            for c in &e.moves {
                let mut item = json!({
                    "move": c.mv,
                    "trivial": c.trivial,
                    "unmarked_identity": c.unmarked_identity,
                    "reduced": c.graph.is_reduced(),
                    "result": canonical_form(&c.graph)?.digest_hex(),
                });
                if opts.trace {
                    item["graph"] = serde_json::to_value(GraphDocument::from_graph(&c.graph)).unwrap();
                }
                list.push(item);
            }
            Ok((to_json(&json!({ "moves": list, "pruned": e.pruned })), EXIT_OK))
        }
        Command::Apply { graph, script } => {
            let g = load_graph(graph)?;
            let s = MoveScript::parse(&read(script)?).map_err(in_file(script))?;
            let mut cur = g;
            let mut graphs = vec![cur.clone()];
            for (i, step) in s.steps.iter().enumerate() {
                cur = moves::apply(&cur, &step.mv)
                    .map_err(|e| Failure::Input(format!("steps[{i}] ({}): {e}", step.mv.kind())))?
                    .graph;
                if let Some(expect) = &step.expect {
                    let got = canonical_form(&cur)?.digest_hex();
                    if &got != expect {
                        return Err(Failure::Input(format!("steps[{i}]: expected digest {expect}, got {got}")));
                    }
                }
                graphs.push(cur.clone());
            }
            if opts.trace && opts.format == Format::Json {
                return Ok((to_json(&json!({ "graph": GraphDocument::from_graph(&cur), "trace": docs(&graphs) })), EXIT_OK));
            }
            Ok((graph_output(&cur, opts.format), EXIT_OK))
        }
        Command::Factor { deformation, avoid } => {
            json_only(opts, "factor")?;
            let doc = DeformationDocument::parse(&read(deformation)?).map_err(in_file(deformation))?;
            let start = doc.start.to_graph().map_err(|e| in_file(deformation)(DocumentError {
                path: Some(format!("start.{}", e.path.clone().unwrap_or_default())),
                ..e
            }))?;
            let d = ElementaryDeformation::new(start, doc.steps)?;
            let avoid = avoid.as_deref().map(EdgeId::from);
            let p = deformation_to_moves_avoiding(&d, avoid.as_ref())?;
            Ok((to_json(&MoveScript::with_digests(&p.moves, &p.graphs, opts.trace)), EXIT_OK))
        }
        Command::Path { from, to } => {
            json_only(opts, "path")?;
            let (g1, g2) = (load_graph(from)?, load_graph(to)?);
            let v = match find_path(&g1, &g2, &bounds, opts.jobs)? {
                PathOutcome::Found { moves, graphs } => {
                    json!({ "status": "FOUND", "script": MoveScript::with_digests(&moves, &graphs, opts.trace) })
                }
                PathOutcome::NotFoundWithinBounds => json!({ "status": "NOT_FOUND_WITHIN_BOUNDS" }),
            };
            Ok((to_json(&v), EXIT_OK))
        }
        Command::Orbit { graph } => {
            json_only(opts, "orbit")?;
            let g = load_graph(graph)?;
            let o = reduced_orbit(&g, &bounds, opts.jobs)?;
            let mut v = json!({
                "exhausted": o.exhausted,
                "depth": o.depth,
                "count": o.keys.len(),
                "keys": o.keys.iter().map(|k| k.digest_hex()).collect::<Vec<_>>(),
            });
            if opts.trace {
                v["graphs"] = docs(&o.keys.iter().map(|k| k.representative()).collect::<Vec<_>>());
            }
            Ok((to_json(&v), EXIT_OK))
        }
        Command::Rigid { graph } => {
            json_only(opts, "rigid")?;
            let g = load_graph(graph)?;
            let conditions = is_rigid_conditions(&g)?;
            let by_moves = is_rigid_moves(&g)?;
            let witness = ascending_witness(&g, &bounds, opts.jobs)?;
            let v = json!({
                "status": conditions.status,
                "conditions": conditions,
                "moves": by_moves,
                "ascending_witness": witness,
            });
            Ok((to_json(&v), EXIT_OK))
        }
        Command::RandomDeform { graph, steps, vertex_bound, edge_bound, label_bound, avoid } => {
            json_only(opts, "random-deform")?;
            let g = load_graph(graph)?;
            let gb = GeneratorBounds {
                max_vertices: *vertex_bound,
                max_edges: *edge_bound,
                max_label: *label_bound,
                max_steps: *steps,
            };
            let avoid = avoid.as_deref().map(EdgeId::from);
            let d = random_deformation(opts.seed, &gb, &g, avoid.as_ref())?;
            let doc = DeformationDocument {
                format: Some(crate::document::FORMAT),
                start: GraphDocument::from_graph(d.start()),
                steps: d.steps().to_vec(),
                trace: opts.trace.then(|| d.graphs().iter().map(GraphDocument::from_graph).collect()),
            };
            Ok((to_json(&doc), EXIT_OK))
        }
        Command::ExportDot { graph } => Ok((to_dot(&load_graph(graph)?), EXIT_OK)),
    }
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "internal error: {m}");
            EXIT_INTERNAL
        }
    }
}
