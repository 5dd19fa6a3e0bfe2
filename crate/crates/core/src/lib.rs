//! Deformations of generalized Baumslag–Solitar graphs of groups.
//!
//! Every vertex and edge group is infinite cyclic, so a graph of groups is a
//! finite graph whose edge ends carry nonzero integer multipliers. The crate
//! implements collapse/expansion, slides, inductions and A±-moves on such
//! graphs, factors elementary deformations between reduced graphs into
//! moves that stay reduced, and explores deformation spaces within bounds.

pub mod abelian;
pub mod canon;
pub mod cli;
pub mod deformation;
pub mod document;
pub mod dot;
pub mod error;
pub mod explorer;
pub mod graph;
pub mod iso;
pub mod enumerate;
pub mod forest;
pub mod moves;
pub mod whitehead;

pub use abelian::{abelianization, AbelianInvariant};
pub use canon::{canonical_form, equivalent, CanonicalKey};
pub use error::{EngineError, MoveError};
pub use graph::{EdgeId, End, EndClass, EndRef, LabeledGraph, Side, VertexId, Violation};
pub use moves::{apply, Move, MoveReport};
