//! Symbolic computation with outer automorphisms of free groups, given as
//! self-maps of marked graphs.

pub mod cancellation;
pub mod core_graph;
pub mod error;
pub mod folds;
pub mod graph;
pub mod lamination;
pub mod map;
pub mod marking;
pub mod nielsen;
pub mod pingpong;
pub mod samples;
pub mod strata;
pub mod text;
pub mod train_track;

pub use error::{Error, Result};
pub use graph::{Circuit, Graph, OEdge, Path};
pub use map::GraphMap;
pub use marking::MarkedGraph;
