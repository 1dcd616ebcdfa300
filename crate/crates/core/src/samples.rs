//! Small named maps used by tests, benches and the CLI.

use std::sync::Arc;

use crate::error::Result;
use crate::graph::Graph;
use crate::map::GraphMap;

/// A self-map of the rose with the given edge names and image words.
pub fn rose_map(names: &[&str], images: &[&str]) -> Result<GraphMap> {
    let g = Arc::new(Graph::rose(names));
    let words = images.iter().map(|s| g.parse_word(s)).collect::<Result<Vec<_>>>()?;
    GraphMap::from_words(g.clone(), g, words, vec![])
}

/// a -> b, b -> a b.
pub fn golden() -> GraphMap {
    rose_map(&["a", "b"], &["b", "a b"]).unwrap()
}

/// The square of [`golden`]: a -> a b, b -> b a b.
pub fn golden_squared() -> GraphMap {
    rose_map(&["a", "b"], &["a b", "b a b"]).unwrap()
}

/// c fixed below an exponential stratum {a, b}: a -> b, b -> a c b.
pub fn reducible() -> GraphMap {
    rose_map(&["a", "b", "c"], &["b", "a c b", "c"]).unwrap()
}

/// a fixed, b -> b a.
pub fn linear() -> GraphMap {
    rose_map(&["a", "b"], &["a", "b a"]).unwrap()
}

/// Golden squared on {a, b} with a fixed loop c beside it.
pub fn fixed_loop_beside_golden() -> GraphMap {
    rose_map(&["a", "b", "c"], &["a b", "b a b", "c"]).unwrap()
}

/// An automorphism whose edge image takes an illegal turn:
/// a -> a b^-1 a, b -> a.
pub fn illegal_turn() -> GraphMap {
    rose_map(&["a", "b"], &["a b^-1 a", "a"]).unwrap()
}
