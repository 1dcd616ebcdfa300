//! Fixtures shared by the criterion benchmarks in `benches/`.

use outfn::graph::Path;
use outfn::samples::{golden, rose_map};
use outfn::GraphMap;

/// `a -> a, x -> x a, y -> y a a`: polynomial growth with long Nielsen
/// searches when the cancellation bound is loose.
pub fn exceptional() -> GraphMap {
    rose_map(&["a", "x", "y"], &["a", "x a", "y a a"]).expect("valid rose map")
}

/// `golden^k`, the usual growing workload.
pub fn golden_power(k: usize) -> GraphMap {
    golden().power(k).expect("golden powers stay small")
}

/// `f^k_#(E)` for the first edge, a long reduced path to feed `f##`.
pub fn long_path(f: &GraphMap, k: usize) -> Path {
    let g = f.graph();
    let e = Path::parse(g, &g.edge(0).id).expect("edge id parses");
    f.iterate_path(&e, k, 1_000_000).expect("within guard")
}
