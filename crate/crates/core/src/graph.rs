//! Finite graphs, oriented edges, reduced paths and circuits.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// An edge together with an orientation. The reversal is a flag on the
/// same edge, never a separate edge.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OEdge(u32);

impl OEdge {
    pub fn new(edge: usize, reversed: bool) -> Self {
        OEdge(((edge as u32) << 1) | reversed as u32)
    }

    pub fn fwd(edge: usize) -> Self {
        Self::new(edge, false)
    }

    pub fn edge(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_rev(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> Self {
        OEdge(self.0 ^ 1)
    }

    /// Dense index in `0..2 * edge_count`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        OEdge(i as u32)
    }
}

impl fmt::Debug for OEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}{}", self.edge(), if self.is_rev() { "'" } else { "" })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub init: usize,
    pub term: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    // rank of each edge id in the lexicographic order of ids
    order: Vec<u32>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// The rose with one vertex `v` and one loop per name.
    pub fn rose<S: AsRef<str>>(names: &[S]) -> Self {
        let mut g = Graph::new();
        let v = g.add_vertex("v").unwrap();
        for n in names {
            g.add_edge(n.as_ref(), v, v).unwrap();
        }
        g
    }

    pub fn add_vertex(&mut self, id: &str) -> Result<usize> {
        if self.vertices.iter().any(|v| v == id) {
            return Err(Error::InvalidGraph(format!("duplicate vertex {id}")));
        }
        self.vertices.push(id.to_string());
        Ok(self.vertices.len() - 1)
    }

    pub fn add_edge(&mut self, id: &str, init: usize, term: usize) -> Result<usize> {
        if id.is_empty() || id.contains(char::is_whitespace) || id.contains('^') {
            return Err(Error::InvalidGraph(format!("bad edge id {id:?}")));
        }
        if self.edges.iter().any(|e| e.id == id) {
            return Err(Error::InvalidGraph(format!("duplicate edge {id}")));
        }
        if init >= self.vertices.len() || term >= self.vertices.len() {
            return Err(Error::InvalidGraph(format!("edge {id} has unknown endpoint")));
        }
        self.edges.push(Edge { id: id.to_string(), init, term });
        self.reorder();
        Ok(self.edges.len() - 1)
    }

    fn reorder(&mut self) {
        let mut idx: Vec<usize> = (0..self.edges.len()).collect();
        idx.sort_by(|&a, &b| self.edges[a].id.cmp(&self.edges[b].id));
        self.order = vec![0; idx.len()];
        for (rank, e) in idx.into_iter().enumerate() {
            self.order[e] = rank as u32;
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn init(&self, d: OEdge) -> usize {
        let e = &self.edges[d.edge()];
        if d.is_rev() {
            e.term
        } else {
            e.init
        }
    }

    pub fn term(&self, d: OEdge) -> usize {
        self.init(d.inv())
    }

    /// All oriented edges, forward before reversed for each edge.
    pub fn oedges(&self) -> impl Iterator<Item = OEdge> + '_ {
        (0..2 * self.edges.len()).map(OEdge::from_index)
    }

    /// Directions at `v`: oriented edges with initial vertex `v`.
    pub fn directions_at(&self, v: usize) -> Vec<OEdge> {
        self.oedges().filter(|&d| self.init(d) == v).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.oedges().filter(|&d| self.init(d) == v).count()
    }

    /// Sort key realizing the fixed total order on oriented edges: by id,
    /// then forward before reversed.
    pub fn key(&self, d: OEdge) -> u32 {
        (self.order[d.edge()] << 1) | d.is_rev() as u32
    }

    pub fn rank(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.init, e.term), (e.term, e.init)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Connected, nonempty, and no vertex of valence 0 or 1.
    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidGraph("no edges".into()));
        }
        if !self.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        for v in 0..self.vertices.len() {
            if self.valence(v) < 2 {
                return Err(Error::InvalidGraph(format!(
                    "vertex {} has valence {}",
                    self.vertices[v],
                    self.valence(v)
                )));
            }
        }
        Ok(())
    }

    pub fn fmt_oedge(&self, d: OEdge) -> String {
        let id = &self.edges[d.edge()].id;
        if d.is_rev() {
            format!("{id}^-1")
        } else {
            id.clone()
        }
    }

    pub fn fmt_word(&self, w: &[OEdge]) -> String {
        w.iter().map(|&d| self.fmt_oedge(d)).collect::<Vec<_>>().join(" ")
    }

    pub fn parse_oedge(&self, tok: &str) -> Result<OEdge> {
        let (id, rev) = match tok.strip_suffix("^-1") {
            Some(s) => (s, true),
            None => (tok, false),
        };
        let e = self
            .edge_index(id)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown edge {id}")))?;
        Ok(OEdge::new(e, rev))
    }

    pub fn parse_word(&self, s: &str) -> Result<Vec<OEdge>> {
        s.split_whitespace().map(|t| self.parse_oedge(t)).collect()
    }

    /// Map from edge id to index, for bulk lookups.
    pub fn edge_lookup(&self) -> HashMap<&str, usize> {
        self.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect()
    }

    /// Subdivide edge `e` into two edges; returns `(first, second)` and the
    /// new vertex. The old edge index is reused for the first half.
    pub fn subdivide(&mut self, e: usize, second_id: &str, vertex_id: &str) -> Result<(usize, usize, usize)> {
        let m = self.add_vertex(vertex_id)?;
        let term = self.edges[e].term;
        self.edges[e].term = m;
        let f = self.add_edge(second_id, m, term)?;
        Ok((e, f, m))
    }

    /// Remove an edge; indices above it shift down by one.
    pub fn remove_edge(&mut self, e: usize) {
        self.edges.remove(e);
        self.reorder();
    }

    /// Remove a vertex with no incident edges; indices above it shift down.
    pub fn remove_vertex(&mut self, v: usize) {
        debug_assert!(self.edges.iter().all(|e| e.init != v && e.term != v));
        self.vertices.remove(v);
        for e in &mut self.edges {
            if e.init > v {
                e.init -= 1;
            }
            if e.term > v {
                e.term -= 1;
            }
        }
    }

    /// Redirect every endpoint at `from` to `to`.
    pub fn merge_vertex(&mut self, from: usize, to: usize) {
        for e in &mut self.edges {
            if e.init == from {
                e.init = to;
            }
            if e.term == from {
                e.term = to;
            }
        }
    }

    pub fn fresh_edge_id(&self, stem: &str) -> String {
        let mut i = 1;
        loop {
            let id = format!("{stem}.{i}");
            if self.edge_index(&id).is_none() {
                return id;
            }
            i += 1;
        }
    }

    pub fn fresh_vertex_id(&self, stem: &str) -> String {
        let mut i = 1;
        loop {
            let id = format!("{stem}.{i}");
            if self.vertex_index(&id).is_none() {
                return id;
            }
            i += 1;
        }
    }
}

/// A reduced edge path. Trivial paths keep their basepoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    start: usize,
    end: usize,
    edges: Vec<OEdge>,
}

impl Path {
    pub fn trivial(v: usize) -> Self {
        Path { start: v, end: v, edges: Vec::new() }
    }

    /// Build from edges already known to be composable and reduced.
    pub fn from_reduced(g: &Graph, start: usize, edges: Vec<OEdge>) -> Self {
        let end = edges.last().map_or(start, |&d| g.term(d));
        debug_assert!(is_reduced(&edges));
        Path { start, end, edges }
    }

    /// Parse and check; the word must already be reduced.
    pub fn parse(g: &Graph, s: &str) -> Result<Self> {
        let w = g.parse_word(s)?;
        if w.is_empty() {
            return Err(Error::InvalidGraph("empty path needs a basepoint".into()));
        }
        check_composable(g, &w)?;
        if !is_reduced(&w) {
            return Err(Error::InvalidGraph(format!("path {s:?} is not reduced")));
        }
        Ok(Path::from_reduced(g, g.init(w[0]), w))
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn edges(&self) -> &[OEdge] {
        &self.edges
    }

    pub fn into_edges(self) -> Vec<OEdge> {
        self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    pub fn reversed(&self) -> Path {
        Path {
            start: self.end,
            end: self.start,
            edges: self.edges.iter().rev().map(|d| d.inv()).collect(),
        }
    }

    /// `[self · other]`; panics if endpoints do not match.
    pub fn concat(&self, other: &Path) -> Path {
        assert_eq!(self.end, other.start, "concatenating non-composable paths");
        let mut edges = self.edges.clone();
        for &d in &other.edges {
            push_reduced(&mut edges, d);
        }
        let end = other.end;
        Path { start: self.start, end, edges }
    }

    pub fn subpath(&self, g: &Graph, from: usize, to: usize) -> Path {
        let start = if from == 0 {
            self.start
        } else {
            g.term(self.edges[from - 1])
        };
        Path::from_reduced(g, start, self.edges[from..to].to_vec())
    }

    pub fn first(&self) -> Option<OEdge> {
        self.edges.first().copied()
    }

    pub fn last(&self) -> Option<OEdge> {
        self.edges.last().copied()
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> PathDisplay<'a> {
        PathDisplay { g, p: self }
    }
}

pub struct PathDisplay<'a> {
    g: &'a Graph,
    p: &'a Path,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_trivial() {
            write!(f, "<{}>", self.g.vertex_name(self.p.start))
        } else {
            write!(f, "{}", self.g.fmt_word(&self.p.edges))
        }
    }
}

/// Append `d` to a reduced word, cancelling against the last letter.
pub fn push_reduced(w: &mut Vec<OEdge>, d: OEdge) {
    if w.last() == Some(&d.inv()) {
        w.pop();
    } else {
        w.push(d);
    }
}

pub fn is_reduced(w: &[OEdge]) -> bool {
    w.windows(2).all(|p| p[1] != p[0].inv())
}

pub fn check_composable(g: &Graph, w: &[OEdge]) -> Result<()> {
    for p in w.windows(2) {
        if g.term(p[0]) != g.init(p[1]) {
            return Err(Error::NotComposable(g.fmt_oedge(p[0]), g.fmt_oedge(p[1])));
        }
    }
    Ok(())
}

/// Free reduction of a word with no endpoint bookkeeping.
pub fn reduce_word(w: &[OEdge]) -> Vec<OEdge> {
    let mut out = Vec::with_capacity(w.len());
    for &d in w {
        push_reduced(&mut out, d);
    }
    out
}

pub fn invert_word(w: &[OEdge]) -> Vec<OEdge> {
    w.iter().rev().map(|d| d.inv()).collect()
}

/// The reduced path homotopic rel endpoints to the edge word `w` starting
/// at `start`.
pub fn tighten(g: &Graph, start: usize, w: &[OEdge]) -> Result<Path> {
    if let Some(&d) = w.first() {
        if g.init(d) != start {
            return Err(Error::NotComposable(g.vertex_name(start).to_string(), g.fmt_oedge(d)));
        }
    }
    check_composable(g, w)?;
    Ok(Path::from_reduced(g, start, reduce_word(w)))
}

/// Tighten a nonempty word, taking the basepoint from its first edge.
pub fn tighten_word(g: &Graph, w: &[OEdge]) -> Result<Path> {
    let start = w
        .first()
        .map(|&d| g.init(d))
        .ok_or_else(|| Error::InvalidGraph("empty word has no basepoint".into()))?;
    tighten(g, start, w)
}

/// A cyclically reduced edge loop, stored in its canonical rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Circuit {
    edges: Vec<OEdge>,
}

impl Circuit {
    pub fn edges(&self) -> &[OEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The circuit read as a closed path from its canonical starting point.
    pub fn as_path(&self, g: &Graph) -> Path {
        Path::from_reduced(g, g.init(self.edges[0]), self.edges.clone())
    }

    pub fn reversed(&self, g: &Graph) -> Circuit {
        canonical_circuit(g, invert_word(&self.edges))
    }

    pub fn display<'a>(&'a self, g: &'a Graph) -> String {
        g.fmt_word(&self.edges)
    }
}

/// Strip matching letters from both ends of a reduced closed word.
pub fn cyclic_reduce(w: &[OEdge]) -> &[OEdge] {
    let mut i = 0;
    let mut j = w.len();
    while j > i + 1 && w[i] == w[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    &w[i..j]
}

/// The unique circuit freely homotopic to the closed word `w`.
pub fn cyclic_tighten(g: &Graph, w: &[OEdge]) -> Result<Circuit> {
    let p = tighten_word(g, w)?;
    if !p.is_closed() {
        return Err(Error::InvalidGraph("word is not closed".into()));
    }
    let c = cyclic_reduce(p.edges());
    if c.is_empty() {
        return Err(Error::TrivialClass);
    }
    Ok(canonical_circuit(g, c.to_vec()))
}

/// Build a circuit from a word already known to be cyclically reduced.
pub fn canonical_circuit(g: &Graph, w: Vec<OEdge>) -> Circuit {
    let keys: Vec<u32> = w.iter().map(|&d| g.key(d)).collect();
    let r = least_rotation(&keys);
    let mut edges = w;
    edges.rotate_left(r);
    Circuit { edges }
}

/// Booth's algorithm: start index of the lexicographically least rotation.
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut f: Vec<isize> = vec![-1; 2 * n];
    let mut k: usize = 0;
    for j in 1..2 * n {
        let sj = &s[j % n];
        let mut i = f[j - k - 1];
        while i != -1 && *sj != s[(k + i as usize + 1) % n] {
            if *sj < s[(k + i as usize + 1) % n] {
                k = j - i as usize - 1;
            }
            i = f[i as usize];
        }
        if i == -1 && *sj != s[(k + i.wrapping_add(1) as usize) % n] {
            if *sj < s[(k + i.wrapping_add(1) as usize) % n] {
                k = j;
            }
            f[j - k] = -1;
        } else {
            f[j - k] = i + 1;
        }
    }
    k % n
}

/// Start positions of occurrences of `pat` in `text`.
pub fn occurrences(text: &[OEdge], pat: &[OEdge]) -> Vec<usize> {
    if pat.is_empty() || pat.len() > text.len() {
        return Vec::new();
    }
    // prefix function
    let mut pi = vec![0usize; pat.len()];
    let mut k = 0;
    for i in 1..pat.len() {
        while k > 0 && pat[i] != pat[k] {
            k = pi[k - 1];
        }
        if pat[i] == pat[k] {
            k += 1;
        }
        pi[i] = k;
    }
    let mut out = Vec::new();
    let mut q = 0;
    for (i, t) in text.iter().enumerate() {
        while q > 0 && *t != pat[q] {
            q = pi[q - 1];
        }
        if *t == pat[q] {
            q += 1;
        }
        if q == pat.len() {
            out.push(i + 1 - pat.len());
            q = pi[q - 1];
        }
    }
    out
}

pub fn contains_subpath(text: &[OEdge], pat: &[OEdge]) -> bool {
    pat.is_empty() || !occurrences(text, pat).is_empty()
}

/// Length of the longest common prefix.
pub fn common_prefix(a: &[OEdge], b: &[OEdge]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rose2() -> Graph {
        Graph::rose(&["a", "b"])
    }

    #[test]
    fn tighten_examples() {
        let g = rose2();
        let w = g.parse_word("a a^-1 b").unwrap();
        assert_eq!(g.fmt_word(tighten_word(&g, &w).unwrap().edges()), "b");
        let w = g.parse_word("b a a^-1 b^-1").unwrap();
        let p = tighten_word(&g, &w).unwrap();
        assert!(p.is_trivial());
        assert_eq!(p.start(), g.init(w[0]));
        let w = g.parse_word("a b a").unwrap();
        assert_eq!(tighten_word(&g, &w).unwrap().edges(), &w[..]);
    }

    #[test]
    fn tighten_rejects_gaps() {
        let mut g = Graph::new();
        let u = g.add_vertex("u").unwrap();
        let v = g.add_vertex("v").unwrap();
        g.add_edge("x", u, v).unwrap();
        g.add_edge("y", u, v).unwrap();
        let w = g.parse_word("x x").unwrap();
        assert!(matches!(tighten_word(&g, &w), Err(Error::NotComposable(..))));
    }

    #[test]
    fn cyclic_tighten_examples() {
        let g = rose2();
        let c = cyclic_tighten(&g, &g.parse_word("a^-1 b a").unwrap()).unwrap();
        assert_eq!(c.display(&g), "b");
        let c = cyclic_tighten(&g, &g.parse_word("a b").unwrap()).unwrap();
        assert_eq!(c.display(&g), "a b");
        let c = cyclic_tighten(&g, &g.parse_word("b a b^-1 a").unwrap()).unwrap();
        assert_eq!(c.display(&g), "a b a b^-1");
        let e = cyclic_tighten(&g, &g.parse_word("a b b^-1 a^-1").unwrap());
        assert!(matches!(e, Err(Error::TrivialClass)));
    }

    #[test]
    fn booth_matches_naive() {
        let cases: Vec<Vec<u32>> = vec![
            vec![3, 1, 2, 1, 2],
            vec![1, 1, 1],
            vec![2, 1, 1, 2, 1, 1],
            vec![5],
            vec![0, 3, 0, 2, 0, 3],
        ];
        for s in cases {
            let n = s.len();
            let best = (0..n)
                .min_by_key(|&r| (0..n).map(|i| s[(r + i) % n]).collect::<Vec<_>>())
                .unwrap();
            let got = least_rotation(&s);
            let rot = |r: usize| (0..n).map(|i| s[(r + i) % n]).collect::<Vec<_>>();
            assert_eq!(rot(got), rot(best), "{s:?}");
        }
    }

    #[test]
    fn occurrences_overlap() {
        let g = rose2();
        let t = g.parse_word("a a a b").unwrap();
        let p = g.parse_word("a a").unwrap();
        assert_eq!(occurrences(&t, &p), vec![0, 1]);
    }
}
