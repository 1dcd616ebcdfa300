//! Markings: identifications of a graph's fundamental group with the free
//! group on named rose generators, plus automorphism arithmetic on words.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{invert_word, push_reduced, reduce_word, Graph, OEdge, Path};

/// A word in the free group on `n` generators, letters encoded as [`OEdge`]s
/// of the rank-`n` rose.
pub type Word = Vec<OEdge>;

/// Rose generator loops in a graph together with a homotopy inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marking {
    pub base: usize,
    pub generators: Vec<String>,
    /// Closed path at `base` for each generator.
    pub loops: Vec<Path>,
    /// For each edge of the graph, its rose word under the inverse.
    pub inverse: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedGraph {
    pub graph: Graph,
    pub marking: Marking,
}

impl MarkedGraph {
    pub fn new(graph: Graph, generators: Vec<String>, loops: Vec<Path>) -> Result<Self> {
        graph.validate()?;
        if graph.rank() != generators.len() as i64 {
            return Err(Error::InvalidGraph(format!(
                "edges - vertices = {} but the marking has {} generators",
                graph.rank() - 1,
                generators.len()
            )));
        }
        let base = loops.first().map_or(0, |p| p.start());
        for (name, l) in generators.iter().zip(&loops) {
            if l.start() != base || l.end() != base {
                return Err(Error::BadMarking(format!("loop for {name} is not closed at the base vertex")));
            }
        }
        let inverse = marking_inverse(&graph, base, &loops)?;
        let marking = Marking { base, generators, loops, inverse };
        Ok(MarkedGraph { graph, marking })
    }

    /// Marking read off a maximal tree: one generator per non-tree edge,
    /// named after that edge.
    pub fn with_tree_marking(graph: Graph) -> Result<Self> {
        graph.validate()?;
        let tree = SpanningTree::new(&graph, 0);
        let mut gens = Vec::new();
        let mut loops = Vec::new();
        for e in 0..graph.edge_count() {
            if tree.in_tree[e] {
                continue;
            }
            gens.push(graph.edge(e).id.clone());
            let d = OEdge::fwd(e);
            let mut w = tree.path_from_root(graph.init(d));
            w.push(d);
            w.extend(invert_word(&tree.path_from_root(graph.term(d))));
            loops.push(Path::from_reduced(&graph, 0, reduce_word(&w)));
        }
        Self::new(graph, gens, loops)
    }

    pub fn rank(&self) -> usize {
        self.marking.generators.len()
    }

    /// The rose carrying the generator names.
    pub fn rose(&self) -> Graph {
        Graph::rose(&self.marking.generators)
    }

    /// Rose word of a path under the inverse marking.
    pub fn word_of(&self, edges: &[OEdge]) -> Word {
        let mut out = Vec::new();
        for &d in edges {
            let w = &self.marking.inverse[d.edge()];
            if d.is_rev() {
                for &x in w.iter().rev() {
                    push_reduced(&mut out, x.inv());
                }
            } else {
                for &x in w {
                    push_reduced(&mut out, x);
                }
            }
        }
        out
    }

    /// Edge path (unreduced) of a rose word under the marking.
    pub fn path_of(&self, w: &[OEdge]) -> Vec<OEdge> {
        let mut out = Vec::new();
        for &x in w {
            let l = &self.marking.loops[x.edge()];
            if x.is_rev() {
                for &d in l.edges().iter().rev() {
                    push_reduced(&mut out, d.inv());
                }
            } else {
                for &d in l.edges() {
                    push_reduced(&mut out, d);
                }
            }
        }
        out
    }
}

struct SpanningTree {
    in_tree: Vec<bool>,
    // oriented edge into each vertex from its parent, and the parent
    parent: Vec<Option<(OEdge, usize)>>,
}

impl SpanningTree {
    fn new(g: &Graph, root: usize) -> Self {
        let mut in_tree = vec![false; g.edge_count()];
        let mut parent = vec![None; g.vertex_count()];
        let mut seen = vec![false; g.vertex_count()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for d in g.directions_at(v) {
                let w = g.term(d);
                if !seen[w] {
                    seen[w] = true;
                    in_tree[d.edge()] = true;
                    parent[w] = Some((d, v));
                    queue.push_back(w);
                }
            }
        }
        SpanningTree { in_tree, parent }
    }

    fn path_from_root(&self, v: usize) -> Vec<OEdge> {
        let mut out = Vec::new();
        let mut cur = v;
        while let Some((d, p)) = self.parent[cur] {
            out.push(d);
            cur = p;
        }
        out.reverse();
        out
    }
}

fn marking_inverse(g: &Graph, base: usize, loops: &[Path]) -> Result<Vec<Word>> {
    let tree = TreeData::new(g, base);
    let nx = tree.generators.len();
    let mut slot = vec![usize::MAX; g.edge_count()];
    for (j, &e) in tree.generators.iter().enumerate() {
        slot[e] = j;
    }
    let to_x = |p: &Path| -> Word {
        let mut w = Vec::new();
        for &d in p.edges() {
            if !tree.in_tree[d.edge()] {
                push_reduced(&mut w, OEdge::new(slot[d.edge()], d.is_rev()));
            }
        }
        w
    };
    let us: Vec<Word> = loops.iter().map(to_x).collect();
    let xs = express_basis(nx, &us)?;
    let mut inverse = vec![Vec::new(); g.edge_count()];
    for (j, &e) in tree.generators.iter().enumerate() {
        inverse[e] = xs[j].clone();
    }
    Ok(inverse)
}

struct TreeData {
    in_tree: Vec<bool>,
    generators: Vec<usize>,
}

impl TreeData {
    fn new(g: &Graph, root: usize) -> Self {
        let t = SpanningTree::new(g, root);
        let generators = (0..g.edge_count()).filter(|&e| !t.in_tree[e]).collect();
        TreeData { in_tree: t.in_tree, generators }
    }
}

/// Given words `us` in the free group on `nx` letters, express each letter
/// as a word in the `us`. Fails unless the `us` form a basis.
///
/// Stallings folding of the bouquet of `us`, where every edge also carries
/// a tag in the free group on the `us`; folds conjugate tags at the vertex
/// being eliminated so that the tag of every closed path at the base is
/// preserved.
pub fn express_basis(nx: usize, us: &[Word]) -> Result<Vec<Word>> {
    if us.len() != nx {
        return Err(Error::BadMarking(format!("{} words for rank {nx}", us.len())));
    }
    // edges: (from, to, label, tag) with label/tag read from -> to
    let mut edges: Vec<Option<(usize, usize, OEdge, Word)>> = Vec::new();
    let mut nverts = 1;
    for (i, u) in us.iter().enumerate() {
        if u.is_empty() {
            return Err(Error::BadMarking("trivial generator image".into()));
        }
        let mut prev = 0;
        for (k, &x) in u.iter().enumerate() {
            let next = if k + 1 == u.len() {
                0
            } else {
                nverts += 1;
                nverts - 1
            };
            let tag = if k == 0 { vec![OEdge::fwd(i)] } else { Vec::new() };
            edges.push(Some((prev, next, x, tag)));
            prev = next;
        }
    }
    let mut alive = vec![true; nverts];
    loop {
        let Some((e1, r1, e2, r2)) = find_fold(&edges) else { break };
        let (w1, t1) = end_data(&edges, e1, r1);
        let (w2, t2) = end_data(&edges, e2, r2);
        if w1 == w2 {
            if t1 != t2 {
                return Err(Error::BadMarking("generator images satisfy a relation".into()));
            }
            edges[e2] = None;
            continue;
        }
        // eliminate a non-base vertex
        let (keep, kill, tk, tl, dead) = if w2 != 0 { (w1, w2, t1, t2, e2) } else { (w2, w1, t2, t1, e1) };
        // conjugation g with tl * g = tk at `kill`
        let mut g = invert_word(&tl);
        g.extend(tk);
        let g = reduce_word(&g);
        let gi = invert_word(&g);
        for slot in edges.iter_mut().flatten() {
            if slot.1 == kill {
                let mut t = std::mem::take(&mut slot.3);
                t.extend(g.iter().copied());
                slot.3 = reduce_word(&t);
            }
            if slot.0 == kill {
                let mut t = gi.clone();
                t.extend(slot.3.iter().copied());
                slot.3 = reduce_word(&t);
            }
        }
        edges[dead] = None;
        for slot in edges.iter_mut().flatten() {
            if slot.0 == kill {
                slot.0 = keep;
            }
            if slot.1 == kill {
                slot.1 = keep;
            }
        }
        alive[kill] = false;
    }
    let live: Vec<_> = edges.iter().flatten().collect();
    if alive.iter().filter(|a| **a).count() != 1 || live.len() != nx {
        return Err(Error::BadMarking("generator images do not generate".into()));
    }
    let mut out: Vec<Option<Word>> = vec![None; nx];
    for (_, _, x, t) in live {
        let w = if x.is_rev() { invert_word(t) } else { t.clone() };
        if out[x.edge()].replace(w).is_some() {
            return Err(Error::BadMarking("generator images do not generate".into()));
        }
    }
    out.into_iter()
        .map(|w| w.ok_or_else(|| Error::BadMarking("generator images do not generate".into())))
        .collect()
}

// two distinct edge-ends at one vertex with the same outgoing label
fn find_fold(edges: &[Option<(usize, usize, OEdge, Word)>]) -> Option<(usize, bool, usize, bool)> {
    let mut ends: Vec<(usize, OEdge, usize, bool)> = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        if let Some((a, b, x, _)) = e {
            ends.push((*a, *x, i, false));
            ends.push((*b, x.inv(), i, true));
        }
    }
    ends.sort();
    for p in ends.windows(2) {
        if p[0].0 == p[1].0 && p[0].1 == p[1].1 && (p[0].2 != p[1].2) {
            return Some((p[0].2, p[0].3, p[1].2, p[1].3));
        }
    }
    None
}

// (far vertex, tag) of an edge read outward from one end
fn end_data(edges: &[Option<(usize, usize, OEdge, Word)>], e: usize, rev: bool) -> (usize, Word) {
    let (a, b, _, t) = edges[e].as_ref().unwrap();
    if rev {
        (*a, invert_word(t))
    } else {
        (*b, t.clone())
    }
}

/// An automorphism of the free group: the image word of each generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automorphism {
    pub images: Vec<Word>,
}

impl Automorphism {
    pub fn identity(n: usize) -> Self {
        Automorphism { images: (0..n).map(|i| vec![OEdge::fwd(i)]).collect() }
    }

    pub fn apply(&self, w: &[OEdge]) -> Word {
        let mut out = Vec::new();
        for &x in w {
            let img = &self.images[x.edge()];
            if x.is_rev() {
                for &y in img.iter().rev() {
                    push_reduced(&mut out, y.inv());
                }
            } else {
                for &y in img {
                    push_reduced(&mut out, y);
                }
            }
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism { images: other.images.iter().map(|w| self.apply(w)).collect() }
    }

    pub fn inverse(&self) -> Result<Automorphism> {
        let n = self.images.len();
        Ok(Automorphism { images: express_basis(n, &self.images)? })
    }

    /// True iff this automorphism is conjugation by some element.
    pub fn is_inner(&self) -> bool {
        let n = self.images.len();
        if n == 0 {
            return true;
        }
        // image of x0 must be p x0 p^-1
        let w0 = &self.images[0];
        let c = crate::graph::cyclic_reduce(w0);
        if c != [OEdge::fwd(0)] {
            return false;
        }
        let k = (w0.len() - 1) / 2;
        let p: Word = w0[..k].to_vec();
        let pi = invert_word(&p);
        let x0 = OEdge::fwd(0);
        // remaining freedom: conjugator p x0^m
        let mut m: Option<i64> = None;
        for i in 1..n {
            let mut q = pi.clone();
            q.extend(self.images[i].iter().copied());
            q.extend(p.iter().copied());
            let q = reduce_word(&q);
            // q must equal x0^m xi x0^-m
            let lead = q.iter().take_while(|&&y| y == x0 || y == x0.inv()).count();
            let s: i64 = if lead > 0 && q[0] == x0.inv() { -(lead as i64) } else { lead as i64 };
            let mut expect = Vec::new();
            let pow = |e: i64| -> Word {
                let d = if e >= 0 { x0 } else { x0.inv() };
                vec![d; e.unsigned_abs() as usize]
            };
            expect.extend(pow(s));
            expect.push(OEdge::fwd(i));
            expect.extend(pow(-s));
            if reduce_word(&expect) != q {
                return false;
            }
            match m {
                None => m = Some(s),
                Some(prev) if prev != s => return false,
                _ => {}
            }
        }
        true
    }

    /// Equal up to an inner automorphism.
    pub fn outer_eq(&self, other: &Automorphism) -> Result<bool> {
        Ok(self.compose(&other.inverse()?).is_inner())
    }
}
