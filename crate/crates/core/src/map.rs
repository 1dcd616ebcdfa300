//! Graph maps, the induced maps on paths and directions, bounded
//! cancellation, and the double-sharp operator.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::cancellation::ImageAutomaton;
use crate::error::{Error, Result};
use crate::graph::{
    canonical_circuit, check_composable, common_prefix, cyclic_reduce, push_reduced, Circuit, Graph, OEdge, Path,
};

/// Default abort threshold for iterated images.
pub const BLOWUP_GUARD: usize = 1_000_000;

/// A map between graphs sending vertices to vertices and edges to reduced
/// edge paths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    source: Arc<Graph>,
    target: Arc<Graph>,
    vmap: Vec<usize>,
    emap: Vec<Path>,
}

impl GraphMap {
    /// Edge images may be trivial only for maps that are not topological
    /// representatives (marking changes); see [`GraphMap::require_nontrivial`].
    pub fn new(source: Arc<Graph>, target: Arc<Graph>, vmap: Vec<usize>, emap: Vec<Path>) -> Result<Self> {
        if vmap.len() != source.vertex_count() || emap.len() != source.edge_count() {
            return Err(Error::InvalidMap("vertex or edge table has the wrong size".into()));
        }
        if vmap.iter().any(|&v| v >= target.vertex_count()) {
            return Err(Error::InvalidMap("vertex image out of range".into()));
        }
        for (e, img) in emap.iter().enumerate() {
            let ed = source.edge(e);
            if img.start() != vmap[ed.init] || img.end() != vmap[ed.term] {
                return Err(Error::InvalidMap(format!(
                    "image of {} does not run between the images of its endpoints",
                    ed.id
                )));
            }
        }
        Ok(GraphMap { source, target, vmap, emap })
    }

    /// Build from edge words, tightening each; vertex images are taken from
    /// `vmap` where given and otherwise read off the edge images.
    pub fn from_words(
        source: Arc<Graph>,
        target: Arc<Graph>,
        words: Vec<Vec<OEdge>>,
        vmap: Vec<Option<usize>>,
    ) -> Result<Self> {
        let mut vm = vmap;
        vm.resize(source.vertex_count(), None);
        for (e, w) in words.iter().enumerate() {
            check_composable(&target, w)?;
            let ed = source.edge(e);
            if let (Some(&first), Some(&last)) = (w.first(), w.last()) {
                for (v, t) in [(ed.init, target.init(first)), (ed.term, target.term(last))] {
                    match vm[v] {
                        Some(x) if x != t => {
                            return Err(Error::InvalidMap(format!(
                                "vertex {} is sent to both {} and {}",
                                source.vertex_name(v),
                                target.vertex_name(x),
                                target.vertex_name(t)
                            )))
                        }
                        _ => vm[v] = Some(t),
                    }
                }
            }
        }
        let vmap: Vec<usize> = vm
            .iter()
            .enumerate()
            .map(|(v, x)| {
                x.ok_or_else(|| Error::InvalidMap(format!("no image for vertex {}", source.vertex_name(v))))
            })
            .collect::<Result<_>>()?;
        let emap = words
            .iter()
            .enumerate()
            .map(|(e, w)| crate::graph::tighten(&target, vmap[source.edge(e).init], w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, vmap, emap)
    }

    pub fn identity(g: Arc<Graph>) -> Self {
        let vmap = (0..g.vertex_count()).collect();
        let emap = (0..g.edge_count()).map(|e| Path::from_reduced(&g, g.edge(e).init, vec![OEdge::fwd(e)])).collect();
        GraphMap { source: g.clone(), target: g, vmap, emap }
    }

    pub fn require_nontrivial(&self) -> Result<()> {
        for (e, p) in self.emap.iter().enumerate() {
            if p.is_trivial() {
                return Err(Error::InvalidMap(format!("edge {} has trivial image", self.source.edge(e).id)));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<Graph> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Graph> {
        &self.target
    }

    /// The graph of a self-map.
    pub fn graph(&self) -> &Graph {
        &self.source
    }

    pub fn is_self_map(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target) || self.source == self.target
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vmap[v]
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vmap
    }

    pub fn edge_image(&self, e: usize) -> &Path {
        &self.emap[e]
    }

    pub fn edge_images(&self) -> &[Path] {
        &self.emap
    }

    /// Image of an oriented edge as an edge word.
    pub fn image(&self, d: OEdge) -> Vec<OEdge> {
        let p = self.emap[d.edge()].edges();
        if d.is_rev() {
            p.iter().rev().map(|x| x.inv()).collect()
        } else {
            p.to_vec()
        }
    }

    /// Push the image of `d` onto a reduced word.
    pub fn push_image(&self, out: &mut Vec<OEdge>, d: OEdge) {
        let p = self.emap[d.edge()].edges();
        if d.is_rev() {
            for &x in p.iter().rev() {
                push_reduced(out, x.inv());
            }
        } else {
            for &x in p {
                push_reduced(out, x);
            }
        }
    }

    /// Length of the longest edge image.
    pub fn lipschitz(&self) -> usize {
        self.emap.iter().map(|p| p.len()).max().unwrap_or(0)
    }

    pub fn total_image_length(&self) -> usize {
        self.emap.iter().map(|p| p.len()).sum()
    }

    /// `f#(p)`.
    pub fn map_path(&self, p: &Path) -> Path {
        let mut out = Vec::new();
        for &d in p.edges() {
            self.push_image(&mut out, d);
        }
        Path::from_reduced(&self.target, self.vmap[p.start()], out)
    }

    /// `f#` on an unreduced word of composable edges.
    pub fn map_word(&self, w: &[OEdge]) -> Vec<OEdge> {
        let mut out = Vec::new();
        for &d in w {
            self.push_image(&mut out, d);
        }
        out
    }

    /// `f^k_#(p)`, aborting once an iterate exceeds `guard` edges.
    pub fn iterate_path(&self, p: &Path, k: usize, guard: usize) -> Result<Path> {
        let mut cur = p.clone();
        for _ in 0..k {
            cur = self.map_path(&cur);
            if cur.len() > guard {
                return Err(Error::Blowup(guard));
            }
        }
        Ok(cur)
    }

    pub fn map_circuit(&self, c: &Circuit) -> Result<Circuit> {
        let w = self.map_word(c.edges());
        let r = cyclic_reduce(&w);
        if r.is_empty() {
            return Err(Error::TrivialClass);
        }
        Ok(canonical_circuit(&self.target, r.to_vec()))
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &GraphMap) -> Result<GraphMap> {
        if *f.target != *self.source {
            return Err(Error::InvalidMap("composing maps whose graphs do not match".into()));
        }
        let vmap = f.vmap.iter().map(|&v| self.vmap[v]).collect();
        let emap = f.emap.iter().map(|p| self.map_path(p)).collect();
        Ok(GraphMap { source: f.source.clone(), target: self.target.clone(), vmap, emap })
    }

    /// `f^k` for a self-map; `k = 0` is the identity.
    pub fn power(&self, k: usize) -> Result<GraphMap> {
        let mut acc = GraphMap::identity(self.source.clone());
        for _ in 0..k {
            acc = self.after(&acc)?;
            if acc.total_image_length() > BLOWUP_GUARD {
                return Err(Error::Blowup(BLOWUP_GUARD));
            }
        }
        Ok(acc)
    }

    /// `Df`: the first direction of the image of `d`.
    pub fn derivative(&self, d: OEdge) -> OEdge {
        let p = self.emap[d.edge()].edges();
        if d.is_rev() {
            p.last().expect("derivative of a collapsed edge").inv()
        } else {
            p[0]
        }
    }

    pub fn derivative_table(&self) -> Vec<OEdge> {
        self.source.oedges().map(|d| self.derivative(d)).collect()
    }

    pub fn derivative_pow(&self, d: OEdge, k: usize) -> OEdge {
        (0..k).fold(d, |x, _| self.derivative(x))
    }

    /// Legal iff no `Df` iterate of the turn is degenerate. The orbit of an
    /// unordered pair is eventually periodic within the number of pairs.
    pub fn is_legal_turn(&self, d1: OEdge, d2: OEdge) -> bool {
        Legality::new(self).is_legal(d1, d2)
    }

    pub fn is_immersion(&self) -> bool {
        for v in 0..self.source.vertex_count() {
            let mut seen = HashMap::new();
            for d in self.source.directions_at(v) {
                if seen.insert(self.derivative(d), d).is_some() {
                    return false;
                }
            }
        }
        true
    }

    /// The least bounded cancellation constant. The fold-sum bound checks
    /// the map is a homotopy equivalence and caps the exact search.
    pub fn bcc(&self) -> Result<usize> {
        let upper = crate::folds::bcc_from_folds(self)?;
        crate::cancellation::exact_bcc(self, upper)
    }
}

/// Memoized turn legality for one map.
pub struct Legality<'a> {
    f: &'a GraphMap,
    df: Vec<OEdge>,
    bound: usize,
    memo: HashMap<(OEdge, OEdge), bool>,
}

impl<'a> Legality<'a> {
    pub fn new(f: &'a GraphMap) -> Self {
        let n = 2 * f.source.edge_count();
        Legality { f, df: f.derivative_table(), bound: n * (n - 1) / 2 + 1, memo: HashMap::new() }
    }

    pub fn map(&self) -> &GraphMap {
        self.f
    }

    pub fn df(&self, d: OEdge) -> OEdge {
        self.df[d.index()]
    }

    /// Steps until the pair first becomes degenerate, if ever.
    pub fn degenerate_at(&self, d1: OEdge, d2: OEdge) -> Option<usize> {
        let (mut a, mut b) = (d1, d2);
        for k in 0..=self.bound {
            if a == b {
                return Some(k);
            }
            a = self.df(a);
            b = self.df(b);
        }
        None
    }

    pub fn is_legal(&mut self, d1: OEdge, d2: OEdge) -> bool {
        let key = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.degenerate_at(d1, d2).is_none();
        self.memo.insert(key, v);
        v
    }

    /// Turn taken between consecutive edges `x` then `y` of a path.
    pub fn junction_legal(&mut self, x: OEdge, y: OEdge) -> bool {
        self.is_legal(x.inv(), y)
    }
}

/// Result of `f##(β)`: the surviving window `[left, image_len - right)` of `f#(β)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DoubleSharp {
    #[serde(skip)]
    pub path: Path,
    pub left: usize,
    pub right: usize,
    pub image_len: usize,
    pub bcc: usize,
}

impl DoubleSharp {
    pub fn is_trivial(&self) -> bool {
        self.path.is_trivial()
    }
}

/// Work budget for the extension search in [`double_sharp_with`], counted
/// in image edges visited so long images cannot stall it.
pub const EXTENSION_BUDGET: usize = 20_000_000;

/// `f##` for one map, reusable across paths.
///
/// An extension `x` on the left eats the common prefix of `f#(x̄)` and
/// `f#(β)`. When the image automaton fits, that prefix is read off it
/// exactly. Otherwise extensions are grown edge by edge and a branch stops
/// once its image disagrees with `f#(β)` more than `bcc` edges before its
/// end, since further growth cannot reach back past that point.
pub struct DoubleSharper<'a> {
    f: &'a GraphMap,
    bcc: usize,
    automaton: Option<ImageAutomaton>,
}

impl<'a> DoubleSharper<'a> {
    pub fn new(f: &'a GraphMap) -> Result<Self> {
        Ok(Self::with_bcc(f, f.bcc()?))
    }

    pub fn with_bcc(f: &'a GraphMap, bcc: usize) -> Self {
        DoubleSharper { f, bcc, automaton: ImageAutomaton::new(f) }
    }

    pub fn bcc(&self) -> usize {
        self.bcc
    }

    pub fn apply(&self, beta: &Path) -> Result<DoubleSharp> {
        let (f, bcc) = (self.f, self.bcc);
        let g = f.source();
        let image = f.map_path(beta);
        let t = image.edges();
        let n = t.len();
        if beta.is_trivial() || n == 0 {
            return Ok(DoubleSharp { path: image.clone(), left: 0, right: 0, image_len: n, bcc });
        }
        let rev_t: Vec<OEdge> = t.iter().rev().map(|d| d.inv()).collect();
        let eaten = |v: usize, avoid: OEdge, t: &[OEdge]| match &self.automaton {
            Some(a) => {
                let dirs: Vec<OEdge> = g.directions_at(v).into_iter().filter(|&d| d != avoid).collect();
                Ok(a.longest_prefix(&dirs, t))
            }
            None => max_eaten(f, g, v, avoid, t, bcc),
        };
        let left = eaten(beta.start(), beta.first().unwrap(), t)?;
        let right = eaten(beta.end(), beta.last().unwrap().inv(), &rev_t)?;
        let path = if left + right >= n {
            // empty window; place it where the cuts meet
            let at = left.min(n);
            let v = if at == 0 { image.start() } else { f.target().term(t[at - 1]) };
            Path::trivial(v)
        } else {
            image.subpath(f.target(), left, n - right)
        };
        Ok(DoubleSharp { path, left, right, image_len: n, bcc })
    }
}

/// `f##(β)` with cancellation constant `bcc`.
pub fn double_sharp_with(f: &GraphMap, beta: &Path, bcc: usize) -> Result<DoubleSharp> {
    DoubleSharper::with_bcc(f, bcc).apply(beta)
}

pub fn double_sharp(f: &GraphMap, beta: &Path) -> Result<DoubleSharp> {
    DoubleSharper::new(f)?.apply(beta)
}

/// `f##(β)` by the extension search alone, never consulting the automaton.
pub fn double_sharp_by_extensions(f: &GraphMap, beta: &Path, bcc: usize) -> Result<DoubleSharp> {
    DoubleSharper { f, bcc, automaton: None }.apply(beta)
}

// largest common prefix of f#(p) with `t`, over reduced paths p from `v`
// whose first edge is not `avoid`
fn max_eaten(f: &GraphMap, g: &Graph, v: usize, avoid: OEdge, t: &[OEdge], bcc: usize) -> Result<usize> {
    let mut best = 0;
    let mut work = 0usize;
    // (last edge, image of path so far)
    let mut stack: Vec<(OEdge, Vec<OEdge>)> = Vec::new();
    for d in g.directions_at(v) {
        if d != avoid {
            stack.push((d, f.image(d)));
        }
    }
    while let Some((last, img)) = stack.pop() {
        work += img.len() + 1;
        if work > EXTENSION_BUDGET {
            return Err(Error::Blowup(EXTENSION_BUDGET));
        }
        let l = common_prefix(&img, t);
        best = best.max(l);
        if best == t.len() {
            return Ok(best);
        }
        if img.len() > l + bcc {
            continue;
        }
        for d in g.directions_at(g.term(last)) {
            if d == last.inv() {
                continue;
            }
            let mut next = img.clone();
            f.push_image(&mut next, d);
            stack.push((d, next));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::golden;

    fn p(f: &GraphMap, s: &str) -> Path {
        Path::parse(f.graph(), s).unwrap()
    }

    #[test]
    fn map_path_golden() {
        let f = golden();
        let g = f.graph();
        assert_eq!(f.map_path(&p(&f, "a b^-1")).display(g).to_string(), "a^-1");
        assert_eq!(f.map_path(&p(&f, "b")).display(g).to_string(), "a b");
    }

    #[test]
    fn derivative_and_legality_golden() {
        let f = golden();
        let g = f.graph();
        let d = |s: &str| g.parse_oedge(s).unwrap();
        assert_eq!(f.derivative(d("a")), d("b"));
        assert_eq!(f.derivative(d("b")), d("a"));
        assert_eq!(f.derivative(d("a^-1")), d("b^-1"));
        assert_eq!(f.derivative(d("b^-1")), d("b^-1"));
        assert!(!f.is_legal_turn(d("a^-1"), d("b^-1")));
        assert!(f.is_legal_turn(d("a"), d("b")));
    }

    #[test]
    fn identity_is_trivial_everywhere() {
        let g = Arc::new(Graph::rose(&["a", "b"]));
        let id = GraphMap::identity(g.clone());
        let q = Path::parse(&g, "a b a^-1 b").unwrap();
        assert_eq!(id.map_path(&q), q);
        assert_eq!(id.bcc().unwrap(), 0);
        let ds = double_sharp(&id, &q).unwrap();
        assert_eq!(ds.path, q);
    }

    #[test]
    fn power_matches_iteration() {
        let f = golden();
        let f3 = f.power(3).unwrap();
        let q = p(&f, "a b^-1 a a");
        assert_eq!(f3.map_path(&q), f.iterate_path(&q, 3, BLOWUP_GUARD).unwrap());
    }
}
