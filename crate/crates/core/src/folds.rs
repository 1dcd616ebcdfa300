//! Stallings fold factorization.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{common_prefix, Graph, OEdge, Path};
use crate::map::GraphMap;

/// Default cap on fold steps; the complexity bound makes real inputs stop
/// far earlier.
pub const FOLD_BUDGET: usize = 100_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldClass {
    Partial,
    FullImproper,
    FullProper,
}

/// One fold `G_i -> G_{i+1}`.
#[derive(Clone, Debug)]
pub struct FoldStep {
    /// The folded turn, as directions of `G_i`.
    pub turn: (OEdge, OEdge),
    pub class: FoldClass,
    /// For proper folds: (the edge that folds, the edge it folds over).
    pub over: Option<(OEdge, OEdge)>,
    /// Common image of the identified segments.
    pub segment: Vec<OEdge>,
    /// The identified segments had the same far endpoint, so a loop died.
    pub collapses_loop: bool,
    /// `f_i: G_i -> G`.
    pub before: GraphMap,
    /// `G_i -> G_{i+1}`.
    pub fold_map: GraphMap,
    /// `f_{i+1}: G_{i+1} -> G`.
    pub quotient: GraphMap,
}

#[derive(Clone, Debug)]
pub struct Factorization {
    pub original: GraphMap,
    pub steps: Vec<FoldStep>,
    /// The immersion left when no turn is foldable.
    pub terminal: GraphMap,
}

impl Factorization {
    /// Compose the fold maps and the terminal immersion, tightened.
    pub fn recompose(&self) -> Result<GraphMap> {
        let mut acc = GraphMap::identity(self.original.source().clone());
        for s in &self.steps {
            acc = s.fold_map.after(&acc)?;
        }
        self.terminal.after(&acc)
    }

    /// The terminal immersion is an isomorphism up to subdivision.
    pub fn ends_in_isomorphism(&self) -> bool {
        is_subdivision_isomorphism(&self.terminal)
    }

    pub fn is_homotopy_equivalence(&self) -> bool {
        self.steps.iter().all(|s| !s.collapses_loop) && self.ends_in_isomorphism()
    }
}

pub fn stallings_factorize(f: &GraphMap) -> Result<Factorization> {
    stallings_factorize_with(f, FOLD_BUDGET)
}

pub fn stallings_factorize_with(f: &GraphMap, budget: usize) -> Result<Factorization> {
    f.require_nontrivial()?;
    let mut steps: Vec<FoldStep> = Vec::new();
    let mut cur = f.clone();
    while let Some((d1, d2)) = first_foldable_turn(&cur) {
        if steps.len() == budget {
            return Err(Error::FoldBudget { budget, partial: Box::new(steps) });
        }
        let before = cur.total_image_length();
        let step = fold_turn(&cur, d1, d2, None)?;
        assert_eq!(
            step.quotient.total_image_length() + step.segment.len(),
            before,
            "fold did not drop the complexity by the segment length"
        );
        cur = step.quotient.clone();
        steps.push(step);
    }
    Ok(Factorization { original: f.clone(), steps, terminal: cur })
}

/// Smallest vertex id, then smallest pair of direction keys, whose images
/// start with the same edge.
pub fn first_foldable_turn(f: &GraphMap) -> Option<(OEdge, OEdge)> {
    let g = f.source();
    let mut verts: Vec<usize> = (0..g.vertex_count()).collect();
    verts.sort_by(|&a, &b| g.vertex_name(a).cmp(g.vertex_name(b)));
    for v in verts {
        let mut dirs = g.directions_at(v);
        dirs.sort_by_key(|&d| g.key(d));
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                if f.derivative(dirs[i]) == f.derivative(dirs[j]) {
                    return Some((dirs[i], dirs[j]));
                }
            }
        }
    }
    None
}

/// The maximal fold at a turn, classified.
pub fn classify_fold(f: &GraphMap, d1: OEdge, d2: OEdge) -> Result<FoldStep> {
    fold_turn(f, d1, d2, None)
}

/// Fold the turn `{d1, d2}`, identifying initial segments whose common
/// image has `len` edges (default: the maximal common prefix). A shorter
/// `len` gives a generalized fold.
pub fn fold_turn(f: &GraphMap, d1: OEdge, d2: OEdge, len: Option<usize>) -> Result<FoldStep> {
    let g = f.source();
    if d1 == d2 || g.init(d1) != g.init(d2) || f.derivative(d1) != f.derivative(d2) {
        return Err(Error::NotFoldable);
    }
    let i1 = f.image(d1);
    let i2 = f.image(d2);
    let maxc = common_prefix(&i1, &i2);
    let c = len.unwrap_or(maxc);
    if c == 0 || c > maxc {
        return Err(Error::NotFoldable);
    }
    let (l1, l2) = (i1.len(), i2.len());
    let (class, over) = match (c == l1, c == l2) {
        (true, true) => (FoldClass::FullImproper, None),
        (true, false) => (FoldClass::FullProper, Some((d2, d1))),
        (false, true) => (FoldClass::FullProper, Some((d1, d2))),
        (false, false) => (FoldClass::Partial, None),
    };
    let mut st = Work::new(f);
    let p1 = st.cut(d1, c)?;
    let d2 = if d2.edge() == d1.edge() && d2.is_rev() && !d1.is_rev() && c < l1 {
        // d1's edge was split; the reversed end now lives on the second half
        OEdge::new(st.g.edge_count() - 1, true)
    } else {
        d2
    };
    let p2 = st.cut(d2, c)?;
    let collapses_loop = st.identify(p1, p2);
    let segment = i1[..c].to_vec();
    let (fold_map, quotient) = st.finish(f)?;
    Ok(FoldStep { turn: (d1, d2), class, over, segment, collapses_loop, before: f.clone(), fold_map, quotient })
}

// mutable copy of G_i being turned into G_{i+1}
struct Work {
    g: Graph,
    emap: Vec<Vec<OEdge>>,
    vmap: Vec<usize>,
    // image of each edge of G_i in the working graph
    fold_img: Vec<Vec<OEdge>>,
    // image of each vertex of G_i
    vimg: Vec<usize>,
    target: Arc<Graph>,
}

impl Work {
    fn new(f: &GraphMap) -> Self {
        let g = (**f.source()).clone();
        Work {
            emap: f.edge_images().iter().map(|p| p.edges().to_vec()).collect(),
            vmap: f.vertex_map().to_vec(),
            fold_img: (0..g.edge_count()).map(|e| vec![OEdge::fwd(e)]).collect(),
            vimg: (0..g.vertex_count()).collect(),
            g,
            target: f.target().clone(),
        }
    }

    fn image_len(&self, d: OEdge) -> usize {
        self.emap[d.edge()].len()
    }

    // the initial piece of `d` whose image has `c` edges, subdividing if needed
    fn cut(&mut self, d: OEdge, c: usize) -> Result<OEdge> {
        let l = self.image_len(d);
        if c == l {
            return Ok(d);
        }
        let e = d.edge();
        let at = if d.is_rev() { l - c } else { c };
        let id = self.g.edge(e).id.clone();
        let eid = self.g.fresh_edge_id(&id);
        let vid = self.g.fresh_vertex_id(&id);
        let (e1, e2, _m) = self.g.subdivide(e, &eid, &vid)?;
        let img = std::mem::take(&mut self.emap[e1]);
        self.vmap.push(self.target.term(img[at - 1]));
        self.emap[e1] = img[..at].to_vec();
        self.emap.push(img[at..].to_vec());
        let (f1, f2) = (OEdge::fwd(e1), OEdge::fwd(e2));
        for w in &mut self.fold_img {
            let mut out = Vec::with_capacity(w.len() + 1);
            for &x in w.iter() {
                if x == f1 {
                    out.extend([f1, f2]);
                } else if x == f1.inv() {
                    out.extend([f2.inv(), f1.inv()]);
                } else {
                    out.push(x);
                }
            }
            *w = out;
        }
        Ok(if d.is_rev() { f2.inv() } else { f1 })
    }

    // identify p2 with p1; returns whether their far ends already agreed
    fn identify(&mut self, p1: OEdge, p2: OEdge) -> bool {
        let w1 = self.g.term(p1);
        let w2 = self.g.term(p2);
        let dead = p2.edge();
        let relabel = |x: OEdge| -> OEdge {
            let x = if x.edge() == dead { if x.is_rev() == p2.is_rev() { p1 } else { p1.inv() } } else { x };
            if x.edge() > dead {
                OEdge::new(x.edge() - 1, x.is_rev())
            } else {
                x
            }
        };
        for w in &mut self.fold_img {
            for x in w.iter_mut() {
                *x = relabel(*x);
            }
        }
        self.g.remove_edge(dead);
        self.emap.remove(dead);
        if w1 == w2 {
            return true;
        }
        debug_assert_eq!(self.vmap[w1], self.vmap[w2]);
        self.g.merge_vertex(w2, w1);
        self.g.remove_vertex(w2);
        self.vmap.remove(w2);
        for v in &mut self.vimg {
            if *v == w2 {
                *v = w1;
            }
            if *v > w2 {
                *v -= 1;
            }
        }
        false
    }

    fn finish(self, f: &GraphMap) -> Result<(GraphMap, GraphMap)> {
        let next = Arc::new(self.g);
        let fold_map = GraphMap::from_words(
            f.source().clone(),
            next.clone(),
            self.fold_img,
            self.vimg.into_iter().map(Some).collect(),
        )?;
        let emap = self
            .emap
            .into_iter()
            .enumerate()
            .map(|(e, w)| Path::from_reduced(&self.target, self.vmap[next.edge(e).init], w))
            .collect();
        let quotient = GraphMap::new(next, self.target, self.vmap, emap)?;
        Ok((fold_map, quotient))
    }
}

/// An immersion whose core covers every target edge exactly once and every
/// target vertex exactly once.
pub fn is_subdivision_isomorphism(iota: &GraphMap) -> bool {
    let h = iota.source();
    let g = iota.target();
    let core = core_edges(h);
    let mut edge_hits = vec![0usize; g.edge_count()];
    let mut vertex_hits = vec![0usize; g.vertex_count()];
    let mut core_vertex = vec![false; h.vertex_count()];
    for e in 0..h.edge_count() {
        if !core[e] {
            continue;
        }
        core_vertex[h.edge(e).init] = true;
        core_vertex[h.edge(e).term] = true;
        let img = iota.edge_image(e).edges();
        for &d in img {
            edge_hits[d.edge()] += 1;
        }
        for &d in &img[..img.len().saturating_sub(1)] {
            vertex_hits[g.term(d)] += 1;
        }
    }
    for v in 0..h.vertex_count() {
        if core_vertex[v] {
            vertex_hits[iota.vertex_image(v)] += 1;
        }
    }
    iota.is_immersion() && edge_hits.iter().all(|&n| n == 1) && vertex_hits.iter().all(|&n| n == 1)
}

/// Edges of the core: prune valence-one vertices until none remain.
pub fn core_edges(h: &Graph) -> Vec<bool> {
    let mut alive = vec![true; h.edge_count()];
    let mut val: Vec<usize> = (0..h.vertex_count()).map(|v| h.valence(v)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for e in 0..h.edge_count() {
            if !alive[e] {
                continue;
            }
            let (a, b) = (h.edge(e).init, h.edge(e).term);
            if a != b && (val[a] == 1 || val[b] == 1) {
                alive[e] = false;
                val[a] -= 1;
                val[b] -= 1;
                changed = true;
            }
        }
    }
    alive
}

/// Bounded cancellation constant: each identification costs one edge of
/// `G_{i+1}`, stretched by the Lipschitz constant of the rest of the map.
pub fn bcc_from_folds(f: &GraphMap) -> Result<usize> {
    let fac = stallings_factorize(f)?;
    if let Some(s) = fac.steps.iter().find(|s| s.collapses_loop) {
        return Err(Error::NotHomotopyEquivalence(format!(
            "fold of {} and {} closes a loop",
            s.before.graph().fmt_oedge(s.turn.0),
            s.before.graph().fmt_oedge(s.turn.1)
        )));
    }
    if !fac.ends_in_isomorphism() {
        return Err(Error::NotHomotopyEquivalence("terminal immersion is not onto the target".into()));
    }
    Ok(fac.steps.iter().map(|s| s.quotient.lipschitz()).sum())
}

/// Edge table row for reports.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeRow {
    pub id: String,
    pub init: String,
    pub term: String,
    pub image: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoldSummary {
    pub turn: [String; 2],
    pub class: FoldClass,
    pub over: Option<[String; 2]>,
    pub segment: String,
    pub collapses_loop: bool,
    pub before: Vec<EdgeRow>,
    pub after: Vec<EdgeRow>,
}

pub fn edge_table(f: &GraphMap) -> Vec<EdgeRow> {
    let g = f.source();
    g.edges()
        .iter()
        .enumerate()
        .map(|(e, ed)| EdgeRow {
            id: ed.id.clone(),
            init: g.vertex_name(ed.init).to_string(),
            term: g.vertex_name(ed.term).to_string(),
            image: f.target().fmt_word(f.edge_image(e).edges()),
        })
        .collect()
}

impl FoldStep {
    pub fn summary(&self) -> FoldSummary {
        let g = self.before.graph();
        FoldSummary {
            turn: [g.fmt_oedge(self.turn.0), g.fmt_oedge(self.turn.1)],
            class: self.class,
            over: self.over.map(|(a, b)| [g.fmt_oedge(a), g.fmt_oedge(b)]),
            segment: self.before.target().fmt_word(&self.segment),
            collapses_loop: self.collapses_loop,
            before: edge_table(&self.before),
            after: edge_table(&self.quotient),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_maps::rose_map;

    #[test]
    fn identity_needs_no_folds() {
        let g = Arc::new(Graph::rose(&["a", "b"]));
        let fac = stallings_factorize(&GraphMap::identity(g)).unwrap();
        assert!(fac.steps.is_empty());
        assert!(fac.ends_in_isomorphism());
    }

    #[test]
    fn golden_recomposes() {
        let f = rose_map(&["a", "b"], &["b", "a b"]);
        let fac = stallings_factorize(&f).unwrap();
        assert!(!fac.steps.is_empty());
        assert_eq!(fac.recompose().unwrap().edge_images(), f.edge_images());
        assert!(fac.is_homotopy_equivalence());
    }

    #[test]
    fn classes() {
        let f = rose_map(&["x", "y", "c", "d", "e"], &["c", "c d", "c", "d", "e"]);
        let g = f.graph();
        let d = |s: &str| g.parse_oedge(s).unwrap();
        assert_eq!(classify_fold(&f, d("x"), d("y")).unwrap().class, FoldClass::FullProper);
        let s = classify_fold(&f, d("x"), d("y")).unwrap();
        assert_eq!(s.over, Some((d("y"), d("x"))));
        assert_eq!(classify_fold(&f, d("x"), d("c")).unwrap().class, FoldClass::FullImproper);
        let f = rose_map(&["x", "y", "c", "d", "e"], &["c d", "c e", "c", "d", "e"]);
        let g = f.graph();
        let s = classify_fold(&f, g.parse_oedge("x").unwrap(), g.parse_oedge("y").unwrap()).unwrap();
        assert_eq!(s.class, FoldClass::Partial);
        assert!(matches!(
            classify_fold(&f, g.parse_oedge("x").unwrap(), g.parse_oedge("d").unwrap()),
            Err(Error::NotFoldable)
        ));
    }

    #[test]
    fn loop_folded_with_its_reverse() {
        // a -> b a b^-1 folds a against a^-1
        let f = rose_map(&["a", "b"], &["b a b^-1", "b"]);
        let fac = stallings_factorize(&f).unwrap();
        assert_eq!(fac.recompose().unwrap().edge_images(), f.edge_images());
        assert!(fac.is_homotopy_equivalence());
    }

    #[test]
    fn non_equivalence_detected() {
        let f = rose_map(&["a", "b"], &["a a", "b"]);
        assert!(matches!(bcc_from_folds(&f), Err(Error::NotHomotopyEquivalence(_))));
        let f = rose_map(&["a", "b"], &["a b", "a b"]);
        assert!(matches!(bcc_from_folds(&f), Err(Error::NotHomotopyEquivalence(_))));
    }

    #[test]
    fn permutation_has_zero_bcc() {
        let f = rose_map(&["a", "b", "c"], &["b", "c^-1", "a"]);
        assert_eq!(bcc_from_folds(&f).unwrap(), 0);
    }
}
