//! Invariant filtrations, stratum classification and Perron-Frobenius data.

use std::collections::BTreeSet;
use std::sync::Arc;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, OEdge, Path};
use crate::map::GraphMap;

/// Strata listed bottom first, as edge-index sets partitioning the edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub strata: Vec<Vec<usize>>,
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Stratum index of each edge.
    pub fn heights(&self, edge_count: usize) -> Vec<usize> {
        let mut h = vec![0; edge_count];
        for (r, s) in self.strata.iter().enumerate() {
            for &e in s {
                h[e] = r;
            }
        }
        h
    }

    /// Edge membership of `G_r`, the union of strata `0..=r`.
    pub fn prefix(&self, r: usize, edge_count: usize) -> Vec<bool> {
        let mut m = vec![false; edge_count];
        for s in &self.strata[..=r] {
            for &e in s {
                m[e] = true;
            }
        }
        m
    }

    /// Every edge image of `H_r` stays in `G_r`.
    pub fn is_invariant(&self, f: &GraphMap) -> bool {
        let h = self.heights(f.graph().edge_count());
        (0..f.graph().edge_count()).all(|e| f.edge_image(e).edges().iter().all(|d| h[d.edge()] <= h[e]))
    }

    pub fn edge_ids(&self, g: &Graph, r: usize) -> Vec<String> {
        self.strata[r].iter().map(|&e| g.edge(e).id.clone()).collect()
    }
}

/// The maximal refinement into irreducible and zero strata: strongly
/// connected components of the edge-transition digraph, sinks first, ties
/// broken by the smallest edge id in each component.
pub fn compute_filtration(f: &GraphMap) -> Filtration {
    let g = f.graph();
    let n = g.edge_count();
    let mut dg: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<_> = (0..n).map(|e| dg.add_node(e)).collect();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in 0..n {
        for d in f.edge_image(e).edges() {
            if succ[e].insert(d.edge()) {
                dg.add_edge(nodes[e], nodes[d.edge()], ());
            }
        }
    }
    let comps: Vec<Vec<usize>> = tarjan_scc(&dg)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| dg[x]).collect();
            v.sort_by_key(|&e| g.key(OEdge::fwd(e)));
            v
        })
        .collect();
    let mut comp_of = vec![0; n];
    for (i, c) in comps.iter().enumerate() {
        for &e in c {
            comp_of[e] = i;
        }
    }
    let deps: Vec<BTreeSet<usize>> = comps
        .iter()
        .enumerate()
        .map(|(i, c)| c.iter().flat_map(|&e| succ[e].iter().map(|&x| comp_of[x])).filter(|&j| j != i).collect())
        .collect();
    let priority = |i: usize| g.key(OEdge::fwd(comps[i][0]));
    let mut placed = vec![false; comps.len()];
    let mut order = Vec::new();
    while order.len() < comps.len() {
        let next = (0..comps.len())
            .filter(|&i| !placed[i] && deps[i].iter().all(|&j| placed[j]))
            .min_by_key(|&i| priority(i))
            .expect("condensation is acyclic");
        placed[next] = true;
        order.push(comps[next].clone());
    }
    Filtration { strata: order }
}

/// Entry `(i, j)` counts occurrences of edge `j` or its reversal in `f(E_i)`.
pub fn transition_matrix(f: &GraphMap, stratum: &[usize]) -> Vec<Vec<u64>> {
    let pos = |e: usize| stratum.iter().position(|&x| x == e);
    let mut m = vec![vec![0u64; stratum.len()]; stratum.len()];
    for (i, &e) in stratum.iter().enumerate() {
        for d in f.edge_image(e).edges() {
            if let Some(j) = pos(d.edge()) {
                m[i][j] += 1;
            }
        }
    }
    m
}

fn reach(m: &[Vec<u64>], from: usize, transpose: bool) -> Vec<bool> {
    let n = m.len();
    let mut seen = vec![false; n];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let w = if transpose { m[j][i] } else { m[i][j] };
            if w > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

/// Irreducible: the digraph of positive entries is strongly connected and
/// the matrix is not the 1x1 zero matrix.
pub fn is_irreducible(m: &[Vec<u64>]) -> bool {
    if m.is_empty() || (m.len() == 1 && m[0][0] == 0) {
        return false;
    }
    reach(m, 0, false).into_iter().all(|x| x) && reach(m, 0, true).into_iter().all(|x| x)
}

pub fn is_zero(m: &[Vec<u64>]) -> bool {
    m.iter().all(|r| r.iter().all(|&x| x == 0))
}

/// Exact growth class of a nonnegative integer matrix.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    /// Spectral radius 0.
    Nilpotent,
    /// Spectral radius 1.
    Polynomial,
    /// Spectral radius > 1.
    Exponential,
}

/// Decided on strongly connected blocks: a block has spectral radius 1 iff
/// every row sums to one inside it (a cyclic permutation), radius 0 iff it
/// is a single vertex without a loop, and radius > 1 otherwise.
pub fn growth(m: &[Vec<u64>]) -> Growth {
    let n = m.len();
    let mut dg: DiGraph<usize, ()> = DiGraph::new();
    let nodes: Vec<_> = (0..n).map(|i| dg.add_node(i)).collect();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > 0 {
                dg.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut out = Growth::Nilpotent;
    for comp in tarjan_scc(&dg) {
        let idx: Vec<usize> = comp.iter().map(|&x| dg[x]).collect();
        if idx.len() == 1 && m[idx[0]][idx[0]] == 0 {
            continue;
        }
        let cyclic = idx.iter().all(|&i| idx.iter().map(|&j| m[i][j]).sum::<u64>() == 1);
        if !cyclic {
            return Growth::Exponential;
        }
        out = Growth::Polynomial;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PfData {
    pub lambda: f64,
    /// Collatz-Wielandt bounds bracketing `lambda`.
    pub lower: f64,
    pub upper: f64,
    /// Right eigenvector, entries summing to one.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

pub const PF_TOLERANCE: f64 = 1e-12;
const PF_MAX_ITER: usize = 200_000;

/// Perron-Frobenius eigenvalue and right eigenvector of an irreducible
/// matrix, by power iteration on `I + M` (which is primitive).
pub fn pf(m: &[Vec<u64>]) -> Result<PfData> {
    pf_with(m, PF_TOLERANCE)
}

pub fn pf_with(m: &[Vec<u64>], tol: f64) -> Result<PfData> {
    if !is_irreducible(m) {
        return Err(Error::Reducible);
    }
    let n = m.len();
    if growth(m) == Growth::Polynomial {
        return Ok(PfData { lambda: 1.0, lower: 1.0, upper: 1.0, vector: vec![1.0 / n as f64; n], iterations: 0 });
    }
    let mv = |v: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| m[i][j] as f64 * v[j]).sum()).collect()
    };
    let mut v = vec![1.0 / n as f64; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    let mut it = 0;
    while it < PF_MAX_ITER {
        it += 1;
        let w = mv(&v);
        lo = (0..n).map(|i| w[i] / v[i]).fold(f64::INFINITY, f64::min);
        hi = (0..n).map(|i| w[i] / v[i]).fold(0.0, f64::max);
        if hi - lo <= tol * hi {
            break;
        }
        let mut next: Vec<f64> = (0..n).map(|i| v[i] + w[i]).collect();
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= s);
        v = next;
    }
    Ok(PfData { lambda: 0.5 * (lo + hi), lower: lo, upper: hi, vector: v, iterations: it })
}

/// Period of an irreducible matrix: gcd of cycle lengths.
pub fn period(m: &[Vec<u64>]) -> usize {
    let n = m.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0]);
    let mut g = 0usize;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if m[i][j] == 0 {
                continue;
            }
            if level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            } else {
                g = gcd(g, (level[i] + 1).abs_diff(level[j]));
            }
        }
    }
    g
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least `p` with `M^p` strictly positive, for an irreducible aperiodic
/// matrix; bounded by Wielandt's `(n-1)^2 + 1`.
pub fn positivity_exponent(m: &[Vec<u64>]) -> Option<usize> {
    let n = m.len();
    let bound = (n - 1) * (n - 1) + 1;
    let support: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut p = support.clone();
    for k in 1..=bound {
        if p.iter().all(|r| r.iter().all(|&x| x)) {
            return Some(k);
        }
        p = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|l| p[i][l] && support[l][j])).collect())
            .collect();
    }
    None
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StratumKind {
    Eg,
    NegFixed,
    NegNonfixed,
    NegLinear,
    Zero,
}

impl StratumKind {
    pub fn is_neg(self) -> bool {
        matches!(self, StratumKind::NegFixed | StratumKind::NegNonfixed | StratumKind::NegLinear)
    }
}

/// One edge of a nonexponentially growing stratum in normal form:
/// `f(edge) = next · u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegEdge {
    pub edge: OEdge,
    pub next: OEdge,
    pub u: Path,
    pub linear: bool,
}

#[derive(Clone, Debug)]
pub enum NegNormalForm {
    Direct(Vec<NegEdge>),
    /// The stratum needed subdividing; the new map, its filtration, and the
    /// normal forms of the resulting strata.
    Subdivided { map: GraphMap, filtration: Filtration, forms: Vec<Vec<NegEdge>> },
}

#[derive(Clone, Debug, Serialize)]
pub struct NegEdgeReport {
    pub edge: String,
    pub next: String,
    pub u: String,
    pub linear: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    pub height: usize,
    pub edges: Vec<String>,
    #[serde(skip)]
    pub edge_indices: Vec<usize>,
    pub kind: StratumKind,
    pub matrix: Vec<Vec<u64>>,
    pub pf: Option<PfData>,
    pub aperiodic: Option<bool>,
    pub positivity_exponent: Option<usize>,
    pub neg_form: Option<Vec<NegEdgeReport>>,
    pub needs_subdivision: bool,
    pub enveloped_by: Option<usize>,
}

/// Classify every stratum of an invariant filtration.
pub fn classify_strata(f: &GraphMap, filt: &Filtration) -> Vec<StratumReport> {
    let g = f.graph();
    let mut out: Vec<StratumReport> = filt
        .strata
        .iter()
        .enumerate()
        .map(|(r, s)| {
            let m = transition_matrix(f, s);
            let mut rep = StratumReport {
                height: r,
                edges: filt.edge_ids(g, r),
                edge_indices: s.clone(),
                kind: StratumKind::Zero,
                matrix: m.clone(),
                pf: None,
                aperiodic: None,
                positivity_exponent: None,
                neg_form: None,
                needs_subdivision: false,
                enveloped_by: None,
            };
            if !is_irreducible(&m) {
                return rep;
            }
            rep.pf = pf(&m).ok();
            rep.aperiodic = Some(period(&m) == 1);
            rep.positivity_exponent = positivity_exponent(&m);
            if growth(&m) == Growth::Exponential {
                rep.kind = StratumKind::Eg;
                return rep;
            }
            match neg_normal_form(f, filt, r) {
                NegNormalForm::Direct(form) => {
                    rep.kind = neg_kind(&form);
                    rep.neg_form = Some(form.iter().map(|x| neg_report(g, x)).collect());
                }
                NegNormalForm::Subdivided { .. } => {
                    rep.kind = StratumKind::NegNonfixed;
                    rep.needs_subdivision = true;
                }
            }
            rep
        })
        .collect();
    let kinds: Vec<StratumKind> = out.iter().map(|r| r.kind).collect();
    for r in 0..out.len() {
        if kinds[r] == StratumKind::Zero {
            out[r].enveloped_by = enveloping_stratum(f, filt, &kinds, r);
        }
    }
    out
}

fn neg_kind(form: &[NegEdge]) -> StratumKind {
    if form.iter().all(|x| x.u.is_trivial()) {
        if form.len() == 1 && form[0].next == form[0].edge {
            StratumKind::NegFixed
        } else {
            StratumKind::NegNonfixed
        }
    } else if form.iter().all(|x| x.linear) {
        StratumKind::NegLinear
    } else {
        StratumKind::NegNonfixed
    }
}

fn neg_report(g: &Graph, x: &NegEdge) -> NegEdgeReport {
    NegEdgeReport {
        edge: g.fmt_oedge(x.edge),
        next: g.fmt_oedge(x.next),
        u: x.u.display(g).to_string(),
        linear: x.linear,
    }
}

/// The lowest EG stratum above a zero stratum whose edge images reach it,
/// possibly through other zero strata.
fn enveloping_stratum(f: &GraphMap, filt: &Filtration, kinds: &[StratumKind], r: usize) -> Option<usize> {
    let h = filt.heights(f.graph().edge_count());
    let mut targets: BTreeSet<usize> = BTreeSet::from([r]);
    for s in r + 1..filt.len() {
        let hits = filt.strata[s]
            .iter()
            .any(|&e| f.edge_image(e).edges().iter().any(|d| targets.contains(&h[d.edge()])));
        if hits {
            match kinds[s] {
                StratumKind::Eg => return Some(s),
                StratumKind::Zero => {
                    targets.insert(s);
                }
                _ => {}
            }
        }
    }
    None
}

/// Iterates cap for deciding whether a suffix path is a periodic Nielsen path.
pub const LINEAR_PERIOD_CAP: usize = 4;

/// Normal form `f(E_i) = E_{i+1} u_i` of a nonexponentially growing
/// stratum, subdividing when no orientation achieves it.
pub fn neg_normal_form(f: &GraphMap, filt: &Filtration, r: usize) -> NegNormalForm {
    let stratum = &filt.strata[r];
    if let Some(form) = direct_form(f, stratum) {
        return NegNormalForm::Direct(form);
    }
    let (map, second) = subdivide_stratum(f, stratum);
    let filtration = compute_filtration(&map);
    let h = filtration.heights(map.graph().edge_count());
    // the halves of the stratum land in one or two new strata
    let mut new_strata: Vec<usize> = Vec::new();
    for &e in stratum {
        for x in [h[e], h[second[e]]] {
            if !new_strata.contains(&x) {
                new_strata.push(x);
            }
        }
    }
    new_strata.sort();
    let forms = new_strata
        .iter()
        .map(|&s| direct_form(&map, &filtration.strata[s]).expect("subdivided stratum has a normal form"))
        .collect();
    NegNormalForm::Subdivided { map, filtration, forms }
}

fn occurrence(f: &GraphMap, d: OEdge, stratum: &[usize]) -> (usize, OEdge) {
    let img = f.image(d);
    let (i, &x) = img
        .iter()
        .enumerate()
        .find(|(_, x)| stratum.contains(&x.edge()))
        .expect("edge of an irreducible stratum maps over the stratum");
    (i, x)
}

fn direct_form(f: &GraphMap, stratum: &[usize]) -> Option<Vec<NegEdge>> {
    let g = f.graph();
    // orient along the cycle starting from the first edge
    let start = OEdge::fwd(stratum[0]);
    let mut cycle = vec![start];
    let mut cur = start;
    loop {
        let (_, next) = occurrence(f, cur, stratum);
        if next.edge() == start.edge() {
            if next != start {
                return None;
            }
            break;
        }
        cycle.push(next);
        cur = next;
    }
    for flip in [false, true] {
        let dirs: Vec<OEdge> = cycle.iter().map(|&d| if flip { d.inv() } else { d }).collect();
        if dirs.iter().all(|&d| occurrence(f, d, stratum).0 == 0) {
            let form = dirs
                .iter()
                .map(|&d| {
                    let img = f.image(d);
                    let u = Path::from_reduced(g, g.term(img[0]), img[1..].to_vec());
                    let linear = !u.is_trivial() && u.is_closed() && is_periodic_path(f, &u, LINEAR_PERIOD_CAP);
                    NegEdge { edge: d, next: img[0], u, linear }
                })
                .collect();
            return Some(form);
        }
    }
    None
}

/// `f^k_#(p) = p` for some `1 <= k <= cap`.
pub fn is_periodic_path(f: &GraphMap, p: &Path, cap: usize) -> bool {
    let mut cur = p.clone();
    for _ in 0..cap {
        cur = f.map_path(&cur);
        if cur == *p {
            return true;
        }
        if cur.len() > 4 * p.len() + 64 {
            return false;
        }
    }
    false
}

fn half_id(g: &Graph, e: usize) -> String {
    g.fresh_edge_id(&g.edge(e).id)
}

/// Split every stratum edge at the point carried onto the stratum
/// occurrence in its image. Returns the new map and, per original edge,
/// the index of its second half.
pub fn subdivide_stratum(f: &GraphMap, stratum: &[usize]) -> (GraphMap, Vec<usize>) {
    let g0 = f.graph();
    let mut g = g0.clone();
    let mut second = vec![usize::MAX; g0.edge_count()];
    let mut mid = vec![usize::MAX; g0.edge_count()];
    for &e in stratum {
        let id = half_id(g0, e);
        let vid = g.fresh_vertex_id(&g0.edge(e).id);
        let (_, b, m) = g.subdivide(e, &id, &vid).unwrap();
        second[e] = b;
        mid[e] = m;
    }
    let expand = |d: OEdge, out: &mut Vec<OEdge>| {
        let e = d.edge();
        if second[e] == usize::MAX {
            out.push(d);
        } else if d.is_rev() {
            out.extend([OEdge::new(second[e], true), OEdge::new(e, true)]);
        } else {
            out.extend([OEdge::fwd(e), OEdge::fwd(second[e])]);
        }
    };
    let mut words: Vec<Vec<OEdge>> = vec![Vec::new(); g.edge_count()];
    let mut vmap: Vec<Option<usize>> = (0..g0.vertex_count()).map(|v| Some(f.vertex_image(v))).collect();
    vmap.resize(g.vertex_count(), None);
    for e in 0..g0.edge_count() {
        let img = f.image(OEdge::fwd(e));
        if second[e] == usize::MAX {
            let mut w = Vec::new();
            img.iter().for_each(|&d| expand(d, &mut w));
            words[e] = w;
            continue;
        }
        let (i, occ) = occurrence(f, OEdge::fwd(e), stratum);
        let mut a = Vec::new();
        img[..i].iter().for_each(|&d| expand(d, &mut a));
        let mut b = Vec::new();
        let j = occ.edge();
        let (first_half, second_half) = if occ.is_rev() {
            (OEdge::new(second[j], true), OEdge::new(j, true))
        } else {
            (OEdge::fwd(j), OEdge::fwd(second[j]))
        };
        a.push(first_half);
        b.push(second_half);
        img[i + 1..].iter().for_each(|&d| expand(d, &mut b));
        words[e] = a;
        words[second[e]] = b;
        vmap[mid[e]] = Some(mid[j]);
    }
    let ga = Arc::new(g);
    let map = GraphMap::from_words(ga.clone(), ga, words, vmap).expect("subdivided map is well formed");
    (map, second)
}
