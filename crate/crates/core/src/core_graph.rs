//! Subgraphs, immersed graphs over a marked graph, and carrying tests.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Circuit, Graph, OEdge, Path};

/// A subset of the edges of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreSubgraph {
    pub edges: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub contractible: bool,
}

impl CoreSubgraph {
    pub fn new(g: &Graph, edges: Vec<bool>) -> Self {
        assert_eq!(edges.len(), g.edge_count());
        CoreSubgraph { edges }
    }

    pub fn empty(g: &Graph) -> Self {
        CoreSubgraph { edges: vec![false; g.edge_count()] }
    }

    pub fn full(g: &Graph) -> Self {
        CoreSubgraph { edges: vec![true; g.edge_count()] }
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges[e]
    }

    pub fn edge_ids<'a>(&'a self, g: &'a Graph) -> Vec<&'a str> {
        (0..g.edge_count()).filter(|&e| self.edges[e]).map(|e| g.edge(e).id.as_str()).collect()
    }

    pub fn vertices(&self, g: &Graph) -> Vec<bool> {
        let mut out = vec![false; g.vertex_count()];
        for e in 0..g.edge_count() {
            if self.edges[e] {
                out[g.edge(e).init] = true;
                out[g.edge(e).term] = true;
            }
        }
        out
    }

    /// No vertex of the subgraph has valence one within it.
    pub fn is_core(&self, g: &Graph) -> bool {
        let mut val = vec![0usize; g.vertex_count()];
        for e in 0..g.edge_count() {
            if self.edges[e] {
                val[g.edge(e).init] += 1;
                val[g.edge(e).term] += 1;
            }
        }
        val.iter().all(|&n| n != 1)
    }

    pub fn components(&self, g: &Graph) -> Vec<Component> {
        components_of(g, &self.edges)
    }
}

/// Connected components of the subgraph spanned by `alive` edges.
pub fn components_of(g: &Graph, alive: &[bool]) -> Vec<Component> {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut used = vec![false; n];
    for e in 0..g.edge_count() {
        if alive[e] {
            let (a, b) = (g.edge(e).init, g.edge(e).term);
            used[a] = true;
            used[b] = true;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut comps: Vec<Component> = Vec::new();
    for v in 0..n {
        if !used[v] {
            continue;
        }
        let r = find(&mut parent, v);
        let i = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                comps.push(Component { vertices: Vec::new(), edges: Vec::new(), contractible: true });
                comps.len() - 1
            }
        };
        comps[i].vertices.push(v);
    }
    for e in 0..g.edge_count() {
        if alive[e] {
            let r = find(&mut parent, g.edge(e).init);
            let i = roots.iter().position(|&x| x == r).unwrap();
            comps[i].edges.push(e);
        }
    }
    for c in &mut comps {
        c.contractible = c.edges.len() + 1 == c.vertices.len();
    }
    comps
}

/// A graph `K` with a map to `G` sending each edge to a nontrivial reduced
/// path, used for subgroup and groupoid membership by unique lifting.
#[derive(Clone, Debug)]
pub struct Immersion {
    pub graph: Graph,
    pub labels: Vec<Vec<OEdge>>,
    pub vmap: Vec<usize>,
    pub target: Arc<Graph>,
}

impl Immersion {
    pub fn new(graph: Graph, labels: Vec<Vec<OEdge>>, vmap: Vec<usize>, target: Arc<Graph>) -> Result<Self> {
        for (e, l) in labels.iter().enumerate() {
            let ed = graph.edge(e);
            if l.is_empty() || target.init(l[0]) != vmap[ed.init] || target.term(*l.last().unwrap()) != vmap[ed.term] {
                return Err(Error::InvalidMap(format!("label of {} does not fit its endpoints", ed.id)));
            }
        }
        let imm = Immersion { graph, labels, vmap, target };
        if !imm.is_immersion() {
            return Err(Error::InvalidMap("not locally injective".into()));
        }
        Ok(imm)
    }

    /// The inclusion of a subgraph of `g`.
    pub fn from_subgraph(g: &Arc<Graph>, sub: &CoreSubgraph) -> Self {
        let mut k = Graph::new();
        let mut vmap = Vec::new();
        let mut index = vec![usize::MAX; g.vertex_count()];
        for (v, used) in sub.vertices(g).into_iter().enumerate() {
            if used {
                index[v] = k.add_vertex(g.vertex_name(v)).unwrap();
                vmap.push(v);
            }
        }
        let mut labels = Vec::new();
        for e in 0..g.edge_count() {
            if sub.edges[e] {
                let ed = g.edge(e);
                k.add_edge(&ed.id, index[ed.init], index[ed.term]).unwrap();
                labels.push(vec![OEdge::fwd(e)]);
            }
        }
        Immersion { graph: k, labels, vmap, target: g.clone() }
    }

    /// Stallings graph of the subgroup generated by closed paths at a
    /// common basepoint.
    pub fn from_loops(g: &Arc<Graph>, loops: &[Path]) -> Result<Self> {
        let base = match loops.first() {
            Some(p) => p.start(),
            None => return Err(Error::InvalidMap("no loops".into())),
        };
        // vertices: 0 is the base; edges labeled by single edges of g
        let mut vmap = vec![base];
        let mut edges: Vec<(usize, usize, OEdge)> = Vec::new();
        for p in loops {
            if p.start() != base || !p.is_closed() || p.is_trivial() {
                return Err(Error::InvalidMap("loops must be nontrivial and closed at one basepoint".into()));
            }
            let mut cur = 0;
            for (i, &d) in p.edges().iter().enumerate() {
                let next = if i + 1 == p.len() {
                    0
                } else {
                    vmap.push(g.term(d));
                    vmap.len() - 1
                };
                edges.push((cur, next, d));
                cur = next;
            }
        }
        let (nv, edges, vmap) = fold_labeled(vmap.len(), edges, vmap);
        let mut k = Graph::new();
        for v in 0..nv {
            k.add_vertex(&format!("k{v}"))?;
        }
        let mut labels = Vec::new();
        for (i, (a, b, d)) in edges.into_iter().enumerate() {
            k.add_edge(&format!("k{i}"), a, b)?;
            labels.push(vec![d]);
        }
        Ok(Immersion { graph: k, labels, vmap, target: g.clone() })
    }

    pub fn label(&self, d: OEdge) -> Vec<OEdge> {
        let l = &self.labels[d.edge()];
        if d.is_rev() {
            l.iter().rev().map(|x| x.inv()).collect()
        } else {
            l.clone()
        }
    }

    fn first_label(&self, d: OEdge) -> OEdge {
        let l = &self.labels[d.edge()];
        if d.is_rev() {
            l.last().unwrap().inv()
        } else {
            l[0]
        }
    }

    pub fn is_immersion(&self) -> bool {
        (0..self.graph.vertex_count()).all(|v| {
            let mut firsts: Vec<OEdge> = self.graph.directions_at(v).into_iter().map(|d| self.first_label(d)).collect();
            let n = firsts.len();
            firsts.sort();
            firsts.dedup();
            firsts.len() == n
        })
    }

    /// Unique lift of the edge word `w` from vertex `u`, ending at a vertex.
    pub fn lift_from(&self, u: usize, w: &[OEdge]) -> Option<usize> {
        let mut v = u;
        let mut i = 0;
        while i < w.len() {
            let d = self
                .graph
                .directions_at(v)
                .into_iter()
                .find(|&d| self.first_label(d) == w[i])?;
            let l = self.label(d);
            if w.len() - i < l.len() || w[i..i + l.len()] != l[..] {
                return None;
            }
            i += l.len();
            v = self.graph.term(d);
        }
        Some(v)
    }

    /// Some lift of `p` starts and ends at vertices of `K`.
    pub fn lifts_path(&self, p: &Path) -> bool {
        (0..self.graph.vertex_count())
            .filter(|&u| self.vmap[u] == p.start())
            .any(|u| self.lift_from(u, p.edges()).is_some())
    }

    /// `c` lifts to a closed loop. A closed lift passes through a vertex of
    /// `K`, so it suffices to start at every position over a `K` vertex.
    pub fn carries(&self, c: &Circuit) -> bool {
        let w = c.edges();
        let n = w.len();
        for r in 0..n {
            let rot: Vec<OEdge> = w[r..].iter().chain(&w[..r]).copied().collect();
            let start = self.target.init(rot[0]);
            for u in 0..self.graph.vertex_count() {
                if self.vmap[u] == start && self.lift_from(u, &rot) == Some(u) {
                    return true;
                }
            }
        }
        false
    }

    pub fn components(&self) -> Vec<Component> {
        let mut comps = components_of(&self.graph, &vec![true; self.graph.edge_count()]);
        // isolated vertices are contractible components too
        let mut seen = vec![false; self.graph.vertex_count()];
        for c in &comps {
            for &v in &c.vertices {
                seen[v] = true;
            }
        }
        for (v, s) in seen.into_iter().enumerate() {
            if !s {
                comps.push(Component { vertices: vec![v], edges: vec![], contractible: true });
            }
        }
        comps
    }
}

/// Whether the circuit lifts to a closed loop in the immersion.
pub fn carries_class(sub: &Immersion, c: &Circuit) -> bool {
    sub.carries(c)
}

// identify edges with equal label at equal vertex until none remain
fn fold_labeled(
    nv: usize,
    mut edges: Vec<(usize, usize, OEdge)>,
    vmap: Vec<usize>,
) -> (usize, Vec<(usize, usize, OEdge)>, Vec<usize>) {
    let mut alive_v = vec![true; nv];
    loop {
        let mut hit = None;
        'outer: for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (a1, b1, l1) = edges[i];
                let (a2, b2, l2) = edges[j];
                // compare the two ends of each edge
                for (x1, y1, m1) in [(a1, b1, l1), (b1, a1, l1.inv())] {
                    for (x2, y2, m2) in [(a2, b2, l2), (b2, a2, l2.inv())] {
                        if x1 == x2 && m1 == m2 {
                            hit = Some((j, y1, y2));
                            break 'outer;
                        }
                    }
                }
            }
        }
        let Some((j, keep, kill)) = hit else { break };
        edges.remove(j);
        if keep != kill {
            let (keep, kill) = if kill == 0 { (kill, keep) } else { (keep, kill) };
            for e in &mut edges {
                if e.0 == kill {
                    e.0 = keep;
                }
                if e.1 == kill {
                    e.1 = keep;
                }
            }
            alive_v[kill] = false;
        }
    }
    let mut index = vec![usize::MAX; nv];
    let mut new_vmap = Vec::new();
    for v in 0..nv {
        if alive_v[v] {
            index[v] = new_vmap.len();
            new_vmap.push(vmap[v]);
        }
    }
    let edges = edges.into_iter().map(|(a, b, l)| (index[a], index[b], l)).collect();
    (new_vmap.len(), edges, new_vmap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cyclic_tighten;

    fn rose3() -> Arc<Graph> {
        Arc::new(Graph::rose(&["a", "b", "c"]))
    }

    fn circ(g: &Graph, s: &str) -> Circuit {
        cyclic_tighten(g, &g.parse_word(s).unwrap()).unwrap()
    }

    #[test]
    fn loop_c_carries_only_c() {
        let g = rose3();
        let sub = CoreSubgraph::new(&g, vec![false, false, true]);
        let imm = Immersion::from_subgraph(&g, &sub);
        assert!(carries_class(&imm, &circ(&g, "c")));
        assert!(carries_class(&imm, &circ(&g, "c^-1 c^-1")));
        assert!(!carries_class(&imm, &circ(&g, "a b")));
        let whole = Immersion::from_subgraph(&g, &CoreSubgraph::full(&g));
        assert!(carries_class(&whole, &circ(&g, "a b c^-1 a")));
    }

    #[test]
    fn stallings_graph_of_conjugated_generator() {
        let g = rose3();
        let l = Path::parse(&g, "a b a^-1").unwrap();
        let imm = Immersion::from_loops(&g, &[l]).unwrap();
        assert!(imm.is_immersion());
        assert!(imm.carries(&circ(&g, "b")));
        assert!(imm.carries(&circ(&g, "b b")));
        assert!(!imm.carries(&circ(&g, "a")));
        assert!(imm.lifts_path(&Path::parse(&g, "a b b a^-1").unwrap()));
    }

    #[test]
    fn folding_shares_prefixes() {
        let g = rose3();
        let loops = [Path::parse(&g, "a b").unwrap(), Path::parse(&g, "a c").unwrap()];
        let imm = Immersion::from_loops(&g, &loops).unwrap();
        // a b and a c share the a edge
        assert_eq!(imm.graph.edge_count(), 3);
        assert!(imm.carries(&circ(&g, "b^-1 c")));
    }

    #[test]
    fn components_and_contractibility() {
        let mut g = Graph::new();
        for v in ["u", "v", "w"] {
            g.add_vertex(v).unwrap();
        }
        g.add_edge("x", 0, 1).unwrap();
        g.add_edge("y", 1, 0).unwrap();
        g.add_edge("z", 2, 2).unwrap();
        g.add_edge("t", 1, 2).unwrap();
        let sub = CoreSubgraph::new(&g, vec![true, false, false, false]);
        let comps = sub.components(&g);
        assert_eq!(comps.len(), 1);
        assert!(comps[0].contractible);
        let sub = CoreSubgraph::new(&g, vec![true, true, true, false]);
        let comps = sub.components(&g);
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| !c.contractible));
        assert!(sub.is_core(&g));
    }
}
