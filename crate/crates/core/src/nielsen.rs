//! Periodic Nielsen paths: bounded search, indivisibility, uniqueness and
//! the combinatorial geometricity test.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{common_prefix, Graph, OEdge, Path};
use crate::map::{GraphMap, Legality};
use crate::strata::Filtration;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NielsenCaps {
    pub length: usize,
    pub period: usize,
}

impl NielsenCaps {
    /// Length `4 * |edges|`, period 4.
    pub fn default_for(g: &Graph) -> Self {
        NielsenCaps { length: 4 * g.edge_count(), period: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NielsenPath {
    pub path: Path,
    /// Least `k` with `f^k_#(path) = path`.
    pub period: usize,
    pub height: usize,
    pub indivisible: bool,
    /// For paths of EG height: positions `i` where the turn between edges
    /// `i - 1` and `i` is an illegal turn of that height.
    pub illegal_turns: Vec<usize>,
    pub closed: bool,
}

impl NielsenPath {
    /// The two halves at the first illegal turn.
    pub fn halves(&self, g: &Graph) -> Option<(Path, Path)> {
        let &i = self.illegal_turns.first()?;
        Some((self.path.subpath(g, 0, i), self.path.subpath(g, i, self.path.len())))
    }
}

#[derive(Clone, Debug)]
pub struct NielsenCatalog {
    /// One representative per reversal pair, sorted.
    pub paths: Vec<NielsenPath>,
    /// The search never reached the length cap, so the catalog holds every
    /// indivisible periodic Nielsen path of period at most `caps.period`.
    pub complete: bool,
    pub caps: NielsenCaps,
    /// Cancellation constant used for each period `1..=caps.period`.
    pub bcc: Vec<usize>,
}

impl NielsenCatalog {
    pub fn empty(caps: NielsenCaps) -> Self {
        NielsenCatalog { paths: Vec::new(), complete: true, caps, bcc: Vec::new() }
    }

    pub fn indivisible_of_height(&self, r: usize) -> impl Iterator<Item = &NielsenPath> {
        self.paths.iter().filter(move |p| p.indivisible && p.height == r)
    }

    /// Entries and their reversals, for matching inside longer paths.
    pub fn oriented_paths(&self) -> Vec<&Path> {
        self.paths.iter().map(|p| &p.path).collect()
    }
}

/// Least `k <= cap` with `f^k_#(p) = p`.
pub fn nielsen_period(f: &GraphMap, p: &Path, cap: usize) -> Option<usize> {
    if p.is_trivial() {
        return None;
    }
    let mut cur = p.clone();
    for k in 1..=cap {
        cur = f.map_path(&cur);
        if cur == *p {
            return Some(k);
        }
    }
    None
}

/// Not a concatenation of two nontrivial periodic Nielsen paths.
pub fn is_indivisible(f: &GraphMap, p: &Path, cap: usize) -> bool {
    let g = f.graph();
    (1..p.len()).all(|i| {
        nielsen_period(f, &p.subpath(g, 0, i), cap).is_none()
            || nielsen_period(f, &p.subpath(g, i, p.len()), cap).is_none()
    })
}

/// Canonical orientation of a path up to reversal.
pub fn canonical_orientation(g: &Graph, p: &Path) -> Path {
    let r = p.reversed();
    let key = |q: &Path| q.edges().iter().map(|&d| g.key(d)).collect::<Vec<_>>();
    if key(&r) < key(p) {
        r
    } else {
        p.clone()
    }
}

/// Search for periodic Nielsen paths of every height.
///
/// For each period `k`, paths are grown from `f^k`-fixed vertices. A prefix
/// `σ` of a Nielsen path `ρ` must agree with `f^k_#(σ)` on all but the last
/// `bcc(f^k)` edges of the latter, since that much of `f^k_#(σ)` survives in
/// `f^k_#(ρ) = ρ`. Growth stops at a fixed path: anything longer through it
/// is divisible.
pub fn nielsen_search(f: &GraphMap, filt: &Filtration, caps: NielsenCaps) -> Result<NielsenCatalog> {
    let g = f.graph();
    let heights = filt.heights(g.edge_count());
    let mut found: BTreeMap<Vec<u32>, Path> = BTreeMap::new();
    let mut complete = true;
    let mut bccs = Vec::new();
    for k in 1..=caps.period {
        let fk = f.power(k)?;
        let b = fk.bcc()?;
        bccs.push(b);
        for p in 0..g.vertex_count() {
            if fk.vertex_image(p) != p {
                continue;
            }
            let mut stack: Vec<(Vec<OEdge>, Vec<OEdge>)> =
                g.directions_at(p).into_iter().map(|d| (vec![d], fk.image(d))).collect();
            while let Some((sigma, img)) = stack.pop() {
                let agree = common_prefix(&img, &sigma);
                if agree < sigma.len().min(img.len().saturating_sub(b)) {
                    continue;
                }
                if img == sigma {
                    let path = canonical_orientation(g, &Path::from_reduced(g, p, sigma));
                    found.entry(path.edges().iter().map(|&d| g.key(d)).collect()).or_insert(path);
                    continue;
                }
                if sigma.len() == caps.length {
                    complete = false;
                    continue;
                }
                let last = *sigma.last().unwrap();
                for d in g.directions_at(g.term(last)) {
                    if d == last.inv() {
                        continue;
                    }
                    let mut s2 = sigma.clone();
                    s2.push(d);
                    let mut i2 = img.clone();
                    fk.push_image(&mut i2, d);
                    stack.push((s2, i2));
                }
            }
        }
    }
    let mut legality = Legality::new(f);
    let mut paths: Vec<NielsenPath> = found
        .into_values()
        .map(|path| describe(f, &heights, &mut legality, path, caps.period))
        .filter(|p| p.indivisible)
        .collect();
    paths.sort_by_key(|p| (p.height, p.path.len(), p.path.edges().iter().map(|&d| g.key(d)).collect::<Vec<_>>()));
    Ok(NielsenCatalog { paths, complete, caps, bcc: bccs })
}

fn describe(f: &GraphMap, heights: &[usize], legality: &mut Legality, path: Path, cap: usize) -> NielsenPath {
    let height = path.edges().iter().map(|d| heights[d.edge()]).max().unwrap_or(0);
    let e = path.edges();
    let illegal_turns = (1..e.len())
        .filter(|&i| {
            heights[e[i - 1].edge()] == height && heights[e[i].edge()] == height && !legality.junction_legal(e[i - 1], e[i])
        })
        .collect();
    NielsenPath {
        period: nielsen_period(f, &path, cap).expect("search only emits periodic paths"),
        height,
        indivisible: is_indivisible(f, &path, cap),
        illegal_turns,
        closed: path.is_closed(),
        path,
    }
}

/// At most one indivisible Nielsen path of height `r`, up to reversal;
/// otherwise two distinct witnesses.
pub fn eg_uniqueness_check(catalog: &NielsenCatalog, r: usize) -> std::result::Result<(), (NielsenPath, NielsenPath)> {
    let mut it = catalog.indivisible_of_height(r);
    match (it.next(), it.next()) {
        (Some(a), Some(b)) => Err((a.clone(), b.clone())),
        _ => Ok(()),
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Geometric,
    Nongeometric,
    NoInp,
    Inconclusive,
}

/// Combinatorial geometricity of an EG stratum from its indivisible Nielsen
/// path: closed, based off `G_{r-1}` and crossing each stratum edge twice
/// means geometric; not closed with some stratum edge crossed once means
/// nongeometric.
pub fn classify_geometry(f: &GraphMap, filt: &Filtration, r: usize, catalog: &NielsenCatalog) -> Geometry {
    let g = f.graph();
    let inps: Vec<&NielsenPath> = catalog.indivisible_of_height(r).collect();
    let rho = match inps.as_slice() {
        [] if catalog.complete => return Geometry::NoInp,
        [rho] => rho,
        _ => return Geometry::Inconclusive,
    };
    let mut crossings: BTreeMap<usize, usize> = filt.strata[r].iter().map(|&e| (e, 0)).collect();
    for d in rho.path.edges() {
        if let Some(c) = crossings.get_mut(&d.edge()) {
            *c += 1;
        }
    }
    let lower = if r == 0 { vec![false; g.edge_count()] } else { filt.prefix(r - 1, g.edge_count()) };
    let base = rho.path.start();
    let base_in_lower = (0..g.edge_count()).any(|e| lower[e] && (g.edge(e).init == base || g.edge(e).term == base));
    if rho.closed && !base_in_lower && crossings.values().all(|&c| c == 2) {
        Geometry::Geometric
    } else if !rho.closed && crossings.values().any(|&c| c == 1) {
        Geometry::Nongeometric
    } else {
        Geometry::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NielsenPathReport {
    pub path: String,
    pub period: usize,
    pub height: usize,
    pub closed: bool,
    pub halves: Option<[String; 2]>,
}

pub fn report(g: &Graph, p: &NielsenPath) -> NielsenPathReport {
    NielsenPathReport {
        path: p.path.display(g).to_string(),
        period: p.period,
        height: p.height,
        closed: p.closed,
        halves: p.halves(g).map(|(a, b)| [a.display(g).to_string(), b.display(g).to_string()]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{golden, golden_squared, linear, reducible};
    use crate::strata::compute_filtration;

    fn catalog(f: &GraphMap, len: usize, period: usize) -> NielsenCatalog {
        nielsen_search(f, &compute_filtration(f), NielsenCaps { length: len, period }).unwrap()
    }

    fn shown(f: &GraphMap, c: &NielsenCatalog) -> Vec<String> {
        c.paths.iter().map(|p| p.path.display(f.graph()).to_string()).collect()
    }

    #[test]
    fn fixed_edge_is_nielsen() {
        let f = reducible();
        let c = catalog(&f, 8, 2);
        assert!(shown(&f, &c).contains(&"c".to_string()));
    }

    #[test]
    fn golden_squared_has_the_commutator() {
        let f = golden_squared();
        let c = catalog(&f, 10, 1);
        let inps: Vec<_> = c.indivisible_of_height(0).collect();
        assert_eq!(inps.len(), 1, "{:?}", shown(&f, &c));
        let rho = inps[0];
        assert!(rho.closed);
        assert_eq!(rho.illegal_turns.len(), 1);
        assert_eq!(rho.path.len(), 4);
        assert_eq!(classify_geometry(&f, &compute_filtration(&f), 0, &c), Geometry::Geometric);
    }

    #[test]
    fn golden_commutator_has_period_two() {
        let f = golden();
        let c = catalog(&f, 10, 2);
        let inps: Vec<_> = c.indivisible_of_height(0).collect();
        assert_eq!(inps.len(), 1);
        assert_eq!(inps[0].period, 2);
        assert!(catalog(&f, 10, 1).paths.is_empty());
    }

    #[test]
    fn linear_family() {
        let f = linear();
        let c = catalog(&f, 6, 1);
        let s = shown(&f, &c);
        assert!(s.contains(&"a".to_string()));
        assert!(s.contains(&"b a b^-1".to_string()) || s.contains(&"b a^-1 b^-1".to_string()));
        assert!(!c.complete);
        // b a^k b^-1 for k = 1..4; negative k are the reversals
        assert_eq!(c.paths.len(), 1 + 4, "{s:?}");
    }

    #[test]
    fn uniqueness_witnesses() {
        let f = linear();
        let c = catalog(&f, 6, 1);
        assert!(eg_uniqueness_check(&c, 1).is_err());
        assert!(eg_uniqueness_check(&NielsenCatalog::empty(c.caps), 0).is_ok());
    }
}
