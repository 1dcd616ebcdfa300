//! Tiles, lamination inclusion, the nonattracting system of an EG stratum,
//! weak attraction of circuits, the full irreducibility certificate,
//! singular rays and lines, and the translation-length limit.

use std::sync::Arc;

use serde::Serialize;

use crate::core_graph::{components_of, Component, Immersion};
use crate::error::{Error, Result};
use crate::graph::{contains_subpath, cyclic_tighten, Circuit, Graph, OEdge, Path};
use crate::map::{GraphMap, BLOWUP_GUARD};
use crate::nielsen::{nielsen_search, NielsenCaps, NielsenCatalog};
use crate::strata::{classify_strata, compute_filtration, Filtration, StratumKind};
use crate::train_track::{principal_directions, principal_vertices, verify_ct, Splitter, SplittingTerm, TermKind};

/// Default iteration cap for attraction and exclusion tests.
pub const KMAX: usize = 20;

const TERM_LENGTH_GUARD: usize = 200_000;

// circuit splitting tries every rotation, so unsplit circuits get a tighter cap
const ATTRACTION_LENGTH_GUARD: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tile {
    pub edge: OEdge,
    pub k: usize,
    pub path: Path,
}

/// The `k`-tile `f^k_#(E)`.
pub fn tile(f: &GraphMap, edge: OEdge, k: usize) -> Result<Tile> {
    let g = f.graph();
    let p = Path::from_reduced(g, g.init(edge), vec![edge]);
    Ok(Tile { edge, k, path: f.iterate_path(&p, k, BLOWUP_GUARD)? })
}

/// Each `(k + p)`-tile of stratum `r` contains every `k`-tile of `r` in
/// some orientation, where `p` is the positivity exponent of the stratum.
/// `None` when the stratum is not EG and aperiodic.
pub fn tiles_nest(f: &GraphMap, filt: &Filtration, r: usize, k: usize) -> Result<Option<bool>> {
    let rep = &classify_strata(f, filt)[r];
    let p = match (rep.kind, rep.positivity_exponent) {
        (StratumKind::Eg, Some(p)) => p,
        _ => return Ok(None),
    };
    for &e in &filt.strata[r] {
        let big = tile(f, OEdge::fwd(e), k + p)?;
        for &e2 in &filt.strata[r] {
            let small = tile(f, OEdge::fwd(e2), k)?;
            let rev = small.path.reversed();
            if !contains_subpath(big.path.edges(), small.path.edges()) && !contains_subpath(big.path.edges(), rev.edges()) {
                return Ok(Some(false));
            }
        }
    }
    Ok(Some(true))
}

/// The nonattracting subgraph `Z` of an EG stratum, the path `ρ̂`, and the
/// immersion `K -> G` whose lifts define the groupoid `<Z, ρ̂>`.
#[derive(Clone, Debug)]
pub struct NonattractingSystem {
    pub stratum: usize,
    pub z: Vec<bool>,
    /// Strata whose membership in `Z` was not settled within the cap.
    pub undecided: Vec<usize>,
    pub rho_hat: Path,
    pub k: Immersion,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonattractingReport {
    pub stratum: usize,
    pub z: Vec<String>,
    pub undecided: Vec<usize>,
    pub rho_hat: String,
    pub rho_trivial: bool,
    pub k_vertices: usize,
    pub k_edges: usize,
    pub components: Vec<ComponentReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub vertices: usize,
    pub edges: usize,
    pub contractible: bool,
}

impl NonattractingSystem {
    pub fn is_decided(&self) -> bool {
        self.undecided.is_empty()
    }

    pub fn report(&self, g: &Graph) -> NonattractingReport {
        NonattractingReport {
            stratum: self.stratum,
            z: (0..g.edge_count()).filter(|&e| self.z[e]).map(|e| g.edge(e).id.clone()).collect(),
            undecided: self.undecided.clone(),
            rho_hat: if self.rho_hat.is_trivial() {
                g.vertex_name(self.rho_hat.start()).to_string()
            } else {
                self.rho_hat.display(g).to_string()
            },
            rho_trivial: self.rho_hat.is_trivial(),
            k_vertices: self.k.graph.vertex_count(),
            k_edges: self.k.graph.edge_count(),
            components: self
                .components
                .iter()
                .map(|c| ComponentReport { vertices: c.vertices.len(), edges: c.edges.len(), contractible: c.contractible })
                .collect(),
        }
    }
}

enum Membership {
    Attracted,
    Nonattracted,
    Undecided,
}

// an edge is attracted once some f^k_#(E) has an H_r edge as a splitting term
fn edge_membership(sp: &mut Splitter, e: usize, r: usize, cap: usize) -> Membership {
    let f = sp.map();
    let g = f.graph();
    let heights = sp.heights().to_vec();
    let mut cur = Path::from_reduced(g, g.edge(e).init, vec![OEdge::fwd(e)]);
    let mut settled = true;
    for _ in 1..=cap {
        cur = f.map_path(&cur);
        if cur.len() > TERM_LENGTH_GUARD {
            return Membership::Undecided;
        }
        if !cur.edges().iter().any(|d| heights[d.edge()] == r) {
            continue;
        }
        match sp.split(&cur) {
            Ok(terms) if has_edge_term(&terms, r) => return Membership::Attracted,
            Ok(_) => {}
            Err(_) => settled = false,
        }
    }
    if settled {
        Membership::Nonattracted
    } else {
        Membership::Undecided
    }
}

fn has_edge_term(terms: &[SplittingTerm], r: usize) -> bool {
    terms.iter().any(|t| t.kind == TermKind::Edge && t.height == r)
}

pub fn build_nonattracting(f: &GraphMap, filt: &Filtration, r: usize, catalog: &NielsenCatalog) -> Result<NonattractingSystem> {
    build_nonattracting_with(f, filt, r, catalog, KMAX)
}

/// Assemble `Z`, `ρ̂` and `K`. Zero strata join `Z` with the stratum that
/// envelops them.
pub fn build_nonattracting_with(
    f: &GraphMap,
    filt: &Filtration,
    r: usize,
    catalog: &NielsenCatalog,
    cap: usize,
) -> Result<NonattractingSystem> {
    let g = f.graph();
    let reports = classify_strata(f, filt);
    if reports[r].kind != StratumKind::Eg {
        return Err(Error::Setup(format!("stratum {r} is not EG")));
    }
    let mut sp = Splitter::new(f, filt, catalog);
    let mut in_z = vec![false; filt.len()];
    let mut undecided = Vec::new();
    for i in 0..filt.len() {
        if i == r || reports[i].kind == StratumKind::Zero {
            continue;
        }
        let mut verdict = Membership::Nonattracted;
        for &e in &filt.strata[i] {
            match edge_membership(&mut sp, e, r, cap) {
                Membership::Attracted => {
                    verdict = Membership::Attracted;
                    break;
                }
                Membership::Undecided => verdict = Membership::Undecided,
                Membership::Nonattracted => {}
            }
        }
        match verdict {
            Membership::Nonattracted => in_z[i] = true,
            Membership::Undecided => undecided.push(i),
            Membership::Attracted => {}
        }
    }
    for i in 0..filt.len() {
        if reports[i].kind == StratumKind::Zero {
            match reports[i].enveloped_by {
                Some(s) if in_z[s] => in_z[i] = true,
                Some(s) if undecided.contains(&s) => undecided.push(i),
                _ => {}
            }
        }
    }
    undecided.sort_unstable();
    let heights = filt.heights(g.edge_count());
    let z: Vec<bool> = (0..g.edge_count()).map(|e| in_z[heights[e]]).collect();

    let rho_hat = match catalog.paths.iter().filter(|p| p.indivisible && p.period == 1 && p.height == r).collect::<Vec<_>>()[..] {
        [rho] => rho.path.clone(),
        _ => {
            let v = filt.strata[r].iter().flat_map(|&e| [g.edge(e).init, g.edge(e).term]).min().expect("stratum has edges");
            Path::trivial(v)
        }
    };
    let k = assemble_k(f.source(), &z, &rho_hat)?;
    let components = k.components();
    Ok(NonattractingSystem { stratum: r, z, undecided, rho_hat, k, components })
}

// K is Z with one extra edge labeled ρ̂; its ends are glued to Z where ρ̂
// meets Z and are new vertices otherwise
fn assemble_k(g: &Arc<Graph>, z: &[bool], rho: &Path) -> Result<Immersion> {
    let mut k = Graph::new();
    let mut vmap = Vec::new();
    let mut index = vec![None; g.vertex_count()];
    let mut vertex_for = |k: &mut Graph, vmap: &mut Vec<usize>, v: usize| -> Result<usize> {
        if let Some(i) = index[v] {
            return Ok(i);
        }
        let i = k.add_vertex(g.vertex_name(v))?;
        vmap.push(v);
        index[v] = Some(i);
        Ok(i)
    };
    let mut labels = Vec::new();
    for e in (0..g.edge_count()).filter(|&e| z[e]) {
        let ed = g.edge(e);
        let a = vertex_for(&mut k, &mut vmap, ed.init)?;
        let b = vertex_for(&mut k, &mut vmap, ed.term)?;
        k.add_edge(&ed.id, a, b)?;
        labels.push(vec![OEdge::fwd(e)]);
    }
    if rho.is_trivial() {
        vertex_for(&mut k, &mut vmap, rho.start())?;
    } else {
        let a = vertex_for(&mut k, &mut vmap, rho.start())?;
        let b = vertex_for(&mut k, &mut vmap, rho.end())?;
        let id = k.fresh_edge_id("rho");
        k.add_edge(&id, a, b)?;
        labels.push(rho.edges().to_vec());
    }
    Immersion::new(k, labels, vmap, g.clone())
}

/// Membership of a path in `<Z, ρ̂>`: it lifts to `K` from a vertex to a
/// vertex. Trivial paths need their point to be a vertex of `K`.
pub fn in_groupoid(ns: &NonattractingSystem, p: &Path) -> bool {
    if p.is_trivial() {
        return ns.k.vmap.contains(&p.start());
    }
    ns.k.lifts_path(p)
}

/// The conjugacy class of `c` is carried by the nonattracting subgroup
/// system.
pub fn carried_by_na(ns: &NonattractingSystem, c: &Circuit) -> bool {
    ns.k.carries(c)
}

/// `f_#(E)` lies in `<Z, ρ̂>` for every edge `E` of `Z`.
pub fn z_is_invariant(f: &GraphMap, ns: &NonattractingSystem) -> bool {
    let g = f.graph();
    (0..g.edge_count())
        .filter(|&e| ns.z[e])
        .all(|e| in_groupoid(ns, &f.map_path(&Path::from_reduced(g, g.edge(e).init, vec![OEdge::fwd(e)]))))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Attraction {
    Attracted { k: usize },
    NotAttracted { k: usize },
    Inconclusive { kmax: usize },
}

/// Iterate `f_#` on `c`: carried by `K` means not attracted, a complete
/// splitting with an `H_r` edge term means attracted.
pub fn weak_attraction_test(sp: &mut Splitter, ns: &NonattractingSystem, c: &Circuit, kmax: usize) -> Result<Attraction> {
    let f = sp.map();
    let mut cur = c.clone();
    for k in 0..=kmax {
        if carried_by_na(ns, &cur) {
            return Ok(Attraction::NotAttracted { k });
        }
        if let Some(terms) = sp.split_circuit(&cur) {
            if has_edge_term(&terms, ns.stratum) {
                return Ok(Attraction::Attracted { k });
            }
        }
        if k < kmax {
            cur = f.map_circuit(&cur)?;
            if cur.len() > ATTRACTION_LENGTH_GUARD {
                break;
            }
        }
    }
    Ok(Attraction::Inconclusive { kmax })
}

/// `Λ_r ⊂ Λ_s`: the least `k` for which some `f^k_#(E)`, `E` in `H_s`, has
/// an `H_r` edge as a splitting term.
pub fn lamination_inclusion(sp: &mut Splitter, filt: &Filtration, r: usize, s: usize, kmax: usize) -> Option<usize> {
    let f = sp.map();
    let g = f.graph();
    let mut paths: Vec<Path> =
        filt.strata[s].iter().map(|&e| Path::from_reduced(g, g.edge(e).init, vec![OEdge::fwd(e)])).collect();
    for k in 0..=kmax {
        for p in &paths {
            if let Ok(terms) = sp.split(p) {
                if has_edge_term(&terms, r) {
                    return Some(k);
                }
            }
        }
        paths = paths.iter().map(|p| f.map_path(p)).collect();
        if paths.iter().any(|p| p.len() > TERM_LENGTH_GUARD) {
            break;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Certificate {
    Certified,
    NotCertified { reason: String },
    Inconclusive { reason: String },
}

/// The certificate's hypotheses on a map already known to be a CT: the
/// stratum of `ns` is the top stratum, it is EG, and every component of
/// `Z` is contractible. A fixed proper free factor would be carried by a
/// filtration element inside `Z`, which is all the argument needs; a closed
/// `ρ̂` of the top stratum does not obstruct it.
pub fn certificate_for(filt: &Filtration, ns: &NonattractingSystem) -> Certificate {
    if ns.stratum + 1 != filt.len() {
        return Certificate::NotCertified { reason: format!("stratum {} is not the top stratum", ns.stratum) };
    }
    if !ns.is_decided() {
        return Certificate::Inconclusive { reason: format!("strata {:?} undecided for Z", ns.undecided) };
    }
    let g = &ns.k.target;
    match components_of(g, &ns.z).into_iter().find(|c| !c.contractible) {
        Some(c) => Certificate::NotCertified {
            reason: format!("Z has a noncontractible component with {} edges", c.edges.len()),
        },
        None => Certificate::Certified,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    #[serde(flatten)]
    pub certificate: Certificate,
    /// The power of the input map that passed the CT checklist.
    pub power: Option<usize>,
}

/// A power of the input map that passes the CT checklist, with the data the
/// checklist was run on.
pub struct CtPower {
    pub k: usize,
    pub map: GraphMap,
    pub filtration: Filtration,
    pub catalog: NielsenCatalog,
}

/// The least `k <= max_power` with `f^k` a CT. Splittings only use period
/// one Nielsen paths, so a map that is not rotationless has to be replaced
/// by such a power before attraction or certificate questions are asked.
pub fn least_ct_power(f: &GraphMap, max_power: usize) -> Result<Option<CtPower>> {
    for k in 1..=max_power {
        let fk = f.power(k)?;
        let filt = compute_filtration(&fk);
        let caps = NielsenCaps { length: 4 * fk.graph().edge_count().max(3), period: 1 };
        let catalog = nielsen_search(&fk, &filt, caps)?;
        if verify_ct(&fk, &filt, &catalog).is_ct() {
            return Ok(Some(CtPower { k, map: fk, filtration: filt, catalog }));
        }
    }
    Ok(None)
}

/// Apply the certificate to the least power that passes the CT checklist;
/// full irreducibility is invariant under powers.
pub fn full_irreducibility_certificate(f: &GraphMap, max_power: usize) -> Result<CertificateReport> {
    let Some(ct) = least_ct_power(f, max_power)? else {
        return Ok(CertificateReport {
            certificate: Certificate::Inconclusive { reason: format!("no power up to {max_power} passes the CT checklist") },
            power: None,
        });
    };
    let top = ct.filtration.len() - 1;
    let kinds = classify_strata(&ct.map, &ct.filtration);
    let certificate = if kinds[top].kind != StratumKind::Eg {
        Certificate::NotCertified { reason: "top stratum is not EG".into() }
    } else {
        certificate_for(&ct.filtration, &build_nonattracting(&ct.map, &ct.filtration, top, &ct.catalog)?)
    };
    Ok(CertificateReport { certificate, power: Some(ct.k) })
}

/// A circuit of length at most `max_len` fixed by `f_#`, if any.
pub fn fixed_circuit_probe(f: &GraphMap, max_len: usize) -> Result<Option<Circuit>> {
    let g = f.graph();
    let mut stack: Vec<Vec<OEdge>> = g.oedges().map(|d| vec![d]).collect();
    while let Some(w) = stack.pop() {
        let last = *w.last().unwrap();
        if g.term(last) == g.init(w[0]) && w[0] != last.inv() {
            let c = cyclic_tighten(g, &w)?;
            if c.len() == w.len() && c.edges().first() == Some(&w[0]) && f.map_circuit(&c)? == c {
                return Ok(Some(c));
            }
        }
        if w.len() < max_len {
            for d in g.directions_at(g.term(last)) {
                if d != last.inv() {
                    let mut w2 = w.clone();
                    w2.push(d);
                    stack.push(w2);
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct SingularRay {
    pub direction: OEdge,
    pub depth: usize,
    /// `f^i_#(E)` for `i = 0..=depth`.
    pub prefixes: Vec<Path>,
    /// Each prefix is a proper initial segment of the next.
    pub nested: bool,
}

impl SingularRay {
    pub fn prefix(&self) -> &Path {
        self.prefixes.last().expect("depth 0 has one prefix")
    }
}

/// Rays from every principal direction expanded to `depth`.
pub fn singular_rays(f: &GraphMap, filt: &Filtration, catalog: &NielsenCatalog, depth: usize) -> Result<Vec<SingularRay>> {
    let g = f.graph();
    let pv = principal_vertices(f, filt, catalog);
    principal_directions(f, &pv)
        .into_iter()
        .map(|d| {
            let mut prefixes = vec![Path::from_reduced(g, g.init(d), vec![d])];
            for _ in 0..depth {
                let next = f.map_path(prefixes.last().unwrap());
                if next.len() > BLOWUP_GUARD {
                    return Err(Error::Blowup(next.len()));
                }
                prefixes.push(next);
            }
            let nested = prefixes.windows(2).all(|w| w[1].len() > w[0].len() && w[1].edges().starts_with(w[0].edges()));
            Ok(SingularRay { direction: d, depth, prefixes, nested })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SingularLine {
    pub left: OEdge,
    pub connector: Path,
    pub right: OEdge,
    /// `R̄ α R'` with both rays at the common depth.
    pub window: Vec<OEdge>,
}

/// Lines `R̄ α R'` from pairs of rays at the ends of a connector `α` that
/// is trivial or a Nielsen path of period one, kept when locally injective
/// at both junctions. A line and its reversal are listed once.
pub fn singular_lines(g: &Graph, rays: &[SingularRay], catalog: &NielsenCatalog) -> Vec<SingularLine> {
    let mut connectors: Vec<Path> = (0..g.vertex_count()).map(Path::trivial).collect();
    for p in catalog.paths.iter().filter(|p| p.period == 1) {
        connectors.push(p.path.clone());
        connectors.push(p.path.reversed());
    }
    let mut out = Vec::new();
    for (i, a) in rays.iter().enumerate() {
        for (j, b) in rays.iter().enumerate() {
            for alpha in &connectors {
                if g.init(a.direction) != alpha.start() || g.init(b.direction) != alpha.end() {
                    continue;
                }
                if alpha.is_trivial() && i >= j {
                    continue;
                }
                // nontrivial connectors appear in both orientations
                if !alpha.is_trivial() && (i, alpha.first()) > (j, alpha.reversed().first()) {
                    continue;
                }
                let left = a.prefix().reversed();
                let injective = if alpha.is_trivial() {
                    a.direction != b.direction
                } else {
                    alpha.first() != Some(a.direction) && alpha.last() != Some(b.direction.inv())
                };
                if !injective {
                    continue;
                }
                let mut window = left.into_edges();
                window.extend_from_slice(alpha.edges());
                window.extend_from_slice(b.prefix().edges());
                out.push(SingularLine {
                    left: a.direction,
                    connector: alpha.clone(),
                    right: b.direction,
                    window,
                });
            }
        }
    }
    out
}

/// `L̂_∞` of a circuit at an admissible `K`, with the integer counts that
/// make `K`-stability exact.
#[derive(Clone, Debug, Serialize)]
pub struct TranslationLength {
    pub value: f64,
    pub k: usize,
    /// Unoriented count of each `H_r` edge among the splitting terms, in
    /// stratum order.
    pub counts: Vec<u64>,
}

/// `h^K_#(c)` splits into `Z` edges, copies of `ρ̂^{±1}` and `H_r` edges;
/// the value is the PF weight of the `H_r` edge terms scaled by `λ^{-K}`.
/// Requires `G = Z ∪ H_r`.
pub fn translation_length_limit(
    sp: &mut Splitter,
    filt: &Filtration,
    ns: &NonattractingSystem,
    c: &Circuit,
    k: usize,
) -> Result<TranslationLength> {
    let f = sp.map();
    let g = f.graph();
    let r = ns.stratum;
    let heights = filt.heights(g.edge_count());
    if (0..g.edge_count()).any(|e| !ns.z[e] && heights[e] != r) {
        return Err(Error::Setup("the graph is not Z together with H_r".into()));
    }
    let rep = classify_strata(f, filt).swap_remove(r);
    let pf = rep.pf.ok_or_else(|| Error::Setup(format!("stratum {r} has no PF data")))?;
    let mut cur = c.clone();
    for _ in 0..k {
        cur = f.map_circuit(&cur)?;
    }
    let terms = sp
        .split_circuit(&cur)
        .ok_or_else(|| Error::Verification(format!("h^{k}_# of the circuit is not completely split")))?;
    let stratum = &filt.strata[r];
    let mut counts = vec![0u64; stratum.len()];
    for t in &terms {
        match t.kind {
            TermKind::Edge if t.height == r => {
                let i = stratum.iter().position(|&e| e == t.path.edges()[0].edge()).unwrap();
                counts[i] += 1;
            }
            TermKind::Edge | TermKind::Nielsen if t.height != r || t.path == ns.rho_hat || t.path == ns.rho_hat.reversed() => {}
            _ => {
                return Err(Error::Verification(format!(
                    "term {} is neither an edge nor a copy of ρ̂",
                    t.path.display(g)
                )))
            }
        }
    }
    let weight: f64 = counts.iter().zip(&pf.vector).map(|(&n, &v)| n as f64 * v).sum();
    Ok(TranslationLength { value: weight / pf.lambda.powi(k as i32), k, counts })
}

/// Least admissible `K <= kmax`.
pub fn first_admissible_k(sp: &mut Splitter, filt: &Filtration, ns: &NonattractingSystem, c: &Circuit, kmax: usize) -> Option<TranslationLength> {
    (0..=kmax).find_map(|k| translation_length_limit(sp, filt, ns, c, k).ok())
}

/// Counts at `K + j` are counts at `K` times `M^j`, so the two values agree
/// exactly.
pub fn k_stable(m: &[Vec<u64>], lo: &TranslationLength, hi: &TranslationLength) -> bool {
    if hi.k < lo.k {
        return k_stable(m, hi, lo);
    }
    let mut n = lo.counts.clone();
    for _ in lo.k..hi.k {
        n = (0..n.len()).map(|j| (0..n.len()).map(|i| n[i] * m[i][j]).sum()).collect();
    }
    n == hi.counts
}
