//! Buffered splitting constants, the three-copies detector for attracting
//! laminations, and the `ψ^m φ^n` composition search.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{contains_subpath, cyclic_tighten, occurrences, tighten, Circuit, Graph, OEdge, Path};
use crate::lamination::{build_nonattracting, carried_by_na, NonattractingSystem};
use crate::map::{DoubleSharper, GraphMap, BLOWUP_GUARD};
use crate::marking::{Automorphism, MarkedGraph};
use crate::nielsen::{nielsen_search, NielsenCaps};
use crate::strata::{classify_strata, compute_filtration, Filtration, StratumKind};
use crate::text::MapFile;

/// Iterates checked when verifying a buffer constant.
pub const BUFFER_DEPTH: usize = 5;
/// Leaf windows checked when verifying a buffer constant.
pub const BUFFER_WINDOWS: usize = 100;

const WINDOW_LENGTH_GUARD: usize = 200_000;

/// Largest total image length of `f^k` for which the exact window is
/// computed; beyond it the power is reported over budget.
pub const EXACT_WINDOW_LIMIT: usize = 1000;

/// Starts of a greedy maximal family of edge-disjoint occurrences.
pub fn disjoint_copies(text: &[OEdge], pat: &[OEdge]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut next_free = 0;
    for s in occurrences(text, pat) {
        if s >= next_free {
            out.push(s);
            next_free = s + pat.len();
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BufferConstant {
    pub c: usize,
    pub bcc: usize,
    pub lambda: f64,
    pub windows_checked: usize,
    pub depth: usize,
}

/// A buffer constant for stratum `r`: leaf windows `τ1 τ2 τ3` with at least
/// `C` edges of `H_r` in each of `τ1` and `τ3` keep `f^k_#(τ2)` inside
/// `f^k_##(τ)`. The candidate is the critical length `2 bcc / (λ - 1)` plus
/// one, which outgrows cancellation on legal ends; it is checked on tile
/// windows before being returned.
pub fn buffer_constant(f: &GraphMap, filt: &Filtration, r: usize) -> Result<BufferConstant> {
    let bcc = f.bcc()?;
    let rep = classify_strata(f, filt).swap_remove(r);
    let lambda = match (rep.kind, rep.pf) {
        (StratumKind::Eg, Some(pf)) => pf.lambda,
        _ => return Err(Error::Setup(format!("stratum {r} is not EG"))),
    };
    let c = if bcc == 0 { 1 } else { (2.0 * bcc as f64 / (lambda - 1.0)).floor() as usize + 1 };
    let windows = leaf_windows(f, filt, r, c, BUFFER_WINDOWS)?;
    let powers: Vec<GraphMap> = (1..=BUFFER_DEPTH).map(|k| f.power(k)).collect::<Result<_>>()?;
    let sharpers: Vec<DoubleSharper> = powers.iter().map(DoubleSharper::new).collect::<Result<_>>()?;
    let g = f.graph();
    for (tau, (i, j)) in &windows {
        let mid = tau.subpath(g, *i, *j);
        for (fk, sharp) in powers.iter().zip(&sharpers) {
            let ds = sharp.apply(tau)?;
            if !contains_subpath(ds.path.edges(), fk.map_path(&mid).edges()) {
                return Err(Error::Verification(format!(
                    "buffer {c} fails on window {} with middle {}",
                    tau.display(g),
                    mid.display(g)
                )));
            }
        }
    }
    Ok(BufferConstant { c, bcc, lambda, windows_checked: windows.len(), depth: BUFFER_DEPTH })
}

/// Windows of tiles of stratum `r` cut as `τ1 τ2 τ3`: `τ1` and `τ3` hold
/// exactly `c` edges of `H_r` and `τ2` is a single `H_r` edge. Returned as
/// the window and the bounds of `τ2`.
pub fn leaf_windows(f: &GraphMap, filt: &Filtration, r: usize, c: usize, count: usize) -> Result<Vec<(Path, (usize, usize))>> {
    let g = f.graph();
    let heights = filt.heights(g.edge_count());
    let need = 2 * c + 1;
    let mut tiles = Vec::new();
    for &e in &filt.strata[r] {
        let mut p = Path::from_reduced(g, g.edge(e).init, vec![OEdge::fwd(e)]);
        while p.edges().iter().filter(|d| heights[d.edge()] == r).count() < need + count {
            p = f.map_path(&p);
            if p.len() > WINDOW_LENGTH_GUARD {
                return Err(Error::Blowup(WINDOW_LENGTH_GUARD));
            }
        }
        tiles.push(p);
    }
    let mut out = Vec::new();
    'tiles: for t in &tiles {
        let top: Vec<usize> = (0..t.len()).filter(|&i| heights[t.edges()[i].edge()] == r).collect();
        for s in 0..top.len().saturating_sub(need - 1) {
            let from = top[s];
            let mid = top[s + c];
            let to = top[s + 2 * c] + 1;
            let tau = t.subpath(g, from, to);
            out.push((tau, (mid - from, mid + 1 - from)));
            if out.len() >= count {
                break 'tiles;
            }
        }
    }
    Ok(out)
}

/// How a window inside `f^k_##(β)` was obtained.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowMethod {
    /// The extension search run on `f^k` itself.
    Exact,
    /// `f_##` applied `k` times. Composition containment puts it inside
    /// `f^k_##(β)`, and its extension search only needs `bcc(f)`.
    Iterated,
}

/// Where `f^k_##(β)` holds three disjoint same-orientation copies of `β`.
#[derive(Clone, Debug, Serialize)]
pub struct FindingHit {
    pub k: usize,
    /// Offsets of the copies in `window`.
    pub positions: [usize; 3],
    /// `f^k_##(β)` itself or a subpath of it, per `method`.
    #[serde(skip)]
    pub window: Path,
    pub window_text: String,
    pub method: WindowMethod,
    /// Cancellation bound of the map the extension search ran on.
    pub bcc: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FindingOutcome {
    pub hit: Option<FindingHit>,
    /// Least `k` where three disjoint copies of `β̄` appeared; reported, not
    /// counted as a hit.
    pub reversed_only: Option<usize>,
    /// Powers whose exact window exceeded the extension budget.
    pub over_budget: Vec<usize>,
    pub kmax: usize,
}

fn iterated_window(sharp: &DoubleSharper, beta: &Path, k: usize) -> Result<Path> {
    let mut cur = beta.clone();
    for _ in 0..k {
        if cur.is_trivial() {
            break;
        }
        cur = sharp.apply(&cur)?.path;
        if cur.len() > WINDOW_LENGTH_GUARD {
            return Err(Error::Blowup(WINDOW_LENGTH_GUARD));
        }
    }
    Ok(cur)
}

fn three_copies(window: &Path, beta: &Path) -> Option<[usize; 3]> {
    let c = disjoint_copies(window.edges(), beta.edges());
    (c.len() >= 3).then(|| [c[0], c[1], c[2]])
}

/// Three disjoint copies of `β` in `f^k_##(β)` for the given `k`. The cheap
/// iterated window is tried first; the exact one may fail with
/// [`Error::Blowup`] when `bcc(f^k)` is large.
pub fn hits_at(f: &GraphMap, beta: &Path, k: usize) -> Result<Option<FindingHit>> {
    hits_with(f, &DoubleSharper::new(f)?, beta, k)
}

fn hits_with(f: &GraphMap, sharp: &DoubleSharper, beta: &Path, k: usize) -> Result<Option<FindingHit>> {
    let fk = f.power(k)?;
    if disjoint_copies(fk.map_path(beta).edges(), beta.edges()).len() < 3 {
        return Ok(None);
    }
    let g = f.graph();
    let hit = |window: Path, positions, method, bcc| FindingHit {
        k,
        positions,
        window_text: window.display(g).to_string(),
        window,
        method,
        bcc,
    };
    let w = iterated_window(sharp, beta, k)?;
    if let Some(pos) = three_copies(&w, beta) {
        return Ok(Some(hit(w, pos, WindowMethod::Iterated, sharp.bcc())));
    }
    if k == 1 {
        return Ok(None);
    }
    if fk.total_image_length() > EXACT_WINDOW_LIMIT {
        return Err(Error::Blowup(EXACT_WINDOW_LIMIT));
    }
    let ds = DoubleSharper::new(&fk)?.apply(beta)?;
    Ok(three_copies(&ds.path, beta).map(|pos| hit(ds.path, pos, WindowMethod::Exact, ds.bcc)))
}

/// Least `k <= kmax` with three disjoint copies of `β` in `f^k_##(β)`.
pub fn finding_eg(f: &GraphMap, beta: &Path, kmax: usize) -> Result<FindingOutcome> {
    if beta.is_trivial() {
        return Err(Error::TrivialClass);
    }
    let rev = beta.reversed();
    let mut reversed_only = None;
    let mut over_budget = Vec::new();
    let sharp = DoubleSharper::new(f)?;
    let mut img = beta.clone();
    for k in 1..=kmax {
        img = f.map_path(&img);
        if img.len() > BLOWUP_GUARD {
            break;
        }
        if disjoint_copies(img.edges(), beta.edges()).len() >= 3 {
            match hits_with(f, &sharp, beta, k) {
                Ok(Some(hit)) => return Ok(FindingOutcome { hit: Some(hit), reversed_only, over_budget, kmax }),
                Ok(None) => {}
                Err(Error::Blowup(_)) => over_budget.push(k),
                Err(e) => return Err(e),
            }
        }
        if reversed_only.is_none() && disjoint_copies(img.edges(), rev.edges()).len() >= 3 {
            match iterated_window(&sharp, beta, k) {
                Ok(w) if three_copies(&w, &rev).is_some() => reversed_only = Some(k),
                Ok(_) | Err(Error::Blowup(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(FindingOutcome { hit: None, reversed_only, over_budget, kmax })
}

/// The nested windows `β_j ⊂ (f^k)_##(β_{j-1})`, `β_0 = β`, for
/// `j = 1..=depth`: exact when the extension search fits its budget,
/// iterated otherwise.
pub fn nested_windows(f: &GraphMap, beta: &Path, k: usize, depth: usize) -> Result<Vec<Path>> {
    let fk = f.power(k)?;
    let exact = DoubleSharper::new(&fk)?;
    let sharp = DoubleSharper::new(f)?;
    let mut out = Vec::new();
    let mut cur = beta.clone();
    for _ in 0..depth {
        cur = match exact.apply(&cur) {
            Ok(ds) => ds.path,
            Err(Error::Blowup(_)) => iterated_window(&sharp, &cur, k)?,
            Err(e) => return Err(e),
        };
        if cur.len() > WINDOW_LENGTH_GUARD {
            return Err(Error::Blowup(WINDOW_LENGTH_GUARD));
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// Every `σ ⊇ β` has `f^{jk}_#(σ) ⊇ β_j` for `j = 1..=depth`.
pub fn attracting_certificate(f: &GraphMap, beta: &Path, k: usize, sigmas: &[Path], depth: usize) -> Result<bool> {
    let windows = nested_windows(f, beta, k, depth)?;
    let fk = f.power(k)?;
    for s in sigmas {
        if !contains_subpath(s.edges(), beta.edges()) {
            return Err(Error::Setup("sample path does not contain β".into()));
        }
        let mut cur = s.clone();
        for w in &windows {
            cur = fk.map_path(&cur);
            if !contains_subpath(cur.edges(), w.edges()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The automorphism induced on the rose by a self-map of a marked graph.
pub fn induced_automorphism(marked: &MarkedGraph, f: &GraphMap) -> Automorphism {
    Automorphism {
        images: marked.marking.loops.iter().map(|l| marked.word_of(f.map_path(l).edges())).collect(),
    }
}

/// The marking change `from -> to`: every vertex goes to the base of `to`
/// and each edge to the loop spelling its rose word.
pub fn marking_change(from: &MarkedGraph, from_graph: &Arc<Graph>, to: &MarkedGraph, to_graph: &Arc<Graph>) -> Result<GraphMap> {
    let base = to.marking.base;
    let vmap = vec![base; from_graph.vertex_count()];
    let emap = (0..from_graph.edge_count())
        .map(|e| tighten(to_graph, base, &to.path_of(&from.marking.inverse[e])))
        .collect::<Result<Vec<_>>>()?;
    GraphMap::new(from_graph.clone(), to_graph.clone(), vmap, emap)
}

pub struct PingPongSetup {
    pub phi: MarkedGraph,
    pub g_phi: GraphMap,
    pub psi: MarkedGraph,
    pub g_psi: GraphMap,
    /// `G_φ -> G_ψ`.
    pub h_psi: GraphMap,
    /// `G_ψ -> G_φ`.
    pub h_phi: GraphMap,
}

impl PingPongSetup {
    pub fn new(phi: &MapFile, psi: &MapFile) -> Result<Self> {
        let g_phi = phi.representative()?.clone();
        let g_psi = psi.representative()?.clone();
        if phi.marked.marking.generators != psi.marked.marking.generators {
            return Err(Error::Setup("the two markings name different generators".into()));
        }
        let h_psi = marking_change(&phi.marked, g_phi.source(), &psi.marked, g_psi.source())?;
        let h_phi = marking_change(&psi.marked, g_psi.source(), &phi.marked, g_phi.source())?;
        let setup = PingPongSetup { phi: phi.marked.clone(), g_phi, psi: psi.marked.clone(), g_psi, h_psi, h_phi };
        // the round trip G_φ -> G_ψ -> G_φ must be conjugation on the rose
        let there_and_back = h_phi_after_h_psi(&setup)?;
        let rt = Automorphism {
            images: setup.phi.marking.loops.iter().map(|l| setup.phi.word_of(there_and_back.map_path(l).edges())).collect(),
        };
        if !rt.is_inner() {
            return Err(Error::Setup("marking changes do not invert each other".into()));
        }
        Ok(setup)
    }

    /// `g_ψ^m ∘ h_ψ ∘ g_φ^n ∘ h_φ` on `G_ψ`.
    pub fn composite(&self, m: usize, n: usize) -> Result<GraphMap> {
        let inner = self.g_phi.power(n)?.after(&self.h_phi)?;
        let mid = self.h_psi.after(&inner)?;
        self.g_psi.power(m)?.after(&mid)
    }

    /// The composite induces `Ψ^m Φ^n` up to an inner automorphism.
    pub fn composite_class_ok(&self, composite: &GraphMap, m: usize, n: usize) -> Result<bool> {
        let phi = induced_automorphism(&self.phi, &self.g_phi);
        let psi = induced_automorphism(&self.psi, &self.g_psi);
        let mut expect = Automorphism::identity(self.psi.rank());
        for _ in 0..n {
            expect = phi.compose(&expect);
        }
        for _ in 0..m {
            expect = psi.compose(&expect);
        }
        induced_automorphism(&self.psi, composite).outer_eq(&expect)
    }
}

fn h_phi_after_h_psi(s: &PingPongSetup) -> Result<GraphMap> {
    s.h_phi.after(&s.h_psi)
}

#[derive(Clone, Debug)]
pub enum BetaSource {
    /// Tiles `g_ψ^j_#(E)` of the top EG stratum of `g_ψ`, `j = 1..=depth`.
    Tiles { depth: usize },
    Explicit(Path),
}

#[derive(Clone, Debug, Serialize)]
pub struct PingPongCell {
    pub m: usize,
    pub n: usize,
    pub class_ok: bool,
    pub beta: Option<String>,
    pub hit: Option<FindingHit>,
    pub reversed_only: bool,
    /// Circuits fixed by the composite are carried by both nonattracting
    /// systems; `None` when a system could not be built.
    pub fixed_classes_carried: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PingPongReport {
    pub mmax: usize,
    pub kmax: usize,
    pub cells: Vec<PingPongCell>,
}

impl PingPongReport {
    pub fn hits(&self) -> impl Iterator<Item = &PingPongCell> {
        self.cells.iter().filter(|c| c.hit.is_some())
    }
}

fn top_eg(f: &GraphMap) -> Option<(Filtration, usize)> {
    let filt = compute_filtration(f);
    let reps = classify_strata(f, &filt);
    let r = (0..filt.len()).rev().find(|&r| reps[r].kind == StratumKind::Eg)?;
    Some((filt, r))
}

fn tile_betas(f: &GraphMap, depth: usize) -> Vec<Path> {
    let g = f.graph();
    let (filt, r) = match top_eg(f) {
        Some(x) => x,
        None => return Vec::new(),
    };
    let mut out: Vec<Path> = Vec::new();
    for &e in &filt.strata[r] {
        let mut p = Path::from_reduced(g, g.edge(e).init, vec![OEdge::fwd(e)]);
        for _ in 0..depth {
            p = f.map_path(&p);
            if !out.contains(&p) {
                out.push(p.clone());
            }
        }
    }
    out.sort_by_key(|p| p.len());
    out
}

fn nonattracting_of(f: &GraphMap) -> Option<NonattractingSystem> {
    let (filt, r) = top_eg(f)?;
    let caps = NielsenCaps { length: 4 * f.graph().edge_count().max(3), period: 1 };
    let catalog = nielsen_search(f, &filt, caps).ok()?;
    build_nonattracting(f, &filt, r, &catalog).ok()
}

fn fixed_circuits(f: &GraphMap, max_len: usize) -> Result<Vec<Circuit>> {
    let g = f.graph();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<OEdge>> = g.oedges().map(|d| vec![d]).collect();
    while let Some(w) = stack.pop() {
        let last = *w.last().unwrap();
        if g.term(last) == g.init(w[0]) && w[0] != last.inv() {
            let c = cyclic_tighten(g, &w)?;
            if c.edges() == &w[..] && f.map_circuit(&c)? == c && !out.contains(&c) {
                out.push(c);
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
    Ok(out)
}

/// Run the detector on every cell `1 <= m, n <= mmax`; `mmax = 0` gives an
/// empty report.
pub fn pingpong_search(setup: &PingPongSetup, mmax: usize, betas: &BetaSource, kmax: usize) -> Result<PingPongReport> {
    let g = setup.g_psi.graph();
    let candidates = match betas {
        BetaSource::Tiles { depth } => tile_betas(&setup.g_psi, *depth),
        BetaSource::Explicit(p) => vec![p.clone()],
    };
    let na_phi = nonattracting_of(&setup.g_phi);
    let na_psi = nonattracting_of(&setup.g_psi);
    let cell = |m: usize, n: usize| -> Result<PingPongCell> {
        let xi = setup.composite(m, n)?;
        xi.require_nontrivial()?;
        let class_ok = setup.composite_class_ok(&xi, m, n)?;
        let mut cell = PingPongCell { m, n, class_ok, beta: None, hit: None, reversed_only: false, fixed_classes_carried: None };
        for beta in &candidates {
            let out = finding_eg(&xi, beta, kmax)?;
            cell.reversed_only |= out.reversed_only.is_some();
            if let Some(hit) = out.hit {
                cell.beta = Some(beta.display(g).to_string());
                cell.hit = Some(hit);
                break;
            }
        }
        if let (Some(a), Some(b)) = (&na_phi, &na_psi) {
            let mut ok = true;
            for c in fixed_circuits(&xi, 2 * g.edge_count())? {
                let back = setup.h_phi.map_circuit(&c)?;
                ok &= carried_by_na(b, &c) && carried_by_na(a, &back);
            }
            cell.fixed_classes_carried = Some(ok);
        }
        Ok(cell)
    };
    // cells are independent; collect in (m, n) order
    let grid: Vec<(usize, usize)> = (1..=mmax).flat_map(|m| (1..=mmax).map(move |n| (m, n))).collect();
    let cells = std::thread::scope(|s| {
        let handles: Vec<_> = grid.iter().map(|&(m, n)| s.spawn(move || cell(m, n))).collect();
        handles.into_iter().map(|h| h.join().expect("grid cell panicked")).collect::<Result<Vec<_>>>()
    })?;
    Ok(PingPongReport { mmax, kmax, cells })
}
