//! The least bounded cancellation constant, computed from automata that
//! recognise the tightened images of reduced paths.
//!
//! For each direction `d` of the source the automaton reads `f(y)` for
//! every reduced path `y` starting with `d`. Saturating it with empty moves
//! for cancelling subwords makes it accept the reduced form of each such
//! word. Cancellation at a junction `ȳ z` is the common prefix of `f#(y)`
//! and `f#(z)` for two distinct directions at one vertex, so the constant is
//! the longest word that is a prefix of a reduced image on both sides.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::error::Result;
use crate::graph::{Graph, OEdge};
use crate::map::GraphMap;

/// Automata larger than this fall back to the fold-sum bound.
pub const STATE_LIMIT: usize = 4000;

#[derive(Clone)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet { words: vec![0; n.div_ceil(64)] }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: usize) -> bool {
        let was = self.get(i);
        self.words[i / 64] |= 1 << (i % 64);
        !was
    }

    fn union_with(&mut self, other: &BitSet) -> bool {
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let n = *a | b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                (bits != 0).then(|| {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    i * 64 + b
                })
            })
        })
    }
}

// state sets on both sides and the last letter read
type PairKey = (Vec<u64>, Vec<u64>, Option<OEdge>);

/// Saturated automaton for the images of reduced paths of the source.
pub struct ImageAutomaton {
    n: usize,
    /// Letter moves out of each state, letters are target directions.
    out: Vec<Vec<(OEdge, usize)>>,
    /// Reflexive closure of the empty moves, after saturation.
    closure: Vec<BitSet>,
    accepting: Vec<bool>,
    /// Start state per source direction index.
    starts: Vec<usize>,
    /// `live[q][l]`: some reduced continuation not starting with the
    /// inverse of letter `l - 1` (`l = 0`: any) reaches an accepting state.
    live: Vec<Vec<bool>>,
}

impl ImageAutomaton {
    /// `None` when the automaton would exceed [`STATE_LIMIT`] or the target
    /// has more than 32 edges.
    pub fn new(f: &GraphMap) -> Option<Self> {
        let g = f.source();
        let dirs = 2 * g.edge_count();
        let n = 3 * dirs + (0..dirs).map(|i| f.image(OEdge::from_index(i)).len().saturating_sub(1)).sum::<usize>();
        if n > STATE_LIMIT {
            return None;
        }
        // states: start[d], entry[d], arrived[d], then chain interiors
        let start = |i: usize| i;
        let entry = |i: usize| dirs + i;
        let arrived = |i: usize| 2 * dirs + i;
        let mut out: Vec<Vec<(OEdge, usize)>> = vec![Vec::new(); n];
        let mut eps: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut accepting = vec![false; n];
        let mut next = 3 * dirs;
        for i in 0..dirs {
            let d = OEdge::from_index(i);
            accepting[arrived(i)] = true;
            eps[start(i)].push(entry(i));
            for e in g.directions_at(g.term(d)) {
                if e != d.inv() {
                    eps[arrived(i)].push(entry(e.index()));
                }
            }
            let w = f.image(d);
            if w.is_empty() {
                eps[entry(i)].push(arrived(i));
                continue;
            }
            let mut at = entry(i);
            for (k, &x) in w.iter().enumerate() {
                let to = if k + 1 == w.len() {
                    arrived(i)
                } else {
                    next += 1;
                    next - 1
                };
                out[at].push((x, to));
                at = to;
            }
        }
        debug_assert_eq!(next, n);
        let letters = 2 * f.target().edge_count();
        if letters > 64 {
            return None;
        }
        let reach = saturate(n, &out, &eps);
        let live = live_states(&out, &reach, &accepting, letters);
        let closure = reach.fwd;
        let starts = (0..dirs).map(start).collect();
        Some(ImageAutomaton { n, out, closure, accepting, starts, live })
    }

    fn start_set(&self, d: OEdge) -> BitSet {
        self.closure[self.starts[d.index()]].clone()
    }

    // ε-closed successor set after reading `x`
    fn step(&self, s: &BitSet, x: OEdge) -> BitSet {
        let mut t = BitSet::new(self.n);
        for q in s.iter() {
            for &(y, to) in &self.out[q] {
                if y == x {
                    t.union_with(&self.closure[to]);
                }
            }
        }
        t
    }

    fn any_live(&self, s: &BitSet, last: Option<OEdge>) -> bool {
        let l = last.map_or(0, |x| x.index() + 1);
        s.iter().any(|q| self.live[q][l])
    }

    /// Longest prefix of the reduced word `t` that is a prefix of `f#(y)`
    /// for some reduced `y` starting with one of `dirs`.
    pub fn longest_prefix(&self, dirs: &[OEdge], t: &[OEdge]) -> usize {
        let mut s = BitSet::new(self.n);
        for &d in dirs {
            s.union_with(&self.start_set(d));
        }
        let mut best = 0;
        for (i, &x) in t.iter().enumerate() {
            s = self.step(&s, x);
            if s.is_empty() {
                break;
            }
            if self.any_live(&s, Some(x)) {
                best = i + 1;
            }
        }
        best
    }

    /// Longest common prefix of reduced images of paths starting with `d1`
    /// and `d2`, searched no deeper than `cap`.
    fn common_prefix_depth(&self, target: &Graph, d1: OEdge, d2: OEdge, cap: usize) -> usize {
        let letters: Vec<OEdge> = target.oedges().collect();
        let mut best = 0;
        // equal state pairs have equal futures; keep the deepest visit
        let mut seen: HashMap<PairKey, usize> = HashMap::new();
        let mut stack = vec![(self.start_set(d1), self.start_set(d2), None::<OEdge>, 0usize)];
        while let Some((s1, s2, last, depth)) = stack.pop() {
            match seen.entry((s1.words.clone(), s2.words.clone(), last)) {
                Entry::Occupied(mut o) => {
                    if *o.get() >= depth {
                        continue;
                    }
                    o.insert(depth);
                }
                Entry::Vacant(v) => {
                    v.insert(depth);
                }
            }
            if depth > best && self.any_live(&s1, last) && self.any_live(&s2, last) {
                best = depth;
            }
            if best >= cap {
                return cap;
            }
            for &x in &letters {
                if last == Some(x.inv()) {
                    continue;
                }
                let t1 = self.step(&s1, x);
                if !self.any_live(&t1, Some(x)) {
                    continue;
                }
                let t2 = self.step(&s2, x);
                if self.any_live(&t2, Some(x)) {
                    stack.push((t1, t2, Some(x), depth + 1));
                }
            }
        }
        best
    }

    pub fn accepts_after(&self, dirs: &[OEdge], w: &[OEdge]) -> bool {
        let mut s = BitSet::new(self.n);
        for &d in dirs {
            s.union_with(&self.start_set(d));
        }
        for &x in w {
            s = self.step(&s, x);
        }
        let accepted = s.iter().any(|q| self.accepting[q]);
        accepted
    }
}

// Benois saturation: whenever `p -x-> p1 ~> p2 -x̄-> q`, add `p ~> q`.
// Each reach pair is examined once, when it first appears.
fn saturate(n: usize, out: &[Vec<(OEdge, usize)>], eps: &[Vec<usize>]) -> Reach {
    let mut into: Vec<Vec<(OEdge, usize)>> = vec![Vec::new(); n];
    for (p, edges) in out.iter().enumerate() {
        for &(x, to) in edges {
            into[to].push((x, p));
        }
    }
    let mut reach = Reach::new(n);
    for p in 0..n {
        for &q in &eps[p] {
            reach.add(p, q);
        }
    }
    while let Some((p1, p2)) = reach.pending.pop() {
        for &(x, p) in &into[p1] {
            for &(y, q) in &out[p2] {
                if y == x.inv() {
                    reach.add(p, q);
                }
            }
        }
    }
    reach
}

// Reflexive-transitive closure maintained under edge insertion.
struct Reach {
    fwd: Vec<BitSet>,
    back: Vec<BitSet>,
    pending: Vec<(usize, usize)>,
}

impl Reach {
    fn new(n: usize) -> Self {
        let unit = |p: usize| {
            let mut b = BitSet::new(n);
            b.set(p);
            b
        };
        Reach { fwd: (0..n).map(unit).collect(), back: (0..n).map(unit).collect(), pending: (0..n).map(|p| (p, p)).collect() }
    }

    fn add(&mut self, p: usize, q: usize) {
        if self.fwd[p].get(q) {
            return;
        }
        let sources: Vec<usize> = self.back[p].iter().collect();
        let targets = self.fwd[q].clone();
        for r in sources {
            for (i, &t) in targets.words.iter().enumerate() {
                let fresh = t & !self.fwd[r].words[i];
                if fresh == 0 {
                    continue;
                }
                self.fwd[r].words[i] |= fresh;
                let mut bits = fresh;
                while bits != 0 {
                    let s = i * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    self.back[s].set(r);
                    self.pending.push((r, s));
                }
            }
        }
    }
}

// Backward worklist: `(q, l)` turns live once some state in the closure
// of `q` reads a letter other than the banned one into a live state.
fn live_states(out: &[Vec<(OEdge, usize)>], reach: &Reach, accepting: &[bool], letters: usize) -> Vec<Vec<bool>> {
    let n = out.len();
    let mut into: Vec<Vec<(OEdge, usize)>> = vec![Vec::new(); n];
    for (r, edges) in out.iter().enumerate() {
        for &(x, to) in edges {
            into[to].push((x, r));
        }
    }
    let banned = |l: usize| (l > 0).then(|| OEdge::from_index(l - 1).inv());
    let mut live = vec![vec![false; letters + 1]; n];
    let mut readable = vec![0u64; n];
    let mut usable = vec![0u64; n];
    let mut pending = Vec::new();
    for q in 0..n {
        if reach.fwd[q].iter().any(|r| accepting[r]) {
            for l in 0..=letters {
                live[q][l] = true;
                pending.push((q, l));
            }
        }
    }
    while let Some((q, l)) = pending.pop() {
        for &(x, r) in &into[q] {
            let bit = 1u64 << x.index();
            if x.index() + 1 != l || readable[r] & bit != 0 {
                continue;
            }
            readable[r] |= bit;
            for p in reach.back[r].iter() {
                if usable[p] & bit != 0 {
                    continue;
                }
                usable[p] |= bit;
                for m in 0..=letters {
                    if !live[p][m] && banned(m) != Some(x) {
                        live[p][m] = true;
                        pending.push((p, m));
                    }
                }
            }
        }
    }
    live
}

/// The least bounded cancellation constant of `f`, never above `upper`
/// (any sound bound, used as the search depth). Falls back to `upper` when
/// the automaton is too large.
pub fn exact_bcc(f: &GraphMap, upper: usize) -> Result<usize> {
    let Some(a) = ImageAutomaton::new(f) else {
        return Ok(upper);
    };
    let g = f.source();
    let mut best = 0;
    for v in 0..g.vertex_count() {
        let dirs = g.directions_at(v);
        for (i, &d1) in dirs.iter().enumerate() {
            for &d2 in &dirs[i + 1..] {
                best = best.max(a.common_prefix_depth(f.target(), d1, d2, upper));
                if best >= upper {
                    return Ok(upper);
                }
            }
        }
    }
    Ok(best)
}
