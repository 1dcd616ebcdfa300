//! Free-group oracles for roses, written against plain signed-letter words
//! so they share no code with the library's path machinery.
//!
//! Letter `i + 1` is edge `i` forwards, `-(i + 1)` is edge `i` backwards.

#![allow(dead_code)]

use std::ops::RangeInclusive;
use std::sync::Arc;

use outfn::graph::{Graph, OEdge, Path};
use outfn::map::GraphMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Word = Vec<i32>;

pub const NAMES: [&str; 3] = ["a", "b", "c"];

pub fn reduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &x in w {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn inverse(w: &[i32]) -> Word {
    w.iter().rev().map(|&x| -x).collect()
}

/// Image of a word under a rose map given by letter images, tightened.
pub fn apply(images: &[Word], w: &[i32]) -> Word {
    let mut out: Word = Vec::new();
    for &x in w {
        let img = &images[x.unsigned_abs() as usize - 1];
        if x > 0 {
            for &y in img {
                push(&mut out, y);
            }
        } else {
            for &y in img.iter().rev() {
                push(&mut out, -y);
            }
        }
    }
    out
}

fn push(out: &mut Word, y: i32) {
    if out.last() == Some(&-y) {
        out.pop();
    } else {
        out.push(y);
    }
}

/// `g ∘ f` as letter images.
pub fn compose(g: &[Word], f: &[Word]) -> Vec<Word> {
    f.iter().map(|w| apply(g, w)).collect()
}

pub fn power(f: &[Word], k: usize) -> Vec<Word> {
    let rank = f.len();
    let mut acc: Vec<Word> = (1..=rank as i32).map(|i| vec![i]).collect();
    for _ in 0..k {
        acc = compose(f, &acc);
    }
    acc
}

pub fn letter(d: OEdge) -> i32 {
    let i = d.edge() as i32 + 1;
    if d.is_rev() {
        -i
    } else {
        i
    }
}

pub fn oedge(x: i32) -> OEdge {
    OEdge::new(x.unsigned_abs() as usize - 1, x < 0)
}

pub fn word_of(p: &[OEdge]) -> Word {
    p.iter().map(|&d| letter(d)).collect()
}

pub fn path_of(g: &Graph, w: &[i32]) -> Path {
    Path::from_reduced(g, 0, w.iter().map(|&x| oedge(x)).collect())
}

pub fn images_of(f: &GraphMap) -> Vec<Word> {
    f.edge_images().iter().map(|p| word_of(p.edges())).collect()
}

pub fn rose_map(images: &[Word]) -> GraphMap {
    let g = Arc::new(Graph::rose(&NAMES[..images.len()]));
    let words = images.iter().map(|w| w.iter().map(|&x| oedge(x)).collect()).collect();
    GraphMap::from_words(g.clone(), g, words, vec![]).unwrap()
}

pub fn random_letter(rng: &mut ChaCha8Rng, rank: usize) -> i32 {
    let i = rng.gen_range(1..=rank as i32);
    if rng.gen_bool(0.5) {
        i
    } else {
        -i
    }
}

/// Random reduced word with length drawn from `lens`.
pub fn random_reduced(rng: &mut ChaCha8Rng, rank: usize, lens: RangeInclusive<usize>) -> Word {
    let len = rng.gen_range(lens);
    let mut w: Word = Vec::with_capacity(len);
    while w.len() < len {
        let x = random_letter(rng, rank);
        if w.last() != Some(&-x) {
            w.push(x);
        }
    }
    w
}

/// Random cyclically reduced word with length drawn from `lens`.
pub fn random_cyclic(rng: &mut ChaCha8Rng, rank: usize, lens: RangeInclusive<usize>) -> Word {
    loop {
        let w = random_reduced(rng, rank, lens.clone());
        if w.len() < 2 || w[0] != -w[w.len() - 1] {
            return w;
        }
    }
}

/// Product of `moves` Nielsen moves `x_i -> x_i x_j^{±1}` or
/// `x_i -> x_j^{±1} x_i`; positive moves only when `positive`.
pub fn random_automorphism(rng: &mut ChaCha8Rng, rank: usize, moves: usize, positive: bool) -> Vec<Word> {
    let mut images: Vec<Word> = (1..=rank as i32).map(|i| vec![i]).collect();
    for _ in 0..moves {
        let i = rng.gen_range(0..rank);
        let mut j = rng.gen_range(0..rank - 1);
        if j >= i {
            j += 1;
        }
        let other = if positive || rng.gen_bool(0.5) { images[j].clone() } else { inverse(&images[j]) };
        let joined = if rng.gen_bool(0.5) {
            [images[i].clone(), other].concat()
        } else {
            [other, images[i].clone()].concat()
        };
        images[i] = reduce(&joined);
    }
    images
}

/// Edges of `f_#(β)` eaten from each end by extensions of at most `depth`
/// edges, by exhaustive enumeration.
pub fn eaten_by_extensions(images: &[Word], beta: &[i32], depth: usize) -> (usize, usize) {
    let rank = images.len();
    let fb = apply(images, beta);
    let cancel = |x: &[i32], y: &[i32]| -> usize {
        let (fx, fy) = (apply(images, x), apply(images, y));
        let joined = apply(images, &[x, y].concat());
        (fx.len() + fy.len() - joined.len()) / 2
    };
    let mut left = 0;
    let mut right = 0;
    let mut frontier: Vec<Word> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            for x in (1..=rank as i32).flat_map(|i| [i, -i]) {
                // extensions on the left are words ending next to β
                let mut ext = vec![x];
                ext.extend_from_slice(w);
                if ext.len() > 1 && ext[0] == -ext[1] {
                    continue;
                }
                next.push(ext);
            }
        }
        for ext in &next {
            if *ext.last().unwrap() != -beta[0] {
                left = left.max(cancel(ext, beta).min(fb.len()));
            }
            let rext = inverse(ext);
            if rext[0] != -*beta.last().unwrap() {
                right = right.max(cancel(beta, &rext).min(fb.len()));
            }
        }
        frontier = next;
    }
    (left, right)
}

/// `f##(β)` as a word, from [`eaten_by_extensions`].
pub fn double_sharp_oracle(images: &[Word], beta: &[i32], depth: usize) -> Word {
    let fb = apply(images, beta);
    let (l, r) = eaten_by_extensions(images, beta, depth);
    if l + r >= fb.len() {
        Vec::new()
    } else {
        fb[l..fb.len() - r].to_vec()
    }
}

/// Ordered occurrences of `pats` in `text` with disjoint interiors, greedy
/// leftmost.
pub fn ordered_disjoint(text: &[i32], pats: &[Word]) -> bool {
    let mut from = 0;
    for p in pats {
        if p.is_empty() {
            continue;
        }
        match (from..=text.len().saturating_sub(p.len())).find(|&i| i + p.len() <= text.len() && text[i..i + p.len()] == p[..]) {
            Some(i) => from = i + p.len(),
            None => return false,
        }
    }
    true
}

pub fn contains(text: &[i32], pat: &[i32]) -> bool {
    pat.is_empty() || text.windows(pat.len()).any(|w| w == pat)
}
