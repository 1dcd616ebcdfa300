//! The line-oriented graph and map format.
//!
//! ```text
//! # golden map
//! vertex v
//! edge a v v
//! edge b v v
//! marking x = a
//! marking y = b
//! map
//! a -> b
//! b -> a b
//! vmap v -> v
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, Path};
use crate::map::GraphMap;
use crate::marking::MarkedGraph;

/// A parsed file: a marked graph and, if a `map` section is present, a
/// self-map of it.
#[derive(Clone, Debug)]
pub struct MapFile {
    pub marked: MarkedGraph,
    pub map: Option<GraphMap>,
}

impl MapFile {
    /// The self-map, which must have nontrivial edge images.
    pub fn representative(&self) -> Result<&GraphMap> {
        let f = self.map.as_ref().ok_or(Error::Parse { line: 0, msg: "no map section".into() })?;
        f.require_nontrivial()?;
        Ok(f)
    }
}

pub fn parse(src: &str) -> Result<MapFile> {
    let mut g = Graph::new();
    let mut markings: Vec<(usize, String, String)> = Vec::new();
    let mut images: Vec<(usize, String, String)> = Vec::new();
    let mut vmaps: Vec<(usize, String, String)> = Vec::new();
    let mut in_map = false;
    let mut saw_map = false;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "vertex" if !in_map => {
                if toks.len() != 2 {
                    return Err(err("expected `vertex <id>`".into()));
                }
                g.add_vertex(toks[1]).map_err(|e| err(e.to_string()))?;
            }
            "edge" if !in_map => {
                if toks.len() != 4 {
                    return Err(err("expected `edge <id> <from> <to>`".into()));
                }
                let from = g.vertex_index(toks[2]).ok_or_else(|| err(format!("unknown vertex {}", toks[2])))?;
                let to = g.vertex_index(toks[3]).ok_or_else(|| err(format!("unknown vertex {}", toks[3])))?;
                g.add_edge(toks[1], from, to).map_err(|e| err(e.to_string()))?;
            }
            "marking" if !in_map => {
                let (lhs, rhs) = line["marking".len()..]
                    .split_once('=')
                    .ok_or_else(|| err("expected `marking <gen> = <word>`".into()))?;
                markings.push((line_no, lhs.trim().to_string(), rhs.trim().to_string()));
            }
            "map" => {
                if saw_map || toks.len() != 1 {
                    return Err(err("unexpected `map`".into()));
                }
                in_map = true;
                saw_map = true;
            }
            "vmap" if in_map => {
                let (lhs, rhs) = line["vmap".len()..]
                    .split_once("->")
                    .ok_or_else(|| err("expected `vmap <v> -> <v>`".into()))?;
                vmaps.push((line_no, lhs.trim().to_string(), rhs.trim().to_string()));
            }
            _ if in_map => {
                let (lhs, rhs) =
                    line.split_once("->").ok_or_else(|| err(format!("expected `<edge> -> <word>`, got {line:?}")))?;
                images.push((line_no, lhs.trim().to_string(), rhs.trim().to_string()));
            }
            other => return Err(err(format!("unknown declaration {other:?}"))),
        }
    }
    g.validate().map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;

    let marked = if markings.is_empty() {
        MarkedGraph::with_tree_marking(g.clone())?
    } else {
        let mut gens = Vec::new();
        let mut loops = Vec::new();
        for (line, name, word) in &markings {
            let p = Path::parse(&g, word).map_err(|e| Error::Parse { line: *line, msg: e.to_string() })?;
            gens.push(name.clone());
            loops.push(p);
        }
        MarkedGraph::new(g.clone(), gens, loops)?
    };

    let map = if saw_map {
        let ga = Arc::new(g);
        let mut words = vec![None; ga.edge_count()];
        for (line, lhs, rhs) in &images {
            let err = |msg: String| Error::Parse { line: *line, msg };
            let e = ga.edge_index(lhs).ok_or_else(|| err(format!("unknown edge {lhs}")))?;
            if words[e].is_some() {
                return Err(err(format!("edge {lhs} mapped twice")));
            }
            words[e] = Some(ga.parse_word(rhs).map_err(|x| err(x.to_string()))?);
        }
        if let Some(e) = words.iter().position(|w| w.is_none()) {
            return Err(Error::Parse { line: 0, msg: format!("no image for edge {}", ga.edge(e).id) });
        }
        let mut vm = vec![None; ga.vertex_count()];
        for (line, lhs, rhs) in &vmaps {
            let err = |msg: String| Error::Parse { line: *line, msg };
            let a = ga.vertex_index(lhs).ok_or_else(|| err(format!("unknown vertex {lhs}")))?;
            let b = ga.vertex_index(rhs).ok_or_else(|| err(format!("unknown vertex {rhs}")))?;
            vm[a] = Some(b);
        }
        let words = words.into_iter().map(Option::unwrap).collect();
        Some(GraphMap::from_words(ga.clone(), ga, words, vm)?)
    } else {
        None
    };
    Ok(MapFile { marked, map })
}

/// Render a marked graph and optional self-map in the text format.
pub fn render(marked: &MarkedGraph, map: Option<&GraphMap>) -> String {
    let g = &marked.graph;
    let mut out = String::new();
    for v in 0..g.vertex_count() {
        writeln!(out, "vertex {}", g.vertex_name(v)).unwrap();
    }
    for e in g.edges() {
        writeln!(out, "edge {} {} {}", e.id, g.vertex_name(e.init), g.vertex_name(e.term)).unwrap();
    }
    for (name, p) in marked.marking.generators.iter().zip(&marked.marking.loops) {
        writeln!(out, "marking {} = {}", name, g.fmt_word(p.edges())).unwrap();
    }
    if let Some(f) = map {
        out.push_str("map\n");
        for (e, ed) in g.edges().iter().enumerate() {
            writeln!(out, "{} -> {}", ed.id, g.fmt_word(f.edge_image(e).edges())).unwrap();
        }
        for v in 0..g.vertex_count() {
            writeln!(out, "vmap {} -> {}", g.vertex_name(v), g.vertex_name(f.vertex_image(v))).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = "# golden\nvertex v\nedge a v v\nedge b v v\nmap\na -> b\nb -> a b\n";

    #[test]
    fn parses_golden() {
        let mf = parse(GOLDEN).unwrap();
        let f = mf.representative().unwrap();
        assert_eq!(f.graph().edge_count(), 2);
        assert_eq!(f.graph().fmt_word(f.edge_image(1).edges()), "a b");
        assert_eq!(mf.marked.rank(), 2);
    }

    #[test]
    fn render_parses_back() {
        let mf = parse(GOLDEN).unwrap();
        let s = render(&mf.marked, mf.map.as_ref());
        let again = parse(&s).unwrap();
        assert_eq!(again.map.unwrap().edge_images(), mf.map.unwrap().edge_images());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("vertex v\nedge a v w\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse("vertex v\nedge a v v\nmap\na -> b\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
        let e = parse("vertex v\nedge a v v\nedge b v v\nmap\na -> a b\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 0, .. }), "{e}");
    }
}
