//! Finite acyclic quivers, paths, walks and bypasses.
//!
//! Paths and walks store their arrows in the order they are traversed, so the
//! written path `d*c*b` is stored as `[b, c, d]`.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuiverError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow `{0}`")]
    DuplicateArrow(String),
    #[error("arrow `{arrow}` uses undeclared vertex `{vertex}`")]
    DanglingEndpoint { arrow: String, vertex: String },
    #[error("oriented cycle through {0:?}")]
    OrientedCycle(Vec<String>),
    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("`{0}` is not a composable path")]
    NotComposable(String),
    #[error("empty path or walk expression")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug)]
pub struct Quiver {
    name: String,
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
    vertex_lookup: HashMap<String, usize>,
    arrow_lookup: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    paths: OnceLock<Vec<Path>>,
}

impl PartialEq for Quiver {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.arrows == other.arrows
    }
}
impl Eq for Quiver {}

impl Quiver {
    /// Builds a quiver from vertex names and `(name, source, target)` arrow triples.
    pub fn new<S: AsRef<str>>(
        name: &str,
        vertices: &[S],
        arrows: &[(S, S, S)],
    ) -> Result<Quiver, QuiverError> {
        let mut vertex_lookup = HashMap::new();
        let mut names = Vec::new();
        for v in vertices {
            let v = v.as_ref().to_string();
            if vertex_lookup.insert(v.clone(), names.len()).is_some() {
                return Err(QuiverError::DuplicateVertex(v));
            }
            names.push(v);
        }
        let mut arrow_lookup = HashMap::new();
        let mut list = Vec::new();
        for (a, s, t) in arrows {
            let a = a.as_ref().to_string();
            let find = |v: &S| {
                vertex_lookup.get(v.as_ref()).copied().ok_or_else(|| QuiverError::DanglingEndpoint {
                    arrow: a.clone(),
                    vertex: v.as_ref().to_string(),
                })
            };
            let (source, target) = (find(s)?, find(t)?);
            if arrow_lookup.insert(a.clone(), list.len()).is_some() {
                return Err(QuiverError::DuplicateArrow(a));
            }
            list.push(Arrow { name: a, source, target });
        }
        let mut outgoing = vec![Vec::new(); names.len()];
        let mut incoming = vec![Vec::new(); names.len()];
        for (i, a) in list.iter().enumerate() {
            outgoing[a.source].push(i);
            incoming[a.target].push(i);
        }
        let q = Quiver {
            name: name.to_string(),
            vertices: names,
            arrows: list,
            vertex_lookup,
            arrow_lookup,
            outgoing,
            incoming,
            paths: OnceLock::new(),
        };
        if let Some(cycle) = q.find_cycle() {
            return Err(QuiverError::OrientedCycle(cycle));
        }
        Ok(q)
    }

    fn find_cycle(&self) -> Option<Vec<String>> {
        // 0 = unseen, 1 = on stack, 2 = done
        let n = self.vertices.len();
        let mut state = vec![0u8; n];
        let mut stack_path: Vec<usize> = Vec::new();
        fn dfs(q: &Quiver, v: usize, state: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<String>> {
            state[v] = 1;
            stack.push(v);
            for &a in &q.outgoing[v] {
                let w = q.arrows[a].target;
                if state[w] == 1 {
                    let start = stack.iter().position(|&x| x == w).unwrap();
                    return Some(stack[start..].iter().map(|&x| q.vertices[x].clone()).collect());
                }
                if state[w] == 0 {
                    if let Some(c) = dfs(q, w, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }
        for v in 0..n {
            if state[v] == 0 {
                if let Some(c) = dfs(self, v, &mut state, &mut stack_path) {
                    return Some(c);
                }
            }
        }
        None
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn vertex_id(&self, name: &str) -> Result<usize, QuiverError> {
        self.vertex_lookup.get(name).copied().ok_or_else(|| QuiverError::UnknownVertex(name.to_string()))
    }

    pub fn arrow_id(&self, name: &str) -> Result<usize, QuiverError> {
        self.arrow_lookup.get(name).copied().ok_or_else(|| QuiverError::UnknownArrow(name.to_string()))
    }

    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }

    pub fn incoming(&self, v: usize) -> &[usize] {
        &self.incoming[v]
    }

    /// Every path of the quiver, trivial ones included, in canonical order.
    pub fn enumerate_paths(&self) -> &[Path] {
        self.paths.get_or_init(|| {
            let mut out = Vec::new();
            for v in 0..self.vertex_count() {
                let mut stack = vec![Path::trivial(v)];
                while let Some(p) = stack.pop() {
                    for &a in &self.outgoing[p.target] {
                        let mut arrows = p.arrows.clone();
                        arrows.push(a);
                        stack.push(Path { source: p.source, target: self.arrows[a].target, arrows });
                    }
                    out.push(p);
                }
            }
            out.sort();
            out
        })
    }

    pub fn paths_between(&self, x: usize, y: usize) -> Vec<Path> {
        self.enumerate_paths().iter().filter(|p| p.source == x && p.target == y).cloned().collect()
    }

    /// Pairs `(x, y)` admitting at least one nontrivial path, in lexicographic order.
    pub fn hom_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> =
            self.enumerate_paths().iter().filter(|p| !p.is_trivial()).map(|p| (p.source, p.target)).collect();
        pairs.sort();
        pairs.dedup();
        pairs
    }

    pub fn longest_path_len(&self) -> usize {
        self.enumerate_paths().iter().map(Path::len).max().unwrap_or(0)
    }

    /// Bypasses `(α, u)`: an arrow and a different path parallel to it.
    pub fn find_bypasses(&self) -> Vec<Bypass> {
        let mut out = Vec::new();
        for (i, a) in self.arrows.iter().enumerate() {
            for p in self.paths_between(a.source, a.target) {
                if p.arrows != [i] {
                    out.push(Bypass { arrow: i, path: p });
                }
            }
        }
        out
    }

    /// Pairs of bypasses `((α, u), (β, v))` where `β` occurs in `u`.
    pub fn find_double_bypasses(&self) -> Vec<(Bypass, Bypass)> {
        let all = self.find_bypasses();
        let mut out = Vec::new();
        for first in &all {
            for second in &all {
                if first.path.contains_arrow(second.arrow) {
                    out.push((first.clone(), second.clone()));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &a in self.outgoing[v].iter().chain(self.incoming[v].iter()) {
                let arrow = &self.arrows[a];
                for w in [arrow.source, arrow.target] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Parses a written path such as `d*c*b`; `@x` is the trivial path at `x`.
    pub fn path(&self, written: &str) -> Result<Path, QuiverError> {
        let w = self.walk(written)?;
        w.to_path().ok_or_else(|| QuiverError::NotComposable(written.to_string()))
    }

    /// Parses a written walk such as `d^-1*d*a`; `@x` is the trivial walk at `x`.
    pub fn walk(&self, written: &str) -> Result<Walk, QuiverError> {
        let text = written.trim();
        if text.is_empty() {
            return Err(QuiverError::Empty);
        }
        if let Some(v) = text.strip_prefix('@') {
            return Ok(Walk::trivial(self.vertex_id(v.trim())?));
        }
        let mut letters = Vec::new();
        for piece in text.split('*').rev() {
            let piece = piece.trim();
            let (name, inverse) = match piece.strip_suffix("^-1") {
                Some(n) => (n.trim(), true),
                None => (piece, false),
            };
            letters.push(Letter { arrow: self.arrow_id(name)?, inverse });
        }
        Walk::from_letters(self, letters).ok_or_else(|| QuiverError::NotComposable(written.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Path {
    pub source: usize,
    pub target: usize,
    /// Arrows in traversal order.
    pub arrows: Vec<usize>,
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arrows
            .len()
            .cmp(&other.arrows.len())
            .then_with(|| self.arrows.cmp(&other.arrows))
            .then_with(|| self.source.cmp(&other.source))
            .then_with(|| self.target.cmp(&other.target))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Path {
    pub fn trivial(v: usize) -> Path {
        Path { source: v, target: v, arrows: Vec::new() }
    }

    pub fn arrow(q: &Quiver, a: usize) -> Path {
        let arrow = q.arrow(a);
        Path { source: arrow.source, target: arrow.target, arrows: vec![a] }
    }

    pub fn from_arrows(q: &Quiver, arrows: Vec<usize>) -> Option<Path> {
        let first = *arrows.first()?;
        let source = q.arrow(first).source;
        let mut at = source;
        for &a in &arrows {
            if q.arrow(a).source != at {
                return None;
            }
            at = q.arrow(a).target;
        }
        Some(Path { source, target: at, arrows })
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn is_parallel(&self, other: &Path) -> bool {
        self.source == other.source && self.target == other.target
    }

    pub fn contains_arrow(&self, a: usize) -> bool {
        self.arrows.contains(&a)
    }

    /// `self` followed by `next`, written `next*self`.
    pub fn then(&self, next: &Path) -> Option<Path> {
        if self.target != next.source {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&next.arrows);
        Some(Path { source: self.source, target: next.target, arrows })
    }

    pub fn to_walk(&self) -> Walk {
        Walk {
            source: self.source,
            target: self.target,
            letters: self.arrows.iter().map(|&a| Letter { arrow: a, inverse: false }).collect(),
        }
    }

    pub fn display<'a>(&'a self, q: &'a Quiver) -> PathDisplay<'a> {
        PathDisplay { path: self, quiver: q }
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    quiver: &'a Quiver,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_trivial() {
            return write!(f, "@{}", self.quiver.vertex_name(self.path.source));
        }
        let names: Vec<&str> = self.path.arrows.iter().rev().map(|&a| self.quiver.arrow(a).name.as_str()).collect();
        write!(f, "{}", names.join("*"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub arrow: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inverted(self) -> Letter {
        Letter { arrow: self.arrow, inverse: !self.inverse }
    }

    pub fn start(self, q: &Quiver) -> usize {
        let a = q.arrow(self.arrow);
        if self.inverse {
            a.target
        } else {
            a.source
        }
    }

    pub fn end(self, q: &Quiver) -> usize {
        let a = q.arrow(self.arrow);
        if self.inverse {
            a.source
        } else {
            a.target
        }
    }
}

/// A walk in the underlying graph, letters in traversal order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Walk {
    pub source: usize,
    pub target: usize,
    pub letters: Vec<Letter>,
}

impl Walk {
    pub fn trivial(v: usize) -> Walk {
        Walk { source: v, target: v, letters: Vec::new() }
    }

    pub fn from_letters(q: &Quiver, letters: Vec<Letter>) -> Option<Walk> {
        let first = *letters.first()?;
        let source = first.start(q);
        let mut at = source;
        for l in &letters {
            if l.start(q) != at {
                return None;
            }
            at = l.end(q);
        }
        Some(Walk { source, target: at, letters })
    }

    /// Checks that consecutive letters meet and the endpoints are recorded correctly.
    pub fn is_valid(&self, q: &Quiver) -> bool {
        let mut at = self.source;
        for l in &self.letters {
            if l.start(q) != at {
                return false;
            }
            at = l.end(q);
        }
        at == self.target
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Walk {
        Walk {
            source: self.target,
            target: self.source,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Walk) -> Option<Walk> {
        if self.target != next.source {
            return None;
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&next.letters);
        Some(Walk { source: self.source, target: next.target, letters })
    }

    pub fn reduced(&self) -> Walk {
        Walk { source: self.source, target: self.target, letters: reduce_letters(&self.letters) }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1].inverted())
    }

    pub fn to_path(&self) -> Option<Path> {
        if self.letters.iter().any(|l| l.inverse) {
            return None;
        }
        Some(Path { source: self.source, target: self.target, arrows: self.letters.iter().map(|l| l.arrow).collect() })
    }

    /// Vertex reached after the first `i` letters.
    pub fn vertex_at(&self, q: &Quiver, i: usize) -> usize {
        if i == 0 {
            self.source
        } else {
            self.letters[i - 1].end(q)
        }
    }

    pub fn display<'a>(&'a self, q: &'a Quiver) -> WalkDisplay<'a> {
        WalkDisplay { walk: self, quiver: q }
    }
}

pub fn reduce_letters(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&l.inverted()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub struct WalkDisplay<'a> {
    walk: &'a Walk,
    quiver: &'a Quiver,
}

impl fmt::Display for WalkDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.walk.is_empty() {
            return write!(f, "@{}", self.quiver.vertex_name(self.walk.source));
        }
        let parts: Vec<String> = self
            .walk
            .letters
            .iter()
            .rev()
            .map(|l| {
                let name = &self.quiver.arrow(l.arrow).name;
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name.clone()
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bypass {
    pub arrow: usize,
    pub path: Path,
}

impl Bypass {
    pub fn new(q: &Quiver, arrow: usize, path: Path) -> Option<Bypass> {
        let a = q.arrow(arrow);
        if path.source != a.source || path.target != a.target || path.arrows == [arrow] {
            return None;
        }
        Some(Bypass { arrow, path })
    }

    pub fn label(&self, q: &Quiver) -> String {
        format!("({},{})", q.arrow(self.arrow).name, self.path.display(q))
    }
}
