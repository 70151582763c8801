//! Homotopy relations of bound quivers and their fundamental groups.
//!
//! The relation `~_I` is generated by pairs of paths occurring in a common
//! minimal relation. The fundamental group is presented on the chords of a
//! breadth-first spanning tree, with one relator per generating pair.
//!
//! Deciding `u ~ v` is three-valued. `Homotopic` carries a chain of
//! elementary moves that [`HomotopyRelation::verify_chain`] replays;
//! `NotHomotopic` carries an abelian or permutation certificate.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use num::bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::group::{
    free_reduce, invert, permutation_quotients, todd_coxeter, AbelianInvariants, AbelianQuotient, CosetTable,
    GenLetter, GroupPresentation, PermutationRep, Word,
};
use crate::ideal::Ideal;
use crate::quiver::{reduce_letters, Letter, Path, Quiver, Walk};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    #[error("walks are not parallel")]
    NotParallel,
    #[error("quiver is not connected")]
    Disconnected,
    #[error("base vertex {0} out of range")]
    BadBase(usize),
    #[error("homotopy of `{0}` and `{1}` could not be decided")]
    Inconclusive(String, String),
}

#[derive(Clone, Debug)]
pub struct HomotopyOptions {
    /// Length bound on reduced walks visited by the rewrite search. `None`
    /// means twice the longest path length plus four.
    pub cap: Option<usize>,
    /// Bound on states visited per search.
    pub max_states: usize,
    pub permutation_degree: usize,
    pub max_permutation_reps: usize,
    pub permutation_budget: usize,
    pub coset_enumeration: bool,
    pub max_cosets: usize,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        HomotopyOptions {
            cap: None,
            max_states: 20_000,
            permutation_degree: 4,
            max_permutation_reps: 2_000,
            permutation_budget: 200_000,
            coset_enumeration: false,
            max_cosets: 10_000,
        }
    }
}

/// Breadth-first spanning tree of the underlying graph.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub base: usize,
    /// Tree walk from the base to each vertex.
    pub to_vertex: Vec<Walk>,
    /// Generator index of each non-tree arrow.
    pub chord_of_arrow: Vec<Option<usize>>,
    pub chords: Vec<usize>,
}

impl SpanningTree {
    pub fn bfs(q: &Quiver, base: usize) -> Result<SpanningTree, HomotopyError> {
        let order: Vec<usize> = (0..q.arrow_count()).collect();
        SpanningTree::with_arrow_order(q, base, &order)
    }

    /// BFS where arrows at each vertex are scanned in the given order.
    pub fn with_arrow_order(q: &Quiver, base: usize, order: &[usize]) -> Result<SpanningTree, HomotopyError> {
        if base >= q.vertex_count() {
            return Err(HomotopyError::BadBase(base));
        }
        let n = q.vertex_count();
        let mut to_vertex: Vec<Option<Walk>> = vec![None; n];
        let mut in_tree = vec![false; q.arrow_count()];
        to_vertex[base] = Some(Walk::trivial(base));
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for &a in order {
                let arrow = q.arrow(a);
                let letter = if arrow.source == v {
                    Letter { arrow: a, inverse: false }
                } else if arrow.target == v {
                    Letter { arrow: a, inverse: true }
                } else {
                    continue;
                };
                let w = letter.end(q);
                if to_vertex[w].is_none() {
                    let mut walk = to_vertex[v].clone().unwrap();
                    walk.letters.push(letter);
                    walk.target = w;
                    to_vertex[w] = Some(walk);
                    in_tree[a] = true;
                    queue.push_back(w);
                }
            }
        }
        let to_vertex: Vec<Walk> = to_vertex.into_iter().collect::<Option<_>>().ok_or(HomotopyError::Disconnected)?;
        let mut chord_of_arrow = vec![None; q.arrow_count()];
        let mut chords = Vec::new();
        for a in 0..q.arrow_count() {
            if !in_tree[a] {
                chord_of_arrow[a] = Some(chords.len());
                chords.push(a);
            }
        }
        Ok(SpanningTree { base, to_vertex, chord_of_arrow, chords })
    }

    /// Chord word of a walk: the class of `T(x)·w·T(y)⁻¹` in the free group on chords.
    pub fn word(&self, w: &[Letter]) -> Word {
        let raw: Word = w
            .iter()
            .filter_map(|l| self.chord_of_arrow[l.arrow].map(|g| GenLetter { generator: g, inverse: l.inverse }))
            .collect();
        free_reduce(&raw)
    }

    /// Closed walk at the base representing the generator of a chord.
    pub fn generator_loop(&self, q: &Quiver, chord: usize) -> Walk {
        let a = self.chords[chord];
        let arrow = q.arrow(a);
        let mut w = self.to_vertex[arrow.source].clone();
        w.letters.push(Letter { arrow: a, inverse: false });
        w.target = arrow.target;
        w.then(&self.to_vertex[arrow.target].inverse()).unwrap()
    }

    /// A walk from the base whose class corresponds to a group word.
    pub fn loop_of_word(&self, q: &Quiver, word: &[GenLetter]) -> Walk {
        let mut w = Walk::trivial(self.base);
        for l in word {
            let g = self.generator_loop(q, l.generator);
            let g = if l.inverse { g.inverse() } else { g };
            w = w.then(&g).unwrap();
        }
        w.reduced()
    }
}

/// A rewrite `lhs -> rhs` on reduced walks coming from a rotation of a relator loop.
#[derive(Clone, Debug)]
struct Pattern {
    lhs: Vec<Letter>,
    rhs: Vec<Letter>,
    /// vertex where `lhs` (and `rhs`) start
    start: usize,
    pair: usize,
    inverted: bool,
    rotation: usize,
    split: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairStatus {
    Homotopic,
    NotHomotopic,
    Unknown,
}

/// Replayable chain of walks, consecutive ones differing by one elementary move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomotopyChain {
    pub steps: Vec<Walk>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// Normal form of `u·v⁻¹` in the abelianization, nonzero.
    Abelian { normal_form: Vec<String>, invariant_factors: Vec<String> },
    /// A permutation representation in which `u·v⁻¹` acts nontrivially.
    Permutation { rep: PermutationRep, image: Vec<usize> },
    /// A complete coset table of the group in which `u·v⁻¹` is nontrivial.
    CosetTable { order: usize },
    /// The presentation has no relators and `u·v⁻¹` reduces to this nonempty word.
    FreeWord { word: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Homotopic(HomotopyChain),
    NotHomotopic(Certificate),
    Unknown,
}

impl Decision {
    pub fn status(&self) -> PairStatus {
        match self {
            Decision::Homotopic(_) => PairStatus::Homotopic,
            Decision::NotHomotopic(_) => PairStatus::NotHomotopic,
            Decision::Unknown => PairStatus::Unknown,
        }
    }
}

/// Classification of the parallel paths of one hom-pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FingerprintEntry {
    pub source: usize,
    pub target: usize,
    pub paths: Vec<Path>,
    /// Class index of each path; classes are numbered by first member.
    pub class: Vec<usize>,
    /// Class pairs `(i, j)`, `i < j`, whose relation was not decided.
    pub unknown: Vec<(usize, usize)>,
}

impl FingerprintEntry {
    pub fn status(&self, i: usize, j: usize) -> PairStatus {
        let (a, b) = (self.class[i], self.class[j]);
        if a == b {
            PairStatus::Homotopic
        } else if self.unknown.contains(&(a.min(b), a.max(b))) {
            PairStatus::Unknown
        } else {
            PairStatus::NotHomotopic
        }
    }
}

/// The homotopy relation restricted to paths: a complete classification of parallel path pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub entries: Vec<FingerprintEntry>,
}

impl Fingerprint {
    pub fn has_unknown(&self) -> bool {
        self.entries.iter().any(|e| !e.unknown.is_empty())
    }

    pub fn status(&self, u: &Path, v: &Path) -> Option<PairStatus> {
        if u == v {
            return Some(PairStatus::Homotopic);
        }
        let e = self.entries.iter().find(|e| e.source == u.source && e.target == u.target)?;
        let i = e.paths.iter().position(|p| p == u)?;
        let j = e.paths.iter().position(|p| p == v)?;
        Some(e.status(i, j))
    }

    /// Hex digest of the classification.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        for e in &self.entries {
            h.update(format!("{}>{}:", e.source, e.target));
            for (p, c) in e.paths.iter().zip(&e.class) {
                h.update(format!("{:?}={c};", p.arrows));
            }
            for (a, b) in &e.unknown {
                h.update(format!("?{a},{b};"));
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of homotopy classes of nontrivial paths, counted per hom-pair.
    pub fn class_count(&self) -> usize {
        self.entries.iter().map(|e| e.class.iter().max().map_or(0, |m| m + 1)).sum()
    }
}

pub struct HomotopyRelation {
    quiver: Arc<Quiver>,
    ideal: Option<Arc<Ideal>>,
    base: usize,
    pairs: Vec<(Path, Path)>,
    tree: SpanningTree,
    presentation: GroupPresentation,
    abelian: AbelianQuotient,
    patterns: Vec<Pattern>,
    loops: Vec<(Vec<Letter>, Vec<Letter>)>,
    options: HomotopyOptions,
    cap: usize,
    fingerprint: OnceLock<Fingerprint>,
    quotients: OnceLock<Vec<PermutationRep>>,
    cosets: OnceLock<Option<CosetTable>>,
}

impl std::fmt::Debug for HomotopyRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HomotopyRelation").field("base", &self.base).field("pairs", &self.pairs.len()).finish()
    }
}

/// All pairs of distinct paths occurring in a common minimal relation.
pub fn generating_pairs(ideal: &Ideal) -> Vec<(Path, Path)> {
    let mut out = Vec::new();
    for r in ideal.minimal_relations() {
        let supp = r.support();
        for i in 0..supp.len() {
            for j in i + 1..supp.len() {
                out.push((supp[i].clone(), supp[j].clone()));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Chord presentation of the fundamental group for a given tree.
pub fn presentation_for(q: &Quiver, tree: &SpanningTree, pairs: &[(Path, Path)]) -> GroupPresentation {
    let generators = tree.chords.iter().map(|&a| q.arrow(a).name.clone()).collect();
    let mut relators = Vec::new();
    for (p, r) in pairs {
        let mut w = tree.word(&p.to_walk().letters);
        w.extend(invert(&tree.word(&r.to_walk().letters)));
        let w = free_reduce(&w);
        if !w.is_empty() {
            relators.push(w);
        }
    }
    GroupPresentation { generators, relators }
}

impl HomotopyRelation {
    pub fn from_ideal(ideal: Arc<Ideal>, base: usize, options: HomotopyOptions) -> Result<Self, HomotopyError> {
        let pairs = generating_pairs(&ideal);
        let q = ideal.quiver_arc().clone();
        let mut h = HomotopyRelation::from_pairs(q, base, pairs, options)?;
        h.ideal = Some(ideal);
        Ok(h)
    }

    /// The homotopy relation generated by arbitrary parallel path pairs.
    pub fn from_pairs(
        quiver: Arc<Quiver>,
        base: usize,
        pairs: Vec<(Path, Path)>,
        options: HomotopyOptions,
    ) -> Result<Self, HomotopyError> {
        if pairs.iter().any(|(p, q)| !p.is_parallel(q)) {
            return Err(HomotopyError::NotParallel);
        }
        let tree = SpanningTree::bfs(&quiver, base)?;
        let presentation = presentation_for(&quiver, &tree, &pairs);
        let abelian = presentation.abelian_quotient();
        let cap = options.cap.unwrap_or(2 * quiver.longest_path_len() + 4);
        let mut h = HomotopyRelation {
            quiver,
            ideal: None,
            base,
            pairs,
            tree,
            presentation,
            abelian,
            patterns: Vec::new(),
            loops: Vec::new(),
            options,
            cap,
            fingerprint: OnceLock::new(),
            quotients: OnceLock::new(),
            cosets: OnceLock::new(),
        };
        h.build_patterns();
        Ok(h)
    }

    fn build_patterns(&mut self) {
        let q = self.quiver.clone();
        let mut seen: HashMap<(Vec<Letter>, Vec<Letter>, usize), ()> = HashMap::new();
        for (pi, (p, r)) in self.pairs.iter().enumerate() {
            let (pw, rw) = (p.to_walk(), r.to_walk());
            let relator = pw.then(&rw.inverse()).unwrap();
            let inverse = relator.inverse();
            self.loops.push((pw.letters.clone(), rw.letters.clone()));
            for (inverted, lp) in [(false, &relator), (true, &inverse)] {
                let n = lp.len();
                for k in 0..n {
                    let mut rot = lp.letters[k..].to_vec();
                    rot.extend_from_slice(&lp.letters[..k]);
                    let start = lp.vertex_at(&q, k);
                    for split in 0..=n {
                        let lhs = rot[..split].to_vec();
                        if reduce_letters(&lhs) != lhs {
                            continue;
                        }
                        let suffix: Vec<Letter> = rot[split..].to_vec();
                        let t: Vec<Letter> = suffix.iter().rev().map(|l| l.inverted()).collect();
                        let rhs = reduce_letters(&t);
                        if lhs == rhs || (lhs.is_empty() && rhs.is_empty()) {
                            continue;
                        }
                        if seen.insert((lhs.clone(), rhs.clone(), start), ()).is_some() {
                            continue;
                        }
                        self.patterns.push(Pattern { lhs, rhs, start, pair: pi, inverted, rotation: k, split });
                    }
                }
            }
        }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn ideal(&self) -> Option<&Arc<Ideal>> {
        self.ideal.as_ref()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn generating_pairs(&self) -> &[(Path, Path)] {
        &self.pairs
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn abelian_quotient(&self) -> &AbelianQuotient {
        &self.abelian
    }

    pub fn abelianization(&self) -> AbelianInvariants {
        self.abelian.invariants()
    }

    fn quotients(&self) -> &[PermutationRep] {
        self.quotients.get_or_init(|| {
            permutation_quotients(
                &self.presentation,
                self.options.permutation_degree,
                self.options.max_permutation_reps,
                self.options.permutation_budget,
            )
        })
    }

    fn cosets(&self) -> Option<&CosetTable> {
        self.cosets.get_or_init(|| todd_coxeter(&self.presentation, self.options.max_cosets)).as_ref()
    }

    /// Group word of `u·v⁻¹`.
    pub fn loop_word(&self, u: &Walk, v: &Walk) -> Word {
        let mut w = self.tree.word(&u.letters);
        w.extend(invert(&self.tree.word(&v.letters)));
        free_reduce(&w)
    }

    pub fn decide_paths(&self, u: &Path, v: &Path) -> Result<Decision, HomotopyError> {
        self.decide(&u.to_walk(), &v.to_walk())
    }

    /// Three-valued decision with certificates.
    pub fn decide(&self, u: &Walk, v: &Walk) -> Result<Decision, HomotopyError> {
        if u.source != v.source || u.target != v.target {
            return Err(HomotopyError::NotParallel);
        }
        let (ru, rv) = (u.reduced(), v.reduced());
        if ru == rv {
            let mut steps = free_reduction_steps(u);
            let mut back = free_reduction_steps(v);
            back.pop();
            back.reverse();
            steps.extend(back);
            return Ok(Decision::Homotopic(HomotopyChain { steps }));
        }
        let word = self.loop_word(u, v);
        if let Some(c) = self.abelian_certificate(&word) {
            return Ok(Decision::NotHomotopic(c));
        }
        if let Some(meet) = self.search(&ru, &rv) {
            return Ok(Decision::Homotopic(self.build_chain(u, v, &ru, &rv, meet)));
        }
        Ok(match self.nonabelian_certificate(&word) {
            Some(c) => Decision::NotHomotopic(c),
            None => Decision::Unknown,
        })
    }

    /// Status only, skipping chain construction.
    pub fn classify(&self, u: &Walk, v: &Walk) -> PairStatus {
        let (ru, rv) = (u.reduced(), v.reduced());
        if ru == rv {
            return PairStatus::Homotopic;
        }
        let word = self.loop_word(u, v);
        if self.abelian_certificate(&word).is_some() {
            return PairStatus::NotHomotopic;
        }
        if self.search(&ru, &rv).is_some() {
            return PairStatus::Homotopic;
        }
        if self.nonabelian_certificate(&word).is_some() {
            PairStatus::NotHomotopic
        } else {
            PairStatus::Unknown
        }
    }

    /// Whether two walks with the same endpoints are homotopic; errors when undecided.
    pub fn same_class(&self, u: &Walk, v: &Walk) -> Result<bool, HomotopyError> {
        match self.classify(u, v) {
            PairStatus::Homotopic => Ok(true),
            PairStatus::NotHomotopic => Ok(false),
            PairStatus::Unknown => Err(HomotopyError::Inconclusive(
                u.display(&self.quiver).to_string(),
                v.display(&self.quiver).to_string(),
            )),
        }
    }

    fn abelian_certificate(&self, word: &[GenLetter]) -> Option<Certificate> {
        let nf = self.abelian.normal_form(&self.presentation.exponent_vector(word));
        if nf.iter().all(|x| *x == BigInt::from(0)) {
            return None;
        }
        Some(Certificate::Abelian {
            normal_form: nf.iter().map(ToString::to_string).collect(),
            invariant_factors: self.abelian.diagonal().iter().map(ToString::to_string).collect(),
        })
    }

    fn nonabelian_certificate(&self, word: &[GenLetter]) -> Option<Certificate> {
        if self.presentation.relators.is_empty() {
            // free group: reduced words decide
            return (!word.is_empty()).then(|| Certificate::FreeWord { word: self.word_names(word) });
        }
        for rep in self.quotients() {
            let image = rep.evaluate(word);
            if image.iter().enumerate().any(|(i, &j)| i != j) {
                return Some(Certificate::Permutation { rep: rep.clone(), image });
            }
        }
        if self.options.coset_enumeration {
            if let Some(t) = self.cosets() {
                if !t.is_trivial(word) {
                    return Some(Certificate::CosetTable { order: t.order() });
                }
            }
        }
        None
    }

    /// Checks a non-homotopy certificate against this relation.
    pub fn verify_certificate(&self, u: &Walk, v: &Walk, cert: &Certificate) -> bool {
        let word = self.loop_word(u, v);
        match cert {
            Certificate::Abelian { .. } => self.abelian_certificate(&word).is_some(),
            Certificate::Permutation { rep, image } => {
                rep.is_homomorphism(&self.presentation)
                    && rep.evaluate(&word) == *image
                    && image.iter().enumerate().any(|(i, &j)| i != j)
            }
            Certificate::CosetTable { .. } => {
                todd_coxeter(&self.presentation, self.options.max_cosets).is_some_and(|t| !t.is_trivial(&word))
            }
            Certificate::FreeWord { word: names } => {
                self.presentation.relators.is_empty() && !word.is_empty() && *names == self.word_names(&word)
            }
        }
    }

    fn word_names(&self, word: &[GenLetter]) -> Vec<String> {
        word.iter()
            .map(|l| {
                let g = &self.presentation.generators[l.generator];
                if l.inverse {
                    format!("{g}^-1")
                } else {
                    g.clone()
                }
            })
            .collect()
    }

    fn neighbours(&self, state: &[Letter], source: usize) -> Vec<(Vec<Letter>, usize, usize)> {
        let q = &*self.quiver;
        let mut out = Vec::new();
        let vertex_at = |i: usize| if i == 0 { source } else { state[i - 1].end(q) };
        for (pi, pat) in self.patterns.iter().enumerate() {
            let m = pat.lhs.len();
            if m == 0 {
                for i in 0..=state.len() {
                    if vertex_at(i) != pat.start {
                        continue;
                    }
                    let mut next = state[..i].to_vec();
                    next.extend_from_slice(&pat.rhs);
                    next.extend_from_slice(&state[i..]);
                    let next = reduce_letters(&next);
                    if next.len() <= self.cap {
                        out.push((next, pi, i));
                    }
                }
            } else if m <= state.len() {
                for i in 0..=state.len() - m {
                    if state[i..i + m] != pat.lhs[..] {
                        continue;
                    }
                    let mut next = state[..i].to_vec();
                    next.extend_from_slice(&pat.rhs);
                    next.extend_from_slice(&state[i + m..]);
                    let next = reduce_letters(&next);
                    if next.len() <= self.cap {
                        out.push((next, pi, i));
                    }
                }
            }
        }
        out
    }

    /// Bidirectional search over reduced walks. Returns the two macro paths to a common state.
    fn search(&self, u: &Walk, v: &Walk) -> Option<Meet> {
        if u.len() > self.cap || v.len() > self.cap || self.patterns.is_empty() {
            return None;
        }
        type Parents = HashMap<Vec<Letter>, Option<(Vec<Letter>, usize, usize)>>;
        let mut sides: [Parents; 2] = [HashMap::new(), HashMap::new()];
        let mut frontiers: [VecDeque<Vec<Letter>>; 2] = [VecDeque::new(), VecDeque::new()];
        sides[0].insert(u.letters.clone(), None);
        sides[1].insert(v.letters.clone(), None);
        frontiers[0].push_back(u.letters.clone());
        frontiers[1].push_back(v.letters.clone());
        let mut visited = 2usize;
        loop {
            let side = if frontiers[0].is_empty() {
                1
            } else if frontiers[1].is_empty() || frontiers[0].len() <= frontiers[1].len() {
                0
            } else {
                1
            };
            if frontiers[side].is_empty() {
                return None;
            }
            // expand one full layer
            let layer: Vec<Vec<Letter>> = frontiers[side].drain(..).collect();
            for state in layer {
                for (next, pi, pos) in self.neighbours(&state, u.source) {
                    if sides[side].contains_key(&next) {
                        continue;
                    }
                    sides[side].insert(next.clone(), Some((state.clone(), pi, pos)));
                    visited += 1;
                    if sides[1 - side].contains_key(&next) {
                        let trace = |map: &Parents, mut s: Vec<Letter>| {
                            let mut steps = Vec::new();
                            while let Some(Some((prev, pi, pos))) = map.get(&s) {
                                steps.push(MacroStep { from: prev.clone(), pattern: *pi, position: *pos });
                                s = prev.clone();
                            }
                            steps.reverse();
                            steps
                        };
                        let a = trace(&sides[0], next.clone());
                        let b = trace(&sides[1], next.clone());
                        return Some(Meet { from_u: a, from_v: b });
                    }
                    frontiers[side].push_back(next);
                    if visited > self.options.max_states {
                        return None;
                    }
                }
            }
        }
    }

    fn build_chain(&self, u: &Walk, v: &Walk, ru: &Walk, rv: &Walk, meet: Meet) -> HomotopyChain {
        let (s, t) = (u.source, u.target);
        let mk = |letters: Vec<Letter>| Walk { source: s, target: t, letters };
        let mut steps = free_reduction_steps(u);
        let _ = ru;
        for m in &meet.from_u {
            steps.extend(self.expand(&m.from, m.pattern, m.position).into_iter().map(mk));
        }
        let mut tail = free_reduction_steps(v);
        let _ = rv;
        for m in &meet.from_v {
            tail.extend(self.expand(&m.from, m.pattern, m.position).into_iter().map(mk));
        }
        tail.pop();
        tail.reverse();
        steps.extend(tail);
        HomotopyChain { steps }
    }

    /// Elementary moves realising one macro step, excluding the starting walk.
    fn expand(&self, from: &[Letter], pattern: usize, pos: usize) -> Vec<Vec<Letter>> {
        let pat = &self.patterns[pattern];
        let (p, r) = &self.loops[pat.pair];
        let inv = |w: &[Letter]| w.iter().rev().map(|l| l.inverted()).collect::<Vec<_>>();
        // loop = A · B⁻¹ with A replaced by B below
        let (a, b) = if pat.inverted { (r.clone(), p.clone()) } else { (p.clone(), r.clone()) };
        let mut lp = a.clone();
        lp.extend(inv(&b));
        let n = lp.len();
        let mut rot = lp[pat.rotation..].to_vec();
        rot.extend_from_slice(&lp[..pat.rotation]);
        let suffix = rot[pat.split..].to_vec();
        let y = lp[pat.rotation..].to_vec();

        let mut out = Vec::new();
        let mut cur = from.to_vec();
        // insert suffix · suffix⁻¹ after the matched lhs, outside in
        let at = pos + pat.split;
        for (j, &l) in suffix.iter().enumerate() {
            cur.insert(at + j, l.inverted());
            cur.insert(at + j, l);
            out.push(cur.clone());
        }
        // now cur = w · rot · t · w'; insert y · y⁻¹ after rot
        let after = pos + n;
        for (j, &l) in y.iter().enumerate() {
            cur.insert(after + j, l.inverted());
            cur.insert(after + j, l);
            out.push(cur.clone());
        }
        // cur = w · y · A · B⁻¹ · y⁻¹ · t · w'; replace A by B
        let la = pos + y.len();
        cur.splice(la..la + a.len(), b.iter().copied());
        out.push(cur.clone());
        // delete B · B⁻¹ then y · y⁻¹, inside out
        for j in (0..b.len()).rev() {
            cur.drain(la + j..la + j + 2);
            out.push(cur.clone());
        }
        for j in (0..y.len()).rev() {
            cur.drain(pos + j..pos + j + 2);
            out.push(cur.clone());
        }
        // free reduction one pair at a time
        while let Some(i) = (0..cur.len().saturating_sub(1)).find(|&i| cur[i + 1] == cur[i].inverted()) {
            cur.drain(i..i + 2);
            out.push(cur.clone());
        }
        out
    }

    /// Replays a chain: every step must be a valid walk with the same endpoints
    /// and differ from the previous one by an elementary move.
    pub fn verify_chain(&self, chain: &HomotopyChain, u: &Walk, v: &Walk) -> Result<(), String> {
        let q = &*self.quiver;
        if chain.steps.first() != Some(u) || chain.steps.last() != Some(v) {
            return Err("chain endpoints do not match".into());
        }
        for (i, w) in chain.steps.iter().enumerate() {
            if !w.is_valid(q) || w.source != u.source || w.target != u.target {
                return Err(format!("step {i} is not a walk between the endpoints"));
            }
        }
        for (i, pair) in chain.steps.windows(2).enumerate() {
            if !self.elementary(&pair[0].letters, &pair[1].letters) {
                return Err(format!("step {i} -> {} is not an elementary move", i + 1));
            }
        }
        Ok(())
    }

    fn elementary(&self, a: &[Letter], b: &[Letter]) -> bool {
        let cancel_insert = |short: &[Letter], long: &[Letter]| {
            long.len() == short.len() + 2
                && (0..long.len() - 1).any(|i| {
                    long[i + 1] == long[i].inverted() && long[..i] == short[..i] && long[i + 2..] == short[i..]
                })
        };
        if cancel_insert(a, b) || cancel_insert(b, a) {
            return true;
        }
        let inv = |w: &[Letter]| w.iter().rev().map(|l| l.inverted()).collect::<Vec<_>>();
        for (p, r) in &self.loops {
            let forms = [(p.clone(), r.clone()), (r.clone(), p.clone()), (inv(p), inv(r)), (inv(r), inv(p))];
            for (x, y) in &forms {
                if a.len() < x.len() || a.len() + y.len() != b.len() + x.len() {
                    continue;
                }
                for i in 0..=a.len() - x.len() {
                    if a[i..i + x.len()] == x[..]
                        && b[..i] == a[..i]
                        && b[i..i + y.len()] == y[..]
                        && b[i + y.len()..] == a[i + x.len()..]
                    {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Classification of every pair of parallel nontrivial paths.
    pub fn fingerprint(&self) -> &Fingerprint {
        self.fingerprint.get_or_init(|| {
            let pairs = self.quiver.hom_pairs();
            let entries: Vec<FingerprintEntry> = pairs
                .par_iter()
                .filter_map(|&(x, y)| {
                    let paths = self.quiver.paths_between(x, y);
                    (paths.len() >= 2).then(|| self.classify_hom_space(x, y, paths))
                })
                .collect();
            Fingerprint { entries }
        })
    }

    fn classify_hom_space(&self, x: usize, y: usize, paths: Vec<Path>) -> FingerprintEntry {
        let mut reps: Vec<usize> = Vec::new();
        let mut class = vec![0usize; paths.len()];
        let mut unknown_with: Vec<Vec<usize>> = Vec::new();
        for (i, p) in paths.iter().enumerate() {
            let pw = p.to_walk();
            let mut found = None;
            let mut unknowns = Vec::new();
            for (c, &r) in reps.iter().enumerate() {
                match self.classify(&pw, &paths[r].to_walk()) {
                    PairStatus::Homotopic => {
                        found = Some(c);
                        break;
                    }
                    PairStatus::Unknown => unknowns.push(c),
                    PairStatus::NotHomotopic => {}
                }
            }
            match found {
                Some(c) => class[i] = c,
                None => {
                    class[i] = reps.len();
                    reps.push(i);
                    unknown_with.push(unknowns);
                }
            }
        }
        let mut unknown = Vec::new();
        for (c, us) in unknown_with.iter().enumerate() {
            for &d in us {
                unknown.push((d.min(c), d.max(c)));
            }
        }
        unknown.sort();
        unknown.dedup();
        FingerprintEntry { source: x, target: y, paths, class, unknown }
    }

    /// Status of a pair of parallel paths, read from the fingerprint.
    pub fn path_status(&self, u: &Path, v: &Path) -> PairStatus {
        if u == v {
            return PairStatus::Homotopic;
        }
        self.fingerprint().status(u, v).unwrap_or_else(|| self.classify(&u.to_walk(), &v.to_walk()))
    }
}

#[derive(Clone, Debug)]
struct MacroStep {
    from: Vec<Letter>,
    pattern: usize,
    position: usize,
}

#[derive(Clone, Debug)]
struct Meet {
    from_u: Vec<MacroStep>,
    from_v: Vec<MacroStep>,
}

/// `w` followed by single cancellations down to its reduced form.
fn free_reduction_steps(w: &Walk) -> Vec<Walk> {
    let mut out = vec![w.clone()];
    let mut cur = w.letters.clone();
    while let Some(i) = (0..cur.len().saturating_sub(1)).find(|&i| cur[i + 1] == cur[i].inverted()) {
        cur.drain(i..i + 2);
        out.push(Walk { source: w.source, target: w.target, letters: cur.clone() });
    }
    out
}

/// Outcome of comparing two homotopy relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationComparison {
    Equal,
    /// A pair homotopic under exactly one of the relations.
    Different { u: Path, v: Path, homotopic_in_first: bool },
    Unknown,
}

pub fn relations_equal(a: &HomotopyRelation, b: &HomotopyRelation) -> RelationComparison {
    let (fa, fb) = (a.fingerprint(), b.fingerprint());
    let mut unknown = false;
    for (ea, eb) in fa.entries.iter().zip(&fb.entries) {
        for i in 0..ea.paths.len() {
            for j in i + 1..ea.paths.len() {
                match (ea.status(i, j), eb.status(i, j)) {
                    (PairStatus::Homotopic, PairStatus::NotHomotopic) => {
                        return RelationComparison::Different {
                            u: ea.paths[i].clone(),
                            v: ea.paths[j].clone(),
                            homotopic_in_first: true,
                        }
                    }
                    (PairStatus::NotHomotopic, PairStatus::Homotopic) => {
                        return RelationComparison::Different {
                            u: ea.paths[i].clone(),
                            v: ea.paths[j].clone(),
                            homotopic_in_first: false,
                        }
                    }
                    (PairStatus::Unknown, _) | (_, PairStatus::Unknown) => unknown = true,
                    _ => {}
                }
            }
        }
    }
    if unknown {
        RelationComparison::Unknown
    } else {
        RelationComparison::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;

    const TEXT: &str = "quiver exple1 { vertices: 1 2 3 4; arrow a: 1 -> 3; arrow b: 1 -> 2;
        arrow c: 2 -> 3; arrow d: 3 -> 4; }
        ideal I over exple1(0) { rel d*a; }
        ideal J over exple1(0) { rel d*a - d*c*b; }";

    fn relation(name: &str) -> HomotopyRelation {
        let doc = parse_document(TEXT).unwrap();
        HomotopyRelation::from_ideal(Arc::new(doc.ideal(name, None).unwrap()), 0, HomotopyOptions::default()).unwrap()
    }

    #[test]
    fn tree_chords_of_exple1() {
        let h = relation("I");
        let q = h.quiver();
        assert_eq!(h.tree().chords, vec![q.arrow_id("c").unwrap()]);
        assert_eq!(h.abelianization(), AbelianInvariants { rank: 1, torsion: vec![] });
    }

    #[test]
    fn bypass_is_homotopic_under_binomial_relation() {
        let h = relation("J");
        let q = h.quiver();
        let (a, cb) = (q.walk("a").unwrap(), q.walk("c*b").unwrap());
        match h.decide(&a, &cb).unwrap() {
            Decision::Homotopic(chain) => h.verify_chain(&chain, &a, &cb).unwrap(),
            other => panic!("expected a chain, got {other:?}"),
        }
    }

    #[test]
    fn bypass_is_separated_under_monomial_relation() {
        let h = relation("I");
        let q = h.quiver();
        let (a, cb) = (q.walk("a").unwrap(), q.walk("c*b").unwrap());
        match h.decide(&a, &cb).unwrap() {
            Decision::NotHomotopic(cert) => assert!(h.verify_certificate(&a, &cb, &cert)),
            other => panic!("expected a certificate, got {other:?}"),
        }
    }

    #[test]
    fn tampered_chain_is_rejected() {
        let h = relation("J");
        let q = h.quiver();
        let (a, cb) = (q.walk("a").unwrap(), q.walk("c*b").unwrap());
        let Decision::Homotopic(mut chain) = h.decide(&a, &cb).unwrap() else { panic!() };
        chain.steps.remove(1);
        assert!(h.verify_chain(&chain, &a, &cb).is_err());
    }
}
