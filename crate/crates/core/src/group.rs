//! Finitely presented groups: free reduction, abelianization, coset
//! enumeration and small permutation quotients.

use std::collections::{HashMap, VecDeque};

use num::bigint::BigInt;
use num::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{smith_normal_form, SmithForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GenLetter {
    pub generator: usize,
    pub inverse: bool,
}

impl GenLetter {
    pub fn inverted(self) -> GenLetter {
        GenLetter { generator: self.generator, inverse: !self.inverse }
    }
}

pub type Word = Vec<GenLetter>;

pub fn free_reduce(w: &[GenLetter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inverted()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert(w: &[GenLetter]) -> Word {
    w.iter().rev().map(|l| l.inverted()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianInvariants {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianInvariants {
    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

/// The abelianization `Z^n / <relator images>` with a membership test.
#[derive(Clone, Debug)]
pub struct AbelianQuotient {
    snf: SmithForm,
    relator_rows: Vec<Vec<BigInt>>,
}

impl AbelianQuotient {
    pub fn invariants(&self) -> AbelianInvariants {
        AbelianInvariants {
            rank: self.snf.free_rank(),
            torsion: self.snf.torsion().iter().map(|d| d.to_u64().expect("torsion coefficient overflow")).collect(),
        }
    }

    /// Normal form of the image of an exponent vector; zero iff trivial in the abelianization.
    pub fn normal_form(&self, exponents: &[BigInt]) -> Vec<BigInt> {
        self.snf.reduce(exponents)
    }

    pub fn is_trivial(&self, exponents: &[BigInt]) -> bool {
        self.normal_form(exponents).iter().all(Zero::is_zero)
    }

    pub fn diagonal(&self) -> &[BigInt] {
        &self.snf.diagonal
    }

    pub fn relator_rows(&self) -> &[Vec<BigInt>] {
        &self.relator_rows
    }
}

impl GroupPresentation {
    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn exponent_vector(&self, w: &[GenLetter]) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.generators.len()];
        for l in w {
            if l.inverse {
                v[l.generator] -= 1;
            } else {
                v[l.generator] += 1;
            }
        }
        v
    }

    pub fn abelian_quotient(&self) -> AbelianQuotient {
        let rows: Vec<Vec<BigInt>> = self.relators.iter().map(|r| self.exponent_vector(r)).collect();
        AbelianQuotient { snf: smith_normal_form(&rows, self.generators.len()), relator_rows: rows }
    }

    pub fn abelianization(&self) -> AbelianInvariants {
        self.abelian_quotient().invariants()
    }

    pub fn word_to_string(&self, w: &[GenLetter]) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.iter()
            .map(|l| if l.inverse { format!("{}^-1", self.generators[l.generator]) } else { self.generators[l.generator].clone() })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A complete coset table of the trivial subgroup: the regular representation.
#[derive(Clone, Debug)]
pub struct CosetTable {
    /// `table[c][2g]` is `c·g`, `table[c][2g+1]` is `c·g⁻¹`.
    table: Vec<Vec<usize>>,
}

impl CosetTable {
    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn act(&self, coset: usize, w: &[GenLetter]) -> usize {
        w.iter().fold(coset, |c, l| self.table[c][2 * l.generator + usize::from(l.inverse)])
    }

    pub fn is_trivial(&self, w: &[GenLetter]) -> bool {
        self.act(0, w) == 0
    }
}

const NONE: usize = usize::MAX;

struct Enumeration {
    table: Vec<Vec<usize>>,
    forward: Vec<usize>,
    cols: usize,
    max_cosets: usize,
}

impl Enumeration {
    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.forward[r] != r {
            r = self.forward[r];
        }
        let mut x = c;
        while self.forward[x] != r {
            let n = self.forward[x];
            self.forward[x] = r;
            x = n;
        }
        r
    }

    fn live(&self, c: usize) -> bool {
        self.forward[c] == c
    }

    fn define(&mut self, f: usize, x: usize) -> Option<()> {
        if self.table.len() >= self.max_cosets {
            return None;
        }
        let n = self.table.len();
        self.table.push(vec![NONE; self.cols]);
        self.forward.push(n);
        self.table[f][x] = n;
        self.table[n][x ^ 1] = f;
        Some(())
    }

    fn merge(&mut self, queue: &mut VecDeque<usize>, a: usize, b: usize) {
        let (s, t) = (self.rep(a), self.rep(b));
        if s != t {
            let (s, t) = (s.min(t), s.max(t));
            self.forward[t] = s;
            queue.push_back(t);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = VecDeque::new();
        self.merge(&mut queue, a, b);
        while let Some(e) = queue.pop_front() {
            for x in 0..self.cols {
                let f = self.table[e][x];
                if f == NONE {
                    continue;
                }
                self.table[f][x ^ 1] = NONE;
                let (e1, f1) = (self.rep(e), self.rep(f));
                if self.table[e1][x] != NONE {
                    let t = self.table[e1][x];
                    self.merge(&mut queue, f1, t);
                } else if self.table[f1][x ^ 1] != NONE {
                    let t = self.table[f1][x ^ 1];
                    self.merge(&mut queue, e1, t);
                } else {
                    self.table[e1][x] = f1;
                    self.table[f1][x ^ 1] = e1;
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: usize, w: &[usize]) -> Option<()> {
        let (mut f, mut b) = (c, c);
        let mut i = 0usize;
        let mut j = w.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.table[f][w[i]] != NONE {
                f = self.table[f][w[i]];
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Some(());
            }
            while j >= i as isize && self.table[b][w[j as usize] ^ 1] != NONE {
                b = self.table[b][w[j as usize] ^ 1];
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Some(());
            } else if j == i as isize {
                self.table[f][w[i]] = b;
                self.table[b][w[i] ^ 1] = f;
                return Some(());
            } else {
                self.define(f, w[i])?;
            }
        }
    }
}

/// HLT coset enumeration of the trivial subgroup. `None` if more than
/// `max_cosets` cosets would be defined.
pub fn todd_coxeter(p: &GroupPresentation, max_cosets: usize) -> Option<CosetTable> {
    let cols = 2 * p.generator_count();
    let rels: Vec<Vec<usize>> = p
        .relators
        .iter()
        .map(|r| free_reduce(r))
        .filter(|r| !r.is_empty())
        .map(|r| r.iter().map(|l| 2 * l.generator + usize::from(l.inverse)).collect())
        .collect();
    let mut e = Enumeration { table: vec![vec![NONE; cols]], forward: vec![0], cols, max_cosets };
    let mut c = 0;
    while c < e.table.len() {
        if e.live(c) {
            for r in &rels {
                e.scan_and_fill(c, r)?;
                if !e.live(c) {
                    break;
                }
            }
            for x in 0..cols {
                if e.live(c) && e.table[c][x] == NONE {
                    e.define(c, x)?;
                }
            }
        }
        c += 1;
    }
    let live: Vec<usize> = (0..e.table.len()).filter(|&i| e.live(i)).collect();
    let index: HashMap<usize, usize> = live.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut out = Vec::with_capacity(live.len());
    for &c in &live {
        let mut row = Vec::with_capacity(cols);
        for x in 0..cols {
            let t = e.table[c][x];
            if t == NONE {
                return None;
            }
            let t = e.rep(t);
            row.push(index[&t]);
        }
        out.push(row);
    }
    let ct = CosetTable { table: out };
    let words: Vec<Word> = p.relators.clone();
    for c in 0..ct.order() {
        if words.iter().any(|r| ct.act(c, r) != c) {
            return None;
        }
    }
    Some(ct)
}

/// A homomorphism to a symmetric group, given by generator images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationRep {
    pub degree: usize,
    pub images: Vec<Vec<usize>>,
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    // apply p then q
    p.iter().map(|&i| q[i]).collect()
}

fn inverse_perm(p: &[usize]) -> Vec<usize> {
    let mut out = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        out[j] = i;
    }
    out
}

impl PermutationRep {
    /// Image of a word, letters applied left to right.
    pub fn evaluate(&self, w: &[GenLetter]) -> Vec<usize> {
        let mut acc: Vec<usize> = (0..self.degree).collect();
        for l in w {
            let g = &self.images[l.generator];
            let g = if l.inverse { inverse_perm(g) } else { g.clone() };
            acc = compose(&acc, &g);
        }
        acc
    }

    pub fn is_homomorphism(&self, p: &GroupPresentation) -> bool {
        let id: Vec<usize> = (0..self.degree).collect();
        self.images.len() == p.generator_count() && p.relators.iter().all(|r| self.evaluate(r) == id)
    }
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out.sort();
    out
}

/// Homomorphisms into `S_n` for `2 <= n <= max_degree`, found by backtracking
/// on generator images with relator checks. Stops after `max_reps` nontrivial
/// homomorphisms or `node_budget` search nodes.
pub fn permutation_quotients(
    p: &GroupPresentation,
    max_degree: usize,
    max_reps: usize,
    node_budget: usize,
) -> Vec<PermutationRep> {
    let k = p.generator_count();
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let rels: Vec<Word> = p.relators.iter().map(|r| free_reduce(r)).filter(|r| !r.is_empty()).collect();
    // relators checked once their largest generator is assigned
    let mut check_at: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, r) in rels.iter().enumerate() {
        let m = r.iter().map(|l| l.generator).max().unwrap();
        check_at[m].push(i);
    }
    let mut nodes = 0usize;
    for n in 2..=max_degree {
        let perms = all_permutations(n);
        let id: Vec<usize> = (0..n).collect();
        let mut images: Vec<Vec<usize>> = Vec::with_capacity(k);
        #[allow(clippy::too_many_arguments)]
        fn rec(
            g: usize,
            k: usize,
            n: usize,
            perms: &[Vec<usize>],
            id: &[usize],
            rels: &[Word],
            check_at: &[Vec<usize>],
            images: &mut Vec<Vec<usize>>,
            out: &mut Vec<PermutationRep>,
            nodes: &mut usize,
            max_reps: usize,
            budget: usize,
        ) {
            if out.len() >= max_reps || *nodes >= budget {
                return;
            }
            if g == k {
                if images.iter().any(|im| im != id) {
                    out.push(PermutationRep { degree: n, images: images.clone() });
                }
                return;
            }
            for perm in perms {
                *nodes += 1;
                images.push(perm.clone());
                let partial = PermutationRep { degree: n, images: images.clone() };
                let ok = check_at[g].iter().all(|&ri| partial.evaluate(&rels[ri]) == id);
                if ok {
                    rec(g + 1, k, n, perms, id, rels, check_at, images, out, nodes, max_reps, budget);
                }
                images.pop();
                if out.len() >= max_reps || *nodes >= budget {
                    return;
                }
            }
        }
        rec(0, k, n, &perms, &id, &rels, &check_at, &mut images, &mut out, &mut nodes, max_reps, node_budget);
    }
    out
}
