//! Relations, admissible ideals and their reduced Gröbner bases.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg;
use crate::quiver::{Path, Quiver};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdealError {
    #[error("relation `{0}` mixes non-parallel paths")]
    NotParallel(String),
    #[error("relation `{0}` has a term of length below 2")]
    NotAdmissible(String),
    #[error("paths of length {0} are not all in the ideal")]
    NotNilpotent(usize),
    #[error("ideals live on different quivers or fields")]
    Mismatch,
    #[error("relation `{0}` is not in the ideal")]
    NotInIdeal(String),
}

/// A linear combination of parallel paths.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relation {
    pub source: usize,
    pub target: usize,
    terms: BTreeMap<Path, Scalar>,
}

impl Relation {
    pub fn zero(source: usize, target: usize) -> Relation {
        Relation { source, target, terms: BTreeMap::new() }
    }

    pub fn monomial(path: Path, coeff: Scalar) -> Relation {
        let mut r = Relation::zero(path.source, path.target);
        r.add_term(path, coeff);
        r
    }

    pub fn from_terms(
        source: usize,
        target: usize,
        terms: impl IntoIterator<Item = (Path, Scalar)>,
    ) -> Option<Relation> {
        let mut r = Relation::zero(source, target);
        for (p, c) in terms {
            if p.source != source || p.target != target {
                return None;
            }
            r.add_term(p, c);
        }
        Some(r)
    }

    pub fn add_term(&mut self, path: Path, coeff: Scalar) {
        debug_assert!(path.source == self.source && path.target == self.target);
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&path) {
            Some(c) => {
                let sum = &*c + &coeff;
                if sum.is_zero() {
                    self.terms.remove(&path);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.terms.insert(path, coeff);
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Path, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &Path) -> Option<&Scalar> {
        self.terms.get(p)
    }

    pub fn support(&self) -> Vec<Path> {
        self.terms.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_path(&self) -> Option<&Path> {
        self.terms.keys().next_back()
    }

    pub fn min_length(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).min()
    }

    pub fn scaled(&self, c: &Scalar) -> Relation {
        let mut r = Relation::zero(self.source, self.target);
        for (p, x) in &self.terms {
            r.add_term(p.clone(), x * c);
        }
        r
    }

    pub fn plus(&self, other: &Relation) -> Relation {
        assert!(self.source == other.source && self.target == other.target, "adding non-parallel relations");
        let mut r = self.clone();
        for (p, x) in &other.terms {
            r.add_term(p.clone(), x.clone());
        }
        r
    }

    pub fn minus(&self, other: &Relation) -> Relation {
        assert!(self.source == other.source && self.target == other.target, "subtracting non-parallel relations");
        let mut r = self.clone();
        for (p, x) in &other.terms {
            r.add_term(p.clone(), -x);
        }
        r
    }

    /// `self` followed by `next` in the path algebra, written `next*self`.
    pub fn then(&self, next: &Relation) -> Option<Relation> {
        if self.target != next.source {
            return None;
        }
        let mut r = Relation::zero(self.source, next.target);
        for (p, x) in &self.terms {
            for (q, y) in &next.terms {
                r.add_term(p.then(q).unwrap(), x * y);
            }
        }
        Some(r)
    }

    /// Multiplies by paths on both sides: `after * self * before`.
    pub fn sandwich(&self, before: &Path, after: &Path) -> Relation {
        let mut r = Relation::zero(before.source, after.target);
        for (p, x) in &self.terms {
            let full = before.then(p).and_then(|bp| bp.then(after)).expect("sandwich with non-composable paths");
            r.add_term(full, x.clone());
        }
        r
    }

    /// Restriction to a subset of paths.
    pub fn restrict(&self, keep: &[Path]) -> Relation {
        let mut r = Relation::zero(self.source, self.target);
        for p in keep {
            if let Some(c) = self.terms.get(p) {
                r.add_term(p.clone(), c.clone());
            }
        }
        r
    }

    pub fn display<'a>(&'a self, q: &'a Quiver) -> RelationDisplay<'a> {
        RelationDisplay { rel: self, quiver: q }
    }
}

pub struct RelationDisplay<'a> {
    rel: &'a Relation,
    quiver: &'a Quiver,
}

impl fmt::Display for RelationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rel.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in self.rel.terms.iter().rev() {
            let neg = c.is_negative_literal();
            let abs = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            write!(f, "{}", p.display(self.quiver))?;
            first = false;
        }
        Ok(())
    }
}

/// One hom-space `e_y kQ e_x` with the ideal's piece in reduced echelon form.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub paths: Vec<Path>,
    index: HashMap<Path, usize>,
    pub basis: Vec<Vec<Scalar>>,
}

impl HomSpace {
    fn new(paths: Vec<Path>) -> HomSpace {
        let index = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        HomSpace { paths, index, basis: Vec::new() }
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    fn vector(&self, r: &Relation, field: Field) -> Vec<Scalar> {
        let mut v = vec![field.zero(); self.paths.len()];
        for (p, c) in r.terms() {
            v[self.index[p]] = c.clone();
        }
        v
    }

    fn relation(&self, source: usize, target: usize, v: &[Scalar]) -> Relation {
        let mut r = Relation::zero(source, target);
        for (p, c) in self.paths.iter().zip(v) {
            r.add_term(p.clone(), c.clone());
        }
        r
    }
}

#[derive(Clone, Debug)]
pub struct Ideal {
    quiver: Arc<Quiver>,
    field: Field,
    generators: Vec<Relation>,
    spaces: BTreeMap<(usize, usize), HomSpace>,
    radical_length: usize,
}

impl Ideal {
    /// Closes the generators under multiplication by paths and echelonises
    /// every hom-space. Generators must be admissible.
    pub fn new(quiver: Arc<Quiver>, field: Field, generators: Vec<Relation>) -> Result<Ideal, IdealError> {
        for g in &generators {
            if g.terms().any(|(p, _)| p.source != g.source || p.target != g.target) {
                return Err(IdealError::NotParallel(g.display(&quiver).to_string()));
            }
            if g.min_length().is_some_and(|l| l < 2) {
                return Err(IdealError::NotAdmissible(g.display(&quiver).to_string()));
            }
        }
        Ideal::new_unchecked(quiver, field, generators)
    }

    /// Like [`Ideal::new`] without the length condition on generators.
    pub fn new_unchecked(quiver: Arc<Quiver>, field: Field, generators: Vec<Relation>) -> Result<Ideal, IdealError> {
        let mut spaces: BTreeMap<(usize, usize), HomSpace> = BTreeMap::new();
        let all = quiver.enumerate_paths();
        for p in all {
            spaces.entry((p.source, p.target)).or_insert_with(|| HomSpace::new(Vec::new())).paths.push(p.clone());
        }
        for s in spaces.values_mut() {
            *s = HomSpace::new(std::mem::take(&mut s.paths));
        }
        let mut rows: BTreeMap<(usize, usize), Vec<Vec<Scalar>>> = BTreeMap::new();
        for g in generators.iter().filter(|g| !g.is_zero()) {
            let befores: Vec<&Path> = all.iter().filter(|p| p.target == g.source).collect();
            let afters: Vec<&Path> = all.iter().filter(|p| p.source == g.target).collect();
            for b in &befores {
                for a in &afters {
                    let r = g.sandwich(b, a);
                    let key = (r.source, r.target);
                    rows.entry(key).or_default().push(spaces[&key].vector(&r, field));
                }
            }
        }
        for (key, rs) in rows {
            let s = spaces.get_mut(&key).unwrap();
            s.basis = linalg::echelon(rs, s.paths.len());
        }
        let mut ideal = Ideal { quiver, field, generators, spaces, radical_length: 0 };
        ideal.radical_length = ideal.compute_radical_length();
        Ok(ideal)
    }

    fn compute_radical_length(&self) -> usize {
        let longest = self.quiver.longest_path_len();
        let mut n = longest + 1;
        while n > 1 {
            let all_in = self
                .quiver
                .enumerate_paths()
                .iter()
                .filter(|p| p.len() == n - 1)
                .all(|p| self.contains(&Relation::monomial(p.clone(), self.field.one())));
            if !all_in {
                break;
            }
            n -= 1;
        }
        n
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn quiver_arc(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn generators(&self) -> &[Relation] {
        &self.generators
    }

    /// Smallest `n` such that every path of length `>= n` lies in the ideal.
    pub fn radical_length(&self) -> usize {
        self.radical_length
    }

    pub fn hom_space(&self, x: usize, y: usize) -> Option<&HomSpace> {
        self.spaces.get(&(x, y))
    }

    pub fn contains(&self, r: &Relation) -> bool {
        if r.is_zero() {
            return true;
        }
        let Some(s) = self.spaces.get(&(r.source, r.target)) else { return false };
        linalg::reduce(&s.vector(r, self.field), &s.basis).iter().all(Scalar::is_zero)
    }

    /// Reduced Gröbner basis of `e_y I e_x`, sorted by leading path.
    pub fn groebner_basis(&self, x: usize, y: usize) -> Vec<Relation> {
        match self.spaces.get(&(x, y)) {
            Some(s) => s.basis.iter().map(|v| s.relation(x, y, v)).collect(),
            None => Vec::new(),
        }
    }

    /// Gröbner bases of all hom-spaces, in hom-pair order. Each element is a minimal relation.
    pub fn minimal_relations(&self) -> Vec<Relation> {
        self.spaces.keys().flat_map(|&(x, y)| self.groebner_basis(x, y)).collect()
    }

    pub fn dim_ideal(&self, x: usize, y: usize) -> usize {
        self.spaces.get(&(x, y)).map_or(0, |s| s.basis.len())
    }

    pub fn dim_quotient(&self, x: usize, y: usize) -> usize {
        self.spaces.get(&(x, y)).map_or(0, |s| s.paths.len() - s.basis.len())
    }

    /// Whether `r` is a minimal relation: nonzero, in the ideal, and no proper
    /// nonempty sub-sum lies in the ideal. Brute force over subsets, capped.
    pub fn is_minimal(&self, r: &Relation) -> Option<bool> {
        if r.is_zero() || !self.contains(r) {
            return Some(false);
        }
        Some(self.find_split(r)?.is_none())
    }

    /// A proper nonempty subset `S` of the support with `r|_S` in the ideal, if any.
    /// `None` when the support is too large to search.
    fn find_split(&self, r: &Relation) -> Option<Option<Vec<Path>>> {
        let supp = r.support();
        let n = supp.len();
        if n > MINIMALITY_CAP_BITS + 1 {
            return None;
        }
        // subsets containing the first path, excluding the full set
        let rest = n - 1;
        for mask in 0..(1u64 << rest) {
            if mask == (1u64 << rest) - 1 {
                continue;
            }
            let mut keep = vec![supp[0].clone()];
            for (i, p) in supp.iter().enumerate().skip(1) {
                if mask & (1 << (i - 1)) != 0 {
                    keep.push(p.clone());
                }
            }
            if self.contains(&r.restrict(&keep)) {
                return Some(Some(keep));
            }
        }
        Some(None)
    }

    /// Writes `r` as a sum of minimal relations with pairwise disjoint supports.
    pub fn decompose_minimal(&self, r: &Relation) -> Result<Vec<Relation>, IdealError> {
        if !self.contains(r) {
            return Err(IdealError::NotInIdeal(r.display(&self.quiver).to_string()));
        }
        let mut out = Vec::new();
        for piece in self.split_by_support_classes(r) {
            self.split_recursive(piece, &mut out);
        }
        out.sort_by(|a, b| a.leading_path().cmp(&b.leading_path()));
        Ok(out)
    }

    fn split_recursive(&self, r: Relation, out: &mut Vec<Relation>) {
        if r.is_zero() {
            return;
        }
        match self.find_split(&r) {
            Some(Some(keep)) => {
                let a = r.restrict(&keep);
                let others: Vec<Path> = r.support().into_iter().filter(|p| !keep.contains(p)).collect();
                let b = r.restrict(&others);
                self.split_recursive(a, out);
                self.split_recursive(b, out);
            }
            _ => out.push(r),
        }
    }

    /// Splits `r` along the support classes of the subspace of the ideal living on `supp(r)`.
    fn split_by_support_classes(&self, r: &Relation) -> Vec<Relation> {
        let supp = r.support();
        let s = &self.spaces[&(r.source, r.target)];
        // elements of the ideal supported inside supp(r)
        let cols: Vec<usize> = supp.iter().map(|p| s.index[p]).collect();
        let outside: Vec<usize> = (0..s.paths.len()).filter(|i| !cols.contains(i)).collect();
        // kernel of basis -> coordinates outside supp(r): combine basis rows so outside columns vanish
        let k = s.basis.len();
        let mut mat: Vec<Vec<Scalar>> = Vec::new();
        for (bi, row) in s.basis.iter().enumerate() {
            let mut v: Vec<Scalar> = outside.iter().map(|&c| row[c].clone()).collect();
            v.extend((0..k).map(|j| if j == bi { self.field.one() } else { self.field.zero() }));
            mat.push(v);
        }
        // row-reduce on the outside block: rows whose outside part vanishes give elements inside supp(r)
        let width = outside.len() + k;
        let ech = linalg::echelon(mat, width);
        let inside: Vec<Vec<Scalar>> = ech
            .iter()
            .filter(|v| v[..outside.len()].iter().all(Scalar::is_zero))
            .map(|v| {
                let coeffs = &v[outside.len()..];
                cols.iter()
                    .map(|&c| {
                        let mut acc = self.field.zero();
                        for (row, x) in s.basis.iter().zip(coeffs) {
                            if !x.is_zero() && !row[c].is_zero() {
                                acc = &acc + &(x * &row[c]);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let local = linalg::echelon(inside, cols.len());
        let classes = union_supports(cols.len(), local.iter().map(|v| (0..v.len()).filter(|&i| !v[i].is_zero()).collect()));
        classes
            .into_iter()
            .map(|class| {
                let keep: Vec<Path> = class.into_iter().map(|i| supp[i].clone()).collect();
                r.restrict(&keep)
            })
            .filter(|p| !p.is_zero())
            .collect()
    }

    /// Classes of the equivalence generated by "appear together in a Gröbner basis element".
    pub fn support_equivalence(&self, x: usize, y: usize) -> Vec<Vec<Path>> {
        let Some(s) = self.spaces.get(&(x, y)) else { return Vec::new() };
        let sets = s.basis.iter().map(|v| (0..v.len()).filter(|&i| !v[i].is_zero()).collect::<Vec<_>>());
        union_supports(s.paths.len(), sets)
            .into_iter()
            .map(|c| c.into_iter().map(|i| s.paths[i].clone()).collect())
            .collect()
    }

    /// Every arrow's hom-space has a one-dimensional quotient.
    pub fn is_constricted(&self) -> bool {
        self.quiver.arrows().iter().all(|a| self.dim_quotient(a.source, a.target) == 1)
    }

    pub fn same_ambient(&self, other: &Ideal) -> bool {
        self.field == other.field && *self.quiver == *other.quiver
    }

    pub fn total_dimension(&self) -> usize {
        self.spaces.values().map(|s| s.paths.len() - s.basis.len()).sum::<usize>()
    }
}

/// Cap on subset enumeration for minimality checks, as a bit count (2^12 subsets).
pub const MINIMALITY_CAP_BITS: usize = 12;

/// Exact equality of two ideals via their reduced echelon bases.
pub fn ideals_equal(a: &Ideal, b: &Ideal) -> Result<bool, IdealError> {
    if !a.same_ambient(b) {
        return Err(IdealError::Mismatch);
    }
    Ok(a.spaces.iter().all(|(k, s)| s.basis == b.spaces[k].basis))
}

/// Union-find over index sets; returns classes (singletons included) ordered by smallest member.
fn union_supports(n: usize, sets: impl IntoIterator<Item = Vec<usize>>) -> Vec<Vec<usize>> {
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
    for set in sets {
        for w in set.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(i);
    }
    classes.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exple1() -> Arc<Quiver> {
        Arc::new(
            Quiver::new("exple1", &["1", "2", "3", "4"], &[("a", "1", "3"), ("b", "1", "2"), ("c", "2", "3"), ("d", "3", "4")])
                .unwrap(),
        )
    }

    fn rel(q: &Quiver, f: Field, terms: &[(i64, &str)]) -> Relation {
        let paths: Vec<(Path, Scalar)> = terms.iter().map(|(c, p)| (q.path(p).unwrap(), f.from_i64(*c))).collect();
        Relation::from_terms(paths[0].0.source, paths[0].0.target, paths).unwrap()
    }

    #[test]
    fn groebner_of_binomial() {
        let q = exple1();
        let f = Field::Rational;
        let i = Ideal::new(q.clone(), f, vec![rel(&q, f, &[(1, "d*a"), (-1, "d*c*b")])]).unwrap();
        let (x, y) = (q.vertex_id("1").unwrap(), q.vertex_id("4").unwrap());
        let g = i.groebner_basis(x, y);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].display(&q).to_string(), "d*c*b - d*a");
        assert_eq!(i.dim_quotient(x, y), 1);
    }

    #[test]
    fn rejects_short_terms() {
        let q = exple1();
        let f = Field::Rational;
        let r = rel(&q, f, &[(1, "a"), (-1, "c*b")]);
        assert!(matches!(Ideal::new(q, f, vec![r]), Err(IdealError::NotAdmissible(_))));
    }

    #[test]
    fn radical_length_of_monomial_ideal() {
        let q = exple1();
        let f = Field::Rational;
        let i = Ideal::new(q.clone(), f, vec![rel(&q, f, &[(1, "d*a")])]).unwrap();
        assert_eq!(i.radical_length(), 4);
        let all = Ideal::new(q.clone(), f, vec![rel(&q, f, &[(1, "d*a")]), rel(&q, f, &[(1, "c*b")]), rel(&q, f, &[(1, "d*c")])]).unwrap();
        assert_eq!(all.radical_length(), 2);
    }
}
