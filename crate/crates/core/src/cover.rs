//! Coverings of bound quivers: universal covers built from walk classes,
//! smash products of gradings, covering-axiom checks, deck groups, and lifts
//! of automorphisms to covers.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use num::BigInt;
use thiserror::Error;

use crate::gamma::{check_lemma_3_3_chain, GammaError, GammaOptions};
use crate::group::AbelianInvariants;
use crate::homotopy::{HomotopyError, HomotopyOptions, HomotopyRelation, PairStatus};
use crate::ideal::{Ideal, IdealError, Relation};
use crate::linalg::lattice_quotient;
use crate::quiver::{Letter, Path, Quiver, QuiverError, Walk};
use crate::transform::{Dilatation, PathAutomorphism, TransformError, Transvection};

#[derive(Debug, Error)]
pub enum CoverError {
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
    #[error("relation `{0}` is not homogeneous for the grading")]
    NotHomogeneous(String),
    #[error("lifts of `{0}` end at different vertices")]
    LiftMismatch(String),
    #[error("grading has {got} degrees for {expected} arrows")]
    GradingSize { expected: usize, got: usize },
    #[error("bypass `{0}` is not homotopic in the image ideal")]
    NotHomotopicInImage(String),
    #[error("{0}")]
    Mismatch(String),
}

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    pub names: Vec<String>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    /// Indices of a generating set.
    pub generators: Vec<usize>,
}

impl FiniteGroup {
    pub fn trivial() -> FiniteGroup {
        FiniteGroup { names: vec!["e".into()], mul: vec![vec![0]], inv: vec![0], generators: Vec::new() }
    }

    /// `ℤ/n` with elements named `0..n`.
    pub fn cyclic(n: usize) -> FiniteGroup {
        assert!(n > 0);
        FiniteGroup {
            names: (0..n).map(|i| i.to_string()).collect(),
            mul: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
            inv: (0..n).map(|a| (n - a) % n).collect(),
            generators: if n > 1 { vec![1] } else { Vec::new() },
        }
    }

    /// The permutation group generated by `gens`, composed as `(ab)(i) = a(b(i))`.
    pub fn from_permutations(degree: usize, gens: &[Vec<usize>]) -> FiniteGroup {
        let id: Vec<usize> = (0..degree).collect();
        let mut elems = vec![id];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(elems[0].clone(), 0)]);
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let p: Vec<usize> = (0..degree).map(|k| g[elems[i][k]]).collect();
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(p);
                }
            }
        }
        let n = elems.len();
        let compose = |a: &Vec<usize>, b: &Vec<usize>| -> Vec<usize> { (0..degree).map(|k| a[b[k]]).collect() };
        let mul = (0..n).map(|a| (0..n).map(|b| index[&compose(&elems[a], &elems[b])]).collect()).collect();
        let inv = (0..n)
            .map(|a| {
                let mut p = vec![0; degree];
                for (k, &v) in elems[a].iter().enumerate() {
                    p[v] = k;
                }
                index[&p]
            })
            .collect();
        let generators = gens.iter().map(|g| index[g]).filter(|&g| g != 0).collect();
        FiniteGroup { names: (0..n).map(|i| format!("g{i}")).collect(), mul, inv, generators }
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul[a][b] == self.mul[b][a]))
    }

    /// Elements of the subgroup generated by `elems`.
    pub fn generated(&self, elems: &[usize]) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([0]);
        let mut queue = VecDeque::from([0]);
        while let Some(a) = queue.pop_front() {
            for &g in elems {
                let b = self.mul(a, g);
                if out.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        out
    }
}

/// A degree in `G` for every arrow.
#[derive(Clone, Debug)]
pub struct Grading {
    pub group: FiniteGroup,
    pub degrees: Vec<usize>,
}

/// Generators acting by partial vertex permutations.
#[derive(Clone, Debug, Default)]
pub struct DeckAction {
    pub generators: Vec<String>,
    pub maps: Vec<Vec<Option<usize>>>,
}

/// A bound quiver `(Q̃, Ĩ)` with a projection onto `(Q, I)`.
#[derive(Clone, Debug)]
pub struct CoverQuiver {
    pub base: Arc<Ideal>,
    pub quiver: Arc<Quiver>,
    pub ideal: Arc<Ideal>,
    pub vertex_map: Vec<usize>,
    pub arrow_map: Vec<usize>,
    pub action: DeckAction,
    /// Walk from the base point representing each vertex, when built from walks.
    pub walks: Option<Vec<Walk>>,
    /// Distance from vertex 0 in the construction.
    pub depth: Vec<usize>,
    /// Ball radius for truncated constructions.
    pub radius: Option<usize>,
    pub complete: bool,
    out_lookup: Vec<HashMap<usize, usize>>,
    in_lookup: Vec<HashMap<usize, usize>>,
}

fn lookups(q: &Quiver, arrow_map: &[usize]) -> (Vec<HashMap<usize, usize>>, Vec<HashMap<usize, usize>>) {
    let mut out = vec![HashMap::new(); q.vertex_count()];
    let mut inc = vec![HashMap::new(); q.vertex_count()];
    for (i, a) in q.arrows().iter().enumerate() {
        out[a.source].insert(arrow_map[i], i);
        inc[a.target].insert(arrow_map[i], i);
    }
    (out, inc)
}

impl CoverQuiver {
    /// A cover given by quiver maps; the ideal is generated by all lifts of minimal relations.
    pub fn new(
        base: Arc<Ideal>,
        quiver: Arc<Quiver>,
        vertex_map: Vec<usize>,
        arrow_map: Vec<usize>,
    ) -> Result<CoverQuiver, CoverError> {
        if vertex_map.len() != quiver.vertex_count() || arrow_map.len() != quiver.arrow_count() {
            return Err(CoverError::Mismatch("projection sizes differ from the cover quiver".into()));
        }
        let n = quiver.vertex_count();
        let mut cov = CoverQuiver::assemble(base, quiver, vertex_map, arrow_map, Vec::new());
        cov.depth = vec![0; n];
        cov.ideal = Arc::new(lifted_ideal(&cov, &vec![true; n])?);
        Ok(cov)
    }

    fn assemble(
        base: Arc<Ideal>,
        quiver: Arc<Quiver>,
        vertex_map: Vec<usize>,
        arrow_map: Vec<usize>,
        depth: Vec<usize>,
    ) -> CoverQuiver {
        let (out_lookup, in_lookup) = lookups(&quiver, &arrow_map);
        let ideal = Arc::new(Ideal::new_unchecked(quiver.clone(), base.field(), Vec::new()).unwrap());
        CoverQuiver {
            base,
            quiver,
            ideal,
            vertex_map,
            arrow_map,
            action: DeckAction::default(),
            walks: None,
            depth,
            radius: None,
            complete: true,
            out_lookup,
            in_lookup,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.quiver.vertex_count()
    }

    /// Cover arrow over `base_arrow` leaving `v`.
    pub fn lift_out(&self, v: usize, base_arrow: usize) -> Option<usize> {
        self.out_lookup[v].get(&base_arrow).copied()
    }

    /// Cover arrow over `base_arrow` entering `v`.
    pub fn lift_in(&self, v: usize, base_arrow: usize) -> Option<usize> {
        self.in_lookup[v].get(&base_arrow).copied()
    }

    pub fn fiber(&self, x: usize) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| self.vertex_map[v] == x).collect()
    }

    /// Fiber size over each base vertex.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.base.quiver().vertex_count()];
        for &x in &self.vertex_map {
            out[x] += 1;
        }
        out
    }

    /// All arrows at `v` lie inside the construction.
    pub fn is_locally_interior(&self, v: usize) -> bool {
        self.complete || self.radius.is_some_and(|r| self.depth[v] < r)
    }

    /// Every path of the base starting or ending at `p(v)` lifts inside the construction.
    pub fn is_interior(&self, v: usize) -> bool {
        let l = self.base.quiver().longest_path_len();
        self.complete || self.radius.is_some_and(|r| self.depth[v] + l <= r)
    }

    /// Lift of a base path starting at `v`, as a cover path.
    pub fn lift_path(&self, v: usize, p: &Path) -> Option<Path> {
        if self.vertex_map[v] != p.source {
            return None;
        }
        let mut at = v;
        let mut arrows = Vec::new();
        for &a in &p.arrows {
            let c = self.lift_out(at, a)?;
            arrows.push(c);
            at = self.quiver.arrow(c).target;
        }
        Some(Path { source: v, target: at, arrows })
    }

    /// Lift of a base path ending at `v`.
    pub fn lift_path_ending(&self, v: usize, p: &Path) -> Option<Path> {
        if self.vertex_map[v] != p.target {
            return None;
        }
        let mut at = v;
        let mut arrows = Vec::new();
        for &a in p.arrows.iter().rev() {
            let c = self.lift_in(at, a)?;
            arrows.push(c);
            at = self.quiver.arrow(c).source;
        }
        arrows.reverse();
        Some(Path { source: at, target: v, arrows })
    }

    /// Lift of a base relation starting at `v`; `None` if some term leaves the construction.
    pub fn lift_relation(&self, v: usize, r: &Relation) -> Result<Option<Relation>, CoverError> {
        let mut terms = Vec::new();
        for (p, c) in r.terms() {
            match self.lift_path(v, p) {
                Some(lp) => terms.push((lp, c.clone())),
                None => return Ok(None),
            }
        }
        self.collect_lift(r, terms)
    }

    fn lift_relation_ending(&self, v: usize, r: &Relation) -> Result<Option<Relation>, CoverError> {
        let mut terms = Vec::new();
        for (p, c) in r.terms() {
            match self.lift_path_ending(v, p) {
                Some(lp) => terms.push((lp, c.clone())),
                None => return Ok(None),
            }
        }
        self.collect_lift(r, terms)
    }

    fn collect_lift(&self, r: &Relation, terms: Vec<(Path, crate::Scalar)>) -> Result<Option<Relation>, CoverError> {
        let (s, t) = (terms[0].0.source, terms[0].0.target);
        Relation::from_terms(s, t, terms)
            .map(Some)
            .ok_or_else(|| CoverError::LiftMismatch(r.display(self.base.quiver()).to_string()))
    }

    /// End of the lift of a walk starting at `v`.
    pub fn lift_walk(&self, v: usize, w: &Walk) -> Option<usize> {
        let mut at = v;
        for l in &w.letters {
            at = if l.inverse {
                self.quiver.arrow(self.lift_in(at, l.arrow)?).source
            } else {
                self.quiver.arrow(self.lift_out(at, l.arrow)?).target
            };
        }
        Some(at)
    }

    pub fn project_path(&self, p: &Path) -> Path {
        Path {
            source: self.vertex_map[p.source],
            target: self.vertex_map[p.target],
            arrows: p.arrows.iter().map(|&a| self.arrow_map[a]).collect(),
        }
    }

    pub fn project_relation(&self, r: &Relation) -> Relation {
        let mut out = Relation::zero(self.vertex_map[r.source], self.vertex_map[r.target]);
        for (p, c) in r.terms() {
            out.add_term(self.project_path(p), c.clone());
        }
        out
    }

    /// Copy with one arrow removed.
    pub fn without_arrow(&self, arrow: usize) -> Result<CoverQuiver, CoverError> {
        let q = &self.quiver;
        let names: Vec<String> = q.vertex_names().to_vec();
        let arrows: Vec<(String, String, String)> = q
            .arrows()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != arrow)
            .map(|(_, a)| (a.name.clone(), q.vertex_name(a.source).to_string(), q.vertex_name(a.target).to_string()))
            .collect();
        let quiver = Arc::new(Quiver::new(q.name(), &names, &arrows)?);
        let arrow_map: Vec<usize> =
            self.arrow_map.iter().enumerate().filter(|(i, _)| *i != arrow).map(|(_, &a)| a).collect();
        let mut cov = CoverQuiver::assemble(self.base.clone(), quiver, self.vertex_map.clone(), arrow_map, self.depth.clone());
        cov.radius = self.radius;
        cov.complete = self.complete;
        let interior: Vec<bool> = (0..cov.vertex_count()).map(|v| cov.is_interior(v)).collect();
        cov.ideal = Arc::new(lifted_ideal(&cov, &interior)?);
        Ok(cov)
    }

    /// `outer ∘ self`, where `outer` covers the total space of `self`.
    pub fn compose(&self, outer: &CoverQuiver) -> Result<CoverQuiver, CoverError> {
        if *outer.base.quiver() != *self.quiver || crate::ideals_equal(&outer.base, &self.ideal)? == false {
            return Err(CoverError::Mismatch("outer cover is not over this cover".into()));
        }
        let vertex_map = outer.vertex_map.iter().map(|&v| self.vertex_map[v]).collect();
        let arrow_map = outer.arrow_map.iter().map(|&a| self.arrow_map[a]).collect();
        let mut cov = CoverQuiver::assemble(self.base.clone(), outer.quiver.clone(), vertex_map, arrow_map, outer.depth.clone());
        cov.ideal = outer.ideal.clone();
        cov.complete = outer.complete && self.complete;
        cov.radius = outer.radius;
        Ok(cov)
    }
}

/// Ideal generated by the lifts of the minimal relations of the base from the given vertices.
fn lifted_ideal(cov: &CoverQuiver, from: &[bool]) -> Result<Ideal, CoverError> {
    let rels = cov.base.minimal_relations();
    let mut gens = Vec::new();
    for v in 0..cov.vertex_count() {
        if !from[v] {
            continue;
        }
        for r in rels.iter().filter(|r| r.source == cov.vertex_map[v]) {
            if let Some(l) = cov.lift_relation(v, r)? {
                gens.push(l);
            }
        }
    }
    Ok(Ideal::new_unchecked(cov.quiver.clone(), cov.base.field(), gens)?)
}

/// Default ball radius: twice the arrow count plus two.
pub fn default_radius(q: &Quiver) -> usize {
    2 * q.arrow_count() + 2
}

/// Ball of ∼_I-classes of walks from `x0`.
pub fn universal_cover(
    ideal: &Ideal,
    x0: usize,
    radius: Option<usize>,
    options: &HomotopyOptions,
) -> Result<CoverQuiver, CoverError> {
    let base = Arc::new(ideal.clone());
    let h = HomotopyRelation::from_ideal(base.clone(), x0, options.clone())?;
    let q = ideal.quiver();
    let radius = radius.unwrap_or_else(|| default_radius(q));
    let mut walks = vec![Walk::trivial(x0)];
    let mut depth = vec![0usize];
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); q.vertex_count()];
    fibers[x0].push(0);
    let mut step: HashMap<(usize, Letter), usize> = HashMap::new();
    let mut layer = vec![0usize];
    let mut grew = false;
    let find = |w: &Walk, fibers: &[Vec<usize>], walks: &[Walk]| -> Result<Option<usize>, CoverError> {
        for &c in &fibers[w.target] {
            if h.same_class(w, &walks[c])? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    };
    for d in 0..=radius {
        let mut next = Vec::new();
        for &v in &layer {
            let end = walks[v].target;
            let letters = q
                .outgoing(end)
                .iter()
                .map(|&a| Letter { arrow: a, inverse: false })
                .chain(q.incoming(end).iter().map(|&a| Letter { arrow: a, inverse: true }));
            for l in letters.collect::<Vec<_>>() {
                let mut w = walks[v].clone();
                w.letters.push(l);
                w.target = l.end(q);
                let w = w.reduced();
                match find(&w, &fibers, &walks)? {
                    Some(c) => {
                        step.insert((v, l), c);
                    }
                    None if d < radius => {
                        let c = walks.len();
                        fibers[w.target].push(c);
                        walks.push(w);
                        depth.push(d + 1);
                        step.insert((v, l), c);
                        next.push(c);
                    }
                    None => grew = true,
                }
            }
        }
        layer = next;
    }
    let mut fiber_index = vec![0usize; walks.len()];
    for f in &fibers {
        for (k, &v) in f.iter().enumerate() {
            fiber_index[v] = k;
        }
    }
    let vname = |v: usize| format!("{}[{}]", q.vertex_name(walks[v].target), fiber_index[v]);
    let names: Vec<String> = (0..walks.len()).map(vname).collect();
    let mut arrows = Vec::new();
    let mut arrow_map = Vec::new();
    for v in 0..walks.len() {
        for &a in q.outgoing(walks[v].target) {
            if let Some(&t) = step.get(&(v, Letter { arrow: a, inverse: false })) {
                arrows.push((format!("{}[{}]", q.arrow(a).name, fiber_index[v]), names[v].clone(), names[t].clone()));
                arrow_map.push(a);
            }
        }
    }
    let quiver = Arc::new(Quiver::new(&format!("{}_cover", q.name()), &names, &arrows)?);
    let vertex_map = walks.iter().map(|w| w.target).collect();
    let mut cov = CoverQuiver::assemble(base, quiver, vertex_map, arrow_map, depth);
    cov.radius = Some(radius);
    cov.complete = !grew;
    let interior: Vec<bool> = (0..cov.vertex_count()).map(|v| cov.is_interior(v)).collect();
    cov.ideal = Arc::new(lifted_ideal(&cov, &interior)?);
    // chord generators act by g·[w] = [γ⁻¹ then w]
    let tree = h.tree();
    let mut action = DeckAction::default();
    for (k, &c) in tree.chords.iter().enumerate() {
        let gamma_inv = tree.generator_loop(q, k).inverse();
        let mut map = Vec::new();
        for w in &walks {
            let moved = gamma_inv.then(w).unwrap().reduced();
            map.push(if moved.len() <= radius { find(&moved, &fibers, &walks)? } else { None });
        }
        action.generators.push(q.arrow(c).name.clone());
        action.maps.push(map);
    }
    cov.action = action;
    cov.walks = Some(walks);
    Ok(cov)
}

/// Outcome of checking the covering axioms.
#[derive(Clone, Debug, Default)]
pub struct CoverReport {
    pub violations: Vec<String>,
    pub checked_vertices: usize,
}

impl CoverReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Nonempty fibers, local bijectivity, and two-sided lifting of minimal relations.
pub fn check_covering(cov: &CoverQuiver) -> Result<CoverReport, CoverError> {
    let q = &cov.quiver;
    let bq = cov.base.quiver();
    let mut report = CoverReport::default();
    for (i, a) in q.arrows().iter().enumerate() {
        let b = bq.arrow(cov.arrow_map[i]);
        if cov.vertex_map[a.source] != b.source || cov.vertex_map[a.target] != b.target {
            report.violations.push(format!("arrow {} does not project onto {}", a.name, b.name));
        }
    }
    for (x, n) in cov.fiber_sizes().iter().enumerate() {
        if *n == 0 {
            report.violations.push(format!("empty fiber over {}", bq.vertex_name(x)));
        }
    }
    let base_rels = cov.base.minimal_relations();
    for v in 0..cov.vertex_count() {
        if !cov.is_locally_interior(v) {
            continue;
        }
        report.checked_vertices += 1;
        let x = cov.vertex_map[v];
        for (label, cover_side, base_side) in [
            ("outgoing", q.outgoing(v), bq.outgoing(x)),
            ("incoming", q.incoming(v), bq.incoming(x)),
        ] {
            let mut images: Vec<usize> = cover_side.iter().map(|&a| cov.arrow_map[a]).collect();
            images.sort();
            let mut expected = base_side.to_vec();
            expected.sort();
            if images != expected {
                report.violations.push(format!("{label} arrows at {} are not in bijection", q.vertex_name(v)));
            }
        }
        if !cov.is_interior(v) {
            continue;
        }
        for r in &base_rels {
            let lifts = [
                (r.source == x).then(|| cov.lift_relation(v, r)),
                (r.target == x).then(|| cov.lift_relation_ending(v, r)),
            ];
            for lift in lifts.into_iter().flatten() {
                match lift {
                    // relations are only lifted from interior vertices
                    Ok(Some(l)) if !cov.is_interior(l.source) => {}
                    Ok(Some(l)) if cov.ideal.contains(&l) => {}
                    Ok(Some(_)) => report
                        .violations
                        .push(format!("lift of {} at {} is not in the cover ideal", r.display(bq), q.vertex_name(v))),
                    Ok(None) => report.violations.push(format!("{} does not lift at {}", r.display(bq), q.vertex_name(v))),
                    Err(e) => report.violations.push(format!("{e} at {}", q.vertex_name(v))),
                }
            }
        }
    }
    for r in cov.ideal.minimal_relations() {
        if !cov.is_interior(r.source) {
            continue;
        }
        let p = cov.project_relation(&r);
        if p.len() != r.len() || cov.base.is_minimal(&p) == Some(false) {
            report.violations.push(format!("{} does not project onto a minimal relation", r.display(q)));
        }
    }
    Ok(report)
}

/// The covering morphism determined by `start ↦ image`, following arrow labels.
/// Vertices outside a truncated codomain stay unmapped; `None` on inconsistency.
pub fn extend_by_rigidity(dom: &CoverQuiver, cod: &CoverQuiver, start: usize, image: usize) -> Option<Vec<Option<usize>>> {
    if dom.vertex_map[start] != cod.vertex_map[image] {
        return None;
    }
    let mut map = vec![None; dom.vertex_count()];
    map[start] = Some(image);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let fv = map[v].unwrap();
        let moves = dom.quiver.outgoing(v).iter().map(|&a| (a, false)).chain(dom.quiver.incoming(v).iter().map(|&a| (a, true)));
        for (a, backwards) in moves.collect::<Vec<_>>() {
            let arrow = dom.quiver.arrow(a);
            let (next, lifted) = if backwards {
                (arrow.source, cod.lift_in(fv, dom.arrow_map[a]).map(|c| cod.quiver.arrow(c).source))
            } else {
                (arrow.target, cod.lift_out(fv, dom.arrow_map[a]).map(|c| cod.quiver.arrow(c).target))
            };
            match (lifted, map[next]) {
                (None, _) if cod.complete => return None,
                (None, _) => {}
                (Some(t), Some(old)) if old != t => return None,
                (Some(_), Some(_)) => {}
                (Some(t), None) => {
                    map[next] = Some(t);
                    queue.push_back(next);
                }
            }
        }
    }
    Some(map)
}

/// Image of a cover relation under a vertex map that follows arrow labels.
fn map_relation(dom: &CoverQuiver, cod: &CoverQuiver, f: &[Option<usize>], r: &Relation) -> Option<Relation> {
    let start = f[r.source]?;
    let mut out = Relation::zero(start, f[r.target]?);
    for (p, c) in r.terms() {
        let lp = cod.lift_path(start, &dom.project_path(p))?;
        if lp.target != out.target {
            return None;
        }
        out.add_term(lp, c.clone());
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Galois {
    /// Deck group of the given order acting simply transitively on fibers.
    Galois { order: usize, deck: Vec<Vec<usize>> },
    /// A fiber element no deck transformation reaches.
    NotGalois { orphan: usize },
    Truncated,
}

/// Deck transformations by rigidity from vertex 0.
pub fn is_galois(cov: &CoverQuiver) -> Result<Galois, CoverError> {
    if !cov.complete {
        return Ok(Galois::Truncated);
    }
    let fiber = cov.fiber(cov.vertex_map[0]);
    let mut deck = Vec::new();
    for &target in &fiber {
        let Some(map) = extend_by_rigidity(cov, cov, 0, target) else {
            return Ok(Galois::NotGalois { orphan: target });
        };
        let Some(total): Option<Vec<usize>> = map.into_iter().collect() else {
            return Ok(Galois::NotGalois { orphan: target });
        };
        let distinct: BTreeSet<usize> = total.iter().copied().collect();
        if distinct.len() != total.len() {
            return Ok(Galois::NotGalois { orphan: target });
        }
        let f: Vec<Option<usize>> = total.iter().map(|&v| Some(v)).collect();
        for r in cov.ideal.minimal_relations() {
            match map_relation(cov, cov, &f, &r) {
                Some(img) if cov.ideal.contains(&img) => {}
                _ => return Ok(Galois::NotGalois { orphan: target }),
            }
        }
        deck.push(total);
    }
    Ok(Galois::Galois { order: deck.len(), deck })
}

/// Vertices `Q₀ × G`, arrows `(α, s): (x, s) → (y, s·deg(α)⁻¹)`, `G` acting by left multiplication.
pub fn smash_product(ideal: &Ideal, grading: &Grading) -> Result<CoverQuiver, CoverError> {
    let q = ideal.quiver();
    let g = &grading.group;
    if grading.degrees.len() != q.arrow_count() {
        return Err(CoverError::GradingSize { expected: q.arrow_count(), got: grading.degrees.len() });
    }
    let n = g.order();
    let idx = |x: usize, s: usize| x * n + s;
    let mut names = Vec::new();
    let mut vertex_map = Vec::new();
    for x in 0..q.vertex_count() {
        for s in 0..n {
            names.push(format!("{}.{}", q.vertex_name(x), g.names[s]));
            vertex_map.push(x);
        }
    }
    let mut arrows = Vec::new();
    let mut arrow_map = Vec::new();
    for (i, a) in q.arrows().iter().enumerate() {
        let dinv = g.inv(grading.degrees[i]);
        for s in 0..n {
            let t = g.mul(s, dinv);
            arrows.push((format!("{}.{}", a.name, g.names[s]), names[idx(a.source, s)].clone(), names[idx(a.target, t)].clone()));
            arrow_map.push(i);
        }
    }
    let quiver = Arc::new(Quiver::new(&format!("{}_smash", q.name()), &names, &arrows)?);
    let base = Arc::new(ideal.clone());
    let mut cov = CoverQuiver::assemble(base, quiver, vertex_map, arrow_map, vec![0; n * q.vertex_count()]);
    for r in ideal.minimal_relations() {
        for s in 0..n {
            cov.lift_relation(idx(r.source, s), &r)
                .map_err(|_| CoverError::NotHomogeneous(r.display(q).to_string()))?;
        }
    }
    cov.ideal = Arc::new(lifted_ideal(&cov, &vec![true; cov.vertex_count()])?);
    let mut action = DeckAction::default();
    for &h in &g.generators {
        action.generators.push(g.names[h].clone());
        action.maps.push((0..cov.vertex_count()).map(|v| Some(idx(v / n, g.mul(h, v % n)))).collect());
    }
    cov.action = action;
    Ok(cov)
}

/// Abelian-level data of `λ: π₁(I) → π₁(J)`, identity on chord generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelData {
    pub source: AbelianInvariants,
    pub target: AbelianInvariants,
    /// Invariants of `R_J / R_I`, the kernel of `λ` on abelianizations.
    pub kernel_rank: usize,
    pub kernel_torsion: Vec<BigInt>,
}

/// A lift `ψ` of an automorphism `φ` between universal covers.
#[derive(Clone, Debug)]
pub struct CoverMorphism {
    pub vertex_map: Vec<Option<usize>>,
    /// `ψ(α̃)` for each domain arrow, over the codomain quiver.
    pub arrow_images: Vec<Option<Relation>>,
    pub squares_checked: usize,
    pub relations_checked: usize,
    pub equivariance_checked: usize,
    pub violations: Vec<String>,
    pub kernel: KernelData,
    /// Number of codomain vertices per preimage count.
    pub fiber_sizes: BTreeMap<usize, usize>,
}

impl CoverMorphism {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lifts `φ: (Q, I) → (Q, φ(I))` to universal covers. The codomain is built at
/// the domain radius plus the longest path length.
pub fn lift_automorphism(
    cov0: &CoverQuiver,
    phi: &PathAutomorphism,
    options: &HomotopyOptions,
) -> Result<(CoverQuiver, CoverMorphism), CoverError> {
    let walks = cov0.walks.as_ref().ok_or_else(|| CoverError::Mismatch("domain is not a universal cover".into()))?;
    let ideal = &cov0.base;
    let q = ideal.quiver();
    let x0 = cov0.vertex_map[0];
    let j = phi.apply_ideal(ideal)?;
    let radius = cov0.radius.unwrap_or_else(|| default_radius(q)) + q.longest_path_len();
    let cov1 = universal_cover(&j, x0, Some(radius), options)?;
    let hi = HomotopyRelation::from_ideal(ideal.clone(), x0, options.clone())?;
    let hj = HomotopyRelation::from_ideal(Arc::new(j), x0, options.clone())?;
    let walks1 = cov1.walks.as_ref().unwrap();
    let mut vertex_map = Vec::new();
    for w in walks {
        let mut found = None;
        for c in cov1.fiber(w.target) {
            if hj.same_class(w, &walks1[c])? {
                found = Some(c);
                break;
            }
        }
        vertex_map.push(found);
    }
    let mut violations = Vec::new();
    let mut arrow_images = Vec::new();
    let mut squares = 0;
    for (i, a) in cov0.quiver.arrows().iter().enumerate() {
        let beta = cov0.arrow_map[i];
        let image = vertex_map[a.source].and_then(|s| cov1.lift_relation(s, phi.image(beta)).ok().flatten());
        if let Some(img) = &image {
            squares += 1;
            if Some(img.target) != vertex_map[a.target] || cov1.project_relation(img) != *phi.image(beta) {
                violations.push(format!("square fails on arrow {}", a.name));
            }
        }
        arrow_images.push(image);
    }
    // ψ(Ĩ) ⊆ Ĵ on generators away from the boundary
    let mut relations = 0;
    for r in cov0.ideal.minimal_relations() {
        if !cov0.is_interior(r.source) {
            continue;
        }
        let Some(start) = vertex_map[r.source] else { continue };
        let mut img = Relation::zero(start, start);
        let mut ok = true;
        for (p, c) in r.terms() {
            let mut acc = Relation::monomial(Path::trivial(start), ideal.field().one());
            for &a in &p.arrows {
                match arrow_images[a].as_ref().and_then(|x| acc.then(x)) {
                    Some(next) => acc = next,
                    None => ok = false,
                }
            }
            if !ok {
                break;
            }
            img = if img.is_zero() { acc.scaled(c) } else { img.plus(&acc.scaled(c)) };
        }
        if ok {
            relations += 1;
            if !cov1.ideal.contains(&img) {
                violations.push(format!("image of {} is not in the target ideal", r.display(&cov0.quiver)));
            }
        }
    }
    // ψ∘g = λ(g)∘ψ, λ the identity on chord generators
    let mut equivariance = 0;
    for (k, name) in cov0.action.generators.iter().enumerate() {
        let Some(k1) = cov1.action.generators.iter().position(|n| n == name) else {
            violations.push(format!("generator {name} missing in the target"));
            continue;
        };
        for v in 0..cov0.vertex_count() {
            let lhs = cov0.action.maps[k][v].and_then(|gv| vertex_map[gv]);
            let rhs = vertex_map[v].and_then(|pv| cov1.action.maps[k1][pv]);
            if let (Some(l), Some(r)) = (lhs, rhs) {
                equivariance += 1;
                if l != r {
                    violations.push(format!("equivariance fails for {name} at {}", cov0.quiver.vertex_name(v)));
                }
            }
        }
    }
    let n = hi.presentation().generators.len();
    let (kernel_rank, kernel_torsion) = lattice_quotient(hi.abelian_quotient().relator_rows(), hj.abelian_quotient().relator_rows(), n);
    let kernel = KernelData { source: hi.abelianization(), target: hj.abelianization(), kernel_rank, kernel_torsion };
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for t in vertex_map.iter().flatten() {
        *counts.entry(*t).or_default() += 1;
    }
    let mut fiber_sizes = BTreeMap::new();
    for c in counts.values() {
        *fiber_sizes.entry(*c).or_default() += 1;
    }
    let morphism = CoverMorphism {
        vertex_map,
        arrow_images,
        squares_checked: squares,
        relations_checked: relations,
        equivariance_checked: equivariance,
        violations,
        kernel,
        fiber_sizes,
    };
    Ok((cov1, morphism))
}

pub fn lift_dilatation(
    cov0: &CoverQuiver,
    d: &Dilatation,
    options: &HomotopyOptions,
) -> Result<(CoverQuiver, CoverMorphism), CoverError> {
    let phi = d.to_automorphism(cov0.base.quiver_arc(), cov0.base.field());
    lift_automorphism(cov0, &phi, options)
}

/// Requires `α ∼_J u` in `J = t(I)` unless `τ = 0`.
pub fn lift_transvection(
    cov0: &CoverQuiver,
    t: &Transvection,
    options: &HomotopyOptions,
) -> Result<(CoverQuiver, CoverMorphism), CoverError> {
    let q = cov0.base.quiver_arc();
    let phi = t.to_automorphism(q);
    let j = Arc::new(phi.apply_ideal(&cov0.base)?);
    let hj = HomotopyRelation::from_ideal(j, cov0.vertex_map[0], options.clone())?;
    if !t.tau.is_zero() && hj.path_status(&Path::arrow(q, t.bypass.arrow), &t.bypass.path) != PairStatus::Homotopic {
        return Err(CoverError::NotHomotopicInImage(t.bypass.label(q)));
    }
    lift_automorphism(cov0, &phi, options)
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub chain: Vec<Transvection>,
    pub dilatation: Dilatation,
    pub morphisms: Vec<CoverMorphism>,
    /// Composite vertex map from the universal cover of the privileged ideal to the target.
    pub composite: Vec<Option<usize>>,
    pub violations: Vec<String>,
    pub source_abelianization: AbelianInvariants,
    /// Order of `π₁(Q, I₀)` when its universal cover is complete.
    pub source_order: Option<usize>,
    /// `[π₁(Q, I₀) : N]`, the size of the image of `λ` in the target fiber.
    pub kernel_index: usize,
    /// Whether `N` is trivial, when the source order is known.
    pub kernel_trivial: Option<bool>,
}

/// Composes lifts along a transvection chain from the privileged ideal, then
/// maps into the target cover by rigidity.
pub fn theorem_b_pipeline(
    privileged: &Ideal,
    target: &CoverQuiver,
    radius: Option<usize>,
    gamma_options: &GammaOptions,
) -> Result<PipelineReport, CoverError> {
    let options = &gamma_options.homotopy;
    let chain = check_lemma_3_3_chain(privileged, &target.base, gamma_options)?;
    let q = privileged.quiver();
    let x0 = 0;
    let cov0 = universal_cover(privileged, x0, radius, options)?;
    let source_order = cov0.complete.then(|| cov0.fiber(x0).len());
    let mut composite: Vec<Option<usize>> = (0..cov0.vertex_count()).map(Some).collect();
    let mut current = cov0.clone();
    let mut morphisms = Vec::new();
    let mut violations = Vec::new();
    for t in &chain.steps {
        let (next, m) = lift_transvection(&current, t, options)?;
        composite = composite.iter().map(|v| v.and_then(|v| m.vertex_map[v])).collect();
        violations.extend(m.violations.iter().map(|v| format!("{}: {v}", t.label(q))));
        morphisms.push(m);
        current = next;
    }
    let target_base = *target.fiber(x0).first().ok_or_else(|| CoverError::Mismatch("empty target fiber".into()))?;
    let r = extend_by_rigidity(&current, target, 0, target_base)
        .ok_or_else(|| CoverError::Mismatch("target is not covered compatibly".into()))?;
    composite = composite.iter().map(|v| v.and_then(|v| r[v])).collect();
    for (v, img) in composite.iter().enumerate() {
        if let Some(w) = img {
            if target.vertex_map[*w] != cov0.vertex_map[v] {
                violations.push(format!("composite does not commute with projections at {}", cov0.quiver.vertex_name(v)));
            }
        }
    }
    // image of λ: fiber elements reached by lifting generator loops
    let h = HomotopyRelation::from_ideal(Arc::new(privileged.clone()), x0, options.clone())?;
    let loops: Vec<Walk> = (0..h.tree().chords.len()).map(|k| h.tree().generator_loop(q, k)).collect();
    let mut reached = BTreeSet::from([target_base]);
    let mut queue = VecDeque::from([target_base]);
    while let Some(v) = queue.pop_front() {
        for l in loops.iter().flat_map(|l| [l.clone(), l.inverse()]) {
            if let Some(w) = target.lift_walk(v, &l) {
                if reached.insert(w) {
                    queue.push_back(w);
                }
            }
        }
    }
    let kernel_index = reached.len();
    Ok(PipelineReport {
        chain: chain.steps,
        dilatation: chain.dilatation,
        morphisms,
        composite,
        violations,
        source_abelianization: h.abelianization(),
        source_order,
        kernel_index,
        kernel_trivial: source_order.map(|o| o == kernel_index),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;

    const EXPLE1: &str = "quiver exple1 { vertices: 1 2 3 4; arrow a: 1 -> 3; arrow b: 1 -> 2;
        arrow c: 2 -> 3; arrow d: 3 -> 4; }
        ideal I over exple1(0) { rel d*a; }
        ideal J over exple1(0) { rel d*a - d*c*b; }";

    #[test]
    fn trivial_group_gives_identity_cover() {
        let doc = parse_document(EXPLE1).unwrap();
        let j = doc.ideal("J", None).unwrap();
        let cov = universal_cover(&j, 0, None, &HomotopyOptions::default()).unwrap();
        assert!(cov.complete);
        assert_eq!(cov.vertex_count(), 4);
        assert!(check_covering(&cov).unwrap().is_clean());
        assert!(matches!(is_galois(&cov).unwrap(), Galois::Galois { order: 1, .. }));
    }

    #[test]
    fn infinite_group_gives_truncated_strip() {
        let doc = parse_document(EXPLE1).unwrap();
        let i = doc.ideal("I", None).unwrap();
        let small = universal_cover(&i, 0, Some(4), &HomotopyOptions::default()).unwrap();
        let large = universal_cover(&i, 0, Some(8), &HomotopyOptions::default()).unwrap();
        assert!(!small.complete && !large.complete);
        assert!(large.fiber(0).len() > small.fiber(0).len());
        assert!(check_covering(&large).unwrap().is_clean());
        assert_eq!(is_galois(&large).unwrap(), Galois::Truncated);
    }

    #[test]
    fn cyclic_smash_of_exple1() {
        let doc = parse_document(EXPLE1).unwrap();
        let i = doc.ideal("I", None).unwrap();
        let grading = Grading { group: FiniteGroup::cyclic(2), degrees: vec![1, 0, 0, 0] };
        let cov = smash_product(&i, &grading).unwrap();
        assert_eq!(cov.vertex_count(), 8);
        assert!(cov.quiver.is_connected());
        assert!(check_covering(&cov).unwrap().is_clean());
        assert!(matches!(is_galois(&cov).unwrap(), Galois::Galois { order: 2, .. }));
    }

    #[test]
    fn inhomogeneous_relation_is_rejected() {
        let doc = parse_document(EXPLE1).unwrap();
        let j = doc.ideal("J", None).unwrap();
        let grading = Grading { group: FiniteGroup::cyclic(2), degrees: vec![1, 0, 0, 0] };
        assert!(matches!(smash_product(&j, &grading), Err(CoverError::NotHomogeneous(_))));
    }
}
