//! The quiver Γ of homotopy relations: successor and predecessor probes,
//! breadth-first exploration, sources, surjection checks and transvection chains.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use num::BigInt;
use thiserror::Error;

use crate::group::AbelianInvariants;
use crate::homotopy::{generating_pairs, Fingerprint, HomotopyError, HomotopyOptions, HomotopyRelation, PairStatus};
use crate::ideal::{ideals_equal, Ideal, IdealError};
use crate::quiver::{Bypass, Path};
use crate::scalar::{Field, Scalar};
use crate::transform::{Dilatation, TransformError, Transvection};

#[derive(Debug, Error)]
pub enum GammaError {
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error("fingerprint {0} has undecided pairs; refusing to deduplicate")]
    UnknownFingerprint(String),
    #[error("exploration exceeded {0} vertices")]
    TooLarge(usize),
    #[error("target not reached from source")]
    Unreachable,
    #[error("ideals live over different quivers or fields")]
    Mismatch,
}

#[derive(Clone, Debug)]
pub struct GammaOptions {
    /// τ values tried on each bypass; `None` picks the field default.
    pub schedule: Option<Vec<Scalar>>,
    /// Ideals kept per vertex as starting points for probes.
    pub max_representatives: usize,
    pub max_vertices: usize,
    pub homotopy: HomotopyOptions,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions { schedule: None, max_representatives: 12, max_vertices: 256, homotopy: HomotopyOptions::default() }
    }
}

/// `{1, -1, 2, 1/2, 3}` over ℚ and large primes, every nonzero element over small primes.
pub fn default_schedule(field: Field) -> Vec<Scalar> {
    if let Field::Prime(p) = field {
        if p <= 31 {
            return field.nonzero_elements().unwrap();
        }
    }
    let mut out: Vec<Scalar> = Vec::new();
    for (n, d) in [(1, 1), (-1, 1), (2, 1), (1, 2), (3, 1)] {
        let s = &field.from_i64(n) / &field.from_i64(d);
        if !s.is_zero() && !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

impl GammaOptions {
    fn schedule_for(&self, field: Field) -> Vec<Scalar> {
        self.schedule.clone().unwrap_or_else(|| default_schedule(field))
    }
}

/// One probe result: `ideal = transvection(origin)`.
#[derive(Clone, Debug)]
pub struct Step {
    pub transvection: Transvection,
    pub ideal: Arc<Ideal>,
    pub relation: Arc<HomotopyRelation>,
}

/// Probe outcome with the bypasses that could not be settled.
#[derive(Clone, Debug, Default)]
pub struct Probe {
    pub steps: Vec<Step>,
    pub inconclusive: Vec<String>,
}

fn relation_of(ideal: &Arc<Ideal>, options: &HomotopyOptions) -> Result<Arc<HomotopyRelation>, GammaError> {
    Ok(Arc::new(HomotopyRelation::from_ideal(ideal.clone(), 0, options.clone())?))
}

fn bypass_status(h: &HomotopyRelation, b: &Bypass) -> PairStatus {
    h.path_status(&Path::arrow(h.quiver(), b.arrow), &b.path)
}

fn transvect(ideal: &Ideal, b: &Bypass, tau: &Scalar) -> Result<(Transvection, Arc<Ideal>), GammaError> {
    let t = Transvection { bypass: b.clone(), tau: tau.clone() };
    let image = t.to_automorphism(ideal.quiver_arc()).apply_ideal(ideal)?;
    Ok((t, Arc::new(image)))
}

/// τ values cancelling a `v·u·w` term against a `v·α·w` term of some Gröbner element:
/// `φ_{α,u,τ}` then removes that `v·u·w` term.
pub fn ratio_candidates(ideal: &Ideal, b: &Bypass) -> Vec<Scalar> {
    let q = ideal.quiver();
    let mut out: Vec<Scalar> = Vec::new();
    for (x, y) in q.hom_pairs() {
        for g in ideal.groebner_basis(x, y) {
            for (w, cw) in g.terms() {
                for (i, &a) in w.arrows.iter().enumerate() {
                    if a != b.arrow {
                        continue;
                    }
                    let mut arrows = w.arrows[..i].to_vec();
                    arrows.extend(&b.path.arrows);
                    arrows.extend(&w.arrows[i + 1..]);
                    let other = Path { source: w.source, target: w.target, arrows };
                    if let Some(co) = g.coefficient(&other) {
                        let tau = -&(co / cw);
                        if !out.contains(&tau) {
                            out.push(tau);
                        }
                    }
                }
            }
        }
    }
    out
}

fn merge(mut first: Vec<Scalar>, rest: Vec<Scalar>) -> Vec<Scalar> {
    for s in rest {
        if !s.is_zero() && !first.contains(&s) {
            first.push(s);
        }
    }
    first.retain(|s| !s.is_zero());
    first
}

fn dedup_steps(steps: Vec<Step>) -> Vec<Step> {
    let mut out: Vec<Step> = Vec::new();
    for s in steps {
        if !out.iter().any(|o| o.relation.fingerprint() == s.relation.fingerprint()) {
            out.push(s);
        }
    }
    out
}

/// Transvections `φ_{α,u,τ}` with `α ≁_I u` and `α ∼_J u` for `J = φ(I)`, one per fingerprint.
pub fn direct_successors(ideal: &Arc<Ideal>, options: &GammaOptions) -> Result<Probe, GammaError> {
    let h = relation_of(ideal, &options.homotopy)?;
    let q = ideal.quiver();
    let schedule = options.schedule_for(ideal.field());
    let mut probe = Probe::default();
    for b in q.find_bypasses() {
        match bypass_status(&h, &b) {
            PairStatus::Homotopic => continue,
            PairStatus::Unknown => {
                probe.inconclusive.push(b.label(q));
                continue;
            }
            PairStatus::NotHomotopic => {}
        }
        for tau in &schedule {
            let (t, j) = transvect(ideal, &b, tau)?;
            if ideals_equal(ideal, &j)? {
                continue;
            }
            let hj = relation_of(&j, &options.homotopy)?;
            match bypass_status(&hj, &b) {
                PairStatus::Homotopic => {
                    probe.steps.push(Step { transvection: t, ideal: j, relation: hj });
                    break;
                }
                _ => probe.inconclusive.push(format!("{} at tau={}", b.label(q), tau)),
            }
        }
    }
    probe.steps = dedup_steps(probe.steps);
    Ok(probe)
}

/// Probes every bypass with `α ∼_I u`, splitting images into predecessors
/// (`α ≁_J u`) and ideals with the same homotopy relation.
fn backward_probe(ideal: &Arc<Ideal>, options: &GammaOptions) -> Result<(Probe, Vec<Step>), GammaError> {
    let h = relation_of(ideal, &options.homotopy)?;
    let q = ideal.quiver();
    let schedule = options.schedule_for(ideal.field());
    let mut probe = Probe::default();
    let mut lateral = Vec::new();
    for b in q.find_bypasses() {
        match bypass_status(&h, &b) {
            PairStatus::NotHomotopic => continue,
            PairStatus::Unknown => {
                probe.inconclusive.push(b.label(q));
                continue;
            }
            PairStatus::Homotopic => {}
        }
        for tau in merge(ratio_candidates(ideal, &b), schedule.clone()) {
            let (t, j) = transvect(ideal, &b, &tau)?;
            if ideals_equal(ideal, &j)? {
                continue;
            }
            let hj = relation_of(&j, &options.homotopy)?;
            match bypass_status(&hj, &b) {
                PairStatus::NotHomotopic => probe.steps.push(Step { transvection: t, ideal: j, relation: hj }),
                PairStatus::Homotopic => lateral.push(Step { transvection: t, ideal: j, relation: hj }),
                PairStatus::Unknown => probe.inconclusive.push(format!("{} at tau={}", b.label(q), tau)),
            }
        }
    }
    probe.steps = dedup_steps(probe.steps);
    Ok((probe, lateral))
}

/// Transvections `φ_{α,u,τ}` with `α ∼_I u` and `α ≁_J u`, one per fingerprint of `J = φ(I)`.
pub fn direct_predecessors(ideal: &Arc<Ideal>, options: &GammaOptions) -> Result<Probe, GammaError> {
    Ok(backward_probe(ideal, options)?.0)
}

#[derive(Clone, Debug)]
pub struct GammaVertex {
    pub fingerprint: Fingerprint,
    pub hash: String,
    /// First ideal reaching this vertex.
    pub ideal: Arc<Ideal>,
    /// Further ideals with the same homotopy relation used as probe origins.
    pub representatives: Vec<Arc<Ideal>>,
    pub abelianization: AbelianInvariants,
}

/// `target = transvection(source)`, a direct successor.
#[derive(Clone, Debug)]
pub struct GammaEdge {
    pub from: usize,
    pub to: usize,
    pub transvection: Transvection,
    pub source: Arc<Ideal>,
    pub target: Arc<Ideal>,
}

#[derive(Clone, Debug)]
pub struct GammaQuiver {
    pub vertices: Vec<GammaVertex>,
    pub edges: Vec<GammaEdge>,
    pub sources: Vec<usize>,
    /// Index of the vertex of the starting ideal.
    pub start: usize,
    /// Number of bypasses of the quiver.
    pub bypass_count: usize,
    pub diagnostics: Vec<String>,
}

impl GammaQuiver {
    pub fn vertex_of(&self, fp: &Fingerprint) -> Option<usize> {
        self.vertices.iter().position(|v| v.fingerprint == *fp)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.to == v).count()
    }

    /// Length of the longest oriented path, or `None` on a cycle.
    pub fn longest_path(&self) -> Option<usize> {
        let n = self.vertices.len();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.in_degree(v)).collect();
        let mut depth = vec![0usize; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for e in self.edges.iter().filter(|e| e.from == v) {
                depth[e.to] = depth[e.to].max(depth[v] + 1);
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    queue.push_back(e.to);
                }
            }
        }
        (seen == n).then(|| depth.into_iter().max().unwrap_or(0))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Violations of the structural invariants of Γ; empty when all hold.
    pub fn check_invariants(&self, options: &HomotopyOptions) -> Result<Vec<String>, GammaError> {
        let mut out = Vec::new();
        let m = self.bypass_count;
        if self.edges.iter().any(|e| e.from == e.to) {
            out.push("self edge".to_string());
        }
        match self.longest_path() {
            None => out.push("oriented cycle".to_string()),
            Some(l) if l > m => out.push(format!("path of length {l} exceeds {m}")),
            Some(_) => {}
        }
        if !self.is_connected() {
            out.push("not connected".to_string());
        }
        for v in 0..self.vertices.len() {
            if self.out_degree(v) > m {
                out.push(format!("vertex {v} has out-degree {} > {m}", self.out_degree(v)));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            let image = e.transvection.to_automorphism(e.source.quiver_arc()).apply_ideal(&e.source)?;
            if !ideals_equal(&image, &e.target)? {
                out.push(format!("edge {i}: witness does not map source to target"));
                continue;
            }
            let hs = relation_of(&e.source, options)?;
            let ht = relation_of(&e.target, options)?;
            let ok = bypass_status(&hs, &e.transvection.bypass) == PairStatus::NotHomotopic
                && bypass_status(&ht, &e.transvection.bypass) == PairStatus::Homotopic
                && *hs.fingerprint() == self.vertices[e.from].fingerprint
                && *ht.fingerprint() == self.vertices[e.to].fingerprint;
            if !ok {
                out.push(format!("edge {i}: witness is not a direct successor"));
            }
        }
        Ok(out)
    }
}

struct Explorer<'a> {
    options: &'a GammaOptions,
    vertices: Vec<GammaVertex>,
    edges: Vec<GammaEdge>,
    queue: VecDeque<Arc<Ideal>>,
    diagnostics: BTreeSet<String>,
}

impl Explorer<'_> {
    /// Vertex of `h`, creating it or recording `ideal` as a representative.
    fn place(&mut self, ideal: &Arc<Ideal>, h: &HomotopyRelation) -> Result<usize, GammaError> {
        let fp = h.fingerprint();
        if fp.has_unknown() {
            return Err(GammaError::UnknownFingerprint(fp.hash_hex()));
        }
        if let Some(v) = self.vertices.iter().position(|v| v.fingerprint == *fp) {
            let reps = &self.vertices[v].representatives;
            if reps.len() < self.options.max_representatives {
                let mut known = false;
                for r in reps {
                    if ideals_equal(r, ideal)? {
                        known = true;
                        break;
                    }
                }
                if !known {
                    self.vertices[v].representatives.push(ideal.clone());
                    self.queue.push_back(ideal.clone());
                }
            }
            return Ok(v);
        }
        if self.vertices.len() >= self.options.max_vertices {
            return Err(GammaError::TooLarge(self.options.max_vertices));
        }
        self.vertices.push(GammaVertex {
            fingerprint: fp.clone(),
            hash: fp.hash_hex(),
            ideal: ideal.clone(),
            representatives: vec![ideal.clone()],
            abelianization: h.abelianization(),
        });
        self.queue.push_back(ideal.clone());
        Ok(self.vertices.len() - 1)
    }

    fn add_edge(&mut self, from: usize, to: usize, transvection: Transvection, source: Arc<Ideal>, target: Arc<Ideal>) {
        if !self.edges.iter().any(|e| e.from == from && e.to == to) {
            self.edges.push(GammaEdge { from, to, transvection, source, target });
        }
    }
}

/// Breadth-first closure of `∼_I` under direct successors and predecessors.
pub fn explore_gamma(ideal: &Ideal, options: &GammaOptions) -> Result<GammaQuiver, GammaError> {
    let start = Arc::new(ideal.clone());
    let mut ex = Explorer {
        options,
        vertices: Vec::new(),
        edges: Vec::new(),
        queue: VecDeque::new(),
        diagnostics: BTreeSet::new(),
    };
    let h = relation_of(&start, &options.homotopy)?;
    let start_vertex = ex.place(&start, &h)?;
    while let Some(current) = ex.queue.pop_front() {
        let hc = relation_of(&current, &options.homotopy)?;
        let here = ex.place(&current, &hc)?;
        let forward = direct_successors(&current, options)?;
        let (backward, lateral) = backward_probe(&current, options)?;
        for d in forward.inconclusive.iter().chain(&backward.inconclusive) {
            ex.diagnostics.insert(format!("inconclusive bypass {d}"));
        }
        for s in forward.steps {
            let to = ex.place(&s.ideal, &s.relation)?;
            ex.add_edge(here, to, s.transvection, current.clone(), s.ideal);
        }
        for s in backward.steps {
            let from = ex.place(&s.ideal, &s.relation)?;
            ex.add_edge(from, here, s.transvection.inverse(), s.ideal, current.clone());
        }
        for s in lateral {
            ex.place(&s.ideal, &s.relation)?;
        }
    }
    let q = ideal.quiver();
    let n = ex.vertices.len();
    let sources = (0..n).filter(|&v| !ex.edges.iter().any(|e| e.to == v)).collect();
    Ok(GammaQuiver {
        vertices: ex.vertices,
        edges: ex.edges,
        sources,
        start: start_vertex,
        bypass_count: q.find_bypasses().len(),
        diagnostics: ex.diagnostics.into_iter().collect(),
    })
}

#[derive(Clone, Debug)]
pub struct SourceReport {
    /// `(fingerprint hash, representative)` per source.
    pub sources: Vec<(String, Arc<Ideal>)>,
    pub warnings: Vec<String>,
}

/// In-degree-zero vertices, with a warning when uniqueness is not guaranteed.
pub fn find_sources(gamma: &GammaQuiver) -> SourceReport {
    let sources: Vec<(String, Arc<Ideal>)> =
        gamma.sources.iter().map(|&v| (gamma.vertices[v].hash.clone(), gamma.vertices[v].ideal.clone())).collect();
    let mut warnings = Vec::new();
    if let Some(v) = gamma.vertices.first() {
        let ideal = &v.ideal;
        if ideal.field().characteristic() != 0 {
            warnings.push(format!("characteristic {}: the source need not be unique", ideal.field().characteristic()));
        }
        let doubles = ideal.quiver().find_double_bypasses().len();
        if doubles > 0 {
            warnings.push(format!("{doubles} double bypasses: the source need not be unique"));
        }
    }
    if sources.len() > 1 {
        warnings.push(format!("{} sources", sources.len()));
    }
    SourceReport { sources, warnings }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Surjection {
    Confirmed,
    /// A generating pair of the source not homotopic in the target.
    Refuted { u: Path, v: Path },
    Unknown { u: Path, v: Path },
}

/// Whether the identity on walks induces `π₁(Q, source) ↠ π₁(Q, target)`.
pub fn check_surjection(source: &Ideal, target: &Ideal, options: &HomotopyOptions) -> Result<Surjection, GammaError> {
    if !source.same_ambient(target) {
        return Err(GammaError::Mismatch);
    }
    let ht = HomotopyRelation::from_ideal(Arc::new(target.clone()), 0, options.clone())?;
    for (u, v) in generating_pairs(source) {
        match ht.path_status(&u, &v) {
            PairStatus::Homotopic => {}
            PairStatus::NotHomotopic => return Ok(Surjection::Refuted { u, v }),
            PairStatus::Unknown => return Ok(Surjection::Unknown { u, v }),
        }
    }
    // the source relators must die in the target abelianization
    let hs = HomotopyRelation::from_ideal(Arc::new(source.clone()), 0, options.clone())?;
    let pres = hs.presentation();
    for (k, rel) in pres.relators.iter().enumerate() {
        let nf = ht.abelian_quotient().normal_form(&pres.exponent_vector(rel));
        if nf.iter().any(|x| *x != BigInt::from(0)) {
            let (u, v) = hs.generating_pairs()[k].clone();
            return Ok(Surjection::Refuted { u, v });
        }
    }
    Ok(Surjection::Confirmed)
}

/// `target = D ∘ φₙ ∘ … ∘ φ₁ (source)` with `αᵢ ∼ uᵢ` in each intermediate image.
#[derive(Clone, Debug)]
pub struct TransvectionChain {
    /// In application order.
    pub steps: Vec<Transvection>,
    pub dilatation: Dilatation,
}

/// Breadth-first search over transvection images; the dilatation is always the identity.
pub fn check_lemma_3_3_chain(source: &Ideal, target: &Ideal, options: &GammaOptions) -> Result<TransvectionChain, GammaError> {
    if !source.same_ambient(target) {
        return Err(GammaError::Mismatch);
    }
    let q = source.quiver();
    let field = source.field();
    let identity = Dilatation::identity(q, field);
    if ideals_equal(source, target)? {
        return Ok(TransvectionChain { steps: Vec::new(), dilatation: identity });
    }
    let bypasses = q.find_bypasses();
    let depth_cap = 2 * bypasses.len() + 2;
    let state_cap = 4096;
    let schedule = options.schedule_for(field);
    let target = Arc::new(target.clone());
    let mut states: Vec<(Arc<Ideal>, Option<(usize, Transvection)>, usize)> = vec![(Arc::new(source.clone()), None, 0)];
    let mut by_hash: HashMap<Vec<String>, Vec<usize>> = HashMap::new();
    let key = |i: &Ideal| -> Vec<String> { i.minimal_relations().iter().map(|r| r.display(q).to_string()).collect() };
    by_hash.entry(key(source)).or_default().push(0);
    let mut head = 0;
    while head < states.len() {
        let (current, _, depth) = states[head].clone();
        if depth >= depth_cap {
            head += 1;
            continue;
        }
        for b in &bypasses {
            let taus = merge(merge(ratio_candidates(&current, b), ratio_candidates(&target, b)), schedule.clone());
            let taus = merge(taus.iter().map(|t| -t).collect(), taus);
            for tau in taus {
                let (t, image) = transvect(&current, b, &tau)?;
                let k = key(&image);
                let bucket = by_hash.entry(k).or_default();
                let mut seen = false;
                for &s in bucket.iter() {
                    if ideals_equal(&states[s].0, &image)? {
                        seen = true;
                        break;
                    }
                }
                if seen {
                    continue;
                }
                let hi = relation_of(&image, &options.homotopy)?;
                if bypass_status(&hi, b) != PairStatus::Homotopic {
                    continue;
                }
                bucket.push(states.len());
                let done = ideals_equal(&image, &target)?;
                states.push((image, Some((head, t)), depth + 1));
                if done {
                    let mut steps = Vec::new();
                    let mut at = states.len() - 1;
                    while let Some((prev, t)) = states[at].1.clone() {
                        steps.push(t);
                        at = prev;
                    }
                    steps.reverse();
                    return Ok(TransvectionChain { steps, dilatation: identity });
                }
                if states.len() > state_cap {
                    return Err(GammaError::Unreachable);
                }
            }
        }
        head += 1;
    }
    Err(GammaError::Unreachable)
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
    fn exple1_gamma_has_one_edge() {
        let doc = parse_document(EXPLE1).unwrap();
        let i = doc.ideal("I", None).unwrap();
        let j = doc.ideal("J", None).unwrap();
        let opts = GammaOptions::default();
        let g = explore_gamma(&j, &opts).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.sources.len(), 1);
        let src = &g.vertices[g.sources[0]].ideal;
        assert!(ideals_equal(src, &i).unwrap());
        assert!(g.check_invariants(&opts.homotopy).unwrap().is_empty());
        assert_eq!(check_surjection(&i, &j, &opts.homotopy).unwrap(), Surjection::Confirmed);
        assert!(matches!(check_surjection(&j, &i, &opts.homotopy).unwrap(), Surjection::Refuted { .. }));
        let chain = check_lemma_3_3_chain(&i, &j, &opts).unwrap();
        let q = i.quiver();
        let labels: Vec<String> = chain.steps.iter().map(|t| t.label(q)).collect();
        assert_eq!(labels, vec!["phi(a,c*b,-1)"]);
    }
}
