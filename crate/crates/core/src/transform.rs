//! Automorphisms of the path algebra fixing the vertices: transvections,
//! dilatations, their action on ideals, the decomposition of an automorphism
//! into transvections and a dilatation, and exp/log of nilpotent derivations.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::ideal::{Ideal, IdealError, Relation};
use crate::linalg;
use crate::quiver::{Bypass, Path, Quiver};
use crate::scalar::{Field, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("image of arrow `{0}` is not parallel to it")]
    NotParallel(String),
    #[error("linear part on arrows {0} -> {1} is singular")]
    Singular(String, String),
    #[error("image of arrow `{0}` is missing")]
    MissingImage(String),
    #[error("dilatation scale for `{0}` is zero")]
    ZeroScale(String),
    #[error("`{0}` is not a bypass")]
    NotBypass(String),
    #[error("derivation is not nilpotent: image of `{0}` has a term of length below 2")]
    NotNilpotent(String),
    #[error("automorphism is not unipotent at arrow `{0}`")]
    NotUnipotent(String),
    #[error("series coefficient 1/{0} is undefined in characteristic {1}")]
    Characteristic(usize, u64),
    #[error("quiver or field mismatch")]
    Mismatch,
    #[error(transparent)]
    Ideal(#[from] IdealError),
}

/// `φ_{α,u,τ}`: `α ↦ α + τu`, other arrows fixed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transvection {
    pub bypass: Bypass,
    pub tau: Scalar,
}

impl Transvection {
    pub fn new(q: &Quiver, arrow: usize, path: Path, tau: Scalar) -> Result<Transvection, TransformError> {
        let label = format!("({}, {})", q.arrow(arrow).name, path.display(q));
        let bypass = Bypass::new(q, arrow, path).ok_or(TransformError::NotBypass(label))?;
        Ok(Transvection { bypass, tau })
    }

    pub fn inverse(&self) -> Transvection {
        Transvection { bypass: self.bypass.clone(), tau: -&self.tau }
    }

    pub fn to_automorphism(&self, q: &Arc<Quiver>) -> PathAutomorphism {
        let field = self.tau.field();
        let mut images = identity_images(q, field);
        let a = self.bypass.arrow;
        images[a].add_term(self.bypass.path.clone(), self.tau.clone());
        PathAutomorphism { quiver: q.clone(), field, images }
    }

    /// `phi(a,c*b,1/2)`.
    pub fn label(&self, q: &Quiver) -> String {
        format!("phi({},{},{})", q.arrow(self.bypass.arrow).name, self.bypass.path.display(q), self.tau)
    }
}

/// Arrow-wise nonzero rescaling.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dilatation {
    pub scales: Vec<Scalar>,
}

impl Dilatation {
    pub fn identity(q: &Quiver, field: Field) -> Dilatation {
        Dilatation { scales: vec![field.one(); q.arrow_count()] }
    }

    pub fn new(q: &Quiver, scales: Vec<Scalar>) -> Result<Dilatation, TransformError> {
        if scales.len() != q.arrow_count() {
            return Err(TransformError::Mismatch);
        }
        if let Some(i) = scales.iter().position(Scalar::is_zero) {
            return Err(TransformError::ZeroScale(q.arrow(i).name.clone()));
        }
        Ok(Dilatation { scales })
    }

    pub fn inverse(&self) -> Dilatation {
        Dilatation { scales: self.scales.iter().map(|s| s.inverse().unwrap()).collect() }
    }

    /// Scalar by which a path is multiplied.
    pub fn path_scale(&self, p: &Path, field: Field) -> Scalar {
        p.arrows.iter().fold(field.one(), |acc, &a| &acc * &self.scales[a])
    }

    pub fn is_identity(&self) -> bool {
        self.scales.iter().all(Scalar::is_one)
    }

    pub fn to_automorphism(&self, q: &Arc<Quiver>, field: Field) -> PathAutomorphism {
        let images = (0..q.arrow_count())
            .map(|a| Relation::monomial(Path::arrow(q, a), self.scales[a].clone()))
            .collect();
        PathAutomorphism { quiver: q.clone(), field, images }
    }

    /// `D ∘ φ_{α,u,τ} ∘ D⁻¹ = φ_{α,u,τλ/μ}` with `D(u) = λu`, `D(α) = μα`.
    pub fn conjugate(&self, t: &Transvection, field: Field) -> Transvection {
        let lambda = self.path_scale(&t.bypass.path, field);
        let mu = &self.scales[t.bypass.arrow];
        Transvection { bypass: t.bypass.clone(), tau: &(&t.tau * &lambda) / mu }
    }

    pub fn label(&self, q: &Quiver) -> String {
        let parts: Vec<String> = self
            .scales
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_one())
            .map(|(a, s)| format!("{}={}", q.arrow(a).name, s))
            .collect();
        if parts.is_empty() {
            "id".to_string()
        } else {
            parts.join(",")
        }
    }
}

fn identity_images(q: &Quiver, field: Field) -> Vec<Relation> {
    (0..q.arrow_count()).map(|a| Relation::monomial(Path::arrow(q, a), field.one())).collect()
}

/// An algebra automorphism of `kQ` fixing every vertex, given by arrow images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathAutomorphism {
    quiver: Arc<Quiver>,
    field: Field,
    images: Vec<Relation>,
}

impl PathAutomorphism {
    pub fn identity(q: &Arc<Quiver>, field: Field) -> PathAutomorphism {
        PathAutomorphism { quiver: q.clone(), field, images: identity_images(q, field) }
    }

    /// Validates parallelism and invertibility of the linear part on each parallel class.
    pub fn new(q: &Arc<Quiver>, field: Field, images: Vec<Relation>) -> Result<PathAutomorphism, TransformError> {
        if images.len() != q.arrow_count() {
            return Err(TransformError::Mismatch);
        }
        for (a, img) in images.iter().enumerate() {
            let arrow = q.arrow(a);
            if img.source != arrow.source || img.target != arrow.target {
                return Err(TransformError::NotParallel(arrow.name.clone()));
            }
        }
        let phi = PathAutomorphism { quiver: q.clone(), field, images };
        for (x, y, class) in parallel_classes(q) {
            let m = phi.linear_part(&class);
            if linalg::rank(m, class.len()) < class.len() {
                return Err(TransformError::Singular(q.vertex_name(x).into(), q.vertex_name(y).into()));
            }
        }
        Ok(phi)
    }

    /// Arrows absent from `images` are fixed.
    pub fn from_partial(
        q: &Arc<Quiver>,
        field: Field,
        images: &std::collections::HashMap<usize, Relation>,
    ) -> Result<PathAutomorphism, TransformError> {
        let mut full = identity_images(q, field);
        for (&a, r) in images {
            full[a] = r.clone();
        }
        PathAutomorphism::new(q, field, full)
    }

    pub fn quiver(&self) -> &Arc<Quiver> {
        &self.quiver
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn image(&self, arrow: usize) -> &Relation {
        &self.images[arrow]
    }

    pub fn images(&self) -> &[Relation] {
        &self.images
    }

    /// `M[i][j]` = coefficient of arrow `class[j]` in the image of `class[i]`.
    fn linear_part(&self, class: &[usize]) -> Vec<Vec<Scalar>> {
        class
            .iter()
            .map(|&a| {
                class
                    .iter()
                    .map(|&b| self.images[a].coefficient(&Path::arrow(&self.quiver, b)).cloned().unwrap_or(self.field.zero()))
                    .collect()
            })
            .collect()
    }

    pub fn apply_path(&self, p: &Path) -> Relation {
        let mut acc = Relation::monomial(Path::trivial(p.source), self.field.one());
        for &a in &p.arrows {
            acc = acc.then(&self.images[a]).unwrap();
        }
        acc
    }

    pub fn apply(&self, r: &Relation) -> Relation {
        let mut out = Relation::zero(r.source, r.target);
        for (p, c) in r.terms() {
            out = out.plus(&self.apply_path(p).scaled(c));
        }
        out
    }

    /// `φ(I)`, generated by the images of the minimal relations.
    pub fn apply_ideal(&self, ideal: &Ideal) -> Result<Ideal, TransformError> {
        if *ideal.quiver() != *self.quiver || ideal.field() != self.field {
            return Err(TransformError::Mismatch);
        }
        let gens = ideal.minimal_relations().iter().map(|r| self.apply(r)).collect();
        Ok(Ideal::new(self.quiver.clone(), self.field, gens)?)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PathAutomorphism) -> PathAutomorphism {
        let images = other.images.iter().map(|r| self.apply(r)).collect();
        PathAutomorphism { quiver: self.quiver.clone(), field: self.field, images }
    }

    pub fn is_identity(&self) -> bool {
        self.images == identity_images(&self.quiver, self.field)
    }

    /// The dilatation this automorphism equals, if any.
    pub fn as_dilatation(&self) -> Option<Dilatation> {
        let mut scales = Vec::new();
        for (a, img) in self.images.iter().enumerate() {
            let p = Path::arrow(&self.quiver, a);
            if img.len() != 1 {
                return None;
            }
            scales.push(img.coefficient(&p)?.clone());
        }
        Some(Dilatation { scales })
    }

    pub fn display(&self) -> String {
        let q = &self.quiver;
        self.images
            .iter()
            .enumerate()
            .map(|(a, r)| format!("{} -> {}", q.arrow(a).name, r.display(q)))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Transvection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi(#{},{:?},{})", self.bypass.arrow, self.bypass.path.arrows, self.tau)
    }
}

/// Groups of pairwise parallel arrows `(x, y, arrows)`.
pub fn parallel_classes(q: &Quiver) -> Vec<(usize, usize, Vec<usize>)> {
    let mut out: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for (i, a) in q.arrows().iter().enumerate() {
        match out.iter_mut().find(|(x, y, _)| *x == a.source && *y == a.target) {
            Some(entry) => entry.2.push(i),
            None => out.push((a.source, a.target, vec![i])),
        }
    }
    out
}

/// Writes `φ = D ∘ tₙ ∘ … ∘ t₁`; the list is returned in application order `[t₁, …, tₙ]`.
pub fn decompose_dt(phi: &PathAutomorphism) -> Result<(Dilatation, Vec<Transvection>), TransformError> {
    let q = phi.quiver.clone();
    let field = phi.field;
    // left factors with lefts[k] ∘ … ∘ lefts[0] ∘ φ = D
    let mut lefts: Vec<Transvection> = Vec::new();
    let mut psi = phi.clone();
    let mut apply = |t: Transvection, psi: &mut PathAutomorphism| {
        *psi = t.to_automorphism(&q).compose(psi);
        lefts.push(t);
    };
    let classes = parallel_classes(&q);
    loop {
        let Some(alpha) = (0..q.arrow_count()).find(|&a| psi.images[a].len() != 1 || psi.images[a].leading_path() != Some(&Path::arrow(&q, a))) else {
            break;
        };
        let (_, _, class) = classes.iter().find(|(_, _, c)| c.contains(&alpha)).unwrap();
        let d = class.len();
        let arrow_path = |i: usize| Path::arrow(&q, class[i]);
        // diagonalise the linear part; left composing with φ_{α_i,α_j,τ} adds τ·col_i to col_j
        for k in 0..d {
            let m = psi.linear_part(class);
            if m[k][k].is_zero() {
                let r = (k + 1..d).find(|&r| !m[k][r].is_zero()).ok_or_else(|| {
                    TransformError::Singular(q.vertex_name(q.arrow(class[0]).source).into(), q.vertex_name(q.arrow(class[0]).target).into())
                })?;
                apply(Transvection { bypass: Bypass { arrow: class[r], path: arrow_path(k) }, tau: field.one() }, &mut psi);
            }
            for c in 0..d {
                let m = psi.linear_part(class);
                if c != k && !m[k][c].is_zero() {
                    let tau = -&(&m[k][c] / &m[k][k]);
                    apply(Transvection { bypass: Bypass { arrow: class[k], path: arrow_path(c) }, tau }, &mut psi);
                }
            }
        }
        // strip the longer terms
        for &a in class {
            let own = Path::arrow(&q, a);
            let lambda = psi.images[a].coefficient(&own).cloned().expect("diagonal entry vanished");
            let tails: Vec<(Path, Scalar)> =
                psi.images[a].terms().filter(|(p, _)| **p != own).map(|(p, c)| (p.clone(), c.clone())).collect();
            for (u, tau) in tails {
                apply(Transvection { bypass: Bypass { arrow: a, path: u }, tau: -&(&tau / &lambda) }, &mut psi);
            }
        }
    }
    let dil = psi.as_dilatation().expect("reduction ended in a dilatation");
    // φ = t₁⁻¹ ∘ … ∘ t_N⁻¹ ∘ D = D ∘ c₁ ∘ … ∘ c_N with c_i = D⁻¹ t_i⁻¹ D
    let dinv = dil.inverse();
    let mut out: Vec<Transvection> = lefts.iter().map(|t| dinv.conjugate(&t.inverse(), field)).collect();
    out.reverse();
    Ok((dil, out))
}

/// `D ∘ tₙ ∘ … ∘ t₁` from a list in application order.
pub fn recompose(q: &Arc<Quiver>, field: Field, d: &Dilatation, ts: &[Transvection]) -> PathAutomorphism {
    let mut acc = PathAutomorphism::identity(q, field);
    for t in ts {
        acc = t.to_automorphism(q).compose(&acc);
    }
    d.to_automorphism(q, field).compose(&acc)
}

/// A derivation of `kQ` vanishing on vertices, given by arrow images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    quiver: Arc<Quiver>,
    field: Field,
    images: Vec<Relation>,
}

impl Derivation {
    pub fn new(q: &Arc<Quiver>, field: Field, images: Vec<Relation>) -> Result<Derivation, TransformError> {
        if images.len() != q.arrow_count() {
            return Err(TransformError::Mismatch);
        }
        for (a, img) in images.iter().enumerate() {
            let arrow = q.arrow(a);
            if img.source != arrow.source || img.target != arrow.target {
                return Err(TransformError::NotParallel(arrow.name.clone()));
            }
        }
        Ok(Derivation { quiver: q.clone(), field, images })
    }

    /// The derivation sending `α` to `u` and every other arrow to zero.
    pub fn elementary(q: &Arc<Quiver>, field: Field, bypass: &Bypass, tau: Scalar) -> Derivation {
        let images = (0..q.arrow_count())
            .map(|a| {
                let arrow = q.arrow(a);
                let mut r = Relation::zero(arrow.source, arrow.target);
                if a == bypass.arrow {
                    r.add_term(bypass.path.clone(), tau.clone());
                }
                r
            })
            .collect();
        Derivation { quiver: q.clone(), field, images }
    }

    pub fn image(&self, arrow: usize) -> &Relation {
        &self.images[arrow]
    }

    /// Leibniz rule on a path.
    pub fn apply_path(&self, p: &Path) -> Relation {
        let mut out = Relation::zero(p.source, p.target);
        for (i, &a) in p.arrows.iter().enumerate() {
            let before = Path { source: p.source, target: self.quiver.arrow(a).source, arrows: p.arrows[..i].to_vec() };
            let after = Path { source: self.quiver.arrow(a).target, target: p.target, arrows: p.arrows[i + 1..].to_vec() };
            out = out.plus(&self.images[a].sandwich(&before, &after));
        }
        out
    }

    pub fn apply(&self, r: &Relation) -> Relation {
        let mut out = Relation::zero(r.source, r.target);
        for (p, c) in r.terms() {
            out = out.plus(&self.apply_path(p).scaled(c));
        }
        out
    }
}

fn series_coefficient(l: usize, field: Field) -> Result<Scalar, TransformError> {
    let n = field.from_i64(l as i64);
    n.inverse().ok_or(TransformError::Characteristic(l, field.characteristic()))
}

/// `exp(ν) = Σ νˡ/l!`; requires every image term to have length at least 2.
pub fn exp_derivation(nu: &Derivation) -> Result<PathAutomorphism, TransformError> {
    let q = &nu.quiver;
    for (a, img) in nu.images.iter().enumerate() {
        if img.min_length().is_some_and(|l| l < 2) {
            return Err(TransformError::NotNilpotent(q.arrow(a).name.clone()));
        }
    }
    let mut images = Vec::new();
    for a in 0..q.arrow_count() {
        let mut term = Relation::monomial(Path::arrow(q, a), nu.field.one());
        let mut acc = term.clone();
        let mut l = 1;
        loop {
            term = nu.apply(&term);
            if term.is_zero() {
                break;
            }
            term = term.scaled(&series_coefficient(l, nu.field)?);
            acc = acc.plus(&term);
            l += 1;
        }
        images.push(acc);
    }
    Ok(PathAutomorphism { quiver: q.clone(), field: nu.field, images })
}

/// `log(φ) = Σ (-1)^{l+1} (φ - id)ˡ / l` for unipotent `φ`.
pub fn log_unipotent(phi: &PathAutomorphism) -> Result<Derivation, TransformError> {
    let q = &phi.quiver;
    for (a, img) in phi.images.iter().enumerate() {
        let own = Path::arrow(q, a);
        let ok = img.coefficient(&own).is_some_and(Scalar::is_one) && img.terms().all(|(p, _)| *p == own || p.len() >= 2);
        if !ok {
            return Err(TransformError::NotUnipotent(q.arrow(a).name.clone()));
        }
    }
    let minus_id = |r: &Relation| phi.apply(r).minus(r);
    let mut images = Vec::new();
    for a in 0..q.arrow_count() {
        let mut term = Relation::monomial(Path::arrow(q, a), phi.field.one());
        let mut acc = Relation::zero(term.source, term.target);
        let mut l = 1;
        loop {
            term = minus_id(&term);
            if term.is_zero() {
                break;
            }
            let mut c = series_coefficient(l, phi.field)?;
            if l % 2 == 0 {
                c = -c;
            }
            acc = acc.plus(&term.scaled(&c));
            l += 1;
        }
        images.push(acc);
    }
    Ok(Derivation { quiver: q.clone(), field: phi.field, images })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_document;

    const TEXT: &str = "quiver exple1 { vertices: 1 2 3 4; arrow a: 1 -> 3; arrow b: 1 -> 2;
        arrow c: 2 -> 3; arrow d: 3 -> 4; }
        ideal I over exple1(0) { rel d*a; }
        automorphism phi over exple1(0) { a -> 2*a + c*b; b -> b; c -> c; d -> d; }";

    #[test]
    fn transvection_moves_monomial_ideal() {
        let doc = parse_document(TEXT).unwrap();
        let i = doc.ideal("I", None).unwrap();
        let q = doc.quiver("exple1").unwrap();
        let f = Field::Rational;
        let t = Transvection::new(&q, q.arrow_id("a").unwrap(), q.path("c*b").unwrap(), f.one()).unwrap();
        let j = t.to_automorphism(&q).apply_ideal(&i).unwrap();
        let rels: Vec<String> = j.minimal_relations().iter().map(|r| r.display(&q).to_string()).collect();
        assert_eq!(rels, vec!["d*c*b + d*a"]);
    }

    #[test]
    fn decomposition_of_scaled_transvection() {
        let doc = parse_document(TEXT).unwrap();
        let (q, f, images) = doc.automorphism_images("phi", None).unwrap();
        let imgs = (0..q.arrow_count()).map(|a| images[&a].clone()).collect();
        let phi = PathAutomorphism::new(&q, f, imgs).unwrap();
        let (d, ts) = decompose_dt(&phi).unwrap();
        assert_eq!(d.label(&q), "a=2");
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].label(&q), "phi(a,c*b,1)");
        assert_eq!(recompose(&q, f, &d, &ts), phi);
    }

    #[test]
    fn parallel_arrows_need_linear_reduction() {
        let q = Arc::new(Quiver::new("k", &["1", "2"], &[("a", "1", "2"), ("b", "1", "2")]).unwrap());
        let f = Field::Rational;
        let a = Path::arrow(&q, 0);
        let b = Path::arrow(&q, 1);
        // a -> b, b -> a: a swap, singular-free but with zero diagonal
        let img_a = Relation::monomial(b.clone(), f.one());
        let img_b = Relation::monomial(a.clone(), f.one());
        let phi = PathAutomorphism::new(&q, f, vec![img_a, img_b]).unwrap();
        let (d, ts) = decompose_dt(&phi).unwrap();
        assert_eq!(recompose(&q, f, &d, &ts), phi);
        let singular = PathAutomorphism::new(&q, f, vec![Relation::monomial(a.clone(), f.one()), Relation::monomial(a, f.one())]);
        assert!(matches!(singular, Err(TransformError::Singular(..))));
    }
}
