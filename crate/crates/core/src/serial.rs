//! JSON transfer objects, DSL export of covers, and DOT drawings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{CoverError, CoverQuiver, DeckAction};
use crate::dsl::{self, DslError};
use crate::gamma::GammaQuiver;
use crate::group::AbelianInvariants;
use crate::ideal::{Ideal, IdealError, Relation};
use crate::quiver::{Path, Quiver, QuiverError};
use crate::scalar::{Field, ScalarError};

#[derive(Debug, Error)]
pub enum SerialError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("unknown name `{0}`")]
    Unknown(String),
    #[error("terms of `{0}` are not parallel")]
    NotParallel(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuiverDto {
    pub name: String,
    pub vertices: Vec<String>,
    /// `(name, source, target)`.
    pub arrows: Vec<(String, String, String)>,
}

impl QuiverDto {
    pub fn from_quiver(q: &Quiver) -> QuiverDto {
        QuiverDto {
            name: q.name().to_string(),
            vertices: q.vertex_names().to_vec(),
            arrows: q
                .arrows()
                .iter()
                .map(|a| (a.name.clone(), q.vertex_name(a.source).to_string(), q.vertex_name(a.target).to_string()))
                .collect(),
        }
    }

    pub fn to_quiver(&self) -> Result<Quiver, SerialError> {
        Ok(Quiver::new(&self.name, &self.vertices, &self.arrows)?)
    }
}

/// A term `coefficient * path`, the path written as in the DSL.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDto {
    pub coefficient: String,
    pub path: String,
}

pub fn relation_to_dto(q: &Quiver, r: &Relation) -> Vec<TermDto> {
    r.terms()
        .rev()
        .map(|(p, c)| TermDto { coefficient: c.to_string(), path: p.display(q).to_string() })
        .collect()
}

pub fn relation_from_dto(q: &Quiver, field: Field, terms: &[TermDto]) -> Result<Relation, SerialError> {
    let mut parsed: Vec<(Path, crate::Scalar)> = Vec::new();
    for t in terms {
        parsed.push((q.path(&t.path)?, field.parse(&t.coefficient)?));
    }
    let label = terms.iter().map(|t| t.path.clone()).collect::<Vec<_>>().join(" + ");
    let (s, tg) = parsed.first().map(|(p, _)| (p.source, p.target)).ok_or_else(|| SerialError::NotParallel(label.clone()))?;
    Relation::from_terms(s, tg, parsed).ok_or(SerialError::NotParallel(label))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealDto {
    pub quiver: QuiverDto,
    pub characteristic: u64,
    /// Minimal relations of the reduced echelon basis.
    pub relations: Vec<Vec<TermDto>>,
}

impl IdealDto {
    pub fn from_ideal(ideal: &Ideal) -> IdealDto {
        let q = ideal.quiver();
        IdealDto {
            quiver: QuiverDto::from_quiver(q),
            characteristic: ideal.field().characteristic(),
            relations: ideal.minimal_relations().iter().map(|r| relation_to_dto(q, r)).collect(),
        }
    }

    pub fn to_ideal(&self) -> Result<Ideal, SerialError> {
        let q = Arc::new(self.quiver.to_quiver()?);
        self.to_ideal_over(q)
    }

    fn to_ideal_over(&self, q: Arc<Quiver>) -> Result<Ideal, SerialError> {
        let field = Field::from_characteristic(self.characteristic)?;
        let gens = self.relations.iter().map(|r| relation_from_dto(&q, field, r)).collect::<Result<Vec<_>, _>>()?;
        Ok(Ideal::new_unchecked(q, field, gens)?)
    }
}

/// Fundamental group invariants in the `bq pi1 --json` shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi1Dto {
    pub abelian_rank: usize,
    pub torsion: Vec<u64>,
}

impl From<&AbelianInvariants> for Pi1Dto {
    fn from(a: &AbelianInvariants) -> Pi1Dto {
        Pi1Dto { abelian_rank: a.rank, torsion: a.torsion.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDto {
    pub generator: String,
    /// Image vertex name per cover vertex, `None` outside a truncation.
    pub map: Vec<Option<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverDto {
    pub base: IdealDto,
    pub quiver: QuiverDto,
    pub relations: Vec<Vec<TermDto>>,
    /// Base vertex name per cover vertex.
    pub vertex_map: Vec<String>,
    /// Base arrow name per cover arrow.
    pub arrow_map: Vec<String>,
    pub depth: Vec<usize>,
    pub radius: Option<usize>,
    pub complete: bool,
    pub action: Vec<ActionDto>,
}

impl CoverDto {
    pub fn from_cover(cov: &CoverQuiver) -> CoverDto {
        let bq = cov.base.quiver();
        let q = &cov.quiver;
        CoverDto {
            base: IdealDto::from_ideal(&cov.base),
            quiver: QuiverDto::from_quiver(q),
            relations: cov.ideal.minimal_relations().iter().map(|r| relation_to_dto(q, r)).collect(),
            vertex_map: cov.vertex_map.iter().map(|&x| bq.vertex_name(x).to_string()).collect(),
            arrow_map: cov.arrow_map.iter().map(|&a| bq.arrow(a).name.clone()).collect(),
            depth: cov.depth.clone(),
            radius: cov.radius,
            complete: cov.complete,
            action: cov
                .action
                .generators
                .iter()
                .zip(&cov.action.maps)
                .map(|(g, m)| ActionDto {
                    generator: g.clone(),
                    map: m.iter().map(|v| v.map(|v| q.vertex_name(v).to_string())).collect(),
                })
                .collect(),
        }
    }

    pub fn to_cover(&self) -> Result<CoverQuiver, SerialError> {
        let base = Arc::new(self.base.to_ideal()?);
        let bq = base.quiver();
        let q = Arc::new(self.quiver.to_quiver()?);
        let vertex_map = self.vertex_map.iter().map(|v| bq.vertex_id(v)).collect::<Result<Vec<_>, _>>()?;
        let arrow_map = self.arrow_map.iter().map(|a| bq.arrow_id(a)).collect::<Result<Vec<_>, _>>()?;
        let mut cov = CoverQuiver::new(base.clone(), q.clone(), vertex_map, arrow_map)?;
        let ideal = IdealDto { quiver: self.quiver.clone(), characteristic: self.base.characteristic, relations: self.relations.clone() };
        cov.ideal = Arc::new(ideal.to_ideal_over(q.clone())?);
        cov.depth = self.depth.clone();
        cov.radius = self.radius;
        cov.complete = self.complete;
        let mut action = DeckAction::default();
        for a in &self.action {
            action.generators.push(a.generator.clone());
            action.maps.push(
                a.map.iter().map(|v| v.as_ref().map(|v| q.vertex_id(v)).transpose()).collect::<Result<Vec<_>, _>>()?,
            );
        }
        cov.action = action;
        Ok(cov)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaVertexDto {
    pub fingerprint: String,
    pub pi1: Pi1Dto,
    pub relations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaEdgeDto {
    pub from: usize,
    pub to: usize,
    pub transvection: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaDto {
    pub vertices: Vec<GammaVertexDto>,
    pub edges: Vec<GammaEdgeDto>,
    pub sources: Vec<usize>,
    pub start: usize,
    pub diagnostics: Vec<String>,
}

impl GammaDto {
    pub fn from_gamma(g: &GammaQuiver) -> GammaDto {
        GammaDto {
            vertices: g
                .vertices
                .iter()
                .map(|v| {
                    let q = v.ideal.quiver();
                    GammaVertexDto {
                        fingerprint: v.hash.clone(),
                        pi1: Pi1Dto::from(&v.abelianization),
                        relations: v.ideal.minimal_relations().iter().map(|r| r.display(q).to_string()).collect(),
                    }
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| GammaEdgeDto { from: e.from, to: e.to, transvection: e.transvection.label(e.source.quiver()) })
                .collect(),
            sources: g.sources.clone(),
            start: g.start,
            diagnostics: g.diagnostics.clone(),
        }
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn quiver_to_dot(q: &Quiver) -> String {
    let mut s = format!("digraph \"{}\" {{\n", dot_escape(q.name()));
    for v in q.vertex_names() {
        s += &format!("  \"{}\";\n", dot_escape(v));
    }
    for a in q.arrows() {
        s += &format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(q.vertex_name(a.source)),
            dot_escape(q.vertex_name(a.target)),
            dot_escape(&a.name)
        );
    }
    s + "}\n"
}

pub fn gamma_to_dot(g: &GammaQuiver) -> String {
    let mut s = String::from("digraph gamma {\n");
    for (i, v) in g.vertices.iter().enumerate() {
        let inv = &v.abelianization;
        let shape = if g.sources.contains(&i) { "doublecircle" } else { "circle" };
        s += &format!(
            "  v{i} [shape={shape}, label=\"{}\\nrank {} torsion {:?}\"];\n",
            &v.hash[..12],
            inv.rank,
            inv.torsion
        );
    }
    for e in &g.edges {
        s += &format!("  v{} -> v{} [label=\"{}\"];\n", e.from, e.to, dot_escape(&e.transvection.label(e.source.quiver())));
    }
    s + "}\n"
}

pub fn cover_to_dot(cov: &CoverQuiver) -> String {
    let q = &cov.quiver;
    let mut s = format!("digraph \"{}\" {{\n", dot_escape(q.name()));
    for (v, name) in q.vertex_names().iter().enumerate() {
        let style = if cov.is_locally_interior(v) { "solid" } else { "dashed" };
        s += &format!("  \"{}\" [style={style}];\n", dot_escape(name));
    }
    for a in q.arrows() {
        s += &format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            dot_escape(q.vertex_name(a.source)),
            dot_escape(q.vertex_name(a.target)),
            dot_escape(&a.name)
        );
    }
    s + "}\n"
}

/// The cover as DSL blocks: both quivers, both ideals, the projection and the action.
pub fn cover_to_dsl(cov: &CoverQuiver, base_ideal: &str) -> String {
    let q = &cov.quiver;
    let bq = cov.base.quiver();
    let mut s = dsl::quiver_to_dsl(bq);
    s += &dsl::ideal_to_dsl(base_ideal, &cov.base);
    s += &dsl::quiver_to_dsl(q);
    s += &dsl::ideal_to_dsl(&format!("{base_ideal}_lift"), &cov.ideal);
    s += &format!("projection {} -> {} {{\n", q.name(), bq.name());
    for (v, &x) in cov.vertex_map.iter().enumerate() {
        s += &format!("  {} -> {};\n", q.vertex_name(v), bq.vertex_name(x));
    }
    for (a, &b) in cov.arrow_map.iter().enumerate() {
        s += &format!("  {} -> {};\n", q.arrow(a).name, bq.arrow(b).name);
    }
    s += "}\n";
    if !cov.action.generators.is_empty() {
        s += &format!("action {} {{\n", q.name());
        for (g, m) in cov.action.generators.iter().zip(&cov.action.maps) {
            let pairs: Vec<String> = m
                .iter()
                .enumerate()
                .filter_map(|(v, w)| w.map(|w| format!("{} -> {}", q.vertex_name(v), q.vertex_name(w))))
                .collect();
            if !pairs.is_empty() {
                s += &format!("  {g}: {};\n", pairs.join(", "));
            }
        }
        s += "}\n";
    }
    s
}

/// Rebuilds a cover from a document holding a projection block; the cover
/// ideal is regenerated from lifts of the base relations.
pub fn cover_from_document(doc: &dsl::Document, base_ideal: &str) -> Result<CoverQuiver, SerialError> {
    let base = Arc::new(doc.ideal(base_ideal, None)?);
    let bq = base.quiver();
    let proj = doc
        .projections
        .iter()
        .find(|p| p.base == bq.name())
        .ok_or_else(|| SerialError::Unknown(format!("projection onto {}", bq.name())))?;
    let q = doc.quiver(&proj.total)?;
    let lookup = |from: &str| -> Result<&str, SerialError> {
        proj.entries.iter().find(|(f, _)| f == from).map(|(_, t)| t.as_str()).ok_or_else(|| SerialError::Unknown(from.into()))
    };
    let vertex_map = q.vertex_names().iter().map(|v| Ok(bq.vertex_id(lookup(v)?)?)).collect::<Result<Vec<_>, SerialError>>()?;
    let arrow_map = q.arrows().iter().map(|a| Ok(bq.arrow_id(lookup(&a.name)?)?)).collect::<Result<Vec<_>, SerialError>>()?;
    let mut cov = CoverQuiver::new(base, q.clone(), vertex_map, arrow_map)?;
    if let Some(act) = doc.actions.iter().find(|a| a.total == q.name()) {
        for (g, pairs) in &act.generators {
            let mut map = vec![None; q.vertex_count()];
            for (from, to) in pairs {
                map[q.vertex_id(from)?] = Some(q.vertex_id(to)?);
            }
            cov.action.generators.push(g.clone());
            cov.action.maps.push(map);
        }
    }
    Ok(cov)
}
