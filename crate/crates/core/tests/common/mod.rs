//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use bq_core::ideal::Relation;
use bq_core::transform::{Derivation, Dilatation, PathAutomorphism, Transvection};
use bq_core::{Field, Ideal, Path, Quiver, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

/// Run-wide seed from `BQ_SEED`, 0 when unset. Every generated case mixes it in.
pub fn base_seed() -> u64 {
    std::env::var("BQ_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed ^ base_seed().wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Connected acyclic quiver on 3 to `max_vertices` vertices with at least one bypass.
pub fn random_quiver(rng: &mut Rng8, max_vertices: usize) -> Arc<Quiver> {
    loop {
        let n = rng.gen_range(3..=max_vertices);
        let names: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
        let mut arrows: Vec<(String, String, String)> = Vec::new();
        // a random spanning tree oriented from smaller to larger labels
        for j in 1..n {
            let i = rng.gen_range(0..j);
            arrows.push((String::new(), names[i].clone(), names[j].clone()));
        }
        let extra = rng.gen_range(1..=3);
        for _ in 0..extra {
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            arrows.push((String::new(), names[i].clone(), names[j].clone()));
        }
        for (k, a) in arrows.iter_mut().enumerate() {
            a.0 = arrow_name(k);
        }
        let q = Quiver::new("rand", &names, &arrows).unwrap();
        if !q.find_bypasses().is_empty() && q.enumerate_paths().len() <= 60 {
            return Arc::new(q);
        }
    }
}

fn arrow_name(k: usize) -> String {
    let letters = "abcdefghijklmnopqrstuvwxyz".as_bytes();
    if k < 26 {
        (letters[k] as char).to_string()
    } else {
        format!("x{k}")
    }
}

pub fn small_scalar(rng: &mut Rng8, field: Field) -> Scalar {
    let choices = [1, -1, 2, -2, 3];
    loop {
        let s = field.from_i64(*choices.choose(rng).unwrap());
        if !s.is_zero() {
            return s;
        }
    }
}

/// Hom-pairs with at least two paths of length at least two.
fn relation_slots(q: &Quiver) -> Vec<Vec<Path>> {
    q.hom_pairs()
        .into_iter()
        .map(|(x, y)| q.paths_between(x, y).into_iter().filter(|p| p.len() >= 2).collect::<Vec<_>>())
        .filter(|ps| !ps.is_empty())
        .collect()
}

pub fn random_relation(rng: &mut Rng8, field: Field, paths: &[Path]) -> Relation {
    let k = rng.gen_range(1..=paths.len().min(3));
    let chosen: Vec<&Path> = paths.choose_multiple(rng, k).collect();
    let terms: Vec<(Path, Scalar)> = chosen.into_iter().map(|p| (p.clone(), small_scalar(rng, field))).collect();
    Relation::from_terms(paths[0].source, paths[0].target, terms).unwrap()
}

/// Admissible ideal generated by one to three random relations (possibly zero ones).
pub fn random_ideal(rng: &mut Rng8, q: &Arc<Quiver>, field: Field) -> Ideal {
    let slots = relation_slots(q);
    let mut gens = Vec::new();
    if !slots.is_empty() {
        for _ in 0..rng.gen_range(1..=3) {
            let paths = slots.choose(rng).unwrap();
            gens.push(random_relation(rng, field, paths));
        }
    }
    Ideal::new(q.clone(), field, gens).unwrap()
}

pub fn random_transvection(rng: &mut Rng8, q: &Quiver, field: Field) -> Transvection {
    let b = q.find_bypasses().choose(rng).unwrap().clone();
    Transvection { bypass: b, tau: small_scalar(rng, field) }
}

pub fn random_dilatation(rng: &mut Rng8, q: &Quiver, field: Field) -> Dilatation {
    Dilatation::new(q, (0..q.arrow_count()).map(|_| small_scalar(rng, field)).collect()).unwrap()
}

/// `D ∘ tₖ ∘ … ∘ t₁` with at most `max_steps` transvections.
pub fn random_automorphism(rng: &mut Rng8, q: &Arc<Quiver>, field: Field, max_steps: usize) -> PathAutomorphism {
    let mut phi = PathAutomorphism::identity(q, field);
    for _ in 0..rng.gen_range(0..=max_steps) {
        phi = random_transvection(rng, q, field).to_automorphism(q).compose(&phi);
    }
    random_dilatation(rng, q, field).to_automorphism(q, field).compose(&phi)
}

/// Derivation sending each arrow to a random combination of parallel paths of length at least two.
pub fn random_nilpotent_derivation(rng: &mut Rng8, q: &Arc<Quiver>, field: Field) -> Derivation {
    let images = (0..q.arrow_count())
        .map(|a| {
            let arrow = q.arrow(a);
            let mut r = Relation::zero(arrow.source, arrow.target);
            for p in q.paths_between(arrow.source, arrow.target) {
                if p.len() >= 2 && rng.gen_bool(0.6) {
                    r.add_term(p, small_scalar(rng, field));
                }
            }
            r
        })
        .collect();
    Derivation::new(q, field, images).unwrap()
}

/// Random ideal containing every bypass path, hence constricted.
pub fn random_constricted_ideal(rng: &mut Rng8, q: &Arc<Quiver>, field: Field) -> Ideal {
    let mut gens: Vec<Relation> = random_ideal(rng, q, field).generators().to_vec();
    for b in q.find_bypasses() {
        if b.path.len() >= 2 {
            gens.push(Relation::monomial(b.path.clone(), field.one()));
        }
    }
    Ideal::new(q.clone(), field, gens).unwrap()
}

/// Connected quiver without parallel arrows, so every bypass path has length at least two.
pub fn random_simple_quiver(rng: &mut Rng8, max_vertices: usize) -> Arc<Quiver> {
    loop {
        let q = random_quiver(rng, max_vertices);
        if q.find_bypasses().iter().all(|b| b.path.len() >= 2) {
            return q;
        }
    }
}
