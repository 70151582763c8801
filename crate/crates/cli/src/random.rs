//! Seeded random bound quivers, written in the input language.

use anyhow::{bail, Result};
use bq_core::dsl::{ideal_to_dsl, parse_document, quiver_to_dsl};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NAMES: &str = "abcdefghijklmnopqrstuvwxyz";

/// Acyclic connected quiver on `vertices` vertices and an admissible ideal with
/// up to `relations` generators, each a combination of parallel paths of length at least 2.
pub fn document(seed: u64, vertices: usize, relations: usize, characteristic: u64) -> Result<String> {
    if !(2..=10).contains(&vertices) {
        bail!("--vertices must lie between 2 and 10");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arrows = Vec::new();
    for j in 1..vertices {
        arrows.push((rng.gen_range(0..j), j));
    }
    for j in 2..vertices {
        for i in 0..j - 1 {
            if arrows.len() < NAMES.len() && rng.gen_bool(0.3) {
                arrows.push((i, j));
            }
        }
    }
    arrows.sort();
    let name = format!("random{seed}");
    let mut text = format!("quiver {name} {{\n  vertices:");
    for v in 1..=vertices {
        text += &format!(" {v}");
    }
    text += ";\n";
    for (k, (i, j)) in arrows.iter().enumerate() {
        text += &format!("  arrow {}: {} -> {};\n", &NAMES[k..k + 1], i + 1, j + 1);
    }
    text += "}\n";
    let doc = parse_document(&text)?;
    let q = doc.quiver(&name)?;

    let long: Vec<_> = q.enumerate_paths().iter().filter(|p| p.len() >= 2).cloned().collect();
    let mut pairs: Vec<(usize, usize)> = long.iter().map(|p| (p.source, p.target)).collect();
    pairs.sort();
    pairs.dedup();
    let mut rels = Vec::new();
    for _ in 0..relations {
        let Some(&(x, y)) = pairs.choose(&mut rng) else { break };
        let mut rel = String::new();
        for p in long.iter().filter(|p| p.source == x && p.target == y) {
            if rel.is_empty() || rng.gen_bool(0.5) {
                let c: i64 = *[-3, -2, -1, 1, 2, 3].choose(&mut rng).unwrap();
                let sign = match (c < 0, rel.is_empty()) {
                    (true, true) => "-",
                    (true, false) => " - ",
                    (false, true) => "",
                    (false, false) => " + ",
                };
                rel += &format!("{sign}{}*{}", c.abs(), p.display(&q));
            }
        }
        rels.push(format!("  rel {rel};\n"));
    }
    text += &format!("ideal I over {name}({characteristic}) {{\n");
    for r in &rels {
        text += r;
    }
    text += "}\n";
    let doc = parse_document(&text)?;
    let ideal = doc.ideal("I", None)?;
    Ok(quiver_to_dsl(&q) + "\n" + &ideal_to_dsl("I", &ideal))
}
