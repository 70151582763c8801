//! Bundled examples, compared against JSON snapshots in `data/golden`.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{Context, Result};
use bq_core::cover::{check_covering, is_galois, lift_automorphism, smash_product, universal_cover, FiniteGroup, Grading};
use bq_core::dsl::{parse_document, Document};
use bq_core::gamma::{check_lemma_3_3_chain, check_surjection, explore_gamma, find_sources, GammaOptions, Surjection};
use bq_core::homotopy::{Decision, HomotopyOptions, HomotopyRelation};
use bq_core::serial::{GammaDto, Pi1Dto};
use bq_core::transform::PathAutomorphism;
use bq_core::Ideal;
use serde_json::{json, Value};

const EXPLE1: &str = include_str!("../data/exple1.bq");
const TWOBYPASS: &str = include_str!("../data/twobypass.bq");

fn pi1(i: &Ideal) -> Result<Value> {
    let h = HomotopyRelation::from_ideal(Arc::new(i.clone()), 0, HomotopyOptions::default())?;
    Ok(serde_json::to_value(Pi1Dto::from(&h.abelianization()))?)
}

fn decide(i: &Ideal, u: &str, v: &str) -> Result<&'static str> {
    let q = i.quiver();
    let h = HomotopyRelation::from_ideal(Arc::new(i.clone()), 0, HomotopyOptions::default())?;
    Ok(match h.decide(&q.walk(u)?, &q.walk(v)?)? {
        Decision::Homotopic(_) => "Homotopic",
        Decision::NotHomotopic(_) => "NotHomotopic",
        Decision::Unknown => "Unknown",
    })
}

fn surjection(i0: &Ideal, i: &Ideal) -> Result<&'static str> {
    Ok(match check_surjection(i0, i, &HomotopyOptions::default())? {
        Surjection::Confirmed => "Confirmed",
        Surjection::Refuted { .. } => "Refuted",
        Surjection::Unknown { .. } => "Unknown",
    })
}

fn chain(i0: &Ideal, i: &Ideal) -> Result<Vec<String>> {
    let c = check_lemma_3_3_chain(i0, i, &GammaOptions::default())?;
    Ok(c.steps.iter().map(|t| t.label(i0.quiver())).collect())
}

fn cover_summary(cov: &bq_core::cover::CoverQuiver) -> Result<Value> {
    let report = check_covering(cov)?;
    let order = match is_galois(cov)? {
        bq_core::cover::Galois::Galois { order, .. } => Some(order),
        _ => None,
    };
    Ok(json!({
        "vertices": cov.vertex_count(),
        "arrows": cov.quiver.arrow_count(),
        "complete": cov.complete,
        "fiber_sizes": cov.fiber_sizes(),
        "violations": report.violations.len(),
        "galois_order": order,
    }))
}

fn exple1() -> Result<Value> {
    let doc = parse_document(EXPLE1)?;
    let (i, j) = (doc.ideal("I", None)?, doc.ideal("J", None)?);
    let q = i.quiver_arc().clone();
    let smash = smash_product(&i, &Grading { group: FiniteGroup::cyclic(2), degrees: vec![1, 0, 0, 0] })?;
    let cov = universal_cover(&i, 0, None, &HomotopyOptions::default())?;
    let (aq, field, images) = doc.automorphism_images("phi", None)?;
    debug_assert_eq!(aq.name(), q.name());
    let phi = PathAutomorphism::from_partial(&q, field, &images)?;
    let (_, lift) = lift_automorphism(&cov, &phi, &HomotopyOptions::default())?;
    Ok(json!({
        "pi1": { "I": pi1(&i)?, "J": pi1(&j)? },
        "a_vs_cb": { "I": decide(&i, "a", "c*b")?, "J": decide(&j, "a", "c*b")? },
        "gamma_J": GammaDto::from_gamma(&explore_gamma(&j, &GammaOptions::default())?),
        "surjection_I_J": surjection(&i, &j)?,
        "chain_I_J": chain(&i, &j)?,
        "cover_I": cover_summary(&cov)?,
        "smash_I_z2": cover_summary(&smash)?,
        "lift_phi": {
            "squares": lift.squares_checked,
            "violations": lift.violations.len(),
            "kernel_rank": lift.kernel.kernel_rank,
            "fiber_sizes": lift.fiber_sizes,
        },
    }))
}

fn twobypass(doc: &Document, characteristic: Option<u64>) -> Result<Value> {
    let ideals: Vec<Ideal> =
        ["I0", "I1", "I2"].iter().map(|n| doc.ideal(n, characteristic)).collect::<Result<_, _>>()?;
    let q = ideals[0].quiver();
    let g = explore_gamma(&ideals[1], &GammaOptions::default())?;
    let report = find_sources(&g);
    let mut pis = serde_json::Map::new();
    for (n, i) in ["I0", "I1", "I2"].iter().zip(&ideals) {
        pis.insert(n.to_string(), pi1(i)?);
    }
    Ok(json!({
        "pi1": pis,
        "gamma_I1": GammaDto::from_gamma(&g),
        "sources": report.sources.iter().map(|(_, i)| {
            i.minimal_relations().iter().map(|r| r.display(q).to_string()).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "warnings": report.warnings,
        "surjection_I0_I2": surjection(&ideals[0], &ideals[2])?,
        "cover_I0": cover_summary(&universal_cover(&ideals[0], 0, None, &HomotopyOptions::default())?)?,
    }))
}

fn examples() -> Vec<(&'static str, fn() -> Result<Value>)> {
    vec![
        ("exple1", exple1),
        ("twobypass", || twobypass(&parse_document(TWOBYPASS)?, None)),
        ("twobypass_f2", || twobypass(&parse_document(TWOBYPASS)?, Some(2))),
    ]
}

fn line_diff(expected: &str, actual: &str) -> Vec<String> {
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    let mut out = Vec::new();
    for k in 0..e.len().max(a.len()) {
        match (e.get(k), a.get(k)) {
            (Some(x), Some(y)) if x == y => {}
            (x, y) => {
                if let Some(x) = x {
                    out.push(format!("{:>5} - {x}", k + 1));
                }
                if let Some(y) = y {
                    out.push(format!("{:>5} + {y}", k + 1));
                }
            }
        }
    }
    out
}

pub fn run(data: Option<PathBuf>, bless: bool, as_json: bool) -> Result<u8> {
    let dir = data.unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("golden"));
    if bless {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut failed = 0;
    let mut results = serde_json::Map::new();
    for (name, build) in examples() {
        let actual = serde_json::to_string_pretty(&build().with_context(|| format!("example {name}"))?)? + "\n";
        let path = dir.join(format!("{name}.json"));
        let verdict = if bless {
            fs::write(&path, &actual).with_context(|| format!("writing {}", path.display()))?;
            "blessed"
        } else {
            let expected = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let diff = line_diff(&expected, &actual);
            if diff.is_empty() {
                "ok"
            } else {
                failed += 1;
                if !as_json {
                    for l in diff.iter().take(40) {
                        println!("{l}");
                    }
                }
                "differs"
            }
        };
        if !as_json {
            println!("{verdict:<8} {name}");
        }
        results.insert(name.to_string(), json!(verdict));
    }
    if as_json {
        println!("{}", serde_json::to_string(&results)?);
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
