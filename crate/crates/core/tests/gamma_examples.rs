use std::sync::Arc;

use bq_core::dsl::parse_document;
use bq_core::gamma::{check_lemma_3_3_chain, check_surjection, explore_gamma, find_sources, GammaOptions, Surjection};
use bq_core::homotopy::{HomotopyOptions, HomotopyRelation};
use bq_core::ideals_equal;

const TWO: &str = include_str!("../../cli/data/twobypass.bq");

fn invariants(i: &bq_core::Ideal) -> (usize, Vec<u64>) {
    let h = HomotopyRelation::from_ideal(Arc::new(i.clone()), 0, HomotopyOptions::default()).unwrap();
    let a = h.abelianization();
    (a.rank, a.torsion)
}

#[test]
fn two_bypass_over_rationals() {
    let doc = parse_document(TWO).unwrap();
    let (i0, i1, i2) = (doc.ideal("I0", None).unwrap(), doc.ideal("I1", None).unwrap(), doc.ideal("I2", None).unwrap());
    assert_eq!(invariants(&i0), (0, vec![2]));
    assert_eq!(invariants(&i1), (0, vec![]));
    assert_eq!(invariants(&i2), (0, vec![]));
    let opts = GammaOptions::default();
    let g = explore_gamma(&i2, &opts).unwrap();
    assert_eq!(g.vertices.len(), 2, "{:?}", g.diagnostics);
    assert_eq!(g.edges.len(), 1);
    assert_eq!(g.sources.len(), 1);
    assert!(ideals_equal(&g.vertices[g.sources[0]].ideal, &i0).unwrap());
    assert!(g.check_invariants(&opts.homotopy).unwrap().is_empty());
    let report = find_sources(&g);
    assert_eq!(report.sources.len(), 1);
    assert_eq!(check_surjection(&i0, &i1, &opts.homotopy).unwrap(), Surjection::Confirmed);
    let chain = check_lemma_3_3_chain(&i0, &i1, &opts).unwrap();
    let labels: Vec<String> = chain.steps.iter().map(|t| t.label(i0.quiver())).collect();
    assert_eq!(labels, vec!["phi(a,c*b,1)"]);
}

#[test]
fn two_bypass_over_f2() {
    let doc = parse_document(TWO).unwrap();
    let (i0, i1, i2) =
        (doc.ideal("I0", Some(2)).unwrap(), doc.ideal("I1", Some(2)).unwrap(), doc.ideal("I2", Some(2)).unwrap());
    let hand = parse_document(&format!("{TWO}\nideal H over twobypass(2) {{ rel d*a; rel f*e*a + d*c*b; }}"))
        .unwrap()
        .ideal("H", None)
        .unwrap();
    assert!(ideals_equal(&i2, &hand).unwrap());
    assert_eq!(invariants(&i0), (0, vec![2]));
    assert_eq!(invariants(&i1), (0, vec![]));
    assert_eq!(invariants(&i2).0, 1);
    let opts = GammaOptions::default();
    let g = explore_gamma(&i1, &opts).unwrap();
    assert_eq!(g.vertices.len(), 3, "{:?}", g.diagnostics);
    assert_eq!(g.edges.len(), 2);
    assert_eq!(g.sources.len(), 2);
    assert!(g.check_invariants(&opts.homotopy).unwrap().is_empty());
    assert_eq!(check_surjection(&i2, &i0, &opts.homotopy).unwrap(), Surjection::Confirmed);
}
