use std::sync::Arc;

use bq_core::cover::{
    check_covering, extend_by_rigidity, is_galois, lift_dilatation, lift_transvection, smash_product,
    theorem_b_pipeline, universal_cover, CoverQuiver, FiniteGroup, Galois, Grading,
};
use bq_core::dsl::parse_document;
use bq_core::gamma::GammaOptions;
use bq_core::homotopy::HomotopyOptions;
use bq_core::transform::{Dilatation, Transvection};
use bq_core::{Field, Ideal, Quiver};
use num::BigInt;

const EXPLE1: &str = include_str!("../../cli/data/exple1.bq");
const TWO: &str = include_str!("../../cli/data/twobypass.bq");

fn ideal(text: &str, name: &str) -> Ideal {
    parse_document(text).unwrap().ideal(name, None).unwrap()
}

#[test]
fn two_bypass_universal_cover() {
    let i0 = ideal(TWO, "I0");
    let cov = universal_cover(&i0, 0, None, &HomotopyOptions::default()).unwrap();
    assert!(cov.complete);
    assert_eq!(cov.vertex_count(), 10);
    assert!(cov.fiber_sizes().iter().all(|&n| n == 2));
    assert!(check_covering(&cov).unwrap().is_clean());
    assert!(matches!(is_galois(&cov).unwrap(), Galois::Galois { order: 2, .. }));
}

#[test]
fn deleting_an_arrow_breaks_local_bijectivity() {
    let i0 = ideal(TWO, "I0");
    let cov = universal_cover(&i0, 0, None, &HomotopyOptions::default()).unwrap();
    let broken = cov.without_arrow(0).unwrap();
    let report = check_covering(&broken).unwrap();
    let a = cov.quiver.arrow(0);
    for v in [a.source, a.target] {
        let name = cov.quiver.vertex_name(v);
        assert!(report.violations.iter().any(|m| m.contains(&format!(" at {name} "))), "{:?}", report.violations);
    }
}

#[test]
fn transvection_lift_on_exple1() {
    let i = ideal(EXPLE1, "I");
    let q = i.quiver_arc().clone();
    let opts = HomotopyOptions::default();
    let cov = universal_cover(&i, 0, Some(6), &opts).unwrap();
    let t = Transvection::new(&q, q.arrow_id("a").unwrap(), q.path("c*b").unwrap(), Field::Rational.from_i64(-1)).unwrap();
    let (target, psi) = lift_transvection(&cov, &t, &opts).unwrap();
    assert!(target.complete && target.vertex_count() == 4);
    assert!(psi.is_clean(), "{:?}", psi.violations);
    assert_eq!(psi.squares_checked, cov.quiver.arrow_count());
    assert!(psi.equivariance_checked > 0);
    assert_eq!((psi.kernel.kernel_rank, psi.kernel.kernel_torsion.len()), (1, 0));
}

#[test]
fn zero_transvection_lifts_to_identity() {
    let i0 = ideal(TWO, "I0");
    let q = i0.quiver_arc().clone();
    let opts = HomotopyOptions::default();
    let cov = universal_cover(&i0, 0, None, &opts).unwrap();
    let a = q.arrow_id("a").unwrap();
    let t = Transvection::new(&q, a, q.path("c*b").unwrap(), Field::Rational.zero()).unwrap();
    let (target, psi) = lift_transvection(&cov, &t, &opts).unwrap();
    assert_eq!(target.vertex_count(), 10);
    assert!(psi.is_clean());
    assert!(psi.fiber_sizes.keys().all(|&k| k == 1));
}

#[test]
fn two_bypass_lift_has_kernel_of_order_two() {
    let i0 = ideal(TWO, "I0");
    let q = i0.quiver_arc().clone();
    let opts = HomotopyOptions::default();
    let cov = universal_cover(&i0, 0, None, &opts).unwrap();
    let t = Transvection::new(&q, q.arrow_id("a").unwrap(), q.path("c*b").unwrap(), Field::Rational.one()).unwrap();
    let (target, psi) = lift_transvection(&cov, &t, &opts).unwrap();
    assert_eq!(target.vertex_count(), 5);
    assert!(psi.is_clean(), "{:?}", psi.violations);
    assert_eq!(psi.kernel.kernel_torsion, vec![BigInt::from(2)]);
    assert_eq!(psi.fiber_sizes.keys().copied().collect::<Vec<_>>(), vec![2]);
}

#[test]
fn dilatation_lift_is_equivariant() {
    let i0 = ideal(TWO, "I0");
    let q = i0.quiver_arc().clone();
    let f = Field::Rational;
    let opts = HomotopyOptions::default();
    let cov = universal_cover(&i0, 0, None, &opts).unwrap();
    let mut scales = vec![f.one(); q.arrow_count()];
    scales[q.arrow_id("a").unwrap()] = f.from_i64(2);
    let d = Dilatation::new(&q, scales).unwrap();
    let (_, psi) = lift_dilatation(&cov, &d, &opts).unwrap();
    assert!(psi.is_clean(), "{:?}", psi.violations);
    assert!(psi.equivariance_checked >= cov.vertex_count());
}

#[test]
fn pipeline_examples() {
    let opts = GammaOptions::default();
    let i = ideal(EXPLE1, "I");
    let j = ideal(EXPLE1, "J");
    // ℤ/2 smash product of I itself
    let smash = smash_product(&i, &Grading { group: FiniteGroup::cyclic(2), degrees: vec![1, 0, 0, 0] }).unwrap();
    let report = theorem_b_pipeline(&i, &smash, Some(6), &opts).unwrap();
    assert!(report.chain.is_empty());
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert_eq!(report.kernel_index, 2);
    // trivial-group smash product of J
    let trivial = smash_product(&j, &Grading { group: FiniteGroup::trivial(), degrees: vec![0; 4] }).unwrap();
    let report = theorem_b_pipeline(&i, &trivial, Some(6), &opts).unwrap();
    assert_eq!(report.chain.len(), 1);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
    assert_eq!(report.kernel_index, 1);
    assert_eq!(report.source_abelianization.rank, 1);
    // the universal cover of I0 over itself
    let i0 = ideal(TWO, "I0");
    let cov = universal_cover(&i0, 0, None, &opts.homotopy).unwrap();
    let report = theorem_b_pipeline(&i0, &cov, None, &opts).unwrap();
    assert_eq!(report.kernel_trivial, Some(true));
}

#[test]
fn non_regular_triple_cover() {
    // three parallel arrows, sheets permuted by (0 1) and (1 2)
    let q = Arc::new(Quiver::new("k3", &["1", "2"], &[("a", "1", "2"), ("b", "1", "2"), ("c", "1", "2")]).unwrap());
    let base = Arc::new(Ideal::new(q.clone(), Field::Rational, Vec::new()).unwrap());
    let perms = [[0, 1, 2], [1, 0, 2], [0, 2, 1]];
    let vnames: Vec<String> = (0..6).map(|v| format!("{}.{}", v / 3 + 1, v % 3)).collect();
    let mut arrows = Vec::new();
    let mut arrow_map = Vec::new();
    for (k, p) in perms.iter().enumerate() {
        for s in 0..3 {
            arrows.push((format!("{}{}", ["a", "b", "c"][k], s), vnames[s].clone(), vnames[3 + p[s]].clone()));
            arrow_map.push(k);
        }
    }
    let cq = Arc::new(Quiver::new("k3~", &vnames, &arrows).unwrap());
    let cov = CoverQuiver::new(base, cq, vec![0, 0, 0, 1, 1, 1], arrow_map).unwrap();
    assert!(cov.quiver.is_connected());
    assert!(check_covering(&cov).unwrap().is_clean());
    assert!(matches!(is_galois(&cov).unwrap(), Galois::NotGalois { .. }));
}

#[test]
fn composed_smash_products_cover_the_base() {
    let i = ideal(EXPLE1, "I");
    let z2 = || FiniteGroup::cyclic(2);
    let inner = smash_product(&i, &Grading { group: z2(), degrees: vec![1, 0, 0, 0] }).unwrap();
    // grade the 8-vertex cover again by one copy of c, which lies on its only cycle
    let first_c = inner.arrow_map.iter().position(|&a| a == 2).unwrap();
    let degrees = (0..inner.arrow_map.len()).map(|k| usize::from(k == first_c)).collect();
    let outer = smash_product(&inner.ideal, &Grading { group: z2(), degrees }).unwrap();
    let composite = inner.compose(&outer).unwrap();
    assert_eq!(composite.vertex_count(), 16);
    assert!(composite.quiver.is_connected());
    assert!(check_covering(&composite).unwrap().is_clean());
    // factoring the composite back through the inner cover
    let map = extend_by_rigidity(&composite, &inner, 0, 0).unwrap();
    let f: Vec<usize> = map.into_iter().map(Option::unwrap).collect();
    let arrow_map: Vec<usize> = composite
        .quiver
        .arrows()
        .iter()
        .enumerate()
        .map(|(k, a)| inner.lift_out(f[a.source], composite.arrow_map[k]).unwrap())
        .collect();
    let factor = CoverQuiver::new(inner.ideal.clone(), composite.quiver.clone(), f, arrow_map).unwrap();
    assert!(check_covering(&factor).unwrap().is_clean());
}
