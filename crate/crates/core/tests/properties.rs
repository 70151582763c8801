//! Randomized properties. Every case is generated from a seed, so failures
//! reproduce from the seed printed by proptest. `BQ_SEED=n` shifts the whole run.

mod common;

use std::sync::Arc;

use bq_core::cover::{
    check_covering, extend_by_rigidity, smash_product, universal_cover, CoverError, FiniteGroup, Grading,
};
use bq_core::gamma::{direct_successors, explore_gamma, GammaOptions};
use bq_core::homotopy::{
    presentation_for, relations_equal, HomotopyOptions, HomotopyRelation, PairStatus, RelationComparison,
    SpanningTree,
};
use bq_core::serial::IdealDto;
use bq_core::transform::{decompose_dt, exp_derivation, log_unipotent, recompose, PathAutomorphism, Transvection};
use bq_core::{ideals_equal, Field, Ideal, Path, Quiver};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn relation(ideal: &Ideal) -> HomotopyRelation {
    HomotopyRelation::from_ideal(Arc::new(ideal.clone()), 0, HomotopyOptions::default()).unwrap()
}

/// Fixed proptest stream, shifted by `BQ_SEED`.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(common::base_seed()),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn field_for(seed: u64) -> Field {
    match seed % 4 {
        0 => Field::Prime(3),
        1 => Field::Prime(5),
        _ => Field::Rational,
    }
}

fn pair_status(h: &HomotopyRelation, t: &Transvection) -> PairStatus {
    h.path_status(&Path::arrow(h.quiver(), t.bypass.arrow), &t.bypass.path)
}

fn joins_to(q: &Arc<Quiver>, finer: &HomotopyRelation, coarser: &HomotopyRelation, t: &Transvection) -> bool {
    let mut pairs = finer.generating_pairs().to_vec();
    pairs.push((Path::arrow(q, t.bypass.arrow), t.bypass.path.clone()));
    let joined = HomotopyRelation::from_pairs(q.clone(), 0, pairs, HomotopyOptions::default()).unwrap();
    relations_equal(&joined, coarser) == RelationComparison::Equal
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn decomposition_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let phi = common::random_automorphism(&mut r, &q, f, 6);
        let (d, ts) = decompose_dt(&phi).unwrap();
        prop_assert_eq!(recompose(&q, f, &d, &ts), phi);
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let nu = common::random_nilpotent_derivation(&mut r, &q, Field::Rational);
        let back = log_unipotent(&exp_derivation(&nu).unwrap()).unwrap();
        prop_assert_eq!(back, nu);
    }

    #[test]
    fn exp_inverts_log(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_simple_quiver(&mut r, 6);
        let mut phi = PathAutomorphism::identity(&q, Field::Rational);
        for _ in 0..r.gen_range(1..=4) {
            phi = common::random_transvection(&mut r, &q, Field::Rational).to_automorphism(&q).compose(&phi);
        }
        prop_assert_eq!(exp_derivation(&log_unipotent(&phi).unwrap()).unwrap(), phi);
    }

    #[test]
    fn transvection_trichotomy(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let t = common::random_transvection(&mut r, &q, f);
        let j = t.to_automorphism(&q).apply_ideal(&i).unwrap();
        let (hi, hj) = (relation(&i), relation(&j));
        prop_assert!(!hi.fingerprint().has_unknown() && !hj.fingerprint().has_unknown());
        match (pair_status(&hi, &t), pair_status(&hj, &t)) {
            (PairStatus::Homotopic, PairStatus::Homotopic) => {
                prop_assert_eq!(relations_equal(&hi, &hj), RelationComparison::Equal)
            }
            // the finer relation plus α ∼ u generates the coarser one, in either direction
            (PairStatus::NotHomotopic, PairStatus::Homotopic) => prop_assert!(joins_to(&q, &hi, &hj, &t)),
            (PairStatus::Homotopic, PairStatus::NotHomotopic) => prop_assert!(joins_to(&q, &hj, &hi, &t)),
            (PairStatus::NotHomotopic, PairStatus::NotHomotopic) => prop_assert!(ideals_equal(&i, &j).unwrap()),
            other => prop_assert!(false, "undecided pair {:?}", other),
        }
    }

    #[test]
    fn minimal_relations_survive_transvections(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let t = common::random_transvection(&mut r, &q, f);
        let phi = t.to_automorphism(&q);
        let j = phi.apply_ideal(&i).unwrap();
        if pair_status(&relation(&i), &t) != PairStatus::NotHomotopic {
            return Ok(());
        }
        for rel in i.minimal_relations() {
            // p ↦ p with α replaced by u, for the terms through α
            let swapped: Vec<(Path, Path)> = rel
                .terms()
                .filter(|(p, _)| p.contains_arrow(t.bypass.arrow))
                .map(|(p, _)| {
                    let k = p.arrows.iter().position(|&a| a == t.bypass.arrow).unwrap();
                    let mut arrows = p.arrows[..k].to_vec();
                    arrows.extend(&t.bypass.path.arrows);
                    arrows.extend(&p.arrows[k + 1..]);
                    (p.clone(), Path::from_arrows(&q, arrows).unwrap())
                })
                .collect();
            if swapped.iter().any(|(_, s)| rel.coefficient(s).is_some()) {
                continue;
            }
            let parts = j.decompose_minimal(&phi.apply(&rel)).unwrap();
            let found = parts.iter().any(|c| {
                rel.terms().all(|(p, l)| c.coefficient(p) == Some(l))
                    && c.terms().all(|(p, l)| {
                        rel.coefficient(p).is_some()
                            || swapped.iter().any(|(orig, s)| s == p && *l == rel.coefficient(orig).unwrap() * &t.tau)
                    })
            });
            prop_assert!(found, "{}", rel.display(&q));
        }
    }

    #[test]
    fn supports_collapse_when_bypass_is_homotopic(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let t = common::random_transvection(&mut r, &q, f);
        let hj = relation(&t.to_automorphism(&q).apply_ideal(&i).unwrap());
        if pair_status(&hj, &t) != PairStatus::Homotopic {
            return Ok(());
        }
        for rel in i.minimal_relations() {
            let support = rel.support();
            for v in &support {
                for w in &support {
                    prop_assert_eq!(hj.path_status(v, w), PairStatus::Homotopic);
                }
            }
        }
    }

    #[test]
    fn dilatations_preserve_homotopy(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let d = common::random_dilatation(&mut r, &q, f);
        let j = d.to_automorphism(&q, f).apply_ideal(&i).unwrap();
        let (hi, hj) = (relation(&i), relation(&j));
        prop_assert_eq!(hi.fingerprint().hash_hex(), hj.fingerprint().hash_hex());
        prop_assert_eq!(hi.abelianization(), hj.abelianization());
    }

    #[test]
    fn automorphisms_preserve_dimension(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let j = common::random_automorphism(&mut r, &q, f, 4).apply_ideal(&i).unwrap();
        prop_assert_eq!(i.total_dimension(), j.total_dimension());
        for g in j.generators() {
            prop_assert!(g.min_length().unwrap_or(2) >= 2);
        }
    }

    #[test]
    fn ideal_json_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let i = common::random_ideal(&mut r, &q, field_for(seed));
        let text = serde_json::to_string(&IdealDto::from_ideal(&i)).unwrap();
        let back = serde_json::from_str::<IdealDto>(&text).unwrap().to_ideal().unwrap();
        for (x, y) in q.hom_pairs() {
            prop_assert_eq!(i.groebner_basis(x, y), back.groebner_basis(x, y));
        }
        prop_assert_eq!(relation(&i).fingerprint().hash_hex(), relation(&back).fingerprint().hash_hex());
    }

    #[test]
    fn groebner_basis_is_canonical(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        // another spanning set: shuffled, rescaled, with redundant sums
        let mut gens = i.minimal_relations();
        if gens.len() >= 2 && (gens[0].source, gens[0].target) == (gens[1].source, gens[1].target) {
            let extra = gens[0].plus(&gens[1]);
            gens.push(extra);
        }
        let mut gens: Vec<_> = gens.iter().map(|g| g.scaled(&common::small_scalar(&mut r, f))).collect();
        gens.shuffle(&mut r);
        let again = Ideal::new(q.clone(), f, gens).unwrap();
        for (x, y) in q.hom_pairs() {
            prop_assert_eq!(i.groebner_basis(x, y), again.groebner_basis(x, y));
            prop_assert_eq!(i.dim_ideal(x, y) + i.dim_quotient(x, y), q.paths_between(x, y).len());
            for b in i.groebner_basis(x, y) {
                prop_assert_ne!(i.is_minimal(&b), Some(false));
            }
        }
    }

    #[test]
    fn homotopy_is_a_congruence(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let i = common::random_ideal(&mut r, &q, Field::Rational);
        let h = relation(&i);
        for e in &h.fingerprint().entries {
            for a in 0..e.paths.len() {
                for b in a + 1..e.paths.len() {
                    if e.status(a, b) != PairStatus::Homotopic {
                        continue;
                    }
                    for pre in q.paths_between(0, e.source).into_iter().chain([Path::trivial(e.source)]) {
                        for post in q.paths_between(e.target, q.vertex_count() - 1).into_iter().chain([Path::trivial(e.target)]) {
                            let u = pre.then(&e.paths[a]).unwrap().then(&post).unwrap();
                            let v = pre.then(&e.paths[b]).unwrap().then(&post).unwrap();
                            prop_assert_eq!(h.path_status(&u, &v), PairStatus::Homotopic);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn abelianization_ignores_spanning_tree(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let i = common::random_ideal(&mut r, &q, Field::Rational);
        let h = relation(&i);
        let mut order: Vec<usize> = (0..q.arrow_count()).collect();
        for _ in 0..3 {
            order.shuffle(&mut r);
            let base = r.gen_range(0..q.vertex_count());
            let tree = SpanningTree::with_arrow_order(&q, base, &order).unwrap();
            let p = presentation_for(&q, &tree, h.generating_pairs());
            prop_assert_eq!(p.abelianization(), h.abelianization());
        }
    }

    #[test]
    fn search_caps_never_disagree(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let i = Arc::new(common::random_ideal(&mut r, &q, Field::Rational));
        let small = HomotopyOptions { cap: Some(2), ..HomotopyOptions::default() };
        let hs = HomotopyRelation::from_ideal(i.clone(), 0, small).unwrap();
        let hl = HomotopyRelation::from_ideal(i, 0, HomotopyOptions::default()).unwrap();
        for (x, y) in q.hom_pairs() {
            let ps = q.paths_between(x, y);
            for a in 0..ps.len() {
                for b in a + 1..ps.len() {
                    let pair = (hs.path_status(&ps[a], &ps[b]), hl.path_status(&ps[a], &ps[b]));
                    prop_assert!(
                        !matches!(pair, (PairStatus::Homotopic, PairStatus::NotHomotopic) | (PairStatus::NotHomotopic, PairStatus::Homotopic)),
                        "{:?}", pair
                    );
                }
            }
        }
    }

    #[test]
    fn transvections_commute_without_double_bypasses(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let f = Field::Rational;
        let bypasses = q.find_bypasses();
        let mut all_commute = true;
        for b1 in &bypasses {
            for b2 in &bypasses {
                let t1 = Transvection { bypass: b1.clone(), tau: f.one() }.to_automorphism(&q);
                let t2 = Transvection { bypass: b2.clone(), tau: f.one() }.to_automorphism(&q);
                if t1.compose(&t2) != t2.compose(&t1) {
                    all_commute = false;
                }
            }
        }
        prop_assert_eq!(q.find_double_bypasses().is_empty(), all_commute);
    }

    #[test]
    fn constricted_ideals_are_rigid(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_simple_quiver(&mut r, 5);
        let f = field_for(seed);
        let i = common::random_constricted_ideal(&mut r, &q, f);
        prop_assert!(i.is_constricted());
        for b in q.find_bypasses() {
            let t = Transvection { bypass: b, tau: common::small_scalar(&mut r, f) };
            prop_assert!(ideals_equal(&i, &t.to_automorphism(&q).apply_ideal(&i).unwrap()).unwrap());
        }
    }

    #[test]
    fn repeated_case_c_fixes_the_ideal(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let mut cur = i.clone();
        let mut hcur = relation(&cur);
        for _ in 0..4 {
            let t = common::random_transvection(&mut r, &q, f);
            let next = t.to_automorphism(&q).apply_ideal(&cur).unwrap();
            let hnext = relation(&next);
            if pair_status(&hcur, &t) == PairStatus::NotHomotopic && pair_status(&hnext, &t) == PairStatus::NotHomotopic {
                cur = next;
                hcur = hnext;
            }
        }
        prop_assert!(ideals_equal(&i, &cur).unwrap());
    }

    #[test]
    fn scalar_field_axioms(seed in any::<u64>(), a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..7) {
        let f = field_for(seed);
        let divisor = f.from_i64(d);
        prop_assume!(!divisor.is_zero());
        let (x, y, z) = (&f.from_i64(a) / &divisor, f.from_i64(b), f.from_i64(c));
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if let Some(inv) = x.inverse() {
            prop_assert!((&x * &inv).is_one());
        } else {
            prop_assert!(x.is_zero());
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn gamma_invariants_on_random_ideals(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let f = field_for(seed);
        let i = common::random_ideal(&mut r, &q, f);
        let opts = GammaOptions::default();
        let g = explore_gamma(&i, &opts).unwrap();
        let broken = g.check_invariants(&opts.homotopy).unwrap();
        prop_assert!(broken.is_empty(), "{:?}", broken);
    }

    #[test]
    fn successors_strictly_coarsen(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let i = Arc::new(common::random_ideal(&mut r, &q, Field::Rational));
        let h = relation(&i);
        let probe = direct_successors(&i, &GammaOptions::default()).unwrap();
        for step in &probe.steps {
            let mut gained = false;
            for (e, s) in h.fingerprint().entries.iter().zip(&step.relation.fingerprint().entries) {
                for a in 0..e.paths.len() {
                    for b in a + 1..e.paths.len() {
                        match (e.status(a, b), s.status(a, b)) {
                            (PairStatus::Homotopic, other) => prop_assert_eq!(other, PairStatus::Homotopic),
                            (PairStatus::NotHomotopic, PairStatus::Homotopic) => gained = true,
                            _ => {}
                        }
                    }
                }
            }
            prop_assert!(gained);
        }
    }

    #[test]
    fn constricted_gamma_is_a_point(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_simple_quiver(&mut r, 5);
        let i = common::random_constricted_ideal(&mut r, &q, Field::Rational);
        let g = explore_gamma(&i, &GammaOptions::default()).unwrap();
        prop_assert_eq!((g.vertices.len(), g.edges.len()), (1, 0));
    }

    #[test]
    fn truncated_universal_covers_are_coverings(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let i = common::random_ideal(&mut r, &q, Field::Rational);
        let cov = universal_cover(&i, 0, Some(4), &HomotopyOptions::default()).unwrap();
        let report = check_covering(&cov).unwrap();
        prop_assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn rigidity_recovers_smash_action(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        let i = common::random_ideal(&mut r, &q, Field::Rational);
        let n = r.gen_range(2..=3);
        let grading = Grading { group: FiniteGroup::cyclic(n), degrees: (0..q.arrow_count()).map(|_| r.gen_range(0..n)).collect() };
        let cov = match smash_product(&i, &grading) {
            Ok(c) => c,
            Err(CoverError::NotHomogeneous(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(check_covering(&cov).unwrap().is_clean());
        for map in &cov.action.maps {
            let image = map[0].unwrap();
            let rigid = extend_by_rigidity(&cov, &cov, 0, image).unwrap();
            for (v, w) in rigid.iter().enumerate() {
                if let Some(w) = w {
                    prop_assert_eq!(Some(*w), map[v]);
                }
            }
        }
    }
}
