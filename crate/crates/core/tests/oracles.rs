//! Checks against brute-force computations written independently of the library.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use bq_core::group::{GenLetter, GroupPresentation};
use bq_core::homotopy::{HomotopyOptions, HomotopyRelation, PairStatus};
use bq_core::ideal::Relation;
use bq_core::{Field, Ideal, Path, Quiver};
use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use rand::Rng;

/// Arrow sequences of all paths of length at least one, by depth-first search.
fn dfs_paths(q: &Quiver) -> Vec<Vec<usize>> {
    fn go(q: &Quiver, at: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for (i, a) in q.arrows().iter().enumerate() {
            if a.source == at {
                cur.push(i);
                out.push(cur.clone());
                go(q, a.target, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for v in 0..q.vertex_count() {
        go(q, v, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

#[test]
fn path_enumeration_matches_dfs() {
    for seed in 0..60 {
        let q = common::random_quiver(&mut common::rng(seed), 6);
        let mut mine: Vec<Vec<usize>> =
            q.enumerate_paths().iter().filter(|p| !p.is_trivial()).map(|p| p.arrows.clone()).collect();
        mine.sort();
        assert_eq!(mine, dfs_paths(&q), "seed {seed}");
    }
}

fn end_of(q: &Quiver, arrows: &[usize], start: usize) -> usize {
    arrows.last().map_or(start, |&a| q.arrow(a).target)
}

/// Rank of a set of rational vectors by plain Gaussian elimination.
fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &rows[rank][col];
                for c in 0..width {
                    let d = &f * &rows[rank][c];
                    rows[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Span of `v·g·w` over all generators and paths, per hom-pair, as coordinate vectors.
fn ideal_span(q: &Quiver, gens: &[Relation]) -> HashMap<(usize, usize), (Vec<Vec<usize>>, Vec<Vec<BigRational>>)> {
    let all = dfs_paths(q);
    let mut paths_by_pair: BTreeMap<(usize, usize), Vec<Vec<usize>>> = BTreeMap::new();
    for p in &all {
        let s = q.arrow(p[0]).source;
        let t = end_of(q, p, s);
        paths_by_pair.entry((s, t)).or_default().push(p.clone());
    }
    let mut out: HashMap<(usize, usize), (Vec<Vec<usize>>, Vec<Vec<BigRational>>)> = HashMap::new();
    for (k, ps) in &paths_by_pair {
        out.insert(*k, (ps.clone(), Vec::new()));
    }
    // prefixes end at the generator source, suffixes start at its target
    let with_trivial = |v: usize| -> Vec<Vec<usize>> {
        let mut ps = vec![Vec::new()];
        ps.extend(all.iter().filter(|p| q.arrow(p[0]).source == v).cloned());
        ps
    };
    let ending_at = |v: usize| -> Vec<Vec<usize>> {
        let mut ps = vec![Vec::new()];
        ps.extend(all.iter().filter(|p| end_of(q, p, 0) == v).cloned());
        ps
    };
    for g in gens {
        for pre in ending_at(g.source) {
            for post in with_trivial(g.target) {
                let s = pre.first().map_or(g.source, |&a| q.arrow(a).source);
                let t = post.last().map_or(g.target, |&a| q.arrow(a).target);
                let (paths, rows) = out.get_mut(&(s, t)).unwrap();
                let mut row = vec![BigRational::zero(); paths.len()];
                for (p, c) in g.terms() {
                    let mut arrows = pre.clone();
                    arrows.extend(&p.arrows);
                    arrows.extend(&post);
                    let i = paths.iter().position(|x| *x == arrows).unwrap();
                    row[i] += c.as_rational().unwrap().clone();
                }
                rows.push(row);
            }
        }
    }
    out
}

#[test]
fn ideal_dimensions_match_span_oracle() {
    for seed in 0..80 {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 6);
        let ideal = common::random_ideal(&mut r, &q, Field::Rational);
        let span = ideal_span(&q, ideal.generators());
        for ((x, y), (paths, rows)) in &span {
            let rank = rational_rank(rows.clone());
            assert_eq!(ideal.dim_ideal(*x, *y), rank, "seed {seed} pair {x}->{y}");
            // a random path combination lies in the ideal iff adding it keeps the rank
            let f = Field::Rational;
            let mut rel = Relation::zero(*x, *y);
            let mut row = vec![BigRational::zero(); paths.len()];
            for (i, p) in paths.iter().enumerate() {
                if r.gen_bool(0.5) {
                    let c = r.gen_range(-2i64..=2);
                    if c != 0 {
                        rel.add_term(Path::from_arrows(&q, p.clone()).unwrap(), f.from_i64(c));
                        row[i] = BigRational::from_integer(BigInt::from(c));
                    }
                }
            }
            let mut extended = rows.clone();
            extended.push(row);
            assert_eq!(ideal.contains(&rel), rational_rank(extended) == rank, "seed {seed}");
        }
    }
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    let mut acc = BigInt::zero();
    for (j, x) in m[0].iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect()).collect();
        let term = x * det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n)).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect()
}

/// Invariant factors from determinantal divisors: `d_k` is the gcd of the `k×k` minors.
fn determinantal_invariants(m: &[Vec<BigInt>], n: usize) -> (usize, Vec<u64>) {
    let mut divisors = vec![BigInt::one()];
    for k in 1..=n.min(m.len()) {
        let mut g = BigInt::zero();
        for rows in subsets(m.len(), k) {
            for cols in subsets(n, k) {
                let sub: Vec<Vec<BigInt>> = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect()).collect();
                g = g.gcd(&det(&sub));
            }
        }
        if g.is_zero() {
            break;
        }
        divisors.push(g);
    }
    let rank = divisors.len() - 1;
    let torsion = (1..divisors.len())
        .map(|k| (&divisors[k] / &divisors[k - 1]).abs())
        .filter(|d| !d.is_one())
        .map(|d| u64::try_from(d).unwrap())
        .collect();
    (n - rank, torsion)
}

#[test]
fn abelianization_matches_determinantal_divisors() {
    let mut r = common::rng(7);
    for _ in 0..200 {
        let n = r.gen_range(1..=3);
        let rels = r.gen_range(0..=3);
        let mut relators = Vec::new();
        let mut matrix = Vec::new();
        for _ in 0..rels {
            let mut word = Vec::new();
            let mut row = vec![BigInt::zero(); n];
            for _ in 0..r.gen_range(1..=6) {
                let g = r.gen_range(0..n);
                let inverse = r.gen_bool(0.4);
                word.push(GenLetter { generator: g, inverse });
                row[g] += if inverse { -1 } else { 1 };
            }
            relators.push(word);
            matrix.push(row);
        }
        let p = GroupPresentation { generators: (0..n).map(|i| format!("g{i}")).collect(), relators };
        let inv = p.abelianization();
        assert_eq!((inv.rank, inv.torsion.clone()), determinantal_invariants(&matrix, n), "{matrix:?}");
    }
}

#[test]
fn weight_gradings_separate_paths() {
    let mut checked = 0;
    for seed in 0..60 {
        let mut r = common::rng(seed);
        let q = common::random_quiver(&mut r, 5);
        if q.arrow_count() > 9 {
            continue;
        }
        let ideal = Arc::new(common::random_ideal(&mut r, &q, Field::Rational));
        let h = HomotopyRelation::from_ideal(ideal.clone(), 0, HomotopyOptions::default()).unwrap();
        for mask in 0u32..(1 << q.arrow_count()) {
            let weight = |p: &Path| p.arrows.iter().filter(|&&a| mask & (1 << a) != 0).count();
            let homogeneous = ideal.generators().iter().all(|g| {
                let ws: Vec<usize> = g.terms().map(|(p, _)| weight(p)).collect();
                ws.windows(2).all(|w| w[0] == w[1])
            });
            if !homogeneous {
                continue;
            }
            for (x, y) in q.hom_pairs() {
                let ps = q.paths_between(x, y);
                for i in 0..ps.len() {
                    for j in i + 1..ps.len() {
                        if weight(&ps[i]) != weight(&ps[j]) {
                            checked += 1;
                            assert_eq!(h.path_status(&ps[i], &ps[j]), PairStatus::NotHomotopic, "seed {seed}");
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 0);
}

fn find(parent: &mut Vec<usize>, x: usize) -> usize {
    if parent[x] != x {
        let r = find(parent, parent[x]);
        parent[x] = r;
    }
    parent[x]
}

#[test]
fn binomial_congruence_is_contained_in_homotopy() {
    let mut checked = 0;
    for seed in 0..80 {
        let mut r = common::rng(1000 + seed);
        let q = common::random_quiver(&mut r, 6);
        let f = Field::Rational;
        // binomials p - q between parallel paths of length at least two
        let pairs: Vec<(Path, Path)> = q
            .hom_pairs()
            .into_iter()
            .flat_map(|(x, y)| {
                let ps: Vec<Path> = q.paths_between(x, y).into_iter().filter(|p| p.len() >= 2).collect();
                let mut out = Vec::new();
                for i in 0..ps.len() {
                    for j in i + 1..ps.len() {
                        out.push((ps[i].clone(), ps[j].clone()));
                    }
                }
                out
            })
            .filter(|_| r.gen_bool(0.5))
            .collect();
        let gens: Vec<Relation> = pairs
            .iter()
            .map(|(a, b)| Relation::from_terms(a.source, a.target, vec![(a.clone(), f.one()), (b.clone(), -f.one())]).unwrap())
            .collect();
        let ideal = Arc::new(Ideal::new(q.clone(), f, gens.clone()).unwrap());
        let span = ideal_span(&q, &gens);
        let in_ideal = |p: &Path| {
            let (paths, rows) = &span[&(p.source, p.target)];
            let mut row = vec![BigRational::zero(); paths.len()];
            row[paths.iter().position(|x| *x == p.arrows).unwrap()] = BigRational::one();
            let mut ext = rows.clone();
            ext.push(row);
            rational_rank(ext) == rational_rank(rows.clone())
        };
        let all = dfs_paths(&q);
        let index: HashMap<Vec<usize>, usize> = all.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut parent: Vec<usize> = (0..all.len()).collect();
        for (a, b) in &pairs {
            if in_ideal(a) || in_ideal(b) {
                continue;
            }
            // close under concatenation on both sides
            for pre in std::iter::once(Vec::new()).chain(all.iter().filter(|p| end_of(&q, p, 0) == a.source).cloned()) {
                for post in std::iter::once(Vec::new()).chain(all.iter().filter(|p| q.arrow(p[0]).source == a.target).cloned()) {
                    let join = |m: &Path| [pre.clone(), m.arrows.clone(), post.clone()].concat();
                    let (i, j) = (index[&join(a)], index[&join(b)]);
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let h = HomotopyRelation::from_ideal(ideal, 0, HomotopyOptions::default()).unwrap();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                if find(&mut parent, i) == find(&mut parent, j) {
                    let (p, s) = (Path::from_arrows(&q, all[i].clone()).unwrap(), Path::from_arrows(&q, all[j].clone()).unwrap());
                    checked += 1;
                    assert_eq!(h.path_status(&p, &s), PairStatus::Homotopic, "seed {seed}");
                }
            }
        }
    }
    assert!(checked > 0);
}
