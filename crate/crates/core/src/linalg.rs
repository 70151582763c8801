//! Dense linear algebra over a field and Smith normal form over the integers.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use crate::scalar::Scalar;

/// Reduced echelon basis of the row span, where each row's pivot is its
/// highest nonzero column, normalised to 1 and absent from every other row.
/// Rows come back sorted by pivot.
pub fn echelon(rows: Vec<Vec<Scalar>>, width: usize) -> Vec<Vec<Scalar>> {
    let mut rows: Vec<Vec<Scalar>> = rows.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for col in (0..width).rev() {
        let Some(found) = (next..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(next, found);
        let inv = rows[next][col].inverse().unwrap();
        for x in rows[next].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[next].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != next && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x = &*x - &(&f * p);
                    }
                }
            }
        }
        pivots.push((col, next));
        next += 1;
    }
    rows.truncate(next);
    let mut out: Vec<(usize, Vec<Scalar>)> = pivots.into_iter().map(|(c, i)| (c, rows[i].clone())).collect();
    out.sort_by_key(|(c, _)| *c);
    out.into_iter().map(|(_, r)| r).collect()
}

/// Pivot column of an echelon row.
pub fn pivot(row: &[Scalar]) -> Option<usize> {
    row.iter().rposition(|x| !x.is_zero())
}

/// Reduces `v` against an echelon basis; the result is zero iff `v` lies in the span.
pub fn reduce(v: &[Scalar], basis: &[Vec<Scalar>]) -> Vec<Scalar> {
    let mut v = v.to_vec();
    for row in basis.iter().rev() {
        let p = pivot(row).expect("zero row in echelon basis");
        if !v[p].is_zero() {
            let f = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = &*x - &(&f * r);
                }
            }
        }
    }
    v
}

pub fn rank(rows: Vec<Vec<Scalar>>, width: usize) -> usize {
    echelon(rows, width).len()
}

/// Diagonal `d` and unimodular column transform `q` with `P * m * q = diag(d)`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub diagonal: Vec<BigInt>,
    pub column_transform: Vec<Vec<BigInt>>,
    pub cols: usize,
}

pub fn smith_normal_form(m: &[Vec<BigInt>], cols: usize) -> SmithForm {
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let rows = a.len();
    let mut q: Vec<Vec<BigInt>> =
        (0..cols).map(|i| (0..cols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();

    let col_op = |a: &mut Vec<Vec<BigInt>>, q: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, f: &BigInt| {
        for row in a.iter_mut() {
            let v = &row[src] * f;
            row[dst] -= v;
        }
        for row in q.iter_mut() {
            let v = &row[src] * f;
            row[dst] -= v;
        }
    };
    let col_swap = |a: &mut Vec<Vec<BigInt>>, q: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in q.iter_mut() {
            row.swap(i, j);
        }
    };

    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        col_swap(&mut a, &mut q, t, bj);
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let f = a[i][t].div_floor(&a[t][t]);
                    let pivot_row = a[t].clone();
                    for (x, p) in a[i].iter_mut().zip(&pivot_row) {
                        *x -= p * &f;
                    }
                    if !a[i][t].is_zero() {
                        a.swap(t, i);
                        changed = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let f = a[t][j].div_floor(&a[t][t]);
                    col_op(&mut a, &mut q, j, t, &f);
                    if !a[t][j].is_zero() {
                        col_swap(&mut a, &mut q, t, j);
                        changed = true;
                    }
                }
            }
            if changed {
                continue;
            }
            // divisibility of the remaining block
            let piv = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &piv).is_zero()));
            match bad {
                Some(i) => {
                    let row = a[i].clone();
                    for (x, r) in a[t].iter_mut().zip(&row) {
                        *x += r;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
        }
        diagonal.push(a[t][t].clone());
        t += 1;
    }
    SmithForm { diagonal, column_transform: q, cols }
}

impl SmithForm {
    /// Coordinates of a row vector in the diagonal basis, reduced modulo the
    /// invariant factors. Zero iff the vector lies in the row lattice.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.cols];
        for (j, o) in out.iter_mut().enumerate() {
            let mut s = BigInt::zero();
            for (i, x) in v.iter().enumerate() {
                s += x * &self.column_transform[i][j];
            }
            *o = s;
        }
        for (o, d) in out.iter_mut().zip(&self.diagonal) {
            *o = o.mod_floor(d);
        }
        out
    }

    /// Coordinates in the diagonal basis before reduction.
    pub fn transform(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.cols)
            .map(|j| v.iter().enumerate().map(|(i, x)| x * &self.column_transform[i][j]).sum())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    pub fn free_rank(&self) -> usize {
        self.cols - self.diagonal.len()
    }

    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

/// Invariants `(free rank, torsion)` of `super_lattice / sub_lattice`, both given by generators in `Z^n`.
pub fn lattice_quotient(sub: &[Vec<BigInt>], sup: &[Vec<BigInt>], n: usize) -> (usize, Vec<BigInt>) {
    let snf = smith_normal_form(sup, n);
    let r = snf.rank();
    let coords: Vec<Vec<BigInt>> = sub
        .iter()
        .map(|v| {
            let t = snf.transform(v);
            (0..r).map(|i| t[i].div_floor(&snf.diagonal[i])).collect()
        })
        .collect();
    let inner = smith_normal_form(&coords, r);
    (r - inner.rank(), inner.torsion())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Field;

    fn ints(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn smith_of_small_matrices() {
        let s = smith_normal_form(&ints(&[&[2, 4], &[6, 8]]), 2);
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(4)]);
        let s = smith_normal_form(&ints(&[&[1, 1], &[1, -1]]), 2);
        assert_eq!(s.torsion(), vec![BigInt::from(2)]);
        assert_eq!(s.free_rank(), 0);
    }

    #[test]
    fn membership_via_smith() {
        let s = smith_normal_form(&ints(&[&[1, 1], &[1, -1]]), 2);
        assert!(s.reduce(&[BigInt::from(2), BigInt::from(0)]).iter().all(Zero::is_zero));
        assert!(!s.reduce(&[BigInt::from(1), BigInt::from(0)]).iter().all(Zero::is_zero));
    }

    #[test]
    fn quotient_of_lattices() {
        let (rank, torsion) = lattice_quotient(&ints(&[&[2, 0]]), &ints(&[&[1, 0], &[0, 1]]), 2);
        assert_eq!(rank, 1);
        assert_eq!(torsion, vec![BigInt::from(2)]);
    }

    #[test]
    fn echelon_pivots_are_highest() {
        let f = Field::Rational;
        let row = |v: &[i64]| v.iter().map(|&x| f.from_i64(x)).collect::<Vec<_>>();
        let e = echelon(vec![row(&[1, 2, 0]), row(&[1, 0, 1])], 3);
        assert_eq!(e.len(), 2);
        assert_eq!(pivot(&e[0]), Some(1));
        assert_eq!(pivot(&e[1]), Some(2));
        assert!(e[0][2].is_zero());
    }
}
