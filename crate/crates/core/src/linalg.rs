//! Small dense linear algebra over `Rational64`.

use num_rational::Rational64;
use num_traits::{One, Zero};

pub type Mat = Vec<Vec<Rational64>>;

pub fn from_int(m: &[Vec<i64>]) -> Mat {
    m.iter().map(|row| row.iter().map(|&x| Rational64::from_integer(x)).collect()).collect()
}

/// Row echelon reduction in place; returns the pivot columns.
fn echelon(a: &mut Mat) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in 0..cols {
                    let t = a[r][j] * f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &Mat) -> usize {
    let mut b = a.clone();
    echelon(&mut b).len()
}

#[cfg(test)]
pub fn det(a: &Mat) -> Rational64 {
    let n = a.len();
    let mut b = a.clone();
    let mut d = Rational64::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !b[i][c].is_zero()) else { return Rational64::zero() };
        if p != c {
            b.swap(p, c);
            d = -d;
        }
        d *= b[c][c];
        for i in c + 1..n {
            let f = b[i][c] / b[c][c];
            for j in c..n {
                let t = b[c][j] * f;
                b[i][j] -= t;
            }
        }
    }
    d
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational64::one() } else { Rational64::zero() }));
            r
        })
        .collect();
    let piv = echelon(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `x * a = b` for a row vector `x`, where the rows of `a` are
/// linearly independent; `None` if `b` is not in the row span.
pub fn solve_row_combination(a: &Mat, b: &[Rational64]) -> Option<Vec<Rational64>> {
    let k = a.len();
    let n = b.len();
    // Columns of the system are the rows of `a`; augment with `b`.
    let mut m: Mat = (0..n)
        .map(|j| {
            let mut r: Vec<Rational64> = (0..k).map(|i| a[i][j]).collect();
            r.push(b[j]);
            r
        })
        .collect();
    let piv = echelon(&mut m);
    if piv.contains(&k) {
        return None;
    }
    let mut x = vec![Rational64::zero(); k];
    for (row, &c) in piv.iter().enumerate() {
        x[c] = m[row][k];
    }
    Some(x)
}

pub fn mat_vec(a: &Mat, x: &[Rational64]) -> Vec<Rational64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}
