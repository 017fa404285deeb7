//! Dense elimination over an arbitrary field: rank, determinant, linear
//! solve, and a streaming row basis for independent-row selection.

use crate::field::Field;
#[allow(unused_imports)]
use num_traits::{One, Zero};

/// Rank of `mat` (consumed) by row echelon reduction.
pub fn rank<F: Field>(mut mat: Vec<Vec<F>>) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let cols = mat[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..mat.len()).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        let inv = F::one() / mat[r][c].clone();
        for j in c..cols {
            mat[r][j] = mat[r][j].clone() * inv.clone();
        }
        for i in 0..mat.len() {
            if i != r && !mat[i][c].is_zero() {
                let f = mat[i][c].clone();
                for j in c..cols {
                    mat[i][j] = mat[i][j].clone() - f.clone() * mat[r][j].clone();
                }
            }
        }
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    r
}

/// Determinant of a square matrix (consumed).
pub fn det<F: Field>(mut mat: Vec<Vec<F>>) -> F {
    let n = mat.len();
    let mut d = F::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !mat[i][c].is_zero()) else {
            return F::zero();
        };
        if p != c {
            mat.swap(c, p);
            d = -d;
        }
        let pivot = mat[c][c].clone();
        d = d * pivot.clone();
        for i in c + 1..n {
            if !mat[i][c].is_zero() {
                let f = mat[i][c].clone() / pivot.clone();
                for j in c..n {
                    mat[i][j] = mat[i][j].clone() - f.clone() * mat[c][j].clone();
                }
            }
        }
    }
    d
}

/// Solve `a x = b` for square `a`; `None` when singular.
pub fn solve<F: Field>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>> {
    let n = a.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        b.swap(c, p);
        let inv = F::one() / a[c][c].clone();
        for j in c..n {
            a[c][j] = a[c][j].clone() * inv.clone();
        }
        b[c] = b[c].clone() * inv;
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..n {
                    a[i][j] = a[i][j].clone() - f.clone() * a[c][j].clone();
                }
                b[i] = b[i].clone() - f * b[c].clone();
            }
        }
    }
    Some(b)
}

/// Incrementally maintained row space; rows are inserted iff independent of
/// the rows already kept.
pub struct RowBasis<F> {
    echelon: Vec<Vec<F>>,
    pivots: Vec<usize>,
    cols: usize,
}

impl<F: Field> RowBasis<F> {
    pub fn new(cols: usize) -> Self {
        RowBasis {
            echelon: Vec::new(),
            pivots: Vec::new(),
            cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon.len()
    }

    /// Reduce `row` against the basis; if a nonzero remainder survives, keep
    /// it and report `true`.
    pub fn try_insert(&mut self, mut row: Vec<F>) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        for (e, &p) in self.echelon.iter().zip(&self.pivots) {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for j in 0..self.cols {
                    row[j] = row[j].clone() - f.clone() * e[j].clone();
                }
            }
        }
        let Some(p) = (0..self.cols).find(|&j| !row[j].is_zero()) else {
            return false;
        };
        let inv = F::one() / row[p].clone();
        for v in row.iter_mut() {
            *v = v.clone() * inv.clone();
        }
        self.echelon.push(row);
        self.pivots.push(p);
        true
    }
}
