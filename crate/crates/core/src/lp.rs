//! Dense two-phase simplex over an ordered field, Bland's rule.
//!
//! Problems are given in standard form: minimize `c.x` subject to
//! `A x = b`, `x >= 0`. Over an exact scalar the solver is exact and
//! returns exact optimal duals, which the subdivision layer uses to read
//! off tight faces. Over `f64` it serves as a cheap prefilter; callers
//! must confirm any accepted answer exactly.

use crate::field::Scalar;
#[allow(unused_imports)]
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    /// Duals of the equality constraints, in input row order.
    pub y: Vec<S>,
    pub value: S,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<S> {
    Optimal(LpSolution<S>),
    Infeasible,
    Unbounded,
}

#[derive(Debug, thiserror::Error)]
#[error("simplex iteration limit reached")]
pub struct MaxIterations;

const ITER_CAP: usize = 50_000;

/// Minimize `c.x` s.t. `rows[i].0 . x = rows[i].1`, `x >= 0`.
pub fn solve_standard<S: Scalar>(
    ncols: usize,
    rows: &[(Vec<S>, S)],
    c: &[S],
) -> Result<LpOutcome<S>, MaxIterations> {
    let m = rows.len();
    debug_assert_eq!(c.len(), ncols);
    let width = ncols + m + 1; // structural | artificial | b
    let mut t: Vec<Vec<S>> = Vec::with_capacity(m);
    let mut row_sign: Vec<bool> = Vec::with_capacity(m); // true when row negated
    for (i, (a, b)) in rows.iter().enumerate() {
        debug_assert_eq!(a.len(), ncols);
        let neg = *b < S::zero();
        let mut row: Vec<S> = Vec::with_capacity(width);
        for v in a {
            row.push(if neg { -v.clone() } else { v.clone() });
        }
        for j in 0..m {
            row.push(if j == i { S::one() } else { S::zero() });
        }
        row.push(if neg { -b.clone() } else { b.clone() });
        t.push(row);
        row_sign.push(neg);
    }
    let mut basis: Vec<usize> = (ncols..ncols + m).collect();

    // Phase 1: minimize the sum of artificials. Objective row holds reduced
    // costs; with the artificial basis these are -(column sums) for
    // structural columns.
    let mut obj: Vec<S> = vec![S::zero(); width];
    for row in &t {
        for j in 0..width {
            obj[j] = obj[j].clone() - row[j].clone();
        }
    }
    for j in ncols..ncols + m {
        obj[j] = S::zero();
    }
    let mut iters = 0usize;
    pivot_loop(&mut t, &mut obj, &mut basis, ncols + m, &mut iters)?;
    let tol = S::tol();
    let phase1 = -obj[width - 1].clone();
    if phase1 > tol.clone() + tol.clone() {
        return Ok(LpOutcome::Infeasible);
    }

    // Phase 2: rebuild reduced costs for the real objective; artificial
    // columns are barred from entering.
    let mut obj2: Vec<S> = vec![S::zero(); width];
    for j in 0..ncols {
        obj2[j] = c[j].clone();
    }
    let basis_snapshot = basis.clone();
    for (i, &bi) in basis_snapshot.iter().enumerate() {
        let cb = if bi < ncols { c[bi].clone() } else { S::zero() };
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            obj2[j] = obj2[j].clone() - cb.clone() * t[i][j].clone();
        }
    }
    for j in ncols..ncols + m {
        // keep artificial reduced costs out of the entering choice
        if basis.contains(&j) {
            continue;
        }
        obj2[j] = S::one();
    }
    match pivot_loop(&mut t, &mut obj2, &mut basis, ncols, &mut iters)? {
        PivotEnd::Optimal => {}
        PivotEnd::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let mut x = vec![S::zero(); ncols];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < ncols {
            x[bi] = t[i][width - 1].clone();
        }
    }
    let mut value = S::zero();
    for j in 0..ncols {
        value = value + c[j].clone() * x[j].clone();
    }
    // Duals: for artificial column i, reduced cost is -y_i (cost 0 columns),
    // flipped back where the row was negated for b >= 0. Recompute the
    // reduced cost directly so barred columns are handled uniformly.
    let mut y = Vec::with_capacity(m);
    for i in 0..m {
        let col = ncols + i;
        let mut rc = S::zero();
        for (r, &bi) in basis.iter().enumerate() {
            let cb = if bi < ncols { c[bi].clone() } else { S::zero() };
            rc = rc + cb * t[r][col].clone();
        }
        y.push(if row_sign[i] { -rc } else { rc });
    }
    Ok(LpOutcome::Optimal(LpSolution { x, y, value }))
}

enum PivotEnd {
    Optimal,
    Unbounded,
}

fn pivot_loop<S: Scalar>(
    t: &mut [Vec<S>],
    obj: &mut [S],
    basis: &mut [usize],
    enter_limit: usize,
    iters: &mut usize,
) -> Result<PivotEnd, MaxIterations> {
    let m = t.len();
    if m == 0 {
        return Ok(PivotEnd::Optimal);
    }
    let width = t[0].len();
    let tol = S::tol();
    loop {
        *iters += 1;
        if *iters > ITER_CAP {
            return Err(MaxIterations);
        }
        // Bland: smallest eligible entering index.
        let Some(e) = (0..enter_limit).find(|&j| obj[j] < -tol.clone()) else {
            return Ok(PivotEnd::Optimal);
        };
        // Ratio test, ties broken by smallest basis index (Bland).
        let mut leave: Option<usize> = None;
        let mut best: Option<S> = None;
        for i in 0..m {
            if t[i][e] > tol.clone() {
                let ratio = t[i][width - 1].clone() / t[i][e].clone();
                let better = match &best {
                    None => true,
                    Some(b) => {
                        ratio < b.clone() - tol.clone()
                            || ((ratio.clone() - b.clone()).abs() <= tol.clone()
                                && basis[i] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            return Ok(PivotEnd::Unbounded);
        };
        // Pivot on (l, e).
        let inv = S::one() / t[l][e].clone();
        for j in 0..width {
            t[l][j] = t[l][j].clone() * inv.clone();
        }
        for i in 0..m {
            if i != l && !t[i][e].is_zero() {
                let f = t[i][e].clone();
                for j in 0..width {
                    t[i][j] = t[i][j].clone() - f.clone() * t[l][j].clone();
                }
            }
        }
        if !obj[e].is_zero() {
            let f = obj[e].clone();
            for j in 0..width {
                obj[j] = obj[j].clone() - f.clone() * t[l][j].clone();
            }
        }
        basis[l] = e;
    }
}

/// Is `p` in the convex hull of `points`? Exact feasibility LP.
pub fn in_convex_hull<S: Scalar>(p: &[S], points: &[Vec<S>]) -> bool {
    let n = p.len();
    let m = points.len();
    if m == 0 {
        return false;
    }
    let mut rows: Vec<(Vec<S>, S)> = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a: Vec<S> = points.iter().map(|q| q[i].clone()).collect();
        rows.push((a, p[i].clone()));
    }
    rows.push((vec![S::one(); m], S::one()));
    let c = vec![S::zero(); m];
    match solve_standard(m, &rows, &c) {
        Ok(LpOutcome::Optimal(_)) => true,
        Ok(_) => false,
        Err(_) => panic!("simplex iteration cap on exact hull membership"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;

    fn r(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    #[test]
    fn optimal_with_duals() {
        // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x2 + s2 = 3
        let rows = vec![
            (vec![r(1), r(1), r(1), r(0)], r(4)),
            (vec![r(0), r(1), r(0), r(1)], r(3)),
        ];
        let c = vec![r(-1), r(-2), r(0), r(0)];
        match solve_standard(4, &rows, &c).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.x[0], r(1));
                assert_eq!(sol.x[1], r(3));
                assert_eq!(sol.value, r(-7));
                // duals: y1 = -1, y2 = -1
                assert_eq!(sol.y, vec![r(-1), r(-1)]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // x1 = 1 and x1 = 2
        let rows = vec![(vec![r(1)], r(1)), (vec![r(1)], r(2))];
        let c = vec![r(0)];
        assert!(matches!(
            solve_standard(1, &rows, &c).unwrap(),
            LpOutcome::Infeasible
        ));
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 s.t. x1 - x2 = 0
        let rows = vec![(vec![r(1), r(-1)], r(0))];
        let c = vec![r(-1), r(0)];
        assert!(matches!(
            solve_standard(2, &rows, &c).unwrap(),
            LpOutcome::Unbounded
        ));
    }

    #[test]
    fn negative_rhs_handled() {
        // x1 - x2 = -3, x1 + x2 = 5 -> x = (1, 4)
        let rows = vec![
            (vec![r(1), r(-1)], r(-3)),
            (vec![r(1), r(1)], r(5)),
        ];
        let c = vec![r(1), r(1)];
        match solve_standard(2, &rows, &c).unwrap() {
            LpOutcome::Optimal(sol) => {
                assert_eq!(sol.x, vec![r(1), r(4)]);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn hull_membership() {
        let sq: Vec<Vec<Rat>> = vec![
            vec![r(0), r(0)],
            vec![r(2), r(0)],
            vec![r(0), r(2)],
            vec![r(2), r(2)],
        ];
        assert!(in_convex_hull(&[r(1), r(1)], &sq));
        assert!(in_convex_hull(&[r(2), r(2)], &sq));
        assert!(!in_convex_hull(&[r(3), r(1)], &sq));
    }
}
