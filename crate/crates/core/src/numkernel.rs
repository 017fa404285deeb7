//! Dense numeric kernel: LU factorization with full pivoting (column
//! pivoting with row interchanges), per-leading-block condition estimates,
//! two-tier linear solves with iterative refinement, and standard /
//! generalized eigendecomposition with per-pair residual checks.

use crate::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

const PIVOT_TINY: f64 = 1e-300;
const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Default condition threshold separating the fast and refined tiers.
pub const DEFAULT_COND_THRESHOLD: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct ConditionEstimate {
    pub kappa: f64,
}

impl ConditionEstimate {
    pub fn beyond(&self, threshold: f64) -> bool {
        !self.kappa.is_finite() || self.kappa > threshold
    }
}

/// LU factorization of the fully pivoted matrix: `a[row_perm[i]][col_perm[j]]`
/// carries the factors in place, L unit lower, U upper.
#[derive(Clone, Debug)]
pub struct LuFactor {
    pub n: usize,
    lu: DMatrix<f64>,
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    /// Achieved rank: elimination stops at the first negligible pivot.
    pub rank: usize,
    norm_a: f64,
}

/// LU with column pivoting (and row interchanges for stability). The pivot
/// order `col_perm` drives the constant-block selection in the solver.
pub fn lu_col_pivot(a: &DMatrix<f64>) -> LuFactor {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "lu_col_pivot requires a square matrix");
    let norm_a = inf_norm(a);
    let mut lu = a.clone();
    let mut row_perm: Vec<usize> = (0..n).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = n;
    for k in 0..n {
        // full pivot search in the trailing block
        let (mut pi, mut pj, mut pv) = (k, k, 0.0f64);
        for i in k..n {
            for j in k..n {
                let v = lu[(i, j)].abs();
                if v > pv {
                    (pi, pj, pv) = (i, j, v);
                }
            }
        }
        if pv <= PIVOT_TINY || pv <= f64::EPSILON * norm_a * 1e-2 {
            rank = k;
            break;
        }
        lu.swap_rows(k, pi);
        row_perm.swap(k, pi);
        lu.swap_columns(k, pj);
        col_perm.swap(k, pj);
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let m = lu[(i, k)] / piv;
            lu[(i, k)] = m;
            for j in k + 1..n {
                lu[(i, j)] -= m * lu[(k, j)];
            }
        }
    }
    LuFactor {
        n,
        lu,
        row_perm,
        col_perm,
        rank,
        norm_a,
    }
}

impl LuFactor {
    pub fn is_singular(&self) -> bool {
        self.rank < self.n
    }

    /// Solve the leading k x k block (in pivot order) for a rhs given in
    /// pivot order.
    fn solve_leading_vec(&self, k: usize, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for i in 0..k {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..k).rev() {
            for j in i + 1..k {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    /// Infinity-norm condition estimate of the leading k x k pivoted block,
    /// computed from the explicit inverse (desk-scale dimensions).
    pub fn kappa_leading(&self, k: usize) -> ConditionEstimate {
        if k == 0 {
            return ConditionEstimate { kappa: 1.0 };
        }
        if k > self.rank {
            return ConditionEstimate { kappa: f64::INFINITY };
        }
        // norm of the block itself (entries in pivot order)
        let mut norm_b = 0.0f64;
        for i in 0..k {
            let mut s = 0.0;
            for j in 0..k {
                // reconstruct block entry from factors: (LU)_{ij}
                let mut v = 0.0;
                for t in 0..=i.min(j) {
                    let l = if t == i { 1.0 } else { self.lu[(i, t)] };
                    v += l * self.lu[(t, j)];
                }
                s += v.abs();
            }
            norm_b = norm_b.max(s);
        }
        // ||B^{-1}||_inf as max row sum of the inverse
        let mut row_sums = vec![0.0f64; k];
        for j in 0..k {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            let x = self.solve_leading_vec(k, &e);
            for i in 0..k {
                row_sums[i] += x[i].abs();
            }
        }
        let norm_inv = row_sums.iter().cloned().fold(0.0, f64::max);
        ConditionEstimate {
            kappa: (norm_b * norm_inv).max(1.0),
        }
    }

    pub fn kappa(&self) -> ConditionEstimate {
        self.kappa_leading(self.n)
    }

    /// Solve A x = b for the full matrix in original coordinates.
    pub fn solve_vec(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if self.is_singular() {
            return Err(Error::Singular(format!(
                "factorization rank {} of {}",
                self.rank, self.n
            )));
        }
        let permuted: Vec<f64> = (0..self.n).map(|i| b[self.row_perm[i]]).collect();
        let y = self.solve_leading_vec(self.n, &permuted);
        let mut x = DVector::zeros(self.n);
        for j in 0..self.n {
            x[self.col_perm[j]] = y[j];
        }
        Ok(x)
    }
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Accuracy {
    Fast,
    Refined,
}

/// Tiered multi-rhs solve of A X = B. The refined tier runs iterative
/// refinement and reports a forward-error bound; the fast tier escalates
/// automatically when the condition estimate is beyond the threshold.
pub fn solve_tiered(
    a: &DMatrix<f64>,
    fact: &LuFactor,
    b: &DMatrix<f64>,
    accuracy: Accuracy,
    threshold: f64,
) -> Result<(DMatrix<f64>, Option<f64>)> {
    if fact.is_singular() {
        return Err(Error::Singular(format!(
            "solve_tiered: rank {} of {}",
            fact.rank, fact.n
        )));
    }
    let kappa = fact.kappa();
    let tier = if accuracy == Accuracy::Refined || kappa.beyond(threshold) {
        Accuracy::Refined
    } else {
        Accuracy::Fast
    };
    let n = fact.n;
    let mut x = DMatrix::zeros(n, b.ncols());
    let mut err_bound = 0.0f64;
    for c in 0..b.ncols() {
        let bc = DVector::from_column_slice(b.column(c).as_slice());
        let mut xc = fact.solve_vec(&bc)?;
        if tier == Accuracy::Refined {
            let mut best_res = f64::INFINITY;
            for _ in 0..5 {
                let r = &bc - a * &xc;
                let res = r.amax();
                if res >= best_res || res == 0.0 {
                    break;
                }
                best_res = res;
                let d = fact.solve_vec(&r)?;
                xc += d;
            }
            let r = &bc - a * &xc;
            let scale = fact.norm_a * xc.amax() + bc.amax();
            if scale > 0.0 {
                err_bound = err_bound.max(kappa.kappa * r.amax() / scale);
            }
        }
        x.set_column(c, &xc);
    }
    let bound = (tier == Accuracy::Refined).then_some(err_bound);
    Ok((x, bound))
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: DVector<C64>,
    pub residual: f64,
}

/// Eigenvalues through the real Schur form with a hard iteration cap.
/// The uncapped QR iteration can cycle indefinitely on defective
/// eigenvalue clusters, so on non-convergence retry on a copy with a
/// tiny random additive perturbation (well below the accuracy a
/// defective cluster admits in double precision).
fn capped_eigenvalues(c: &DMatrix<f64>) -> Result<DVector<C64>> {
    let norm_c = inf_norm(c).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5c0_0b1);
    for attempt in 0..4 {
        let m = if attempt == 0 {
            c.clone()
        } else {
            let eps = norm_c * 1e-14 * 10f64.powi(attempt - 1);
            c.map(|v| v + eps * (rng.gen::<f64>() - 0.5))
        };
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 100_000) {
            return Ok(schur.complex_eigenvalues());
        }
    }
    Err(Error::EigenConvergence)
}

/// All eigenpairs of a real square matrix: eigenvalues from the real Schur
/// form, eigenvectors recovered by complex inverse iteration, residuals
/// checked per pair and convergence failures surfaced.
pub fn eigen(c: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = c.nrows();
    assert_eq!(n, c.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    let norm_c = inf_norm(c).max(f64::MIN_POSITIVE);
    let values = capped_eigenvalues(c)?;
    let cc: DMatrix<C64> = c.map(|v| C64::new(v, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0x0e1_6e2);
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let lambda = values[idx];
        let mut best: Option<EigenPair> = None;
        'attempts: for attempt in 0..6 {
            // perturb the shift slightly so the shifted matrix is invertible
            let eps = norm_c * 1e-12 * (1 + attempt) as f64;
            let shift = lambda
                + C64::new(
                    eps * (rng.gen::<f64>() - 0.5),
                    eps * (rng.gen::<f64>() - 0.5) + eps,
                );
            let shifted = &cc - DMatrix::<C64>::identity(n, n) * shift;
            let lu = shifted.lu();
            let mut v: DVector<C64> = DVector::from_fn(n, |_, _| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            v /= C64::new(v.norm(), 0.0);
            for _ in 0..4 {
                let w = match lu.solve(&v) {
                    Some(w) => w,
                    None => continue 'attempts,
                };
                let nw = w.norm();
                if !nw.is_finite() || nw == 0.0 {
                    continue 'attempts;
                }
                v = w / C64::new(nw, 0.0);
                let residual = (&cc * &v - &v * lambda).norm();
                if residual <= EIGEN_RESIDUAL_TOL * norm_c {
                    best = Some(EigenPair {
                        value: lambda,
                        vector: v,
                        residual,
                    });
                    break 'attempts;
                }
                if best.as_ref().map_or(true, |b| residual < b.residual) {
                    best = Some(EigenPair {
                        value: lambda,
                        vector: v.clone(),
                        residual,
                    });
                }
            }
        }
        match best {
            Some(p) if p.residual <= EIGEN_RESIDUAL_TOL * norm_c => out.push(p),
            _ => return Err(Error::EigenConvergence),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GenEigenPair {
    /// Pencil beta*C0 + alpha*C1 is singular at this pair; the finite
    /// eigenvalue is alpha/beta, and beta == 0 marks an infinite one.
    pub alpha: C64,
    pub beta: C64,
    pub vector: DVector<C64>,
    pub residual: f64,
}

impl GenEigenPair {
    pub fn is_infinite(&self, tol: f64) -> bool {
        self.beta.norm() <= tol * self.alpha.norm().max(1.0)
    }

    pub fn eigenvalue(&self) -> C64 {
        self.alpha / self.beta
    }
}

/// Generalized eigenproblem for the linear pencil C0 + x*C1 via reduction
/// with a random shift: W = (C0 + s*C1)^{-1} C1 has eigenpairs (mu, v)
/// with mu*C0 + (mu*s - 1)*C1 singular on v, so x = s - 1/mu and mu ~ 0
/// marks an infinite eigenvalue.
pub fn generalized_eigen(c1: &DMatrix<f64>, c0: &DMatrix<f64>) -> Result<Vec<GenEigenPair>> {
    let n = c0.nrows();
    assert_eq!(c0.ncols(), n);
    assert_eq!(c1.nrows(), n);
    assert_eq!(c1.ncols(), n);
    let n0 = inf_norm(c0);
    let n1 = inf_norm(c1);
    if n0 == 0.0 && n1 == 0.0 {
        return Err(Error::Singular("identically zero pencil".into()));
    }
    let scale = if n1 > 0.0 { n0.max(1.0) / n1.max(1e-30) } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e2);
    for _ in 0..8 {
        let s = scale * (0.25 + 1.5 * rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let shifted = c0 + c1 * s;
        let fact = lu_col_pivot(&shifted);
        if fact.is_singular() || fact.kappa().beyond(1e12) {
            continue;
        }
        let (w, _) = solve_tiered(&shifted, &fact, c1, Accuracy::Refined, DEFAULT_COND_THRESHOLD)?;
        let pairs = eigen(&w)?;
        let mut out = Vec::with_capacity(n);
        let c0c: DMatrix<C64> = c0.map(|v| C64::new(v, 0.0));
        let c1c: DMatrix<C64> = c1.map(|v| C64::new(v, 0.0));
        for p in pairs {
            let mu = p.value;
            let (mut alpha, mut beta) = (mu * s - C64::new(1.0, 0.0), mu);
            // normalize (alpha, beta) to the unit circle
            let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
            if norm > 0.0 {
                alpha /= norm;
                beta /= norm;
            }
            let residual =
                (&c0c * &p.vector * beta + &c1c * &p.vector * alpha).norm();
            out.push(GenEigenPair {
                alpha,
                beta,
                vector: p.vector,
                residual,
            });
        }
        return Ok(out);
    }
    Err(Error::Singular(
        "pencil appears identically singular: no invertible shift found".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn identity_kappa_one() {
        let a = DMatrix::<f64>::identity(4, 4);
        let f = lu_col_pivot(&a);
        assert!((f.kappa().kappa - 1.0).abs() < 1e-12);
        assert_eq!(f.rank, 4);
    }

    #[test]
    fn diagonal_conditioning_flagged() {
        let a = mat(&[&[1.0, 0.0], &[0.0, 1e-12]]);
        let f = lu_col_pivot(&a);
        let k = f.kappa();
        assert!(k.kappa > 1e11 && k.kappa < 1e13);
        assert!(k.beyond(DEFAULT_COND_THRESHOLD));
    }

    #[test]
    fn factorization_residual_random_50() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = DMatrix::from_fn(50, 50, |_, _| 2.0 * rng.gen::<f64>() - 1.0);
        let f = lu_col_pivot(&a);
        assert_eq!(f.rank, 50);
        // reconstruct L*U and compare with the permuted A
        let n = 50;
        let mut l = DMatrix::<f64>::identity(n, n);
        let mut u = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i > j {
                    l[(i, j)] = f.lu[(i, j)];
                } else {
                    u[(i, j)] = f.lu[(i, j)];
                }
            }
        }
        let pa = DMatrix::from_fn(n, n, |i, j| a[(f.row_perm[i], f.col_perm[j])]);
        let err = inf_norm(&(&pa - &l * &u)) / inf_norm(&a);
        assert!(err <= 1e-12, "residual {}", err);
    }

    #[test]
    fn zero_pivot_reports_rank() {
        let a = mat(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let f = lu_col_pivot(&a);
        assert_eq!(f.rank, 1);
        assert!(f.is_singular());
        let b = DVector::from_column_slice(&[1.0, 1.0]);
        assert!(f.solve_vec(&b).is_err());
    }

    #[test]
    fn hilbert_refined_residual() {
        let n = 8;
        let a = DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        // right-hand side from a random moderate solution so the 1e-10
        // residual target is meaningful despite kappa(H_8) ~ 1e10
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x0 = DMatrix::from_fn(n, 1, |_, _| rng.gen::<f64>());
        let b = &a * &x0;
        let f = lu_col_pivot(&a);
        let (x, bound) = solve_tiered(&a, &f, &b, Accuracy::Refined, DEFAULT_COND_THRESHOLD).unwrap();
        assert!(bound.is_some());
        let r = &b - &a * &x;
        assert!(r.amax() <= 1e-10 * b.amax(), "residual {}", r.amax());
    }

    #[test]
    fn ill_conditioned_escalates_to_refined() {
        // Hilbert 10x10 has kappa far beyond 1e8: fast tier must escalate
        // (escalation is observable via the returned error bound).
        let n = 10;
        let a = DMatrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let b = DMatrix::from_fn(n, 1, |i, _| i as f64);
        let f = lu_col_pivot(&a);
        assert!(f.kappa().beyond(DEFAULT_COND_THRESHOLD));
        let (_, bound) = solve_tiered(&a, &f, &b, Accuracy::Fast, DEFAULT_COND_THRESHOLD).unwrap();
        assert!(bound.is_some());
    }

    #[test]
    fn eigen_diagonal() {
        let a = mat(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let pairs = eigen(&a).unwrap();
        let mut vals: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        for p in &pairs {
            assert!(p.residual <= 1e-8 * 3.0);
            assert!((p.vector.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_companion_quadratic() {
        // companion of y^2 - 3y + 2: roots 1 and 2
        let a = mat(&[&[0.0, -2.0], &[1.0, 3.0]]);
        let pairs = eigen(&a).unwrap();
        let mut vals: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-9);
        assert!((vals[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn eigen_triangular_diagonal_values() {
        let a = mat(&[
            &[4.0, 1.0, 2.0],
            &[0.0, -1.5, 3.0],
            &[0.0, 0.0, 0.25],
        ]);
        let pairs = eigen(&a).unwrap();
        let mut vals: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        vals.sort_by(f64::total_cmp);
        let mut expect = [4.0, -1.5, 0.25];
        expect.sort_by(f64::total_cmp);
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() <= 1e-12, "{} vs {}", v, e);
        }
    }

    #[test]
    fn generalized_reduces_to_standard_with_identity() {
        let c0 = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let c1 = DMatrix::<f64>::identity(2, 2);
        let pairs = generalized_eigen(&c1, &c0).unwrap();
        // pencil C0 + x*I singular at eigenvalues of -C0
        let mut got: Vec<f64> = pairs.iter().map(|p| p.eigenvalue().re).collect();
        got.sort_by(f64::total_cmp);
        let neg = -&c0;
        let mut expect: Vec<f64> = neg.complex_eigenvalues().iter().map(|v| v.re).collect();
        expect.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() <= 1e-8, "{} vs {}", g, e);
        }
    }

    #[test]
    fn generalized_finite_and_infinite() {
        let c1 = mat(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let c0 = DMatrix::<f64>::identity(2, 2);
        let pairs = generalized_eigen(&c1, &c0).unwrap();
        let infinite: Vec<_> = pairs.iter().filter(|p| p.is_infinite(1e-8)).collect();
        let finite: Vec<_> = pairs.iter().filter(|p| !p.is_infinite(1e-8)).collect();
        assert_eq!(infinite.len(), 1);
        assert_eq!(finite.len(), 1);
        assert!((finite[0].eigenvalue().re + 1.0).abs() <= 1e-9);
    }

    #[test]
    fn identically_zero_pencil_rejected() {
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(generalized_eigen(&z, &z).is_err());
    }
}
