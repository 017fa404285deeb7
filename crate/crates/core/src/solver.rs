//! End-to-end root finding: overconstrain the square input system (extra
//! u-polynomial or hidden variable), assemble the resultant matrix as a
//! matrix polynomial in x0, split off a well-conditioned constant block
//! and form the Schur complement, rank-balance, eigendecompose via a block
//! companion matrix or a matrix pencil, recover coordinates from the
//! eigenvectors, and classify candidates by residuals.

use crate::lattice::{ExponentVector, RatPoly, SparsePolynomial};
use crate::numkernel::{
    eigen, generalized_eigen, lu_col_pivot, solve_tiered, Accuracy, LuFactor, C64,
};
use crate::resultant::ResultantMatrix;
use crate::{Error, Rat, Result, Scalar};
use nalgebra::{DMatrix, DVector};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_ACCEPT_THRESHOLD: f64 = 1e-4;
const CLUSTER_TOL: f64 = 1e-6;
const REAL_TOL: f64 = 1e-8;
const NEWTON_ITERS: usize = 3;
const NEWTON_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Extra linear polynomial f0 = x0 + sum c_j x_j.
    UResultant,
    /// Hide variable k (0-based) in the coefficient field.
    Hidden(usize),
}

/// The square input system plus the overconstraining data: n+1 polynomials
/// whose coefficients live in Q[x0].
#[derive(Clone, Debug)]
pub struct OverconstrainedSystem {
    /// n+1 polynomials over Q[x0] in the visible variables, each scaled to
    /// unit max-norm (residual thresholds are calibrated to this scale).
    pub polys: Vec<SparsePolynomial<RatPoly>>,
    /// The original square system, unscaled.
    pub original: Vec<SparsePolynomial<Rat>>,
    pub mode: Mode,
    /// u-mode only: the coefficients c_1..c_n of f0.
    pub u_coeffs: Option<Vec<Rat>>,
}

impl OverconstrainedSystem {
    /// Number of visible (non-hidden) variables.
    pub fn nvars(&self) -> usize {
        self.polys[0].nvars()
    }
}

fn normalize_unit_max(f: SparsePolynomial<RatPoly>) -> SparsePolynomial<RatPoly> {
    let m = f
        .coeffs()
        .iter()
        .map(|c| c.max_abs())
        .max()
        .unwrap_or_else(Rat::zero);
    if m.is_zero() {
        return f;
    }
    let inv = m.recip();
    let terms = f
        .support()
        .points()
        .iter()
        .cloned()
        .zip(f.coeffs().iter().map(|c| c.scale(&inv)))
        .collect();
    SparsePolynomial::from_terms(terms).expect("scaling preserves nonzero terms")
}

/// Overconstrain a well-constrained system of n polynomials in n
/// variables, either with a random u-polynomial or by hiding variable k.
pub fn overconstrain(
    sys: &[SparsePolynomial<Rat>],
    mode: Mode,
    seed: u64,
    u_coeffs: Option<Vec<Rat>>,
) -> Result<OverconstrainedSystem> {
    let n = sys[0].nvars();
    if sys.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sys.len(),
        });
    }
    match mode {
        Mode::UResultant => {
            let coeffs = match u_coeffs {
                Some(c) => {
                    if c.len() != n || c.iter().any(|x| x.is_zero()) {
                        return Err(Error::Numeric(
                            "u-coefficients must be n nonzero rationals".into(),
                        ));
                    }
                    c
                }
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c0e);
                    (0..n)
                        .map(|_| {
                            let mut v = 0i64;
                            while v == 0 {
                                v = rng.gen_range(-99..=99);
                            }
                            Rat::from_i64(v)
                        })
                        .collect()
                }
            };
            let mut terms = vec![(ExponentVector::zeros(n), RatPoly::monomial(Rat::one(), 1))];
            for (j, c) in coeffs.iter().enumerate() {
                terms.push((ExponentVector::unit(n, j), RatPoly::constant(c.clone())));
            }
            let f0 = SparsePolynomial::from_terms(terms)?;
            let mut polys = vec![normalize_unit_max(f0)];
            for f in sys {
                let terms = f
                    .support()
                    .points()
                    .iter()
                    .cloned()
                    .zip(f.coeffs().iter().cloned().map(RatPoly::constant))
                    .collect();
                polys.push(normalize_unit_max(SparsePolynomial::from_terms(terms)?));
            }
            Ok(OverconstrainedSystem {
                polys,
                original: sys.to_vec(),
                mode,
                u_coeffs: Some(coeffs),
            })
        }
        Mode::Hidden(k) => {
            if k >= n {
                return Err(Error::Numeric(format!(
                    "hidden variable index {} out of range (n = {})",
                    k, n
                )));
            }
            let mut polys = Vec::with_capacity(n);
            for f in sys {
                let mut terms: Vec<(ExponentVector, RatPoly)> = Vec::new();
                for (e, c) in f.support().points().iter().zip(f.coeffs()) {
                    let dk = e[k];
                    if dk < 0 {
                        return Err(Error::Numeric(
                            "hidden variable must have nonnegative exponents".into(),
                        ));
                    }
                    let rest: Vec<i64> = (0..n).filter(|&t| t != k).map(|t| e[t]).collect();
                    terms.push((
                        ExponentVector::new(rest),
                        RatPoly::monomial(c.clone(), dk as usize),
                    ));
                }
                polys.push(normalize_unit_max(SparsePolynomial::from_terms(terms)?));
            }
            Ok(OverconstrainedSystem {
                polys,
                original: sys.to_vec(),
                mode,
                u_coeffs: None,
            })
        }
    }
}

/// Real matrix polynomial sum A_k x0^k, coefficient-major.
#[derive(Clone, Debug)]
pub struct MatrixPolynomial {
    pub coeffs: Vec<DMatrix<f64>>,
}

impl MatrixPolynomial {
    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|m| m.amax() != 0.0)
            .unwrap_or(0)
    }

    pub fn trim(mut self) -> Self {
        let d = self.degree();
        self.coeffs.truncate(d + 1);
        self
    }

    pub fn eval(&self, x: C64) -> DMatrix<C64> {
        let n = self.dim();
        let m = self.coeffs[0].ncols();
        let mut acc = DMatrix::<C64>::zeros(n, m);
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.map(|v| C64::new(v, 0.0));
        }
        acc
    }
}

/// Numeric matrix polynomial from the exact entries of a matrix over Q[x0].
pub fn assemble(m: &ResultantMatrix<RatPoly>) -> MatrixPolynomial {
    let d = m
        .entries
        .iter()
        .flatten()
        .map(|p| p.degree())
        .max()
        .unwrap_or(0);
    let rows = m.entries.len();
    let cols = m.cols.len();
    let coeffs = (0..=d)
        .map(|k| DMatrix::from_fn(rows, cols, |i, j| m.entries[i][j].coeff_f64(k)))
        .collect();
    MatrixPolynomial { coeffs }
}

/// Partitioned system: constant block M11 plus the Schur complement
/// A(x0) = M22 - M21 M11^{-1} M12 over the remaining columns.
pub struct SchurSystem {
    pub a: MatrixPolynomial,
    /// Column indices of A within the full column set.
    pub b_cols: Vec<usize>,
    /// Rows and columns of the constant block, in pivot order.
    pub m11_rows: Vec<usize>,
    pub m11_cols: Vec<usize>,
    pub m11: Option<(DMatrix<f64>, LuFactor)>,
    pub m12: Option<MatrixPolynomial>,
    pub whole: bool,
}

impl SchurSystem {
    pub fn block_dim(&self) -> usize {
        self.m11_rows.len()
    }
}

/// Greedily grow a square pivot block of the constant-column submatrix
/// while its condition number stays below the threshold.
fn grow_block(s: &DMatrix<f64>, threshold: f64) -> (Vec<usize>, Vec<usize>) {
    let (nr, nc) = (s.nrows(), s.ncols());
    let mut work = s.clone();
    let mut rows: Vec<usize> = (0..nr).collect();
    let mut cols: Vec<usize> = (0..nc).collect();
    let mut k = 0usize;
    let norm = (0..nr)
        .map(|i| (0..nc).map(|j| s[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    while k < nr.min(nc) {
        let (mut pi, mut pj, mut pv) = (k, k, 0.0f64);
        for i in k..nr {
            for j in k..nc {
                let v = work[(i, j)].abs();
                if v > pv {
                    (pi, pj, pv) = (i, j, v);
                }
            }
        }
        if pv <= f64::EPSILON * norm.max(1.0) {
            break;
        }
        work.swap_rows(k, pi);
        rows.swap(k, pi);
        work.swap_columns(k, pj);
        cols.swap(k, pj);
        // condition check on the candidate (k+1) x (k+1) block
        let block = DMatrix::from_fn(k + 1, k + 1, |i, j| s[(rows[i], cols[j])]);
        let f = lu_col_pivot(&block);
        if f.is_singular() || f.kappa().beyond(threshold) {
            break;
        }
        let piv = work[(k, k)];
        for i in k + 1..nr {
            let m = work[(i, k)] / piv;
            for j in k + 1..nc {
                work[(i, j)] -= m * work[(k, j)];
            }
        }
        k += 1;
    }
    (rows[..k].to_vec(), cols[..k].to_vec())
}

/// Partition the assembled matrix polynomial around its largest
/// well-conditioned constant block and form the Schur complement.
pub fn partition_and_schur(
    mx: &MatrixPolynomial,
    cond_threshold: f64,
    whole_matrix: bool,
) -> Result<SchurSystem> {
    let dim = mx.dim();
    let whole_system = |mx: &MatrixPolynomial| SchurSystem {
        a: mx.clone().trim(),
        b_cols: (0..dim).collect(),
        m11_rows: Vec::new(),
        m11_cols: Vec::new(),
        m11: None,
        m12: None,
        whole: true,
    };
    if whole_matrix {
        return Ok(whole_system(mx));
    }
    // constant columns: zero in every coefficient of positive degree
    let const_cols: Vec<usize> = (0..dim)
        .filter(|&j| mx.coeffs[1..].iter().all(|c| c.column(j).amax() == 0.0))
        .collect();
    if const_cols.is_empty() {
        return Ok(whole_system(mx));
    }
    let s = DMatrix::from_fn(dim, const_cols.len(), |i, j| mx.coeffs[0][(i, const_cols[j])]);
    let (rows, scols) = grow_block(&s, cond_threshold);
    let k = rows.len();
    if k == 0 {
        return Ok(whole_system(mx));
    }
    let m11_cols: Vec<usize> = scols.iter().map(|&j| const_cols[j]).collect();
    let other_rows: Vec<usize> = (0..dim).filter(|i| !rows.contains(i)).collect();
    let b_cols: Vec<usize> = (0..dim).filter(|j| !m11_cols.contains(j)).collect();
    let m11 = DMatrix::from_fn(k, k, |i, j| mx.coeffs[0][(rows[i], m11_cols[j])]);
    let fact = lu_col_pivot(&m11);
    if fact.is_singular() {
        return Ok(whole_system(mx));
    }
    let sub = |rs: &[usize], cs: &[usize]| MatrixPolynomial {
        coeffs: mx
            .coeffs
            .iter()
            .map(|c| DMatrix::from_fn(rs.len(), cs.len(), |i, j| c[(rs[i], cs[j])]))
            .collect(),
    };
    let m12 = sub(&rows, &b_cols);
    let m21 = DMatrix::from_fn(other_rows.len(), k, |i, j| {
        mx.coeffs[0][(other_rows[i], m11_cols[j])]
    });
    let m22 = sub(&other_rows, &b_cols);
    // X = M11^{-1} M12 coefficient-wise, then A = M22 - M21 X
    let mut a_coeffs = Vec::with_capacity(mx.coeffs.len());
    for (kk, m12k) in m12.coeffs.iter().enumerate() {
        let (x, _) = solve_tiered(&m11, &fact, m12k, Accuracy::Refined, cond_threshold)?;
        a_coeffs.push(&m22.coeffs[kk] - &m21 * &x);
    }
    let a = MatrixPolynomial { coeffs: a_coeffs }.trim();
    if a.degree() == 0 {
        // the x0-dependence was eliminated: the partition is unusable
        return Ok(whole_system(mx));
    }
    Ok(SchurSystem {
        a,
        b_cols,
        m11_rows: rows,
        m11_cols,
        m11: Some((m11, fact)),
        m12: Some(m12),
        whole: false,
    })
}

/// Moebius substitution x0 = (t1 y + t2)/(t3 y + t4) with denominators
/// cleared: A'(y) = (t3 y + t4)^d A((t1 y + t2)/(t3 y + t4)).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankBalanceTransform {
    pub t: [i64; 4],
}

impl RankBalanceTransform {
    pub const IDENTITY: RankBalanceTransform = RankBalanceTransform { t: [1, 0, 0, 1] };

    pub fn is_identity(&self) -> bool {
        self.t == [1, 0, 0, 1]
    }

    /// Map an eigenvalue of the transformed polynomial back to x0.
    pub fn map_back(&self, mu: C64) -> C64 {
        let [t1, t2, t3, t4] = self.t.map(|v| C64::new(v as f64, 0.0));
        (t1 * mu + t2) / (t3 * mu + t4)
    }

    /// True when mu maps to an infinite x0 value.
    pub fn maps_to_infinity(&self, mu: C64, scale: f64) -> bool {
        let [_, _, t3, t4] = self.t.map(|v| C64::new(v as f64, 0.0));
        (t3 * mu + t4).norm() <= 1e-10 * scale.max(1.0)
    }

    pub fn apply(&self, a: &MatrixPolynomial) -> MatrixPolynomial {
        let d = a.degree();
        let r = a.dim();
        let [t1, t2, t3, t4] = self.t.map(|v| v as f64);
        // (t1 y + t2)^m (t3 y + t4)^{d-m} expanded as polynomials in y
        let mut coeffs = vec![DMatrix::<f64>::zeros(r, a.coeffs[0].ncols()); d + 1];
        for (m, am) in a.coeffs.iter().enumerate().take(d + 1) {
            let poly = poly_mul(&binom_pow(t1, t2, m), &binom_pow(t3, t4, d - m));
            for (k, &c) in poly.iter().enumerate() {
                if c != 0.0 {
                    coeffs[k] += am * c;
                }
            }
        }
        MatrixPolynomial { coeffs }
    }
}

fn binom_pow(a: f64, b: f64, p: usize) -> Vec<f64> {
    // coefficients of (a y + b)^p in ascending powers of y
    let mut out = vec![1.0];
    for _ in 0..p {
        let mut next = vec![0.0; out.len() + 1];
        for (k, &c) in out.iter().enumerate() {
            next[k] += c * b;
            next[k + 1] += c * a;
        }
        out = next;
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub enum BalanceOutcome {
    /// Transform, transformed polynomial, condition of its leading matrix.
    Balanced(RankBalanceTransform, MatrixPolynomial, f64),
    /// Every tried transform leaves the leading coefficient numerically
    /// singular: use the pencil path.
    PencilNeeded,
}

/// Try the identity and `tries` random Moebius quadruples; keep the one
/// minimizing the condition number of the leading coefficient.
pub fn rank_balance(
    a: &MatrixPolynomial,
    tries: usize,
    cond_threshold: f64,
    seed: u64,
) -> BalanceOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba1a);
    let mut candidates = vec![RankBalanceTransform::IDENTITY];
    while candidates.len() < tries + 1 {
        let t: [i64; 4] = [
            rng.gen_range(-5..=5),
            rng.gen_range(-5..=5),
            rng.gen_range(-5..=5),
            rng.gen_range(-5..=5),
        ];
        if t[0] * t[3] - t[1] * t[2] != 0 {
            candidates.push(RankBalanceTransform { t });
        }
    }
    let mut best: Option<(RankBalanceTransform, MatrixPolynomial, f64)> = None;
    for tr in candidates {
        let ap = tr.apply(a).trim();
        if ap.degree() != a.degree() {
            continue;
        }
        let f = lu_col_pivot(&ap.coeffs[ap.degree()]);
        if f.is_singular() {
            continue;
        }
        let kappa = f.kappa().kappa;
        if best.as_ref().map_or(true, |(_, _, k)| kappa < *k) {
            best = Some((tr, ap, kappa));
        }
    }
    match best {
        Some((tr, ap, kappa)) if kappa <= cond_threshold => BalanceOutcome::Balanced(tr, ap, kappa),
        _ => BalanceOutcome::PencilNeeded,
    }
}

/// Block companion matrix of a matrix polynomial with invertible leading
/// coefficient; dimension r*d, monic reduction by linear solves.
pub fn companion(a: &MatrixPolynomial, cond_threshold: f64) -> Result<DMatrix<f64>> {
    let d = a.degree();
    let r = a.dim();
    assert!(d >= 1, "companion needs degree >= 1");
    let ad = &a.coeffs[d];
    let fact = lu_col_pivot(ad);
    if fact.is_singular() {
        return Err(Error::Singular("leading coefficient singular".into()));
    }
    // B_k = A_d^{-1} A_k via solves
    let mut b = Vec::with_capacity(d);
    for k in 0..d {
        let (x, _) = solve_tiered(ad, &fact, &a.coeffs[k], Accuracy::Refined, cond_threshold)?;
        b.push(x);
    }
    if d == 1 {
        return Ok(-&b[0]);
    }
    let n = r * d;
    let mut c = DMatrix::<f64>::zeros(n, n);
    for blk in 0..d - 1 {
        for i in 0..r {
            c[(blk * r + i, (blk + 1) * r + i)] = 1.0;
        }
    }
    for k in 0..d {
        for i in 0..r {
            for j in 0..r {
                c[((d - 1) * r + i, k * r + j)] = -b[k][(i, j)];
            }
        }
    }
    Ok(c)
}

/// First companion linearization of A(x): pencil C0 + x C1 with
/// C1 = blockdiag(I, ..., I, A_d), singular exactly at the eigenvalues.
pub fn pencil(a: &MatrixPolynomial) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = a.degree();
    let r = a.dim();
    if d == 1 {
        return (a.coeffs[1].clone(), a.coeffs[0].clone());
    }
    let n = r * d;
    let mut c1 = DMatrix::<f64>::zeros(n, n);
    let mut c0 = DMatrix::<f64>::zeros(n, n);
    for blk in 0..d - 1 {
        for i in 0..r {
            c1[(blk * r + i, blk * r + i)] = 1.0;
            c0[(blk * r + i, (blk + 1) * r + i)] = -1.0;
        }
    }
    for i in 0..r {
        for j in 0..r {
            c1[((d - 1) * r + i, (d - 1) * r + j)] = a.coeffs[d][(i, j)];
            for k in 0..d {
                c0[((d - 1) * r + i, k * r + j)] = a.coeffs[k][(i, j)];
            }
        }
    }
    (c1, c0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootStatus {
    Accepted,
    Rejected,
    Infinite,
    /// Eigenvalue in a cluster of size > 1: coordinates unreliable.
    Multiple,
}

#[derive(Clone, Debug)]
pub struct RootCandidate {
    /// Value of x0: the extra variable (u mode) or the hidden variable.
    pub x0: C64,
    /// Values of the visible variables, empty for infinite/multiple.
    pub coords: Vec<C64>,
    /// Max |f_i| over the n+1 scaled polynomials; NaN when not evaluated.
    pub residual: f64,
    pub status: RootStatus,
    pub real: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolvePath {
    Companion,
    Pencil,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub accept_threshold: f64,
    pub tries: usize,
    pub cond_threshold: f64,
    pub whole_matrix: bool,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            accept_threshold: DEFAULT_ACCEPT_THRESHOLD,
            tries: 3,
            cond_threshold: crate::numkernel::DEFAULT_COND_THRESHOLD,
            whole_matrix: false,
            seed: 1,
        }
    }
}

pub struct SolveReport {
    pub candidates: Vec<RootCandidate>,
    pub path: SolvePath,
    pub transform: RankBalanceTransform,
    pub dim_m: usize,
    pub dim_m11: usize,
    pub dim_a: usize,
    pub degree: usize,
}

/// Eigenvalue plus values of the column monomials of A on its kernel.
struct EigenCandidate {
    x0: C64,
    v1: Option<DVector<C64>>,
    infinite: bool,
}

/// Run the eigendecomposition stage and recover root candidates.
pub fn solve_roots(
    oc: &OverconstrainedSystem,
    m: &ResultantMatrix<RatPoly>,
    schur: &SchurSystem,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let a = &schur.a;
    let r = a.dim();
    let d = a.degree();
    let mut path = SolvePath::Companion;
    let mut transform = RankBalanceTransform::IDENTITY;
    let mut raw: Vec<EigenCandidate> = Vec::new();
    match rank_balance(a, opts.tries, opts.cond_threshold, opts.seed) {
        BalanceOutcome::Balanced(tr, ap, _) => {
            transform = tr;
            let c = companion(&ap, opts.cond_threshold)?;
            let scale = c.amax().max(1.0);
            for p in eigen(&c)? {
                let v1 = DVector::from_fn(r, |i, _| p.vector[i]);
                if tr.maps_to_infinity(p.value, scale) {
                    raw.push(EigenCandidate {
                        x0: C64::new(f64::INFINITY, 0.0),
                        v1: None,
                        infinite: true,
                    });
                } else {
                    raw.push(EigenCandidate {
                        x0: tr.map_back(p.value),
                        v1: Some(v1),
                        infinite: false,
                    });
                }
            }
        }
        BalanceOutcome::PencilNeeded => {
            path = SolvePath::Pencil;
            let (c1, c0) = pencil(a);
            for p in generalized_eigen(&c1, &c0)? {
                if p.is_infinite(1e-8) {
                    raw.push(EigenCandidate {
                        x0: C64::new(f64::INFINITY, 0.0),
                        v1: None,
                        infinite: true,
                    });
                } else {
                    let v1 = DVector::from_fn(r, |i, _| p.vector[i]);
                    raw.push(EigenCandidate {
                        x0: p.eigenvalue(),
                        v1: Some(v1),
                        infinite: false,
                    });
                }
            }
        }
    }
    let _ = d;
    // cluster finite eigenvalues; clusters of size > 1 are unreliable
    let finite: Vec<usize> = (0..raw.len()).filter(|&i| !raw[i].infinite).collect();
    let mut multiple = vec![false; raw.len()];
    for (ai, &i) in finite.iter().enumerate() {
        for &j in finite.iter().skip(ai + 1) {
            let (x, y) = (raw[i].x0, raw[j].x0);
            if (x - y).norm() <= CLUSTER_TOL * (1.0 + x.norm()) {
                multiple[i] = true;
                multiple[j] = true;
            }
        }
    }
    let mut candidates = Vec::with_capacity(raw.len());
    for (i, ec) in raw.iter().enumerate() {
        if ec.infinite {
            candidates.push(RootCandidate {
                x0: ec.x0,
                coords: Vec::new(),
                residual: f64::NAN,
                status: RootStatus::Infinite,
                real: true,
            });
            continue;
        }
        if multiple[i] {
            candidates.push(RootCandidate {
                x0: ec.x0,
                coords: Vec::new(),
                residual: f64::NAN,
                status: RootStatus::Multiple,
                real: is_real(ec.x0),
            });
            continue;
        }
        let cand = recover_candidate(oc, m, schur, ec.x0, ec.v1.as_ref().unwrap(), opts);
        candidates.push(cand);
    }
    Ok(SolveReport {
        candidates,
        path,
        transform,
        dim_m: m.dim(),
        dim_m11: schur.block_dim(),
        dim_a: r,
        degree: a.degree(),
    })
}

fn is_real(x: C64) -> bool {
    x.im.abs() <= REAL_TOL * (1.0 + x.re.abs())
}

/// Steps 3-7: back-substitute the full monomial-value vector, take ratios
/// of unit-difference pairs, evaluate residuals, refine and classify.
fn recover_candidate(
    oc: &OverconstrainedSystem,
    m: &ResultantMatrix<RatPoly>,
    schur: &SchurSystem,
    x0: C64,
    v1: &DVector<C64>,
    opts: &SolveOptions,
) -> RootCandidate {
    let dim = m.dim();
    let reject = |x0| RootCandidate {
        x0,
        coords: Vec::new(),
        residual: f64::NAN,
        status: RootStatus::Rejected,
        real: is_real(x0),
    };
    // full monomial-value vector over the column set
    let mut omega = vec![C64::new(0.0, 0.0); dim];
    for (t, &j) in schur.b_cols.iter().enumerate() {
        omega[j] = v1[t];
    }
    if !schur.whole {
        let (m11, fact) = schur.m11.as_ref().unwrap();
        let m12 = schur.m12.as_ref().unwrap();
        let rhs = -(m12.eval(x0) * v1);
        let re = DMatrix::from_fn(m11.nrows(), 1, |i, _| rhs[i].re);
        let im = DMatrix::from_fn(m11.nrows(), 1, |i, _| rhs[i].im);
        let sol_re = solve_tiered(m11, fact, &re, Accuracy::Refined, opts.cond_threshold);
        let sol_im = solve_tiered(m11, fact, &im, Accuracy::Refined, opts.cond_threshold);
        let (w_re, w_im) = match (sol_re, sol_im) {
            (Ok((a, _)), Ok((b, _))) => (a, b),
            _ => return reject(x0),
        };
        for (t, &j) in schur.m11_cols.iter().enumerate() {
            omega[j] = C64::new(w_re[(t, 0)], w_im[(t, 0)]);
        }
    }
    let nv = oc.nvars();
    let mut coords = Vec::with_capacity(nv);
    for t in 0..nv {
        match coordinate_from_ratios(&m.cols, &omega, t) {
            Some(v) => coords.push(v),
            None => return reject(x0),
        }
    }
    let mut cand = classify(oc, x0, coords, opts.accept_threshold);
    if cand.status == RootStatus::Accepted {
        cand = newton_refine(oc, cand, opts.accept_threshold);
    }
    cand
}

/// Ratio recovery for coordinate t: choose the unit-difference pair with
/// the largest-magnitude denominator entry, falling back to a rational
/// combination of affinely independent differences.
fn coordinate_from_ratios(
    cols: &[ExponentVector],
    omega: &[C64],
    t: usize,
) -> Option<C64> {
    let n = cols[0].len();
    let mut best: Option<(f64, C64)> = None;
    for (i, q1) in cols.iter().enumerate() {
        for (j, q2) in cols.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = q1 - q2;
            if (0..n).all(|s| diff[s] == if s == t { 1 } else { 0 }) {
                let den = omega[j].norm();
                if den > 0.0 && best.as_ref().map_or(true, |(b, _)| den > *b) {
                    best = Some((den, omega[i] / omega[j]));
                }
            }
        }
    }
    if let Some((_, v)) = best {
        return Some(v);
    }
    // no unit pair: express e_t rationally over a spanning set of column
    // differences and combine logarithms (branch errors are caught by the
    // residual filter downstream)
    let base = (0..cols.len()).max_by(|&i, &j| omega[i].norm().total_cmp(&omega[j].norm()))?;
    if omega[base].norm() == 0.0 {
        return None;
    }
    let mut diffs: Vec<(ExponentVector, C64)> = Vec::new();
    let mut basis = crate::linalg::RowBasis::<Rat>::new(n);
    for (i, q) in cols.iter().enumerate() {
        if i == base || omega[i].norm() == 0.0 {
            continue;
        }
        let d = q - &cols[base];
        let row: Vec<Rat> = (0..n).map(|s| Rat::from_i64(d[s])).collect();
        if basis.try_insert(row) {
            diffs.push((d, omega[i] / omega[base]));
        }
    }
    if diffs.len() < n {
        return None;
    }
    // solve sum_k c_k d_k = e_t over Q (transpose system)
    let a: Vec<Vec<Rat>> = (0..n)
        .map(|s| diffs.iter().map(|(d, _)| Rat::from_i64(d[s])).collect())
        .collect();
    let b: Vec<Rat> = (0..n)
        .map(|s| Rat::from_i64((s == t) as i64))
        .collect();
    let c = crate::linalg::solve(a, b)?;
    let mut log_sum = C64::new(0.0, 0.0);
    for (ck, (_, rho)) in c.iter().zip(&diffs) {
        if rho.norm() == 0.0 {
            return None;
        }
        log_sum += C64::new(ck.to_f64()?, 0.0) * rho.ln();
    }
    Some(log_sum.exp())
}

/// Residual evaluation over the n+1 scaled polynomials.
fn max_residual(oc: &OverconstrainedSystem, x0: C64, coords: &[C64]) -> Option<f64> {
    let mut worst = 0.0f64;
    for f in &oc.polys {
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in f.support().points().iter().zip(f.coeffs()) {
            acc += c.eval_complex(x0) * e.eval(coords)?;
        }
        worst = worst.max(acc.norm());
    }
    Some(worst)
}

fn classify(
    oc: &OverconstrainedSystem,
    x0: C64,
    coords: Vec<C64>,
    accept_threshold: f64,
) -> RootCandidate {
    let residual = max_residual(oc, x0, &coords).unwrap_or(f64::INFINITY);
    let real = is_real(x0) && coords.iter().all(|&c| is_real(c));
    RootCandidate {
        x0,
        coords,
        residual,
        status: if residual < accept_threshold {
            RootStatus::Accepted
        } else {
            RootStatus::Rejected
        },
        real,
    }
}

/// Newton iteration on the original square system; divergence demotes the
/// candidate to rejected.
fn newton_refine(
    oc: &OverconstrainedSystem,
    cand: RootCandidate,
    accept_threshold: f64,
) -> RootCandidate {
    let n = oc.original.len();
    // full variable vector of the original system
    let mut x: Vec<C64> = match oc.mode {
        Mode::UResultant => cand.coords.clone(),
        Mode::Hidden(k) => {
            let mut x = Vec::with_capacity(n);
            let mut it = cand.coords.iter();
            for t in 0..n {
                if t == k {
                    x.push(cand.x0);
                } else {
                    x.push(*it.next().unwrap());
                }
            }
            x
        }
    };
    let eval_sys = |x: &[C64]| -> Option<(DVector<C64>, f64)> {
        let mut vals = DVector::zeros(n);
        let mut worst = 0.0f64;
        for (i, f) in oc.original.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (e, c) in f.support().points().iter().zip(f.coeffs()) {
                acc += C64::new(c.to_f64()?, 0.0) * e.eval(x)?;
            }
            vals[i] = acc;
            worst = worst.max(acc.norm());
        }
        Some((vals, worst))
    };
    let Some((_, res0)) = eval_sys(&x) else {
        return cand;
    };
    let mut best_res = res0;
    let mut diverged = false;
    for _ in 0..NEWTON_ITERS {
        let Some((vals, res)) = eval_sys(&x) else {
            diverged = true;
            break;
        };
        if res <= NEWTON_TOL {
            break;
        }
        let mut jac = DMatrix::<C64>::zeros(n, n);
        for (i, f) in oc.original.iter().enumerate() {
            for (e, c) in f.support().points().iter().zip(f.coeffs()) {
                for j in 0..n {
                    if e[j] == 0 {
                        continue;
                    }
                    let mut shifted = e.clone();
                    shifted.0[j] -= 1;
                    if let (Some(cf), Some(mv)) = (c.to_f64(), shifted.eval(&x)) {
                        jac[(i, j)] += C64::new(cf * e[j] as f64, 0.0) * mv;
                    }
                }
            }
        }
        let Some(step) = jac.lu().solve(&vals) else {
            diverged = true;
            break;
        };
        for j in 0..n {
            x[j] -= step[j];
        }
        match eval_sys(&x) {
            Some((_, r2)) if r2 <= 10.0 * best_res.max(NEWTON_TOL) => {
                best_res = best_res.min(r2);
            }
            _ => {
                diverged = true;
                break;
            }
        }
    }
    let improved = x;
    if diverged {
        return RootCandidate {
            status: RootStatus::Rejected,
            ..cand
        };
    }
    // map refined variables back to (x0, coords)
    let (x0, coords) = match oc.mode {
        Mode::UResultant => {
            let u = oc.u_coeffs.as_ref().unwrap();
            let x0 = -(0..n).fold(C64::new(0.0, 0.0), |acc, j| {
                acc + C64::new(u[j].to_f64().unwrap_or(0.0), 0.0) * improved[j]
            });
            (x0, improved)
        }
        Mode::Hidden(k) => {
            let x0 = improved[k];
            let coords = improved
                .iter()
                .enumerate()
                .filter(|&(t, _)| t != k)
                .map(|(_, &v)| v)
                .collect();
            (x0, coords)
        }
    };
    let refined = classify(oc, x0, coords, accept_threshold);
    if refined.residual <= cand.residual || refined.status == RootStatus::Accepted {
        refined
    } else {
        RootCandidate {
            status: RootStatus::Rejected,
            ..cand
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resultant::build_subdivision_matrix;

    fn rat(x: i64) -> Rat {
        Rat::from_i64(x)
    }

    fn poly(terms: &[(&[i64], i64)]) -> SparsePolynomial<Rat> {
        SparsePolynomial::from_terms(
            terms
                .iter()
                .map(|&(e, c)| (ExponentVector::new(e.to_vec()), rat(c)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn overconstrain_u_mode_structure() {
        let sys = vec![
            poly(&[(&[2, 0], 1), (&[0, 0], -1)]),
            poly(&[(&[0, 2], 1), (&[0, 0], -4)]),
        ];
        let oc = overconstrain(&sys, Mode::UResultant, 3, None).unwrap();
        assert_eq!(oc.polys.len(), 3);
        let f0 = &oc.polys[0];
        // constant monomial carries x0 (degree 1), units carry constants
        let c0 = f0.coeff_at(&ExponentVector::zeros(2)).unwrap();
        assert_eq!(c0.degree(), 1);
        for j in 0..2 {
            let cj = f0.coeff_at(&ExponentVector::unit(2, j)).unwrap();
            assert_eq!(cj.degree(), 0);
            assert!(!Coefficient::is_zero(cj));
        }
        let u = oc.u_coeffs.as_ref().unwrap();
        assert!(u.iter().all(|c| !num_traits::Zero::is_zero(c)));
    }

    use crate::lattice::Coefficient;

    #[test]
    fn overconstrain_hidden_mode_quadratic_coeffs() {
        // f = 1 + x1^2 x3^2 + x1 x3: hiding x3 leaves one variable with
        // coefficients quadratic in x0
        let sys = vec![
            poly(&[(&[0, 0], 1), (&[2, 2], 1), (&[1, 1], 1)]),
            poly(&[(&[0, 0], 1), (&[2, 0], 1), (&[0, 1], 1)]),
        ];
        let oc = overconstrain(&sys, Mode::Hidden(1), 3, None).unwrap();
        assert_eq!(oc.polys.len(), 2);
        assert_eq!(oc.nvars(), 1);
        let f = &oc.polys[0];
        let deg = f.coeffs().iter().map(|c| c.degree()).max().unwrap();
        assert_eq!(deg, 2);
        assert!(matches!(
            overconstrain(&sys, Mode::Hidden(5), 3, None),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn schur_block_diagonal_hand_example() {
        // M = [[2, 0, 1, 0], [0, 4, 0, x], [1, 0, 3, 0], [0, 2, 0, 1+x]]
        // constant cols {0, 1}: M11 = [[2,0],[0,4]] (rows 0,1) say;
        // A = M22 - M21 M11^{-1} M12 computable by hand.
        let m0 = DMatrix::from_row_slice(4, 4, &[
            2.0, 0.0, 1.0, 0.0,
            0.0, 4.0, 0.0, 0.0,
            1.0, 0.0, 3.0, 0.0,
            0.0, 2.0, 0.0, 1.0,
        ]);
        let m1 = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        ]);
        let mx = MatrixPolynomial { coeffs: vec![m0.clone(), m1.clone()] };
        let schur = partition_and_schur(&mx, 1e8, false).unwrap();
        assert!(!schur.whole);
        assert_eq!(schur.a.dim() + schur.block_dim(), 4);
        // determinant identity at random x0 samples
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (m11, _) = schur.m11.as_ref().unwrap();
        for _ in 0..5 {
            let x0 = C64::new(4.0 * rng.gen::<f64>() - 2.0, 0.0);
            let full = (&m0 + &m1 * x0.re).map(|v| C64::new(v, 0.0));
            let det_m = full.lu().determinant();
            let det_a = schur.a.eval(x0).lu().determinant();
            let det_m11 = m11.map(|v| C64::new(v, 0.0)).lu().determinant();
            let rel = (det_m - det_a * det_m11).norm() / det_m.norm().max(1e-30);
            assert!(rel <= 1e-8, "relative determinant error {}", rel);
        }
    }

    #[test]
    fn whole_matrix_when_no_constant_columns() {
        let m0 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let m1 = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let mx = MatrixPolynomial { coeffs: vec![m0, m1] };
        let schur = partition_and_schur(&mx, 1e8, false).unwrap();
        assert!(schur.whole);
        assert_eq!(schur.a.dim(), 2);
    }

    #[test]
    fn rank_balance_identity_kept_when_monic() {
        let a = MatrixPolynomial {
            coeffs: vec![
                DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]),
                DMatrix::identity(2, 2),
            ],
        };
        match rank_balance(&a, 3, 1e8, 1) {
            BalanceOutcome::Balanced(tr, _, kappa) => {
                assert!(tr.is_identity());
                assert!((kappa - 1.0).abs() < 1e-12);
            }
            BalanceOutcome::PencilNeeded => panic!("monic polynomial must balance"),
        }
    }

    #[test]
    fn rank_balance_fixes_singular_leading() {
        // A(x0) = diag(x0, 1): A1 = diag(1, 0) singular
        let a = MatrixPolynomial {
            coeffs: vec![
                DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            ],
        };
        match rank_balance(&a, 6, 1e8, 1) {
            BalanceOutcome::Balanced(tr, ap, _) => {
                assert!(!tr.is_identity());
                let f = lu_col_pivot(&ap.coeffs[ap.degree()]);
                assert!(!f.is_singular());
            }
            BalanceOutcome::PencilNeeded => panic!("a shift balances diag(x0, 1)"),
        }
    }

    #[test]
    fn companion_scalar_quadratic() {
        // y^2 - 3y + 2: roots 1, 2
        let a = MatrixPolynomial {
            coeffs: vec![
                DMatrix::from_row_slice(1, 1, &[2.0]),
                DMatrix::from_row_slice(1, 1, &[-3.0]),
                DMatrix::from_row_slice(1, 1, &[1.0]),
            ],
        };
        let c = companion(&a, 1e8).unwrap();
        assert_eq!(c.nrows(), 2);
        let mut vals: Vec<f64> = c.complex_eigenvalues().iter().map(|v| v.re).collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-9);
        assert!((vals[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn companion_eigenvector_block_structure() {
        // random monic quadratic, r = 3: v_2 = lambda * v_1 on eigenvectors
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = MatrixPolynomial {
            coeffs: vec![
                DMatrix::from_fn(3, 3, |_, _| rng.gen::<f64>() - 0.5),
                DMatrix::from_fn(3, 3, |_, _| rng.gen::<f64>() - 0.5),
                DMatrix::identity(3, 3),
            ],
        };
        let c = companion(&a, 1e8).unwrap();
        assert_eq!(c.nrows(), 6);
        for p in eigen(&c).unwrap() {
            let v1 = DVector::from_fn(3, |i, _| p.vector[i]);
            let v2 = DVector::from_fn(3, |i, _| p.vector[3 + i]);
            let err = (&v2 - &v1 * p.value).norm();
            assert!(err <= 1e-6 * (1.0 + p.value.norm()), "block structure {}", err);
            // v1 is in the kernel of A(lambda)
            let res = (a.eval(p.value) * &v1).norm();
            assert!(res <= 1e-6 * (1.0 + p.value.norm().powi(2)), "kernel {}", res);
        }
    }

    #[test]
    fn pencil_matches_companion_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = MatrixPolynomial {
            coeffs: vec![
                DMatrix::from_fn(2, 2, |_, _| rng.gen::<f64>() - 0.5),
                DMatrix::from_fn(2, 2, |_, _| rng.gen::<f64>() - 0.5),
                DMatrix::from_fn(2, 2, |_, _| rng.gen::<f64>() + 1.0) + DMatrix::identity(2, 2),
            ],
        };
        let c = companion(&a, 1e8).unwrap();
        let mut direct: Vec<C64> = c.complex_eigenvalues().iter().cloned().collect();
        let (c1, c0) = pencil(&a);
        let mut via_pencil: Vec<C64> = generalized_eigen(&c1, &c0)
            .unwrap()
            .iter()
            .filter(|p| !p.is_infinite(1e-8))
            .map(|p| p.eigenvalue())
            .collect();
        assert_eq!(direct.len(), via_pencil.len());
        let key = |z: &C64| (z.re, z.im);
        direct.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        via_pencil.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (x, y) in direct.iter().zip(&via_pencil) {
            assert!((x - y).norm() <= 1e-6 * (1.0 + x.norm()), "{} vs {}", x, y);
        }
    }

    fn accepted_real_roots(report: &SolveReport) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = report
            .candidates
            .iter()
            .filter(|c| c.status == RootStatus::Accepted && c.real)
            .map(|c| c.coords.iter().map(|z| z.re).collect())
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    #[test]
    fn end_to_end_linear_system_u_mode() {
        // x + 2y = 5, 3x - y = 1  =>  x = 1, y = 2
        let sys = vec![
            poly(&[(&[1, 0], 1), (&[0, 1], 2), (&[0, 0], -5)]),
            poly(&[(&[1, 0], 3), (&[0, 1], -1), (&[0, 0], -1)]),
        ];
        let oc = overconstrain(&sys, Mode::UResultant, 7, None).unwrap();
        let m = build_subdivision_matrix(&oc.polys, 7).unwrap();
        let mx = assemble(&m);
        let schur = partition_and_schur(&mx, 1e8, false).unwrap();
        let report = solve_roots(&oc, &m, &schur, &SolveOptions::default()).unwrap();
        let roots = accepted_real_roots(&report);
        assert_eq!(roots.len(), 1);
        assert!((roots[0][0] - 1.0).abs() <= 1e-12);
        assert!((roots[0][1] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn end_to_end_separable_quadratics_u_mode() {
        // x^2 = 1, y^2 = 4: roots (+-1, +-2), mixed volume 4
        let sys = vec![
            poly(&[(&[2, 0], 1), (&[0, 0], -1)]),
            poly(&[(&[0, 2], 1), (&[0, 0], -4)]),
        ];
        let oc = overconstrain(&sys, Mode::UResultant, 5, None).unwrap();
        let m = build_subdivision_matrix(&oc.polys, 5).unwrap();
        let mx = assemble(&m);
        let schur = partition_and_schur(&mx, 1e8, false).unwrap();
        let report = solve_roots(&oc, &m, &schur, &SolveOptions::default()).unwrap();
        let roots = accepted_real_roots(&report);
        let expect = [[-1.0, -2.0], [-1.0, 2.0], [1.0, -2.0], [1.0, 2.0]];
        assert_eq!(roots.len(), 4, "roots: {:?}", roots);
        for (r, e) in roots.iter().zip(expect) {
            assert!((r[0] - e[0]).abs() <= 1e-8 && (r[1] - e[1]).abs() <= 1e-8,
                "{:?} vs {:?}", r, e);
        }
        // accepted count never exceeds the mixed volume
        let accepted = report.candidates.iter()
            .filter(|c| c.status == RootStatus::Accepted).count();
        assert!(accepted <= 4);
    }

    #[test]
    fn end_to_end_hidden_mode() {
        // x^2 + y^2 = 5, x y = 2: roots (1,2),(2,1),(-1,-2),(-2,-1); hide y
        let sys = vec![
            poly(&[(&[2, 0], 1), (&[0, 2], 1), (&[0, 0], -5)]),
            poly(&[(&[1, 1], 1), (&[0, 0], -2)]),
        ];
        let oc = overconstrain(&sys, Mode::Hidden(1), 5, None).unwrap();
        let m = crate::resultant::build_incremental_matrix(&oc.polys, None, 5).unwrap();
        let mx = assemble(&m);
        let schur = partition_and_schur(&mx, 1e8, false).unwrap();
        let report = solve_roots(&oc, &m, &schur, &SolveOptions::default()).unwrap();
        let mut found: Vec<(f64, f64)> = report
            .candidates
            .iter()
            .filter(|c| c.status == RootStatus::Accepted && c.real)
            .map(|c| (c.coords[0].re, c.x0.re))
            .collect();
        found.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [(-2.0, -1.0), (-1.0, -2.0), (1.0, 2.0), (2.0, 1.0)];
        assert_eq!(found.len(), 4, "found {:?}", found);
        for ((x, y), (ex, ey)) in found.iter().zip(expect) {
            assert!((x - ex).abs() <= 1e-8 && (y - ey).abs() <= 1e-8,
                "({}, {}) vs ({}, {})", x, y, ex, ey);
        }
    }
}
