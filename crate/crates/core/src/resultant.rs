//! Sylvester-type sparse resultant matrices: the subdivision-based greedy
//! construction (perturbation delta, row contents from cell location) and
//! the incremental construction (direction v, growth until full column
//! rank certified modulo two 31-bit primes). Matrix definitions persist in
//! a line-oriented text format so a structure can be reused with new
//! coefficient specializations.

use crate::field::{Gf, PRIME_A, PRIME_B};
use crate::lattice::{Coefficient, ExponentVector, SparsePolynomial, Support};
use crate::linalg::{det, RowBasis};
use crate::lp::in_convex_hull;
use crate::polytope::{affine_rank, bounding_box, sum_points};
use crate::subdivision::{locate, mixed_subdivision, mv_deficient, Lifting};
use crate::{Error, Rat, Result, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

const MAX_REDRAWS: usize = 10;

/// Row of a resultant matrix: the polynomial `x^multiplier * f_{poly_index}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowLabel {
    pub poly_index: usize,
    pub multiplier: ExponentVector,
}

/// Perturbation data that fixed the construction: the shift delta for the
/// subdivision form, or the ordering direction v for the incremental form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Perturbation {
    Delta(Vec<Rat>),
    Dir(Vec<Rat>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultantMatrix<C: Coefficient> {
    pub rows: Vec<RowLabel>,
    pub cols: Vec<ExponentVector>,
    pub perturbation: Perturbation,
    pub entries: Vec<Vec<C>>,
}

impl<C: Coefficient> ResultantMatrix<C> {
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Rows contributed by polynomial `i`.
    pub fn rows_of(&self, i: usize) -> usize {
        self.rows.iter().filter(|r| r.poly_index == i).count()
    }
}

/// Entry table from the structure and a coefficient system: entry(r, q) is
/// the coefficient of x^q in x^{multiplier_r} f_{i_r}.
fn materialize<C: Coefficient>(
    rows: &[RowLabel],
    cols: &[ExponentVector],
    sys: &[SparsePolynomial<C>],
) -> Result<Vec<Vec<C>>> {
    let pos: BTreeMap<&ExponentVector, usize> =
        cols.iter().enumerate().map(|(j, q)| (q, j)).collect();
    let mut entries = Vec::with_capacity(rows.len());
    for r in rows {
        let f = &sys[r.poly_index];
        let mut row = vec![C::coeff_zero(); cols.len()];
        for (a, c) in f.support().points().iter().zip(f.coeffs()) {
            let q = &r.multiplier + a;
            let j = *pos.get(&q).ok_or(Error::SupportMismatch)?;
            row[j] = c.clone();
        }
        entries.push(row);
    }
    Ok(entries)
}

/// Perturbation delta with coordinates s_i / P_i for distinct primes P_i
/// in [10^3, 10^4] and s_i uniform in [1, P_i - 1].
pub fn draw_delta(n: usize, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    let primes: Vec<i64> = (1000..10000).filter(|&p| is_prime(p)).collect();
    let mut chosen: Vec<i64> = Vec::with_capacity(n);
    while chosen.len() < n {
        let p = primes[rng.gen_range(0..primes.len())];
        if !chosen.contains(&p) {
            chosen.push(p);
        }
    }
    chosen
        .into_iter()
        .map(|p| {
            let s = rng.gen_range(1..p);
            Rat::new(s.into(), p.into())
        })
        .collect()
}

fn is_prime(p: i64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// All integer points of (conv(sum of supports) + delta), in lexicographic
/// order.
pub fn candidate_points(supports: &[&Support], delta: &[Rat]) -> Vec<ExponentVector> {
    let pts = sum_points(supports);
    let n = delta.len();
    let (lo, hi) = bounding_box(&pts);
    // facet test is much cheaper per grid point than a hull-membership LP,
    // but needs a full-dimensional hull
    let facets = if affine_rank(&pts) == n {
        let mut ipts: Vec<Vec<i128>> = pts
            .iter()
            .map(|p| (0..n).map(|t| p[t] as i128).collect())
            .collect();
        ipts.sort();
        ipts.dedup();
        prune_midpoints(&mut ipts);
        Some(crate::polytope::hull_facets(&ipts))
    } else {
        None
    };
    let hull: Vec<Vec<Rat>> = pts
        .iter()
        .map(|p| (0..n).map(|t| Rat::from_i64(p[t])).collect())
        .collect();
    let mut out = Vec::new();
    let mut cur = lo.clone();
    'grid: loop {
        let shifted: Vec<Rat> = (0..n)
            .map(|t| Rat::from_i64(cur[t]) - delta[t].clone())
            .collect();
        let inside = match &facets {
            Some(fs) => fs.iter().all(|f| {
                let mut v = Rat::zero();
                for (t, &nt) in f.normal.iter().enumerate() {
                    v += Rat::from_i64(nt as i64) * shifted[t].clone();
                }
                v <= Rat::from_i64(f.offset as i64)
            }),
            None => in_convex_hull(&shifted, &hull),
        };
        if inside {
            out.push(ExponentVector::new(cur.clone()));
        }
        for t in (0..n).rev() {
            cur[t] += 1;
            if cur[t] <= hi[t] + 1 {
                continue 'grid;
            }
            cur[t] = lo[t];
        }
        break;
    }
    out
}

/// Remove points that are midpoints of two others in the set; such points
/// are never hull vertices, and dropping them speeds up facet enumeration.
fn prune_midpoints(pts: &mut Vec<Vec<i128>>) {
    loop {
        let set: std::collections::HashSet<Vec<i128>> = pts.iter().cloned().collect();
        let before = pts.len();
        pts.retain(|p| {
            !set.iter().any(|a| {
                if a == p {
                    return false;
                }
                // b = 2p - a must differ from p and lie in the set
                let b: Vec<i128> = (0..p.len()).map(|t| 2 * p[t] - a[t]).collect();
                b != *p && set.contains(&b)
            })
        });
        if pts.len() == before {
            return;
        }
    }
}

/// Row content of each candidate point: locate p - delta in its cell,
/// pick the largest index whose face is a vertex, and shift by it.
fn annotate(
    supports: &[&Support],
    lifting: &Lifting,
    delta: &[Rat],
    points: &[ExponentVector],
) -> Result<Vec<RowLabel>> {
    let n = delta.len();
    let mut labels = Vec::with_capacity(points.len());
    for p in points {
        let x: Vec<Rat> = (0..n)
            .map(|t| Rat::from_i64(p[t]) - delta[t].clone())
            .collect();
        let loc = locate(supports, lifting, &x)?.ok_or(Error::NonGenericDelta(0))?;
        if !loc.interior {
            return Err(Error::NonGenericDelta(0));
        }
        let i = loc
            .dims
            .iter()
            .rposition(|&d| d == 0)
            .ok_or(Error::NoVertexSummand)?;
        let vertex = &supports[i].points()[loc.faces[i][0]];
        labels.push(RowLabel {
            poly_index: i,
            multiplier: p - vertex,
        });
    }
    Ok(labels)
}

/// Subdivision-based greedy matrix: start from the points whose row
/// content uses f0 and close under "every monomial of an included row is a
/// column, every column point contributes its content row".
pub fn build_subdivision_matrix<C: Coefficient>(
    sys: &[SparsePolynomial<C>],
    seed: u64,
) -> Result<ResultantMatrix<C>> {
    let supports: Vec<&Support> = sys.iter().map(|f| f.support()).collect();
    let n = supports[0].ambient_dim();
    if sys.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: sys.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut last = Error::NonGenericLifting(MAX_REDRAWS);
    for lift_try in 0..MAX_REDRAWS {
        let lifting = Lifting::draw(&supports, seed.wrapping_add(lift_try as u64));
        // certify lifting genericity via the exact volume identity
        if mixed_subdivision(&supports, &lifting).is_err() {
            continue;
        }
        for _ in 0..MAX_REDRAWS {
            let delta = draw_delta(n, &mut rng);
            let points = candidate_points(&supports, &delta);
            match annotate(&supports, &lifting, &delta, &points) {
                Ok(labels) => {
                    return close_greedy(sys, &supports, points, labels, delta);
                }
                Err(Error::NonGenericDelta(_)) => {
                    last = Error::NonGenericDelta(1);
                    continue;
                }
                Err(Error::NoVertexSummand) => {
                    last = Error::NoVertexSummand;
                    break; // re-lift
                }
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

fn close_greedy<C: Coefficient>(
    sys: &[SparsePolynomial<C>],
    supports: &[&Support],
    points: Vec<ExponentVector>,
    labels: Vec<RowLabel>,
    delta: Vec<Rat>,
) -> Result<ResultantMatrix<C>> {
    let content: BTreeMap<ExponentVector, RowLabel> =
        points.into_iter().zip(labels).collect();
    let mut selected: BTreeMap<ExponentVector, RowLabel> = BTreeMap::new();
    let mut work: Vec<ExponentVector> = content
        .iter()
        .filter(|(_, l)| l.poly_index == 0)
        .map(|(p, _)| p.clone())
        .collect();
    if work.is_empty() {
        // no distinguished rows: fall back to the full point set
        work = content.keys().cloned().collect();
    }
    while let Some(p) = work.pop() {
        if selected.contains_key(&p) {
            continue;
        }
        let label = content.get(&p).ok_or(Error::NonGenericDelta(0))?.clone();
        for a in supports[label.poly_index].points() {
            let q = &label.multiplier + a;
            if !selected.contains_key(&q) {
                work.push(q);
            }
        }
        selected.insert(p, label);
    }
    let cols: Vec<ExponentVector> = selected.keys().cloned().collect();
    let rows: Vec<RowLabel> = selected.into_values().collect();
    let entries = materialize(&rows, &cols, sys)?;
    Ok(ResultantMatrix {
        rows,
        cols,
        perturbation: Perturbation::Delta(delta),
        entries,
    })
}

/// Rank of a rational matrix specialized modulo the prime `P`. Fails when
/// a denominator is divisible by the prime; callers switch primes.
pub fn modular_rank<const P: u64>(m: &[Vec<Rat>]) -> Result<usize> {
    let mut rows = Vec::with_capacity(m.len());
    for r in m {
        let mut row = Vec::with_capacity(r.len());
        for x in r {
            row.push(rat_mod::<P>(x)?);
        }
        rows.push(row);
    }
    Ok(crate::linalg::rank(rows))
}

fn rat_mod<const P: u64>(x: &Rat) -> Result<Gf<P>> {
    let num = bigint_mod::<P>(x.numer());
    let den = bigint_mod::<P>(x.denom());
    if den.0 == 0 {
        return Err(Error::Numeric(
            "denominator divisible by the rank-test modulus".into(),
        ));
    }
    Ok(num / den)
}

fn bigint_mod<const P: u64>(x: &BigInt) -> Gf<P> {
    let p = BigInt::from(P);
    let mut r = x % &p;
    if r.is_negative() {
        r += &p;
    }
    Gf::<P>::from_u64(r.to_u64().expect("reduced residue fits in u64"))
}

/// Incremental matrix: per-polynomial multiplier pools ordered by
/// decreasing inner product with `v`, grown until the random modular
/// specialization has full column rank over both certification primes,
/// then a square nonsingular row subset is selected by elimination.
pub fn build_incremental_matrix<C: Coefficient>(
    sys: &[SparsePolynomial<C>],
    v: Option<Vec<Rat>>,
    seed: u64,
) -> Result<ResultantMatrix<C>> {
    let supports: Vec<&Support> = sys.iter().map(|f| f.support()).collect();
    let n = supports[0].ambient_dim();
    if sys.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: sys.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1ac);
    let v: Vec<Rat> = match v {
        Some(v) => v,
        None => (0..n)
            .map(|_| {
                let mut x = 0i64;
                while x == 0 {
                    x = rng.gen_range(-20..=20);
                }
                Rat::from_i64(x)
            })
            .collect(),
    };
    if v.iter().any(|x| num_traits::Zero::is_zero(x)) {
        return Err(Error::Numeric("direction v must have nonzero entries".into()));
    }
    let (mvs, _) = mv_deficient(&supports)?;
    let delta = draw_delta(n, &mut rng);
    let size_bound = candidate_points(&supports, &delta).len();

    // v-extremal multiplier pools from (sum_{j != i} Q_j) + delta
    let mut pools: Vec<Vec<ExponentVector>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let rest: Vec<&Support> = supports
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| *s)
            .collect();
        let mut pool = candidate_points(&rest, &delta);
        pool.sort_by(|a, b| b.dot_rat(&v).cmp(&a.dot_rat(&v)).then_with(|| a.cmp(b)));
        pools.push(pool);
    }
    let mut counts: Vec<usize> = (0..=n)
        .map(|i| (mvs[i] as usize).max(1).min(pools[i].len()))
        .collect();

    loop {
        let mut rows: Vec<RowLabel> = Vec::new();
        for i in 0..=n {
            for b in &pools[i][..counts[i]] {
                rows.push(RowLabel {
                    poly_index: i,
                    multiplier: b.clone(),
                });
            }
        }
        let mut cols: Vec<ExponentVector> = Vec::new();
        for r in &rows {
            for a in supports[r.poly_index].points() {
                cols.push(&r.multiplier + a);
            }
        }
        cols.sort();
        cols.dedup();

        // the selected square matrix is indexed by a subset of the columns,
        // so its dimension can never exceed |(Q+delta) ∩ Z^n|
        if cols.len() > size_bound {
            return Err(Error::SizeBoundExceeded);
        }
        if let Some(selected) = try_select(&rows, &cols, &supports, &mut rng) {
            let rows: Vec<RowLabel> = selected.into_iter().map(|k| rows[k].clone()).collect();
            let entries = materialize(&rows, &cols, sys)?;
            return Ok(ResultantMatrix {
                rows,
                cols,
                perturbation: Perturbation::Dir(v),
                entries,
            });
        }
        // grow one multiplier at a time, round-robin over polynomials with
        // candidates left, so every intermediate row count gets attempted
        let total: usize = counts.iter().sum();
        let mut grew = false;
        for step in 0..=n {
            let i = (total + step) % (n + 1);
            if counts[i] < pools[i].len() {
                counts[i] += 1;
                grew = true;
                break;
            }
        }
        if !grew {
            return Err(Error::SizeBoundExceeded);
        }
    }
}

/// Specialize the structural matrix with random nonzero coefficients mod
/// both primes; on full column rank, return indices of a square
/// nonsingular row subset, else `None`.
fn try_select(
    rows: &[RowLabel],
    cols: &[ExponentVector],
    supports: &[&Support],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let pos: BTreeMap<&ExponentVector, usize> =
        cols.iter().enumerate().map(|(j, q)| (q, j)).collect();
    for _ in 0..3 {
        // fresh random specialization per attempt, shared across primes
        let spec: Vec<Vec<u64>> = supports
            .iter()
            .map(|s| (0..s.len()).map(|_| rng.gen_range(1..1u64 << 30)).collect())
            .collect();
        let build = |vals: &dyn Fn(usize, usize) -> u64| -> Vec<Vec<u64>> {
            rows.iter()
                .map(|r| {
                    let mut row = vec![0u64; cols.len()];
                    for (j, a) in supports[r.poly_index].points().iter().enumerate() {
                        let q = &r.multiplier + a;
                        row[pos[&q]] = vals(r.poly_index, j);
                    }
                    row
                })
                .collect()
        };
        let raw = build(&|i, j| spec[i][j]);
        let to_gf = |m: &[Vec<u64>]| -> (Vec<Vec<Gf<PRIME_A>>>, Vec<Vec<Gf<PRIME_B>>>) {
            (
                m.iter()
                    .map(|r| r.iter().map(|&x| Gf::<PRIME_A>::from_u64(x % PRIME_A)).collect())
                    .collect(),
                m.iter()
                    .map(|r| r.iter().map(|&x| Gf::<PRIME_B>::from_u64(x % PRIME_B)).collect())
                    .collect(),
            )
        };
        let (ma, mb) = to_gf(&raw);
        let mut basis_a = RowBasis::<Gf<PRIME_A>>::new(cols.len());
        let mut selected = Vec::new();
        for (k, r) in ma.iter().enumerate() {
            if basis_a.try_insert(r.clone()) {
                selected.push(k);
            }
        }
        if basis_a.rank() < cols.len() {
            return None; // rank-deficient: caller must grow
        }
        // certify with the second prime on the selected square subset
        let sq: Vec<Vec<Gf<PRIME_B>>> = selected.iter().map(|&k| mb[k].clone()).collect();
        if !det(sq).is_zero() {
            return Some(selected);
        }
        // unlucky specialization; retry with new random values
    }
    None
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serialize a matrix definition (structure only, no entries).
pub fn matrix_to_string<C: Coefficient>(m: &ResultantMatrix<C>) -> String {
    let n = m.cols[0].len();
    let mut out = String::new();
    let npolys = m.rows.iter().map(|r| r.poly_index).max().unwrap_or(0) + 1;
    let _ = writeln!(out, "SRMAT 1 n={} npolys={} dim={}", n, npolys, m.dim());
    let (tag, vals) = match &m.perturbation {
        Perturbation::Delta(d) => ("DELTA", d),
        Perturbation::Dir(v) => ("DIR", v),
    };
    let vals: Vec<String> = vals.iter().map(fmt_rat).collect();
    let _ = writeln!(out, "{} {}", tag, vals.join(" "));
    let _ = writeln!(out, "COLS");
    for q in &m.cols {
        let parts: Vec<String> = (0..n).map(|t| q[t].to_string()).collect();
        let _ = writeln!(out, "{}", parts.join(" "));
    }
    let _ = writeln!(out, "ROWS");
    for r in &m.rows {
        let parts: Vec<String> = (0..n).map(|t| r.multiplier[t].to_string()).collect();
        let _ = writeln!(out, "{} {}", r.poly_index, parts.join(" "));
    }
    out
}

pub fn store_matrix<C: Coefficient>(m: &ResultantMatrix<C>, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, matrix_to_string(m))?;
    Ok(())
}

/// Parse a matrix definition and rebuild entries against `sys`, which must
/// have matching supports.
pub fn matrix_from_string<C: Coefficient>(
    text: &str,
    sys: &[SparsePolynomial<C>],
) -> Result<ResultantMatrix<C>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| parse_err("empty file"))?;
    let mut n = None;
    let mut npolys = None;
    let mut dim = None;
    let mut words = header.split_whitespace();
    if words.next() != Some("SRMAT") || words.next() != Some("1") {
        return Err(parse_err("bad header"));
    }
    for w in words {
        let (k, v) = w.split_once('=').ok_or_else(|| parse_err("bad header field"))?;
        let v: usize = v.parse().map_err(|_| parse_err("bad header value"))?;
        match k {
            "n" => n = Some(v),
            "npolys" => npolys = Some(v),
            "dim" => dim = Some(v),
            _ => return Err(parse_err("unknown header field")),
        }
    }
    let (n, npolys, dim) = (
        n.ok_or_else(|| parse_err("missing n"))?,
        npolys.ok_or_else(|| parse_err("missing npolys"))?,
        dim.ok_or_else(|| parse_err("missing dim"))?,
    );
    if sys.len() != npolys || sys.iter().any(|f| f.nvars() != n) {
        return Err(Error::SupportMismatch);
    }
    let pert_line = lines.next().ok_or_else(|| parse_err("missing perturbation"))?;
    let mut pw = pert_line.split_whitespace();
    let tag = pw.next().ok_or_else(|| parse_err("missing perturbation tag"))?;
    let vals: Vec<Rat> = pw
        .map(|w| w.parse::<Rat>().map_err(|_| parse_err("bad rational")))
        .collect::<Result<_>>()?;
    if vals.len() != n {
        return Err(parse_err("perturbation length"));
    }
    let perturbation = match tag {
        "DELTA" => Perturbation::Delta(vals),
        "DIR" => Perturbation::Dir(vals),
        _ => return Err(parse_err("unknown perturbation tag")),
    };
    if lines.next() != Some("COLS") {
        return Err(parse_err("missing COLS"));
    }
    let mut cols = Vec::with_capacity(dim);
    for _ in 0..dim {
        let l = lines.next().ok_or_else(|| parse_err("truncated COLS"))?;
        cols.push(parse_ev(l, n)?);
    }
    if lines.next() != Some("ROWS") {
        return Err(parse_err("missing ROWS"));
    }
    let mut rows = Vec::with_capacity(dim);
    for _ in 0..dim {
        let l = lines.next().ok_or_else(|| parse_err("truncated ROWS"))?;
        let (i, rest) = l
            .split_once(' ')
            .ok_or_else(|| parse_err("bad ROWS line"))?;
        let poly_index: usize = i.parse().map_err(|_| parse_err("bad poly index"))?;
        if poly_index >= npolys {
            return Err(parse_err("poly index out of range"));
        }
        rows.push(RowLabel {
            poly_index,
            multiplier: parse_ev(rest, n)?,
        });
    }
    let entries = materialize(&rows, &cols, sys)?;
    Ok(ResultantMatrix {
        rows,
        cols,
        perturbation,
        entries,
    })
}

pub fn load_matrix<C: Coefficient>(
    path: &std::path::Path,
    sys: &[SparsePolynomial<C>],
) -> Result<ResultantMatrix<C>> {
    let text = std::fs::read_to_string(path)?;
    matrix_from_string(&text, sys)
}

fn parse_ev(line: &str, n: usize) -> Result<ExponentVector> {
    let vals: Vec<i64> = line
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| parse_err("bad exponent")))
        .collect::<Result<_>>()?;
    if vals.len() != n {
        return Err(parse_err("exponent vector length"));
    }
    Ok(ExponentVector::new(vals))
}

fn parse_err(msg: &str) -> Error {
    Error::Parse(msg.to_string())
}
