//! Mixed subdivisions of Minkowski sums via integer liftings, mixed cells,
//! mixed volumes, and exact point location in the subdivision.
//!
//! Candidate face tuples are prefiltered with a floating-point simplex and
//! every accepted cell is confirmed with the exact solver; an exact volume
//! identity (cell volumes sum to the volume of the Minkowski sum) certifies
//! that the prefilter lost nothing, and a failed certificate triggers a
//! redraw of the lifting.

use crate::lattice::{ExponentVector, Support};
use crate::lp::{solve_standard, LpOutcome};
use crate::polytope::{affine_rank, sum_points, volume_integer};
use crate::{Error, Rat, Result, Scalar};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Maximum support size for exact lower-face enumeration by subsets.
const MAX_FACE_ENUM: usize = 16;
const LIFT_MAX: i64 = 1 << 20;
const MAX_REDRAWS: usize = 10;

/// Integer lifting values, aligned with each support's canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifting {
    pub values: Vec<Vec<i64>>,
    pub seed: u64,
}

impl Lifting {
    /// Draw lifting values uniform in [1, 2^20] from a seeded generator.
    pub fn draw(supports: &[&Support], seed: u64) -> Lifting {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = supports
            .iter()
            .map(|s| (0..s.len()).map(|_| rng.gen_range(1..=LIFT_MAX)).collect())
            .collect();
        Lifting { values, seed }
    }
}

/// One face per input polytope; indices refer to each support's point order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub faces: Vec<Vec<usize>>,
    pub volume: Rat,
    pub is_mixed: bool,
}

#[derive(Clone, Debug)]
pub struct MixedSubdivision {
    pub cells: Vec<Cell>,
    pub lifting: Lifting,
}

impl MixedSubdivision {
    pub fn mixed_volume_sum(&self) -> Rat {
        self.cells
            .iter()
            .filter(|c| c.is_mixed)
            .fold(Rat::zero(), |acc, c| acc + c.volume.clone())
    }

    /// Diagnostic listing: one line "(F0|F1|...|Fn) volume mixed?" per cell.
    pub fn dump(&self, supports: &[&Support]) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            let mut parts = Vec::new();
            for (i, face) in cell.faces.iter().enumerate() {
                let pts: Vec<String> = face
                    .iter()
                    .map(|&j| format!("{:?}", supports[i].points()[j]))
                    .collect();
                parts.push(pts.join(","));
            }
            out.push_str(&format!(
                "({}) {} {}\n",
                parts.join("|"),
                cell.volume,
                if cell.is_mixed { "mixed" } else { "non-mixed" }
            ));
        }
        out
    }
}

/// A lower face of one lifted support.
#[derive(Clone, Debug)]
struct LowerFace {
    idx: Vec<usize>,
    dim: usize,
}

fn face_dim(support: &Support, idx: &[usize]) -> usize {
    let pts: Vec<ExponentVector> = idx.iter().map(|&i| support.points()[i].clone()).collect();
    affine_rank(&pts)
}

/// Build the strict argmin feasibility LP for a partial face tuple and
/// solve it over scalar `S`. Returns the optimal epsilon margin, `None`
/// when infeasible, or an error when the solver stalled (f64 only).
fn tuple_margin<S: Scalar>(
    supports: &[&Support],
    lifting: &Lifting,
    faces: &[Vec<usize>],
) -> std::result::Result<Option<S>, crate::lp::MaxIterations> {
    let n = supports[0].ambient_dim();
    let k = faces.len();
    // vars: gp[n], gm[n], cp[k], cm[k], eps, slack per strict row, cap slack
    let nstrict: usize = (0..k)
        .map(|i| supports[i].len() - faces[i].len())
        .sum();
    let ncols = 2 * n + 2 * k + 1 + nstrict + 1;
    let eps_col = 2 * n + 2 * k;
    let mut rows: Vec<(Vec<S>, S)> = Vec::new();
    let mut slack = eps_col + 1;
    for (i, face) in faces.iter().enumerate() {
        let in_face: std::collections::HashSet<usize> = face.iter().copied().collect();
        for (j, a) in supports[i].points().iter().enumerate() {
            let w = lifting.values[i][j];
            let mut row = vec![S::zero(); ncols];
            for t in 0..n {
                row[t] = S::from_i64(a[t]);
                row[n + t] = S::from_i64(-a[t]);
            }
            row[2 * n + i] = S::from_i64(-1);
            row[2 * n + k + i] = S::from_i64(1);
            if !in_face.contains(&j) {
                row[eps_col] = S::from_i64(-1);
                row[slack] = S::from_i64(-1);
                slack += 1;
            }
            rows.push((row, S::from_i64(-w)));
        }
    }
    // cap: eps + s = 1
    let mut cap = vec![S::zero(); ncols];
    cap[eps_col] = S::from_i64(1);
    cap[ncols - 1] = S::from_i64(1);
    rows.push((cap, S::from_i64(1)));
    let mut c = vec![S::zero(); ncols];
    c[eps_col] = S::from_i64(-1);
    match solve_standard(ncols, &rows, &c)? {
        LpOutcome::Optimal(sol) => Ok(Some(-sol.value)),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Ok(Some(S::from_i64(1))),
    }
}

/// Float prefilter with exact confirmation for accepted or marginal tuples.
fn tuple_strictly_feasible(
    supports: &[&Support],
    lifting: &Lifting,
    faces: &[Vec<usize>],
) -> bool {
    match tuple_margin::<f64>(supports, lifting, faces) {
        Ok(Some(m)) if m <= 1e-7 => false, // confident reject; volume cert backstops
        Ok(None) => false,
        _ => matches!(
            tuple_margin::<Rat>(supports, lifting, faces)
                .expect("exact simplex cannot stall"),
            Some(m) if m > Rat::zero()
        ),
    }
}

/// Exact-only variant used when the certificate failed and the enumeration
/// is retried without the float prefilter.
fn tuple_strictly_feasible_exact(
    supports: &[&Support],
    lifting: &Lifting,
    faces: &[Vec<usize>],
) -> bool {
    matches!(
        tuple_margin::<Rat>(supports, lifting, faces).expect("exact simplex cannot stall"),
        Some(m) if m > Rat::zero()
    )
}

/// Lower faces of one lifted support, all dimensions.
fn lower_faces(support: &Support, lifts: &[i64], use_prefilter: bool) -> Result<Vec<LowerFace>> {
    let m = support.len();
    if m > MAX_FACE_ENUM {
        return Err(Error::SupportTooLarge(m));
    }
    let single = [support];
    let lifting = Lifting {
        values: vec![lifts.to_vec()],
        seed: 0,
    };
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        let faces = vec![idx.clone()];
        let ok = if use_prefilter {
            tuple_strictly_feasible(&single, &lifting, &faces)
        } else {
            tuple_strictly_feasible_exact(&single, &lifting, &faces)
        };
        if ok {
            let dim = face_dim(support, &idx);
            out.push(LowerFace { idx, dim });
        }
    }
    Ok(out)
}

fn cell_points(supports: &[&Support], faces: &[Vec<usize>]) -> Vec<Vec<i128>> {
    let n = supports[0].ambient_dim();
    let mut acc: Vec<Vec<i128>> = vec![vec![0; n]];
    for (i, face) in faces.iter().enumerate() {
        let mut next = Vec::with_capacity(acc.len() * face.len());
        for p in &acc {
            for &j in face {
                let q = &supports[i].points()[j];
                next.push((0..n).map(|t| p[t] + q[t] as i128).collect());
            }
        }
        next.sort();
        next.dedup();
        acc = next;
    }
    acc
}

fn is_mixed_tuple(dims: &[usize], nsupports: usize, n: usize) -> bool {
    if nsupports == n {
        dims.iter().all(|&d| d == 1)
    } else {
        // n+1 polytopes: exactly one vertex summand, the rest edges
        dims.iter().filter(|&&d| d == 0).count() == 1 && dims.iter().all(|&d| d <= 1)
    }
}

fn enumerate_cells(
    supports: &[&Support],
    lifting: &Lifting,
    exact_only: bool,
) -> Result<Vec<Cell>> {
    let n = supports[0].ambient_dim();
    let k = supports.len();
    let mut face_lists: Vec<Vec<LowerFace>> = Vec::with_capacity(k);
    for (i, s) in supports.iter().enumerate() {
        face_lists.push(lower_faces(s, &lifting.values[i], !exact_only)?);
    }
    let mut cells = Vec::new();
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    let mut dims: Vec<usize> = Vec::new();
    recurse(
        supports,
        lifting,
        &face_lists,
        n,
        exact_only,
        &mut chosen,
        &mut dims,
        &mut cells,
    );
    Ok(cells)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    supports: &[&Support],
    lifting: &Lifting,
    face_lists: &[Vec<LowerFace>],
    n: usize,
    exact_only: bool,
    chosen: &mut Vec<Vec<usize>>,
    dims: &mut Vec<usize>,
    cells: &mut Vec<Cell>,
) {
    let level = chosen.len();
    let k = supports.len();
    if level == k {
        let total: usize = dims.iter().sum();
        if total != n {
            return;
        }
        let pts = cell_points(supports, chosen);
        let ev: Vec<ExponentVector> = pts
            .iter()
            .map(|p| ExponentVector::new(p.iter().map(|&v| v as i64).collect()))
            .collect();
        if affine_rank(&ev) != n {
            return;
        }
        // final acceptance is always exact
        if !tuple_strictly_feasible_exact(supports, lifting, chosen) {
            return;
        }
        cells.push(Cell {
            faces: chosen.clone(),
            volume: volume_integer(&pts),
            is_mixed: is_mixed_tuple(dims, k, n),
        });
        return;
    }
    let used: usize = dims.iter().sum();
    let remaining_levels = k - level - 1;
    for f in &face_lists[level] {
        // dimension budget: total must land exactly on n
        if used + f.dim > n || used + f.dim + remaining_levels * n < n {
            continue;
        }
        chosen.push(f.idx.clone());
        dims.push(f.dim);
        let feasible = if exact_only {
            tuple_strictly_feasible_exact(supports, lifting, chosen)
        } else {
            tuple_strictly_feasible(supports, lifting, chosen)
        };
        if feasible {
            recurse(
                supports, lifting, face_lists, n, exact_only, chosen, dims, cells,
            );
        }
        chosen.pop();
        dims.pop();
    }
}

/// Exact volume of the full Minkowski sum of the supports.
pub fn total_volume(supports: &[&Support]) -> Rat {
    let pts = sum_points(supports);
    let n = pts[0].len();
    if affine_rank(&pts) < n {
        return Rat::zero();
    }
    let ipts: Vec<Vec<i128>> = pts
        .iter()
        .map(|p| p.0.iter().map(|&v| v as i128).collect())
        .collect();
    volume_integer(&ipts)
}

/// Build the mixed subdivision for a fixed lifting; the exact volume
/// identity certifies completeness and lifting genericity.
pub fn mixed_subdivision(supports: &[&Support], lifting: &Lifting) -> Result<MixedSubdivision> {
    let vol = total_volume(supports);
    if vol.is_zero() {
        return Ok(MixedSubdivision {
            cells: Vec::new(),
            lifting: lifting.clone(),
        });
    }
    let cells = enumerate_cells(supports, lifting, false)?;
    let sum: Rat = cells.iter().fold(Rat::zero(), |a, c| a + c.volume.clone());
    if sum == vol {
        return Ok(MixedSubdivision {
            cells,
            lifting: lifting.clone(),
        });
    }
    // prefilter may have dropped a thin cell; retry fully exact before
    // declaring the lifting non-generic
    let cells = enumerate_cells(supports, lifting, true)?;
    let sum: Rat = cells.iter().fold(Rat::zero(), |a, c| a + c.volume.clone());
    if sum == vol {
        Ok(MixedSubdivision {
            cells,
            lifting: lifting.clone(),
        })
    } else {
        Err(Error::NonGenericLifting(1))
    }
}

/// Subdivision with automatic lifting redraws on genericity failure.
pub fn mixed_subdivision_seeded(
    supports: &[&Support],
    seed: u64,
) -> Result<MixedSubdivision> {
    for attempt in 0..MAX_REDRAWS {
        let lifting = Lifting::draw(supports, seed.wrapping_add(attempt as u64));
        match mixed_subdivision(supports, &lifting) {
            Ok(sub) => return Ok(sub),
            Err(Error::NonGenericLifting(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonGenericLifting(MAX_REDRAWS))
}

/// Mixed volume of `n` supports in `n` variables: the sum of mixed-cell
/// volumes, an exact nonnegative integer.
pub fn mixed_volume_seeded(supports: &[&Support], seed: u64) -> Result<i64> {
    let n = supports[0].ambient_dim();
    if supports.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: supports.len(),
        });
    }
    let pts = sum_points(supports);
    if affine_rank(&pts) < n {
        return Ok(0);
    }
    let sub = mixed_subdivision_seeded(supports, seed)?;
    let mv = sub.mixed_volume_sum();
    debug_assert!(mv.is_integer(), "mixed volume must be integral");
    Ok(mv.to_integer().to_i64().expect("desk-scale mixed volume"))
}

pub fn mixed_volume(supports: &[&Support]) -> Result<i64> {
    mixed_volume_seeded(supports, 1)
}

/// Deficient mixed volumes of n+1 supports: entry i is the mixed volume of
/// all supports except the i-th; the total resultant degree is their sum.
pub fn mv_deficient(supports: &[&Support]) -> Result<(Vec<i64>, i64)> {
    let n = supports[0].ambient_dim();
    if supports.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: supports.len(),
        });
    }
    let mut mvs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let rest: Vec<&Support> = supports
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| *s)
            .collect();
        mvs.push(mixed_volume(&rest)?);
    }
    let deg = mvs.iter().sum();
    Ok((mvs, deg))
}

/// Result of locating a rational point in the subdivision.
#[derive(Clone, Debug)]
pub struct LocatedCell {
    /// Tight faces, indices per support.
    pub faces: Vec<Vec<usize>>,
    pub dims: Vec<usize>,
    /// Sum of face dimensions equals n and the point is strictly inside.
    pub interior: bool,
}

/// Locate `x` in the subdivision of the Minkowski sum induced by the
/// lifting: lower-envelope LP, faces read off the exact duals. `None` when
/// `x` is outside the sum polytope.
pub fn locate(
    supports: &[&Support],
    lifting: &Lifting,
    x: &[Rat],
) -> Result<Option<LocatedCell>> {
    // a float LP guesses the envelope direction first; the guess is
    // reconstructed and verified in exact arithmetic, so a wrong guess
    // only costs a fallback to the exact simplex
    if let Some(cell) = locate_float_guess(supports, lifting, x) {
        return Ok(Some(cell));
    }
    let n = supports[0].ambient_dim();
    let ncols: usize = supports.iter().map(|s| s.len()).sum();
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for t in 0..n {
        let mut row = Vec::with_capacity(ncols);
        for s in supports {
            for a in s.points() {
                row.push(Rat::from_i64(a[t]));
            }
        }
        rows.push((row, x[t].clone()));
    }
    let mut offset = 0;
    for s in supports.iter() {
        let mut row = vec![Rat::zero(); ncols];
        for j in 0..s.len() {
            row[offset + j] = Rat::from_i64(1);
        }
        rows.push((row, Rat::from_i64(1)));
        offset += s.len();
    }
    let mut c = Vec::with_capacity(ncols);
    for (i, s) in supports.iter().enumerate() {
        for j in 0..s.len() {
            c.push(Rat::from_i64(lifting.values[i][j]));
        }
    }
    let sol = match solve_standard(ncols, &rows, &c).expect("exact simplex cannot stall") {
        LpOutcome::Optimal(sol) => sol,
        LpOutcome::Infeasible => return Ok(None),
        LpOutcome::Unbounded => unreachable!("bounded by convexity rows"),
    };
    // gamma-hat = -y_coord
    let gamma: Vec<Rat> = sol.y[..n].iter().map(|v| -v.clone()).collect();
    Ok(Some(cell_at_direction(supports, lifting, &gamma, x)))
}

/// Evaluate the lower-envelope cell selected by the exact direction
/// `gamma` and test whether `x` is strictly interior to its projection.
fn cell_at_direction(
    supports: &[&Support],
    lifting: &Lifting,
    gamma: &[Rat],
    x: &[Rat],
) -> LocatedCell {
    let n = supports[0].ambient_dim();
    let mut faces = Vec::with_capacity(supports.len());
    let mut dims = Vec::with_capacity(supports.len());
    for (i, s) in supports.iter().enumerate() {
        let vals: Vec<Rat> = s
            .points()
            .iter()
            .enumerate()
            .map(|(j, a)| a.dot_rat(gamma) + Rat::from_i64(lifting.values[i][j]))
            .collect();
        let min = vals.iter().min().expect("nonempty support").clone();
        let face: Vec<usize> = (0..s.len()).filter(|&j| vals[j] == min).collect();
        dims.push(face_dim(s, &face));
        faces.push(face);
    }
    let total: usize = dims.iter().sum();
    let mut interior = total == n;
    if interior {
        // strict interior of the projected cell
        let pts = cell_points(supports, &faces);
        if affine_rank(
            &pts.iter()
                .map(|p| ExponentVector::new(p.iter().map(|&v| v as i64).collect()))
                .collect::<Vec<_>>(),
        ) != n
        {
            interior = false;
        } else {
            for f in crate::polytope::hull_facets(&pts) {
                let mut v = Rat::zero();
                for (t, &nt) in f.normal.iter().enumerate() {
                    v += Rat::from_i64(nt as i64) * x[t].clone();
                }
                if v >= Rat::from_i64(f.offset as i64) {
                    interior = false;
                    break;
                }
            }
        }
    }
    LocatedCell {
        faces,
        dims,
        interior,
    }
}

/// Fast path for `locate`: solve the envelope LP in floating point, read
/// approximate tight sets off the duals, reconstruct the direction exactly
/// from them, and accept only a cell that is verified strictly interior in
/// exact arithmetic. Returns `None` on any doubt.
fn locate_float_guess(
    supports: &[&Support],
    lifting: &Lifting,
    x: &[Rat],
) -> Option<LocatedCell> {
    let n = supports[0].ambient_dim();
    let ncols: usize = supports.iter().map(|s| s.len()).sum();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for t in 0..n {
        let mut row = Vec::with_capacity(ncols);
        for s in supports {
            for a in s.points() {
                row.push(a[t] as f64);
            }
        }
        rows.push((row, x[t].to_f64()?));
    }
    let mut offset = 0;
    for s in supports.iter() {
        let mut row = vec![0.0; ncols];
        for j in 0..s.len() {
            row[offset + j] = 1.0;
        }
        rows.push((row, 1.0));
        offset += s.len();
    }
    let mut c = Vec::with_capacity(ncols);
    for (i, s) in supports.iter().enumerate() {
        for j in 0..s.len() {
            c.push(lifting.values[i][j] as f64);
        }
    }
    let sol = match solve_standard(ncols, &rows, &c) {
        Ok(LpOutcome::Optimal(sol)) => sol,
        _ => return None,
    };
    let gamma_f: Vec<f64> = sol.y[..n].iter().map(|v| -v).collect();
    // tight sets, read with a tolerance; over- or under-inclusion makes
    // the exact reconstruction below fail and we simply fall back
    let mut eqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for (i, s) in supports.iter().enumerate() {
        let vals: Vec<f64> = s
            .points()
            .iter()
            .enumerate()
            .map(|(j, a)| {
                (0..n).map(|t| a[t] as f64 * gamma_f[t]).sum::<f64>()
                    + lifting.values[i][j] as f64
            })
            .collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = 1e-7 * (1.0 + min.abs());
        let tight: Vec<usize> = (0..s.len()).filter(|&j| vals[j] - min <= tol).collect();
        let j0 = *tight.first()?;
        let a0 = &s.points()[j0];
        for &j in &tight[1..] {
            let a = &s.points()[j];
            let row: Vec<Rat> = (0..n).map(|t| Rat::from_i64(a[t] - a0[t])).collect();
            let rhs = Rat::from_i64(lifting.values[i][j0] - lifting.values[i][j]);
            eqs.push((row, rhs));
        }
    }
    let gamma = solve_consistent(n, eqs)?;
    let cell = cell_at_direction(supports, lifting, &gamma, x);
    if cell.interior {
        Some(cell)
    } else {
        None
    }
}

/// Unique solution of a possibly overdetermined exact linear system, or
/// `None` when the system is rank-deficient or inconsistent.
fn solve_consistent(n: usize, mut eqs: Vec<(Vec<Rat>, Rat)>) -> Option<Vec<Rat>> {
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut done = 0;
    for col in 0..n {
        let pr = (done..eqs.len()).find(|&r| !eqs[r].0[col].is_zero())?;
        eqs.swap(done, pr);
        let (head, tail) = eqs.split_at_mut(done + 1);
        let (prow, prhs) = (&head[done].0, &head[done].1);
        for (row, rhs) in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].clone() / prow[col].clone();
            for t in col..n {
                let d = f.clone() * prow[t].clone();
                row[t] -= d;
            }
            *rhs -= f * prhs.clone();
        }
        pivots.push((done, col));
        done += 1;
    }
    // remaining rows must have been reduced to 0 = 0
    for (row, rhs) in &eqs[done..] {
        if row.iter().any(|v| !v.is_zero()) || !rhs.is_zero() {
            return None;
        }
    }
    let mut gamma = vec![Rat::zero(); n];
    for &(r, col) in pivots.iter().rev() {
        let mut acc = eqs[r].1.clone();
        for t in col + 1..n {
            acc -= eqs[r].0[t].clone() * gamma[t].clone();
        }
        gamma[col] = acc / eqs[r].0[col].clone();
    }
    Some(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[i64]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn support(pts: &[&[i64]]) -> Support {
        Support::new(pts.iter().map(|p| ev(p)).collect())
    }

    #[test]
    fn two_axis_segments_single_mixed_cell() {
        let a = support(&[&[0, 0], &[1, 0]]);
        let b = support(&[&[0, 0], &[0, 1]]);
        let lifting = Lifting::draw(&[&a, &b], 7);
        let sub = mixed_subdivision(&[&a, &b], &lifting).unwrap();
        assert_eq!(sub.cells.len(), 1);
        assert!(sub.cells[0].is_mixed);
        assert_eq!(sub.cells[0].volume, Rat::from_i64(1));
        assert_eq!(mixed_volume(&[&a, &b]).unwrap(), 1);
    }

    #[test]
    fn two_triangles_mv_one() {
        let t = support(&[&[0, 0], &[1, 0], &[0, 1]]);
        let sub = mixed_subdivision_seeded(&[&t, &t], 3).unwrap();
        let total: Rat = sub
            .cells
            .iter()
            .fold(Rat::zero(), |a, c| a + c.volume.clone());
        assert_eq!(total, Rat::from_i64(2)); // Vol(2*triangle) = 2
        assert_eq!(sub.mixed_volume_sum(), Rat::from_i64(1));
        assert_eq!(mixed_volume(&[&t, &t]).unwrap(), 1);
    }

    #[test]
    fn diagonal_identity_square() {
        let sq = support(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(mixed_volume(&[&sq, &sq]).unwrap(), 2);
    }

    #[test]
    fn degenerate_sum_gives_zero() {
        let seg = support(&[&[0, 0], &[1, 0]]);
        assert_eq!(mixed_volume(&[&seg, &seg]).unwrap(), 0);
    }

    #[test]
    fn point_location_unit_example() {
        let a = support(&[&[0, 0], &[1, 0]]);
        let b = support(&[&[0, 0], &[0, 1]]);
        let lifting = Lifting::draw(&[&a, &b], 7);
        let x = vec![Rat::new(1.into(), 2.into()), Rat::new(1.into(), 2.into())];
        let loc = locate(&[&a, &b], &lifting, &x).unwrap().unwrap();
        assert!(loc.interior);
        assert_eq!(loc.dims, vec![1, 1]);
        let outside = vec![Rat::from_i64(5), Rat::from_i64(5)];
        assert!(locate(&[&a, &b], &lifting, &outside).unwrap().is_none());
    }

    /// Supports of the three-variable molecular benchmark: for each i the
    /// polynomial uses 1, x_j^2, x_k^2, x_j^2 x_k^2, x_j x_k with (j,k) the
    /// other two variables. The mixed volume is 16 against a Bezout count
    /// of 64.
    fn molecular_supports() -> Vec<Support> {
        let pairs = [(1usize, 2usize), (2, 0), (0, 1)];
        pairs
            .iter()
            .map(|&(j, k)| {
                let mut pts = Vec::new();
                let mk = |vals: &[(usize, i64)]| {
                    let mut e = vec![0i64; 3];
                    for &(idx, v) in vals {
                        e[idx] = v;
                    }
                    ExponentVector::new(e)
                };
                pts.push(mk(&[]));
                pts.push(mk(&[(j, 2)]));
                pts.push(mk(&[(k, 2)]));
                pts.push(mk(&[(j, 2), (k, 2)]));
                pts.push(mk(&[(j, 1), (k, 1)]));
                Support::new(pts)
            })
            .collect()
    }

    #[test]
    fn molecular_benchmark_mv_sixteen() {
        let sup = molecular_supports();
        let refs: Vec<&Support> = sup.iter().collect();
        assert_eq!(mixed_volume(&refs).unwrap(), 16);
    }

    #[test]
    fn molecular_benchmark_deficient_mvs() {
        let sup = molecular_supports();
        let u = Support::new(vec![
            ExponentVector::new(vec![0, 0, 0]),
            ExponentVector::new(vec![1, 0, 0]),
            ExponentVector::new(vec![0, 1, 0]),
            ExponentVector::new(vec![0, 0, 1]),
        ]);
        let refs: Vec<&Support> = std::iter::once(&u).chain(sup.iter()).collect();
        let (mvs, deg) = mv_deficient(&refs).unwrap();
        assert_eq!(mvs, vec![16, 12, 12, 12]);
        assert_eq!(deg, 52);
    }

    #[test]
    fn mv_deficient_segments_1d() {
        // two copies of the segment [0, 3] in Z^1: each deficient MV is 3
        let seg = Support::new(vec![ev(&[0]), ev(&[3])]);
        let (mvs, deg) = mv_deficient(&[&seg, &seg]).unwrap();
        assert_eq!(mvs, vec![3, 3]);
        assert_eq!(deg, 6);
    }
}
