//! Exact lattice polytopes: vertices, Minkowski sums, facet enumeration,
//! simplicial volume. All arithmetic is integral or rational; floating
//! point never enters here.

use crate::lattice::{ExponentVector, Support};
use crate::lp::in_convex_hull;
use crate::{Error, Rat, Result, Scalar};
use num_traits::Zero;

/// Convex hull of a support, stored as its exact vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    vertices: Vec<ExponentVector>,
    dim: usize,
}

impl Polytope {
    pub fn vertices(&self) -> &[ExponentVector] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices.first().map_or(0, |p| p.len())
    }

    /// Exact euclidean volume (zero when not full-dimensional).
    pub fn volume(&self) -> Rat {
        let n = self.ambient_dim();
        if self.dim < n {
            return Rat::zero();
        }
        let pts: Vec<Vec<i128>> = self
            .vertices
            .iter()
            .map(|p| p.0.iter().map(|&v| v as i128).collect())
            .collect();
        volume_integer(&pts)
    }
}

/// Affine rank of a point set (dimension of its affine hull).
pub fn affine_rank(points: &[ExponentVector]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let n = points[0].len();
    let rows: Vec<Vec<Rat>> = points[1..]
        .iter()
        .map(|p| {
            (0..n)
                .map(|j| Rat::from_i64(p[j] - points[0][j]))
                .collect()
        })
        .collect();
    crate::linalg::rank(rows)
}

/// `newton_polytope`: exact vertex set of the convex hull of a support.
/// A point is a vertex iff it is not a convex combination of the others.
pub fn newton_polytope(s: &Support) -> Polytope {
    let pts = s.points();
    let dim = affine_rank(pts);
    let mut vertices = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let others: Vec<Vec<Rat>> = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| q.0.iter().map(|&v| Rat::from_i64(v)).collect())
            .collect();
        let pr: Vec<Rat> = p.0.iter().map(|&v| Rat::from_i64(v)).collect();
        if !in_convex_hull(&pr, &others) {
            vertices.push(p.clone());
        }
    }
    Polytope { vertices, dim }
}

/// Minkowski sum of two polytopes: hull of pairwise vertex sums.
pub fn minkowski_sum(a: &Polytope, b: &Polytope) -> Result<Polytope> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: a.ambient_dim(),
            got: b.ambient_dim(),
        });
    }
    let sums: Vec<ExponentVector> = a
        .vertices
        .iter()
        .flat_map(|p| b.vertices.iter().map(move |q| p + q))
        .collect();
    Ok(newton_polytope(&Support::new(sums)))
}

/// Minkowski sum of several supports, as the full (deduplicated) sum set;
/// callers hull it when vertices are needed.
pub fn sum_points(supports: &[&Support]) -> Vec<ExponentVector> {
    let n = supports
        .first()
        .map(|s| s.ambient_dim())
        .unwrap_or(0);
    let mut acc = vec![ExponentVector::zeros(n)];
    for s in supports {
        let mut next = Vec::with_capacity(acc.len() * s.len());
        for p in &acc {
            for q in s.points() {
                next.push(p + q);
            }
        }
        next.sort();
        next.dedup();
        acc = next;
    }
    acc
}

/// A supporting hyperplane `normal . x <= offset` together with the indices
/// of the points lying on it.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Vec<i128>,
    pub offset: i128,
    pub tight: Vec<usize>,
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let mut d = 0i128;
            for c in 0..n {
                if m[0][c] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = (1..n)
                    .map(|r| {
                        (0..n)
                            .filter(|&j| j != c)
                            .map(|j| m[r][j])
                            .collect()
                    })
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                d += s * m[0][c] * det_i128(&minor);
            }
            d
        }
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Normal of the hyperplane through d affinely independent points in R^d,
/// via cofactor expansion of the difference matrix. None if degenerate.
fn hyperplane_normal(pts: &[&Vec<i128>]) -> Option<Vec<i128>> {
    let d = pts[0].len();
    debug_assert_eq!(pts.len(), d);
    let diffs: Vec<Vec<i128>> = pts[1..]
        .iter()
        .map(|p| (0..d).map(|j| p[j] - pts[0][j]).collect())
        .collect();
    let mut normal = vec![0i128; d];
    for i in 0..d {
        let minor: Vec<Vec<i128>> = diffs
            .iter()
            .map(|row| {
                (0..d)
                    .filter(|&j| j != i)
                    .map(|j| row[j])
                    .collect()
            })
            .collect();
        let s = if i % 2 == 0 { 1 } else { -1 };
        normal[i] = s * det_i128(&minor);
    }
    if normal.iter().all(|&v| v == 0) {
        return None;
    }
    let g = normal.iter().fold(0i128, |acc, &v| gcd_i128(acc, v));
    for v in normal.iter_mut() {
        *v /= g;
    }
    Some(normal)
}

/// All facets of the hull of a full-dimensional integer point set.
/// Brute-force supporting-hyperplane enumeration; fine at desk scale.
pub fn hull_facets(points: &[Vec<i128>]) -> Vec<Facet> {
    let d = points[0].len();
    let m = points.len();
    if d == 0 {
        return Vec::new();
    }
    if d == 1 {
        let (mut lo, mut hi) = (0usize, 0usize);
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        return vec![
            Facet {
                normal: vec![-1],
                offset: -points[lo][0],
                tight: (0..m).filter(|&i| points[i][0] == points[lo][0]).collect(),
            },
            Facet {
                normal: vec![1],
                offset: points[hi][0],
                tight: (0..m).filter(|&i| points[i][0] == points[hi][0]).collect(),
            },
        ];
    }
    let mut facets: Vec<Facet> = Vec::new();
    let mut seen: std::collections::HashSet<(Vec<i128>, i128)> = std::collections::HashSet::new();
    let mut combo: Vec<usize> = (0..d).collect();
    loop {
        let pts: Vec<&Vec<i128>> = combo.iter().map(|&i| &points[i]).collect();
        if let Some(mut normal) = hyperplane_normal(&pts) {
            let mut offset = normal
                .iter()
                .zip(points[combo[0]].iter())
                .map(|(&a, &b)| a * b)
                .sum::<i128>();
            // orient so all points satisfy normal . x <= offset
            let mut lower = false;
            let mut upper = false;
            for p in points {
                let v: i128 = normal.iter().zip(p.iter()).map(|(&a, &b)| a * b).sum();
                if v > offset {
                    upper = true;
                }
                if v < offset {
                    lower = true;
                }
                if upper && lower {
                    break;
                }
            }
            if !(upper && lower) {
                if upper {
                    for v in normal.iter_mut() {
                        *v = -*v;
                    }
                    offset = -offset;
                }
                if seen.insert((normal.clone(), offset)) {
                    let tight: Vec<usize> = (0..m)
                        .filter(|&i| {
                            normal
                                .iter()
                                .zip(points[i].iter())
                                .map(|(&a, &b)| a * b)
                                .sum::<i128>()
                                == offset
                        })
                        .collect();
                    facets.push(Facet {
                        normal,
                        offset,
                        tight,
                    });
                }
            }
        }
        // next d-combination
        let mut i = d;
        loop {
            if i == 0 {
                return facets;
            }
            i -= 1;
            if combo[i] != i + m - d {
                combo[i] += 1;
                for j in i + 1..d {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Triangulate the hull of a full-dimensional integer point set; returns
/// index simplices (d+1 indices each).
pub fn triangulate(points: &[Vec<i128>]) -> Vec<Vec<usize>> {
    let d = points[0].len();
    if d == 0 {
        return vec![vec![0]];
    }
    if d == 1 {
        let mut lo = 0;
        let mut hi = 0;
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        if points[lo][0] == points[hi][0] {
            return Vec::new();
        }
        return vec![vec![lo, hi]];
    }
    let facets = hull_facets(points);
    // lexicographically smallest point is always a vertex
    let apex = (0..points.len())
        .min_by(|&a, &b| points[a].cmp(&points[b]))
        .expect("nonempty");
    let mut simplices = Vec::new();
    for f in &facets {
        if f.tight.contains(&apex) {
            continue;
        }
        // project the facet to d-1 coordinates on which it is full-dim
        let fpts: Vec<Vec<i128>> = f.tight.iter().map(|&i| points[i].clone()).collect();
        let keep = best_projection(&fpts, d - 1);
        let proj: Vec<Vec<i128>> = fpts
            .iter()
            .map(|p| keep.iter().map(|&j| p[j]).collect())
            .collect();
        for s in triangulate(&proj) {
            let mut simplex: Vec<usize> = s.iter().map(|&k| f.tight[k]).collect();
            simplex.push(apex);
            simplices.push(simplex);
        }
    }
    simplices
}

/// Choose `k` coordinates on which the affine hull of `pts` projects
/// bijectively (i.e. the projected difference matrix has rank k).
fn best_projection(pts: &[Vec<i128>], k: usize) -> Vec<usize> {
    let d = pts[0].len();
    let diffs: Vec<Vec<Rat>> = pts[1..]
        .iter()
        .map(|p| {
            (0..d)
                .map(|j| Rat::from_i64((p[j] - pts[0][j]) as i64))
                .collect()
        })
        .collect();
    // greedy column selection by rank growth
    let mut keep: Vec<usize> = Vec::new();
    for j in 0..d {
        if keep.len() == k {
            break;
        }
        let mut cand = keep.clone();
        cand.push(j);
        let sub: Vec<Vec<Rat>> = diffs
            .iter()
            .map(|row| cand.iter().map(|&c| row[c].clone()).collect())
            .collect();
        if crate::linalg::rank(sub) == cand.len() {
            keep.push(j);
        }
    }
    debug_assert_eq!(keep.len(), k, "projection rank deficiency");
    keep
}

/// Exact volume of the hull of a full-dimensional integer point set.
pub fn volume_integer(points: &[Vec<i128>]) -> Rat {
    let d = points[0].len();
    if d == 0 {
        return Rat::zero();
    }
    let mut total = Rat::zero();
    let simplices = triangulate(points);
    let mut factorial = 1i128;
    for i in 2..=d as i128 {
        factorial *= i;
    }
    for s in simplices {
        let base = &points[s[d]];
        let m: Vec<Vec<i128>> = s[..d]
            .iter()
            .map(|&i| (0..d).map(|j| points[i][j] - base[j]).collect())
            .collect();
        let dv = det_i128(&m).abs();
        total += Rat::new(dv.into(), factorial.into());
    }
    total
}

/// Integer bounding-box points of a polytope shifted by a rational `delta`
/// are enumerated by the caller; this helper just gives the box.
pub fn bounding_box(points: &[ExponentVector]) -> (Vec<i64>, Vec<i64>) {
    let n = points[0].len();
    let mut lo = vec![i64::MAX; n];
    let mut hi = vec![i64::MIN; n];
    for p in points {
        for j in 0..n {
            lo[j] = lo[j].min(p[j]);
            hi[j] = hi[j].max(p[j]);
        }
    }
    (lo, hi)
}
