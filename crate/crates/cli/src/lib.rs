//! Command-line surface: system-file parsing, line-tagged run reports,
//! and the mv / matrix / solve drivers.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;
use toric_core::lattice::{ExponentVector, RatPoly, SparsePolynomial, Support};
use toric_core::numkernel::C64;
use toric_core::resultant::{
    build_incremental_matrix, build_subdivision_matrix, load_matrix, store_matrix,
    ResultantMatrix,
};
use toric_core::solver::{
    assemble, overconstrain, partition_and_schur, solve_roots, Mode, OverconstrainedSystem,
    RootStatus, SolveOptions, SolvePath,
};
use toric_core::subdivision::{mixed_subdivision_seeded, mixed_volume, mv_deficient};
use toric_core::{Error, Rat, Result};

/// Parsed system file: a square system plus optional overconstraining
/// data (direction, u-coefficients, hidden variable, seed).
#[derive(Clone, Debug)]
pub struct SystemFile {
    pub n: usize,
    pub polys: Vec<SparsePolynomial<Rat>>,
    pub dir: Option<Vec<Rat>>,
    pub ucoef: Option<Vec<Rat>>,
    /// 1-based index of the hidden variable, as written in the file.
    pub hide: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn parse_rat(w: &str) -> Result<Rat> {
    w.parse::<Rat>().map_err(|_| parse_err(format!("bad rational '{}'", w)))
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("SYS 1") {
        return Err(parse_err("expected header 'SYS 1'"));
    }
    let nline = lines.next().ok_or_else(|| parse_err("missing N line"))?;
    let n: usize = nline
        .strip_prefix("N ")
        .and_then(|w| w.trim().parse().ok())
        .ok_or_else(|| parse_err("bad N line"))?;
    let mut sf = SystemFile {
        n,
        polys: Vec::new(),
        dir: None,
        ucoef: None,
        hide: None,
        seed: None,
    };
    let mut rest: Vec<&str> = lines.collect();
    rest.reverse(); // use as a stack
    while let Some(line) = rest.pop() {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("POLY") => {
                let m: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| parse_err("bad POLY line"))?;
                let mut terms = Vec::with_capacity(m);
                for _ in 0..m {
                    let tline = rest.pop().ok_or_else(|| parse_err("truncated POLY block"))?;
                    let mut tw = tline.split_whitespace();
                    if tw.next() != Some("TERM") {
                        return Err(parse_err(format!("expected TERM line, got '{}'", tline)));
                    }
                    let c = parse_rat(tw.next().ok_or_else(|| parse_err("TERM missing value"))?)?;
                    let exps: Vec<i64> = tw
                        .map(|w| w.parse().map_err(|_| parse_err("bad exponent")))
                        .collect::<Result<_>>()?;
                    if exps.len() != n {
                        return Err(parse_err("exponent vector length mismatch"));
                    }
                    terms.push((ExponentVector::new(exps), c));
                }
                sf.polys.push(SparsePolynomial::from_terms(terms)?);
            }
            Some("DIR") => {
                sf.dir = Some(words.map(parse_rat).collect::<Result<_>>()?);
            }
            Some("UCOEF") => {
                sf.ucoef = Some(words.map(parse_rat).collect::<Result<_>>()?);
            }
            Some("HIDE") => {
                let k: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| parse_err("bad HIDE line"))?;
                if k == 0 || k > n {
                    return Err(parse_err("HIDE index out of range"));
                }
                sf.hide = Some(k);
            }
            Some("SEED") => {
                sf.seed = words.next().and_then(|w| w.parse().ok());
                if sf.seed.is_none() {
                    return Err(parse_err("bad SEED line"));
                }
            }
            Some(other) => return Err(parse_err(format!("unknown directive '{}'", other))),
            None => {}
        }
    }
    if sf.polys.is_empty() {
        return Err(parse_err("no polynomials"));
    }
    Ok(sf)
}

pub fn system_to_string(sf: &SystemFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "SYS 1");
    let _ = writeln!(out, "N {}", sf.n);
    for f in &sf.polys {
        let _ = writeln!(out, "POLY {}", f.support().len());
        for (e, c) in f.support().points().iter().zip(f.coeffs()) {
            let exps: Vec<String> = (0..sf.n).map(|t| e[t].to_string()).collect();
            let _ = writeln!(out, "TERM {}/{} {}", c.numer(), c.denom(), exps.join(" "));
        }
    }
    let fmt_rats = |v: &[Rat]| -> String {
        v.iter()
            .map(|c| format!("{}/{}", c.numer(), c.denom()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    if let Some(d) = &sf.dir {
        let _ = writeln!(out, "DIR {}", fmt_rats(d));
    }
    if let Some(u) = &sf.ucoef {
        let _ = writeln!(out, "UCOEF {}", fmt_rats(u));
    }
    if let Some(k) = sf.hide {
        let _ = writeln!(out, "HIDE {}", k);
    }
    if let Some(s) = sf.seed {
        let _ = writeln!(out, "SEED {}", s);
    }
    out
}

pub fn load_system(path: &Path) -> Result<SystemFile> {
    parse_system(&std::fs::read_to_string(path)?)
}

/// Line-tagged report: KEY: value, stable across runs at fixed seed
/// except the TIME_* lines.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub lines: Vec<(String, String)>,
}

impl RunReport {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{}: {}", k, v);
        }
        out
    }

    /// Deterministic portion: everything except timing lines.
    pub fn render_stable(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            if !k.starts_with("TIME_") {
                let _ = writeln!(out, "{}: {}", k, v);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixAlgo {
    Subdivision,
    Incremental,
}

#[derive(Clone, Debug)]
pub struct CommonOpts {
    pub u_mode: bool,
    pub hide: Option<usize>,
    pub seed: Option<u64>,
}

impl CommonOpts {
    /// Resolve the overconstraining mode from flags and file directives.
    fn resolve_mode(&self, sf: &SystemFile) -> Result<Mode> {
        if self.u_mode && self.hide.is_some() {
            return Err(parse_err("--u and --hide are mutually exclusive"));
        }
        if let Some(k) = self.hide.or(sf.hide) {
            if k == 0 || k > sf.n {
                return Err(parse_err("hidden variable index out of range"));
            }
            if self.u_mode {
                return Ok(Mode::UResultant);
            }
            Ok(Mode::Hidden(k - 1))
        } else {
            Ok(Mode::UResultant)
        }
    }

    fn resolve_seed(&self, sf: &SystemFile) -> u64 {
        self.seed.or(sf.seed).unwrap_or(1)
    }
}

fn overconstrain_from_file(
    sf: &SystemFile,
    opts: &CommonOpts,
) -> Result<(OverconstrainedSystem, Mode, u64)> {
    let mode = opts.resolve_mode(sf)?;
    let seed = opts.resolve_seed(sf);
    let oc = overconstrain(&sf.polys, mode, seed, sf.ucoef.clone())?;
    Ok((oc, mode, seed))
}

/// Mixed volume of the square system, plus deficient mixed volumes of the
/// overconstrained system when a mode applies.
pub fn cmd_mv(sf: &SystemFile, opts: &CommonOpts) -> Result<RunReport> {
    let mut report = RunReport::default();
    let t0 = Instant::now();
    if sf.polys.len() != sf.n {
        return Err(Error::DimensionMismatch {
            expected: sf.n,
            got: sf.polys.len(),
        });
    }
    let supports: Vec<&Support> = sf.polys.iter().map(|f| f.support()).collect();
    let mv = mixed_volume(&supports)?;
    report.push("MV", mv);
    let seed = opts.resolve_seed(sf);
    let sub = mixed_subdivision_seeded(&supports, seed)?;
    let mixed: Vec<_> = sub.cells.iter().filter(|c| c.is_mixed).collect();
    report.push("MIXED_CELLS", mixed.len());
    report.push("CELLS", sub.cells.len());
    for (i, c) in mixed.iter().enumerate() {
        report.push(format!("CELL_{}", i), format!("volume={}", c.volume));
    }
    // deficient mixed volumes of the overconstrained family
    let (oc, _, _) = overconstrain_from_file(sf, opts)?;
    let oc_supports: Vec<&Support> = oc.polys.iter().map(|f| f.support()).collect();
    let (mvs, deg) = mv_deficient(&oc_supports)?;
    report.push(
        "MV_DEFICIENT",
        mvs.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    report.push("DEG_R", deg);
    report.push("TIME_MV_MS", t0.elapsed().as_millis());
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct MatrixOpts {
    pub algo: MatrixAlgo,
    pub store: Option<std::path::PathBuf>,
    pub load: Option<std::path::PathBuf>,
}

fn build_matrix(
    oc: &OverconstrainedSystem,
    algo: MatrixAlgo,
    seed: u64,
    dir: Option<Vec<Rat>>,
    load: Option<&Path>,
) -> Result<ResultantMatrix<RatPoly>> {
    if let Some(path) = load {
        return load_matrix(path, &oc.polys);
    }
    match algo {
        MatrixAlgo::Subdivision => build_subdivision_matrix(&oc.polys, seed),
        MatrixAlgo::Incremental => build_incremental_matrix(&oc.polys, dir, seed),
    }
}

/// Relative error of the evaluation identity M [alpha^q] = [alpha^p f(alpha)]
/// at a random complex point.
pub fn evaluation_property_error(
    m: &ResultantMatrix<RatPoly>,
    polys: &[SparsePolynomial<RatPoly>],
    seed: u64,
) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xe7a1);
    let nv = m.cols[0].len();
    let alpha: Vec<C64> = (0..nv)
        .map(|_| C64::new(rng.gen_range(0.4..1.6), rng.gen_range(-0.8..0.8)))
        .collect();
    let x0 = C64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
    let colv: Vec<C64> = m
        .cols
        .iter()
        .map(|q| q.eval(&alpha).unwrap_or(C64::new(f64::NAN, 0.0)))
        .collect();
    let mut worst = 0.0f64;
    for (r, row) in m.rows.iter().zip(&m.entries) {
        let lhs: C64 = row
            .iter()
            .zip(&colv)
            .map(|(e, c)| e.eval_complex(x0) * c)
            .sum();
        let f = &polys[r.poly_index];
        let fval: C64 = f
            .support()
            .points()
            .iter()
            .zip(f.coeffs())
            .map(|(e, c)| c.eval_complex(x0) * e.eval(&alpha).unwrap_or(C64::new(f64::NAN, 0.0)))
            .sum();
        let shift = r.multiplier.eval(&alpha).unwrap_or(C64::new(f64::NAN, 0.0));
        let rhs = shift * fval;
        let scale = lhs.norm().max(rhs.norm()).max(1e-30);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    worst
}

pub fn cmd_matrix(sf: &SystemFile, opts: &CommonOpts, mopts: &MatrixOpts) -> Result<RunReport> {
    let mut report = RunReport::default();
    let t0 = Instant::now();
    let (oc, mode, seed) = overconstrain_from_file(sf, opts)?;
    let m = build_matrix(&oc, mopts.algo, seed, sf.dir.clone(), mopts.load.as_deref())?;
    report.push(
        "ALGO",
        match mopts.algo {
            MatrixAlgo::Subdivision => "subdivision",
            MatrixAlgo::Incremental => "incremental",
        },
    );
    report.push(
        "MODE",
        match mode {
            Mode::UResultant => "u".to_string(),
            Mode::Hidden(k) => format!("hide {}", k + 1),
        },
    );
    report.push("DIM", m.dim());
    for i in 0..oc.polys.len() {
        report.push(format!("ROWS_F{}", i), m.rows_of(i));
    }
    let max_deg = m
        .entries
        .iter()
        .flatten()
        .map(|p| p.degree())
        .max()
        .unwrap_or(0);
    report.push("ENTRY_DEGREE", max_deg);
    let err = evaluation_property_error(&m, &oc.polys, seed);
    report.push("EVAL_REL_ERR", format!("{:.3e}", err));
    if err > 1e-10 {
        return Err(Error::Numeric(format!(
            "evaluation property violated: relative error {:.3e}",
            err
        )));
    }
    if let Some(path) = &mopts.store {
        store_matrix(&m, path)?;
        report.push("STORED", path.display());
    }
    report.push("TIME_MATRIX_MS", t0.elapsed().as_millis());
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct SolveOpts {
    pub algo: Option<MatrixAlgo>,
    pub whole_matrix: bool,
    pub cond: Option<f64>,
    pub accept: Option<f64>,
    pub tries: Option<usize>,
    pub matrix_in: Option<std::path::PathBuf>,
    pub matrix_out: Option<std::path::PathBuf>,
}

fn fmt_c(z: C64) -> String {
    format!("{:.10e}{}{:.10e}i", z.re, if z.im < 0.0 { "-" } else { "+" }, z.im.abs())
}

pub fn cmd_solve(sf: &SystemFile, opts: &CommonOpts, sopts: &SolveOpts) -> Result<RunReport> {
    let mut report = RunReport::default();
    if sf.polys.len() != sf.n {
        return Err(Error::DimensionMismatch {
            expected: sf.n,
            got: sf.polys.len(),
        });
    }
    let t0 = Instant::now();
    let (oc, mode, seed) = overconstrain_from_file(sf, opts)?;
    report.push(
        "MODE",
        match mode {
            Mode::UResultant => "u".to_string(),
            Mode::Hidden(k) => format!("hide {}", k + 1),
        },
    );
    if let Some(u) = &oc.u_coeffs {
        report.push(
            "UCOEF",
            u.iter()
                .map(|c| format!("{}/{}", c.numer(), c.denom()))
                .collect::<Vec<_>>()
                .join(" "),
        );
    }
    let oc_supports: Vec<&Support> = oc.polys.iter().map(|f| f.support()).collect();
    let (mvs, deg) = mv_deficient(&oc_supports)?;
    report.push(
        "MV_DEFICIENT",
        mvs.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    report.push("DEG_R", deg);
    report.push("TIME_MV_MS", t0.elapsed().as_millis());

    let t1 = Instant::now();
    let algo = sopts.algo.unwrap_or(match mode {
        Mode::UResultant => MatrixAlgo::Subdivision,
        Mode::Hidden(_) => MatrixAlgo::Incremental,
    });
    let m = build_matrix(&oc, algo, seed, sf.dir.clone(), sopts.matrix_in.as_deref())?;
    if let Some(path) = &sopts.matrix_out {
        store_matrix(&m, path)?;
    }
    report.push(
        "ALGO",
        match algo {
            MatrixAlgo::Subdivision => "subdivision",
            MatrixAlgo::Incremental => "incremental",
        },
    );
    report.push("DIM_M", m.dim());
    for i in 0..oc.polys.len() {
        report.push(format!("ROWS_F{}", i), m.rows_of(i));
    }
    report.push("TIME_MATRIX_MS", t1.elapsed().as_millis());

    let t2 = Instant::now();
    let solve_opts = SolveOptions {
        accept_threshold: sopts.accept.unwrap_or(toric_core::solver::DEFAULT_ACCEPT_THRESHOLD),
        tries: sopts.tries.unwrap_or(3),
        cond_threshold: sopts.cond.unwrap_or(toric_core::numkernel::DEFAULT_COND_THRESHOLD),
        whole_matrix: sopts.whole_matrix,
        seed,
    };
    let mx = assemble(&m);
    let schur = partition_and_schur(&mx, solve_opts.cond_threshold, solve_opts.whole_matrix)?;
    report.push("DIM_M11", schur.block_dim());
    report.push("DIM_A", schur.a.dim());
    report.push("DEGREE_D", schur.a.degree());
    let mut res = solve_roots(&oc, &m, &schur, &solve_opts)?;
    report.push(
        "PATH",
        match (schur.whole, res.path) {
            (true, SolvePath::Companion) => "whole-matrix-companion",
            (true, SolvePath::Pencil) => "whole-matrix-pencil",
            (false, SolvePath::Companion) => "companion",
            (false, SolvePath::Pencil) => "pencil",
        },
    );
    report.push(
        "TRANSFORM",
        res.transform
            .t
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    let count = |f: &dyn Fn(&toric_core::solver::RootCandidate) -> bool| {
        res.candidates.iter().filter(|c| f(c)).count()
    };
    report.push("EIGEN_TOTAL", res.candidates.len());
    report.push(
        "FINITE_REAL",
        count(&|c| c.status != RootStatus::Infinite && c.real),
    );
    report.push(
        "COMPLEX",
        count(&|c| c.status != RootStatus::Infinite && !c.real),
    );
    report.push("INFINITE", count(&|c| c.status == RootStatus::Infinite));
    report.push("MULTIPLE", count(&|c| c.status == RootStatus::Multiple));
    report.push("ACCEPTED", count(&|c| c.status == RootStatus::Accepted));
    report.push("REJECTED", count(&|c| c.status == RootStatus::Rejected));
    // deterministic candidate order
    res.candidates.sort_by(|a, b| {
        let ka = (a.x0.re, a.x0.im);
        let kb = (b.x0.re, b.x0.im);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut idx = 0;
    for c in &res.candidates {
        let status = match c.status {
            RootStatus::Accepted => "accepted",
            RootStatus::Rejected => "rejected",
            RootStatus::Infinite => "infinite",
            RootStatus::Multiple => "multiple",
        };
        let mut parts = vec![status.to_string()];
        if c.status != RootStatus::Infinite {
            parts.push(format!("x0={}", fmt_c(c.x0)));
        }
        for (t, z) in c.coords.iter().enumerate() {
            parts.push(format!("x{}={}", t + 1, fmt_c(*z)));
        }
        if c.residual.is_finite() {
            parts.push(format!("res={:.3e}", c.residual));
        }
        report.push(format!("ROOT_{}", idx), parts.join(" "));
        idx += 1;
    }
    report.push("TIME_SOLVE_MS", t2.elapsed().as_millis());
    Ok(report)
}

/// Exit-code mapping: 0 success, 2 parse error, 3 construction failure,
/// 4 numeric failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Io(_) => 2,
        Error::ZeroPolynomial
        | Error::DimensionMismatch { .. }
        | Error::NonGenericLifting(_)
        | Error::NonGenericDelta(_)
        | Error::NoVertexSummand
        | Error::SizeBoundExceeded
        | Error::SupportMismatch
        | Error::SupportTooLarge(_) => 3,
        Error::Singular(_) | Error::EigenConvergence | Error::Numeric(_) => 4,
    }
}
