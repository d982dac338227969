//! Dense primal-dual interior-point solver with dual certificates.
//!
//! An [`SdpProblem`] is a maximisation over two Hermitian blocks and a
//! scale. It is handed to the real conic engine through the symmetric
//! embedding `H -> [[Re H, -Im H], [Im H, Re H]]`, with a third PSD block
//! for the residual `sΛ - G+ - G-` and an LP block for `s` and the slacks of
//! one-sided constraints. The residual identity is imposed entrywise along a
//! Hermitian basis of `d x d` matrices.
//!
//! Gram matrices of weak coherent states are badly conditioned, so the
//! engine sees the problem in the whitening frame of Λ (see `frame`), where
//! the residual cone is close to `sI - H+ - H- ⪰ 0`. Every reported bound
//! comes from the dual multipliers mapped back to the original problem and
//! re-checked by [`verify_certificate`]. The engine
//! starts from scaled identities (`X = ξI`, `S = ηI` with `ξ`, `η` chosen from
//! the data norms) and is allowed to be infeasible along the way.

mod certificate;
pub(crate) mod engine;
mod frame;
mod lp;

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{c, unembed, CMatrix};
use crate::sdp_model::{Functional, SdpProblem};
use engine::{ConeProblem, EngineOptions, EngineStatus, Entry, Row};

pub use certificate::{verify_certificate, Certificate, CertificateResiduals, VerificationResult};
pub use lp::{solve_lp, LinearProgram, LpReport, LpStatus, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)` at which to stop.
    pub gap_tol: f64,
    /// Relative primal and dual residual at which to stop.
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Tolerance on negative eigenvalues of the certificate slacks.
    pub cert_tol: f64,
    /// Print one line per iteration to stderr.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { gap_tol: 1e-8, feas_tol: 1e-8, max_iter: 200, cert_tol: 1e-9, trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical_failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub g_plus: CMatrix,
    pub g_minus: CMatrix,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective at the returned primal point.
    pub primal_value: f64,
    /// Lagrangian bound of the returned multipliers, before any
    /// eigenvalue inflation.
    pub dual_value: f64,
    /// `dual_value - primal_value`.
    pub gap: f64,
    pub iterations: usize,
    pub primal: Option<PrimalPoint>,
    pub certificate: Option<Certificate>,
    pub residuals: Option<CertificateResiduals>,
    /// Normalised dual ray proving infeasibility, when one was found.
    pub farkas: Option<Vec<f64>>,
}

impl SolveReport {
    /// Relative gap as used by the stopping rule.
    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / (1.0 + self.primal_value.abs() + self.dual_value.abs())
    }
}

/// How each engine row maps back to the Hermitian problem.
#[derive(Debug, Clone, Copy)]
enum RowKind {
    /// Coupling along `E_ii`.
    Diag(usize),
    /// Coupling along `E_ij + E_ji`, `i < j`.
    Real(usize, usize),
    /// Coupling along `i E_ij - i E_ji`, `i < j`.
    Imag(usize, usize),
    Equality(usize),
    Lower(usize),
    Upper(usize),
    Cap,
    Scale,
}

const BLOCK_PLUS: usize = 0;
const BLOCK_MINUS: usize = 1;
const BLOCK_RESIDUAL: usize = 2;
const BLOCK_LP: usize = 3;

/// Adds `<h, unembed(X_block)>` = `tr(embed(h) X_block) / 2` to a row.
fn push_hermitian(row: &mut Row, block: usize, h: &CMatrix, k: f64) {
    let d = h.nrows();
    for i in 0..d {
        for j in 0..d {
            let z = h[(i, j)] * (0.5 * k);
            if z.re != 0.0 {
                row.entries.push(Entry { block, i, j, v: z.re });
                row.entries.push(Entry { block, i: i + d, j: j + d, v: z.re });
            }
            if z.im != 0.0 {
                row.entries.push(Entry { block, i, j: j + d, v: -z.im });
                row.entries.push(Entry { block, i: i + d, j, v: z.im });
            }
        }
    }
}

fn push_functional(row: &mut Row, f: &Functional, k: f64) {
    push_hermitian(row, BLOCK_PLUS, &f.plus, k);
    push_hermitian(row, BLOCK_MINUS, &f.minus, k);
    row.lp(BLOCK_LP, 0, f.scale * k);
}

fn basis_element(kind: RowKind, d: usize) -> CMatrix {
    let mut e = CMatrix::zeros(d, d);
    match kind {
        RowKind::Diag(i) => e[(i, i)] = c(1.0, 0.0),
        RowKind::Real(i, j) => {
            e[(i, j)] = c(1.0, 0.0);
            e[(j, i)] = c(1.0, 0.0);
        }
        RowKind::Imag(i, j) => {
            e[(i, j)] = c(0.0, 1.0);
            e[(j, i)] = c(0.0, -1.0);
        }
        _ => unreachable!("not a coupling row"),
    }
    e
}

struct Translation {
    cone: ConeProblem,
    kinds: Vec<RowKind>,
}

fn translate(p: &SdpProblem) -> Translation {
    let d = p.dim();
    let mut lp_len = 1;
    let mut next_lp = || {
        lp_len += 1;
        lp_len - 1
    };
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut kinds = Vec::new();

    let mut coupling = Vec::with_capacity(d * d);
    for i in 0..d {
        coupling.push(RowKind::Diag(i));
        for j in i + 1..d {
            coupling.push(RowKind::Real(i, j));
            coupling.push(RowKind::Imag(i, j));
        }
    }
    for kind in coupling {
        let e = basis_element(kind, d);
        let mut row = Row::default();
        for blk in [BLOCK_PLUS, BLOCK_MINUS, BLOCK_RESIDUAL] {
            push_hermitian(&mut row, blk, &e, 1.0);
        }
        let lam: f64 = e.iter().zip(p.lambda.iter()).map(|(a, l): (&Complex64, &Complex64)| (a.conj() * l).re).sum();
        row.lp(BLOCK_LP, 0, -lam);
        rows.push(row);
        b.push(0.0);
        kinds.push(kind);
    }
    for (k, e) in p.equalities.iter().enumerate() {
        let mut row = Row::default();
        push_functional(&mut row, &e.functional, 1.0);
        rows.push(row);
        b.push(e.value);
        kinds.push(RowKind::Equality(k));
    }
    for (k, iv) in p.intervals.iter().enumerate() {
        if let Some(l) = iv.lower {
            let mut row = Row::default();
            push_functional(&mut row, &iv.functional, 1.0);
            row.lp(BLOCK_LP, next_lp(), -1.0);
            rows.push(row);
            b.push(l);
            kinds.push(RowKind::Lower(k));
        }
        if let Some(u) = iv.upper {
            let mut row = Row::default();
            push_functional(&mut row, &iv.functional, 1.0);
            row.lp(BLOCK_LP, next_lp(), 1.0);
            rows.push(row);
            b.push(u);
            kinds.push(RowKind::Upper(k));
        }
    }
    if let Some(cap) = p.cap {
        let mut row = Row::default();
        push_functional(&mut row, &p.objective, 1.0);
        row.lp(BLOCK_LP, next_lp(), 1.0);
        rows.push(row);
        b.push(cap - p.objective_constant);
        kinds.push(RowKind::Cap);
    }
    let (lo, hi) = p.scale_bounds;
    if lo == hi {
        let mut row = Row::default();
        row.lp(BLOCK_LP, 0, 1.0);
        rows.push(row);
        b.push(lo);
        kinds.push(RowKind::Scale);
    } else {
        let mut row = Row::default();
        row.lp(BLOCK_LP, 0, 1.0);
        row.lp(BLOCK_LP, next_lp(), -1.0);
        rows.push(row);
        b.push(lo);
        kinds.push(RowKind::Scale);
        let mut row = Row::default();
        row.lp(BLOCK_LP, 0, 1.0);
        row.lp(BLOCK_LP, next_lp(), 1.0);
        rows.push(row);
        b.push(hi);
        kinds.push(RowKind::Scale);
    }
    let mut obj = Row::default();
    push_functional(&mut obj, &p.objective, -1.0);
    let cone = ConeProblem { psd: vec![2 * d; 3], lp: lp_len, c: obj, rows, b };
    Translation { cone, kinds }
}

fn certificate_from_dual(p: &SdpProblem, kinds: &[RowKind], y: &[f64]) -> Certificate {
    let d = p.dim();
    let mut z = CMatrix::zeros(d, d);
    let mut equality = vec![0.0; p.equalities.len()];
    let mut lower = vec![0.0; p.intervals.len()];
    let mut upper = vec![0.0; p.intervals.len()];
    let mut cap = 0.0;
    for (kind, &yk) in kinds.iter().zip(y) {
        match *kind {
            RowKind::Diag(_) | RowKind::Real(..) | RowKind::Imag(..) => {
                z -= basis_element(*kind, d) * c(yk, 0.0);
            }
            RowKind::Equality(i) => equality[i] = -yk,
            RowKind::Lower(j) => lower[j] = yk,
            RowKind::Upper(j) => upper[j] = -yk,
            RowKind::Cap => cap = -yk,
            RowKind::Scale => {}
        }
    }
    Certificate { z, equality, lower, upper, cap }
}

/// Solves the SDP and attaches a dual certificate.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SolveReport> {
    problem.validate()?;
    let d = problem.dim();
    if problem.objective_is_constant() {
        let cert = Certificate::zero(problem);
        let check = verify_certificate(problem, &cert, opts.cert_tol)?;
        let v = problem.objective_constant;
        return Ok(SolveReport {
            status: SolveStatus::Optimal,
            primal_value: v,
            dual_value: check.dual_value,
            gap: check.dual_value - v,
            iterations: 0,
            primal: Some(PrimalPoint { g_plus: CMatrix::zeros(d, d), g_minus: CMatrix::zeros(d, d), s: problem.scale_bounds.0 }),
            certificate: Some(cert),
            residuals: Some(check.residuals),
            farkas: None,
        });
    }

    let Some(frame) = frame::Frame::new(&problem.lambda) else {
        return Err(crate::error::invalid("the Gram matrix has no positive eigenvalue"));
    };
    let reduced = frame.whiten(problem);
    let t = translate(&reduced);
    let eo = EngineOptions { gap_tol: opts.gap_tol, feas_tol: opts.feas_tol, max_iter: opts.max_iter, trace: opts.trace };
    let r = engine::solve(&t.cone, &eo);
    if opts.trace {
        eprintln!(
            "engine {:?} after {} iterations: pobj {:+.12e} dobj {:+.12e} gap {:.2e} pinf {:.2e} dinf {:.2e}",
            r.status, r.iterations, r.primal_obj, r.dual_obj, r.rel_gap, r.primal_infeas, r.dual_infeas
        );
    }

    if r.status == EngineStatus::PrimalInfeasible {
        let norm = r.y.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        return Ok(SolveReport {
            status: SolveStatus::Infeasible,
            primal_value: f64::NAN,
            dual_value: f64::NAN,
            gap: f64::NAN,
            iterations: r.iterations,
            primal: None,
            certificate: None,
            residuals: None,
            farkas: Some(r.y.iter().map(|v| v / norm).collect()),
        });
    }

    let g_plus = frame.lift_primal(&unembed(&r.x.mats[BLOCK_PLUS]));
    let g_minus = frame.lift_primal(&unembed(&r.x.mats[BLOCK_MINUS]));
    let s = r.x.lp[0];
    let primal_value = problem.objective_value(&g_plus, &g_minus, s);
    let cert = certificate_from_dual(&reduced, &t.kinds, &r.y);
    let check = verify_certificate(problem, &cert, opts.cert_tol)?;
    let mut residuals = check.residuals.clone();
    residuals.complementarity = certificate::complementarity(problem, &cert, &g_plus, &g_minus, s);
    let gap = check.dual_value - primal_value;
    let status = match r.status {
        EngineStatus::Optimal => SolveStatus::Optimal,
        EngineStatus::MaxIter => SolveStatus::MaxIter,
        // Maximisation problems here are bounded, so an unbounded primal
        // only arises from a numerical breakdown.
        EngineStatus::DualInfeasible | EngineStatus::NumericalFailure => SolveStatus::NumericalFailure,
        EngineStatus::PrimalInfeasible => unreachable!(),
    };
    Ok(SolveReport {
        status,
        primal_value,
        dual_value: check.dual_value,
        gap,
        iterations: r.iterations,
        primal: Some(PrimalPoint { g_plus, g_minus, s }),
        certificate: Some(cert),
        residuals: Some(residuals),
        farkas: None,
    })
}
