//! Real standard-form conic solver:
//!
//! ```text
//! minimise <C, X>  s.t.  <A_k, X> = b_k,  X = (X_1, ..., X_p, x_lp),  X_i ⪰ 0, x_lp >= 0
//! dual:    maximise b·y  s.t.  S = C - Σ y_k A_k ⪰ 0
//! ```
//!
//! Infeasible-start primal-dual path following with the HKM direction and a
//! Mehrotra predictor-corrector step. The Schur complement is dense and
//! factored by Cholesky; blocks are small so nothing is exploited beyond the
//! sparsity of the constraint matrices.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::linalg::{symmetric_eigenvalues, RMatrix};

/// One coefficient of a constraint or objective. For PSD blocks `(i, j)`
/// and `(j, i)` are listed separately; for the LP block `i == j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub v: f64,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Row {
    pub entries: Vec<Entry>,
}

impl Row {
    /// Adds `v` at `(i, j)` and `(j, i)` of a PSD block.
    #[cfg(test)]
    pub fn sym(&mut self, block: usize, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        self.entries.push(Entry { block, i, j, v });
        if i != j {
            self.entries.push(Entry { block, i: j, j: i, v });
        }
    }

    pub fn lp(&mut self, block: usize, i: usize, v: f64) {
        if v != 0.0 {
            self.entries.push(Entry { block, i, j: i, v });
        }
    }

    fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.v * e.v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ConeProblem {
    pub psd: Vec<usize>,
    pub lp: usize,
    pub c: Row,
    pub rows: Vec<Row>,
    pub b: Vec<f64>,
}

impl ConeProblem {
    pub fn lp_block(&self) -> usize {
        self.psd.len()
    }
}

/// Primal or dual point: one dense matrix per PSD block plus the LP vector.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Point {
    pub mats: Vec<RMatrix>,
    pub lp: DVector<f64>,
}

impl Point {
    fn zeros(p: &ConeProblem) -> Self {
        Point { mats: p.psd.iter().map(|&n| RMatrix::zeros(n, n)).collect(), lp: DVector::zeros(p.lp) }
    }

    fn scaled_identity(p: &ConeProblem, k: &[f64], k_lp: f64) -> Self {
        Point {
            mats: p.psd.iter().zip(k).map(|(&n, &v)| RMatrix::identity(n, n) * v).collect(),
            lp: DVector::from_element(p.lp, k_lp),
        }
    }

    fn dot(&self, o: &Point) -> f64 {
        self.mats.iter().zip(&o.mats).map(|(a, b)| a.dot(b)).sum::<f64>() + self.lp.dot(&o.lp)
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    fn axpy(&mut self, a: f64, o: &Point) {
        for (m, n) in self.mats.iter_mut().zip(&o.mats) {
            *m += n * a;
        }
        self.lp.axpy(a, &o.lp, 1.0);
    }

    fn sub(&self, o: &Point) -> Point {
        let mut r = self.clone();
        r.axpy(-1.0, o);
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EngineStatus {
    Optimal,
    MaxIter,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub(crate) struct EngineResult {
    pub status: EngineStatus,
    pub x: Point,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub rel_gap: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub trace: bool,
}

fn to_point(p: &ConeProblem, r: &Row) -> Point {
    let mut out = Point::zeros(p);
    let lpb = p.lp_block();
    for e in &r.entries {
        if e.block == lpb {
            out.lp[e.i] += e.v;
        } else {
            out.mats[e.block][(e.i, e.j)] += e.v;
        }
    }
    out
}

fn apply(p: &ConeProblem, r: &Row, x: &Point) -> f64 {
    let lpb = p.lp_block();
    r.entries
        .iter()
        .map(|e| if e.block == lpb { e.v * x.lp[e.i] } else { e.v * x.mats[e.block][(e.i, e.j)] })
        .sum()
}

fn a_op(p: &ConeProblem, x: &Point) -> DVector<f64> {
    DVector::from_iterator(p.rows.len(), p.rows.iter().map(|r| apply(p, r, x)))
}

fn at_op(p: &ConeProblem, y: &DVector<f64>) -> Point {
    let mut out = Point::zeros(p);
    let lpb = p.lp_block();
    for (r, &yk) in p.rows.iter().zip(y.iter()) {
        if yk == 0.0 {
            continue;
        }
        for e in &r.entries {
            if e.block == lpb {
                out.lp[e.i] += yk * e.v;
            } else {
                out.mats[e.block][(e.i, e.j)] += yk * e.v;
            }
        }
    }
    out
}

fn sym(m: &RMatrix) -> RMatrix {
    (m + m.transpose()) * 0.5
}

fn inverse_spd(m: &RMatrix) -> Option<RMatrix> {
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Largest `a` such that `x + a dx` stays in the cone (capped at `f64::MAX`).
fn max_step(x: &Point, dx: &Point) -> f64 {
    let mut alpha = f64::MAX;
    for (m, d) in x.mats.iter().zip(&dx.mats) {
        let Some(ch) = Cholesky::new(m.clone()) else { return 0.0 };
        let l = ch.l();
        let Some(linv) = l.clone().try_inverse() else { return 0.0 };
        let t = &linv * d * linv.transpose();
        let lmin = symmetric_eigenvalues(&t).first().copied().unwrap_or(0.0);
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    for (xi, di) in x.lp.iter().zip(dx.lp.iter()) {
        if *di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    alpha
}

/// `x + alpha dx`, with `alpha` halved until every block still factors.
/// Rounding can push a nearly singular block out of the cone even when the
/// exact step stays inside it.
fn step_in_cone(x: &Point, dx: &Point, mut alpha: f64) -> Point {
    for _ in 0..30 {
        let mut t = x.clone();
        t.axpy(alpha, dx);
        for mt in &mut t.mats {
            *mt = sym(mt);
        }
        let inside = t.mats.iter().all(|m| Cholesky::new(m.clone()).is_some()) && t.lp.iter().all(|v| *v > 0.0);
        if inside {
            return t;
        }
        alpha *= 0.5;
    }
    x.clone()
}

struct Scaled {
    prob: ConeProblem,
    row_scale: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
}

fn scale_problem(p: &ConeProblem) -> Scaled {
    let mut prob = p.clone();
    let mut row_scale = Vec::with_capacity(p.rows.len());
    for (r, b) in prob.rows.iter_mut().zip(prob.b.iter_mut()) {
        let n = r.norm();
        let k = if n > 0.0 { n } else { 1.0 };
        for e in &mut r.entries {
            e.v /= k;
        }
        *b /= k;
        row_scale.push(k);
    }
    let bn = prob.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b_scale = 1.0 / bn.max(1.0);
    for b in &mut prob.b {
        *b *= b_scale;
    }
    let cn = prob.c.norm();
    let c_scale = 1.0 / cn.max(1.0);
    for e in &mut prob.c.entries {
        e.v *= c_scale;
    }
    Scaled { prob, row_scale, b_scale, c_scale }
}

/// Schur complement `M_kl = <A_k, X A_l S^{-1}>`, LP part `Σ A_k x/s A_l`.
fn schur(p: &ConeProblem, x: &Point, sinv: &[RMatrix], s_lp: &DVector<f64>) -> RMatrix {
    let m = p.rows.len();
    let lpb = p.lp_block();
    let mut out = RMatrix::zeros(m, m);
    // Per block, which rows touch it.
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); p.psd.len() + 1];
    for (k, r) in p.rows.iter().enumerate() {
        let mut seen = vec![false; p.psd.len() + 1];
        for e in &r.entries {
            if !seen[e.block] {
                seen[e.block] = true;
                touching[e.block].push(k);
            }
        }
    }
    for (b, &n) in p.psd.iter().enumerate() {
        let xb = &x.mats[b];
        for &l in &touching[b] {
            let mut t = RMatrix::zeros(n, n);
            for e in p.rows[l].entries.iter().filter(|e| e.block == b) {
                let col = xb.column(e.i) * e.v;
                let mut tc = t.column_mut(e.j);
                tc += col;
            }
            let f = &t * &sinv[b];
            for &k in &touching[b] {
                if k < l {
                    continue;
                }
                let v: f64 = p.rows[k].entries.iter().filter(|e| e.block == b).map(|e| e.v * f[(e.j, e.i)]).sum();
                out[(k, l)] += v;
                if k != l {
                    out[(l, k)] += v;
                }
            }
        }
    }
    if p.lp > 0 {
        let mut a = RMatrix::zeros(m, p.lp);
        for (k, r) in p.rows.iter().enumerate() {
            for e in r.entries.iter().filter(|e| e.block == lpb) {
                a[(k, e.i)] += e.v;
            }
        }
        let mut aw = a.clone();
        for (i, (xi, si)) in x.lp.iter().zip(s_lp.iter()).enumerate() {
            let mut col = aw.column_mut(i);
            col *= xi / si;
        }
        out += aw * a.transpose();
    }
    out
}

fn solve_schur(m: &RMatrix, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Some(ch.solve(rhs));
    }
    let diag_max = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    for reg in [1e-14, 1e-12, 1e-10] {
        let mut mr = m.clone();
        for i in 0..mr.nrows() {
            mr[(i, i)] += reg * diag_max;
        }
        if let Some(ch) = Cholesky::new(mr) {
            return Some(ch.solve(rhs));
        }
    }
    m.clone().lu().solve(rhs)
}

/// HKM direction for the target `H` (the complementarity right-hand side
/// already multiplied by `S^{-1}`).
fn direction(
    p: &ConeProblem,
    mchol: &RMatrix,
    x: &Point,
    sinv: &[RMatrix],
    s_lp: &DVector<f64>,
    rp: &DVector<f64>,
    rd: &Point,
    h: &Point,
) -> Option<(Point, DVector<f64>, Point)> {
    let mut xrs = Point::zeros(p);
    for b in 0..p.psd.len() {
        xrs.mats[b] = &x.mats[b] * &rd.mats[b] * &sinv[b];
    }
    xrs.lp = x.lp.component_mul(&rd.lp).component_div(s_lp);
    let rhs = rp - a_op(p, h) + a_op(p, &xrs);
    let mut dy = solve_schur(mchol, &rhs)?;
    let (mut dx, mut ds) = recover(p, x, sinv, s_lp, rd, h, &dy);
    // Iterative refinement against the exact operator: the Schur matrix is
    // ill-conditioned near the boundary and `A dx = rp` drifts otherwise.
    let tol = 1e-14 * (1.0 + rp.norm());
    for _ in 0..REFINE_STEPS {
        let res = rp - a_op(p, &dx);
        if res.norm() <= tol {
            break;
        }
        let Some(ddy) = solve_schur(mchol, &res) else { break };
        let cand = &dy + ddy;
        let (cdx, cds) = recover(p, x, sinv, s_lp, rd, h, &cand);
        if (rp - a_op(p, &cdx)).norm() >= res.norm() {
            break;
        }
        dy = cand;
        dx = cdx;
        ds = cds;
    }
    Some((dx, dy, ds))
}

const REFINE_STEPS: usize = 3;

/// `ds = rd - A* dy`, `dx = h - sym(X ds S^{-1})`.
fn recover(
    p: &ConeProblem,
    x: &Point,
    sinv: &[RMatrix],
    s_lp: &DVector<f64>,
    rd: &Point,
    h: &Point,
    dy: &DVector<f64>,
) -> (Point, Point) {
    let ds = rd.sub(&at_op(p, dy));
    let mut dx = Point::zeros(p);
    for b in 0..p.psd.len() {
        dx.mats[b] = sym(&(&h.mats[b] - &x.mats[b] * &ds.mats[b] * &sinv[b]));
    }
    dx.lp = &h.lp - x.lp.component_mul(&ds.lp).component_div(s_lp);
    (dx, ds)
}

pub(crate) fn solve(orig: &ConeProblem, opts: &EngineOptions) -> EngineResult {
    let sc = scale_problem(orig);
    let unscale = 1.0 / (sc.b_scale * sc.c_scale);
    // Relative gap on the original objective scale.
    let gap_of = |pobj: f64, dobj: f64| {
        let (po, d) = (pobj * unscale, dobj * unscale);
        (po - d).abs() / (1.0 + po.abs() + d.abs())
    };
    let p = &sc.prob;
    let m = p.rows.len();
    let b = DVector::from_vec(p.b.clone());
    let c = to_point(p, &p.c);
    let n_total: f64 = p.psd.iter().map(|&n| n as f64).sum::<f64>() + p.lp as f64;

    // Starting point in the style of SDPT3.
    let max_row = p.rows.iter().map(Row::norm).fold(0.0f64, f64::max);
    let c_norm = c.norm();
    let xi_of = |n: usize| {
        let ratio = p.rows.iter().zip(&p.b).map(|(r, bk)| (1.0 + bk.abs()) / (1.0 + r.norm())).fold(0.0f64, f64::max);
        (10.0f64).max((n as f64).sqrt()).max(n as f64 * ratio)
    };
    let eta_of = |n: usize| (10.0f64).max((n as f64).sqrt()).max(max_row).max(c_norm);
    let xi: Vec<f64> = p.psd.iter().map(|&n| xi_of(n)).collect();
    let eta: Vec<f64> = p.psd.iter().map(|&n| eta_of(n)).collect();
    let mut x = Point::scaled_identity(p, &xi, xi_of(p.lp.max(1)));
    let mut s = Point::scaled_identity(p, &eta, eta_of(p.lp.max(1)));
    let mut y = DVector::zeros(m);

    let b_norm = b.norm();
    let mut status = EngineStatus::MaxIter;
    let mut iterations = 0;
    let (mut pobj, mut dobj, mut rel_gap, mut pinf, mut dinf);
    let mut best: Option<(f64, Point, DVector<f64>, Point)> = None;
    let mut best_iter = 0;
    loop {
        pobj = c.dot(&x);
        dobj = b.dot(&y);
        let rp = &b - a_op(p, &x);
        let rd = c.sub(&s).sub(&at_op(p, &y));
        pinf = rp.norm() / (1.0 + b_norm);
        dinf = rd.norm() / (1.0 + c_norm);
        rel_gap = gap_of(pobj, dobj);
        let mu = x.dot(&s) / n_total;
        let merit = rel_gap.max(pinf).max(dinf);
        if best.as_ref().map_or(true, |(v, ..)| merit < *v) {
            best = Some((merit, x.clone(), y.clone(), s.clone()));
            best_iter = iterations;
        }
        if opts.trace {
            eprintln!(
                "iter {iterations:3} pobj {pobj:+.10e} dobj {dobj:+.10e} gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e} mu {mu:.2e}"
            );
        }
        if rel_gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            status = EngineStatus::Optimal;
            break;
        }
        // Farkas-type detection on diverging iterates.
        if dobj > 0.0 && y.norm() > 1e8 {
            let yh = &y / dobj;
            let aty = at_op(p, &yh);
            if min_cone_eigenvalue(&aty.mats, &aty.lp, -1.0) >= -1e-6 {
                status = EngineStatus::PrimalInfeasible;
                break;
            }
        }
        if pobj < 0.0 && x.norm() > 1e8 {
            let mut xh = x.clone();
            let k = -1.0 / pobj;
            for mt in &mut xh.mats {
                *mt *= k;
            }
            xh.lp *= k;
            if a_op(p, &xh).norm() <= 1e-6 {
                status = EngineStatus::DualInfeasible;
                break;
            }
        }
        if iterations >= opts.max_iter || iterations - best_iter >= STALL_ITERS {
            status = EngineStatus::MaxIter;
            break;
        }
        iterations += 1;

        let mut sinv = Vec::with_capacity(p.psd.len());
        for sb in &s.mats {
            match inverse_spd(sb) {
                Some(v) => sinv.push(v),
                None => {
                    status = EngineStatus::NumericalFailure;
                    break;
                }
            }
        }
        if status == EngineStatus::NumericalFailure {
            break;
        }
        let mschur = schur(p, &x, &sinv, &s.lp);

        // Predictor: target zero complementarity.
        let mut h = x.clone();
        for mt in &mut h.mats {
            *mt *= -1.0;
        }
        h.lp *= -1.0;
        let Some((dxa, _, dsa)) = direction(p, &mschur, &x, &sinv, &s.lp, &rp, &rd, &h) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let ap = max_step(&x, &dxa).min(1.0);
        let ad = max_step(&s, &dsa).min(1.0);
        let mut xa = x.clone();
        xa.axpy(ap, &dxa);
        let mut sa = s.clone();
        sa.axpy(ad, &dsa);
        let mu_aff = xa.dot(&sa) / n_total;
        let sigma = (mu_aff / mu).max(0.0).powi(3).min(1.0);

        // Corrector.
        let mut h = Point::zeros(p);
        for bk in 0..p.psd.len() {
            let t = &dxa.mats[bk] * &dsa.mats[bk] * &sinv[bk];
            h.mats[bk] = &sinv[bk] * (sigma * mu) - &x.mats[bk] - t;
        }
        h.lp = DVector::from_iterator(
            p.lp,
            (0..p.lp).map(|i| (sigma * mu - dxa.lp[i] * dsa.lp[i]) / s.lp[i] - x.lp[i]),
        );
        let Some((dx, dy, ds)) = direction(p, &mschur, &x, &sinv, &s.lp, &rp, &rd, &h) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let gamma = 0.9 + 0.09 * ap.min(ad);
        let alpha_p = (gamma * max_step(&x, &dx)).min(1.0);
        let alpha_d = (gamma * max_step(&s, &ds)).min(1.0);
        if opts.trace {
            eprintln!("     step primal {alpha_p:.2e} dual {alpha_d:.2e} sigma {sigma:.2e}");
        }
        if alpha_p < 1e-12 && alpha_d < 1e-12 {
            status = EngineStatus::NumericalFailure;
            break;
        }
        x = step_in_cone(&x, &dx, alpha_p);
        y.axpy(alpha_d, &dy, 1.0);
        s = step_in_cone(&s, &ds, alpha_d);
    }

    if matches!(status, EngineStatus::NumericalFailure | EngineStatus::MaxIter) {
        if let Some((_, bx, by, bs)) = best {
            x = bx;
            y = by;
            pobj = c.dot(&x);
            dobj = b.dot(&y);
            rel_gap = gap_of(pobj, dobj);
            pinf = (&b - a_op(p, &x)).norm() / (1.0 + b_norm);
            dinf = c.sub(&bs).sub(&at_op(p, &y)).norm() / (1.0 + c_norm);
        }
        let k = REDUCED_ACCURACY;
        if rel_gap <= k * opts.gap_tol && pinf <= k * opts.feas_tol && dinf <= k * opts.feas_tol {
            status = EngineStatus::Optimal;
        }
    }

    // Undo scaling: X = X' / b_scale, y_k = y'_k / (row_k c_scale).
    let kx = 1.0 / sc.b_scale;
    for mt in &mut x.mats {
        *mt *= kx;
    }
    x.lp *= kx;
    let y_out: Vec<f64> = y.iter().zip(&sc.row_scale).map(|(v, r)| v / (r * sc.c_scale)).collect();
    EngineResult {
        status,
        x,
        y: y_out,
        iterations,
        primal_obj: pobj * unscale,
        dual_obj: dobj * unscale,
        rel_gap,
        primal_infeas: pinf,
        dual_infeas: dinf,
    }
}

/// Iterations without a better merit after which the best iterate is
/// returned.
const STALL_ITERS: usize = 25;

/// A stalled run whose best iterate is within this factor of every
/// tolerance still counts as converged.
const REDUCED_ACCURACY: f64 = 10.0;

/// Smallest eigenvalue over all blocks of `sign * (mats, lp)`.
fn min_cone_eigenvalue(mats: &[RMatrix], lp: &DVector<f64>, sign: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for m in mats {
        let e = symmetric_eigenvalues(&(m * sign));
        if let Some(v) = e.first() {
            worst = worst.min(*v);
        }
    }
    for v in lp.iter() {
        worst = worst.min(sign * v);
    }
    worst
}

#[allow(dead_code)]
pub(crate) fn dense_row(block: usize, m: &DMatrix<f64>) -> Row {
    let mut r = Row::default();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] != 0.0 {
                r.entries.push(Entry { block, i, j, v: m[(i, j)] });
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> EngineOptions {
        EngineOptions { gap_tol: 1e-10, feas_tol: 1e-10, max_iter: 100, trace: false }
    }

    #[test]
    fn two_by_two_ones_matrix() {
        // min -(X01 + X10) s.t. X00 = 1, X11 = 1.
        let mut c = Row::default();
        c.sym(0, 0, 1, -1.0);
        let mut r0 = Row::default();
        r0.sym(0, 0, 0, 1.0);
        let mut r1 = Row::default();
        r1.sym(0, 1, 1, 1.0);
        let p = ConeProblem { psd: vec![2], lp: 0, c, rows: vec![r0, r1], b: vec![1.0, 1.0] };
        let r = solve(&p, &opts());
        assert_eq!(r.status, EngineStatus::Optimal);
        assert!((r.primal_obj + 2.0).abs() < 1e-8);
        assert!((r.dual_obj + 2.0).abs() < 1e-8);
    }

    #[test]
    fn small_lp() {
        // min -x0 - 2 x1 s.t. x0 + x1 + x2 = 4, x1 + x3 = 3.
        let mut c = Row::default();
        c.lp(0, 0, -1.0);
        c.lp(0, 1, -2.0);
        let mut r0 = Row::default();
        r0.lp(0, 0, 1.0);
        r0.lp(0, 1, 1.0);
        r0.lp(0, 2, 1.0);
        let mut r1 = Row::default();
        r1.lp(0, 1, 1.0);
        r1.lp(0, 3, 1.0);
        let p = ConeProblem { psd: vec![], lp: 4, c, rows: vec![r0, r1], b: vec![4.0, 3.0] };
        let r = solve(&p, &opts());
        assert_eq!(r.status, EngineStatus::Optimal);
        assert!((r.primal_obj + 7.0).abs() < 1e-8, "{}", r.primal_obj);
    }

    #[test]
    fn infeasible_lp_detected() {
        // x0 + x1 = -1 with x >= 0.
        let mut c = Row::default();
        c.lp(0, 0, 1.0);
        let mut r0 = Row::default();
        r0.lp(0, 0, 1.0);
        r0.lp(0, 1, 1.0);
        let p = ConeProblem { psd: vec![], lp: 2, c, rows: vec![r0], b: vec![-1.0] };
        let r = solve(&p, &EngineOptions { max_iter: 200, ..opts() });
        assert_eq!(r.status, EngineStatus::PrimalInfeasible);
    }
}
