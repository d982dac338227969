//! Linear programs through the conic engine's LP block.
//!
//! Variables are shifted and split so that all engine variables are
//! nonnegative; finite two-sided boxes add one slack each. The reported
//! bound is recomputed from the dual vector: `b·y + Σ min(0, S_k) ub_k` with
//! `S = c - Aᵀy`, which is a valid lower bound on the minimum whenever every
//! engine variable with a negative reduced cost has a finite upper bound.

use super::engine::{self, ConeProblem, EngineOptions, EngineStatus, Row};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub c: Vec<f64>,
    /// Rows `a·x = b`.
    pub eq: Vec<(Vec<f64>, f64)>,
    /// Rows `a·x <= b`.
    pub ub: Vec<(Vec<f64>, f64)>,
    /// Per-variable `(lower, upper)`; `None` is unbounded on that side.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub status: LpStatus,
    /// Objective at the returned point.
    pub value: f64,
    /// Dual bound: a lower bound on the minimum, or an upper bound on the
    /// maximum. `None` when it cannot be certified.
    pub bound: Option<f64>,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// `x_j = offset + Σ coeff * u_k` over engine variables.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

pub fn solve_lp(lp: &LinearProgram, gap_tol: f64, max_iter: usize) -> Result<LpReport> {
    let n = lp.c.len();
    if lp.bounds.len() != n {
        return Err(invalid("one bound pair per variable is required"));
    }
    for (a, _) in lp.eq.iter().chain(&lp.ub) {
        if a.len() != n {
            return Err(invalid("constraint row length differs from the number of variables"));
        }
    }
    for (j, (lo, hi)) in lp.bounds.iter().enumerate() {
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return Err(invalid(format!("variable {j} has lower bound above upper bound")));
            }
        }
    }

    let mut n_eng = 0;
    let mut upper = Vec::new();
    let mut maps = Vec::with_capacity(n);
    let mut rows: Vec<Row> = Vec::new();
    let mut b = Vec::new();
    let mut new_var = |ub: Option<f64>, upper: &mut Vec<Option<f64>>| {
        n_eng += 1;
        upper.push(ub);
        n_eng - 1
    };
    let mut box_rows = Vec::new();
    for &(lo, hi) in &lp.bounds {
        match (lo, hi) {
            (Some(l), Some(h)) => {
                let u = new_var(Some(h - l), &mut upper);
                let t = new_var(Some(h - l), &mut upper);
                box_rows.push((u, t, h - l));
                maps.push(VarMap { offset: l, terms: vec![(u, 1.0)] });
            }
            (Some(l), None) => {
                let u = new_var(None, &mut upper);
                maps.push(VarMap { offset: l, terms: vec![(u, 1.0)] });
            }
            (None, Some(h)) => {
                let u = new_var(None, &mut upper);
                maps.push(VarMap { offset: h, terms: vec![(u, -1.0)] });
            }
            (None, None) => {
                let u1 = new_var(None, &mut upper);
                let u2 = new_var(None, &mut upper);
                maps.push(VarMap { offset: 0.0, terms: vec![(u1, 1.0), (u2, -1.0)] });
            }
        }
    }
    let lp_block = 0;
    let push_row = |a: &[f64], rhs: f64, slack: Option<usize>, rows: &mut Vec<Row>, b: &mut Vec<f64>| {
        let mut coeffs = vec![0.0; 0];
        let mut rhs = rhs;
        for (j, &aj) in a.iter().enumerate() {
            if aj == 0.0 {
                continue;
            }
            rhs -= aj * maps[j].offset;
            for &(k, w) in &maps[j].terms {
                if coeffs.len() <= k {
                    coeffs.resize(k + 1, 0.0);
                }
                coeffs[k] += aj * w;
            }
        }
        let mut row = Row::default();
        for (k, v) in coeffs.into_iter().enumerate() {
            row.lp(lp_block, k, v);
        }
        if let Some(s) = slack {
            row.lp(lp_block, s, 1.0);
        }
        rows.push(row);
        b.push(rhs);
    };
    for (a, rhs) in &lp.eq {
        push_row(a, *rhs, None, &mut rows, &mut b);
    }
    let mut slack_ids = Vec::new();
    for _ in &lp.ub {
        slack_ids.push(new_var(None, &mut upper));
    }
    for ((a, rhs), &s) in lp.ub.iter().zip(&slack_ids) {
        push_row(a, *rhs, Some(s), &mut rows, &mut b);
    }
    for &(u, t, w) in &box_rows {
        let mut row = Row::default();
        row.lp(lp_block, u, 1.0);
        row.lp(lp_block, t, 1.0);
        rows.push(row);
        b.push(w);
    }

    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut obj = vec![0.0; n_eng];
    let mut constant = 0.0;
    for (j, &cj) in lp.c.iter().enumerate() {
        constant += sign * cj * maps[j].offset;
        for &(k, w) in &maps[j].terms {
            obj[k] += sign * cj * w;
        }
    }
    let mut c_row = Row::default();
    for (k, v) in obj.iter().enumerate() {
        c_row.lp(lp_block, k, *v);
    }
    let cone = ConeProblem { psd: vec![], lp: n_eng, c: c_row, rows, b: b.clone() };
    let opts = EngineOptions { gap_tol, feas_tol: 1e-10, max_iter, trace: std::env::var_os("LP_TRACE").is_some() };
    let r = engine::solve(&cone, &opts);

    let x: Vec<f64> =
        maps.iter().map(|m| m.offset + m.terms.iter().map(|&(k, w)| w * r.x.lp[k]).sum::<f64>()).collect();
    let value: f64 = lp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
    let status = match r.status {
        EngineStatus::Optimal => LpStatus::Optimal,
        EngineStatus::PrimalInfeasible => LpStatus::Infeasible,
        EngineStatus::DualInfeasible => LpStatus::Unbounded,
        EngineStatus::MaxIter => LpStatus::MaxIter,
        EngineStatus::NumericalFailure => LpStatus::NumericalFailure,
    };
    let bound = if matches!(status, LpStatus::Infeasible | LpStatus::Unbounded) {
        None
    } else {
        // Slack columns have reduced cost -y_i; clamp those rows' multipliers
        // so their reduced costs are nonnegative.
        let mut y = r.y.clone();
        for (i, _) in lp.ub.iter().enumerate() {
            let row = lp.eq.len() + i;
            y[row] = y[row].min(0.0);
        }
        let mut reduced = obj.clone();
        for (row, &yk) in cone.rows.iter().zip(&y) {
            for e in &row.entries {
                reduced[e.i] -= yk * e.v;
            }
        }
        let mut lower: f64 = b.iter().zip(&y).map(|(a, b)| a * b).sum();
        let mut ok = true;
        for (k, &s) in reduced.iter().enumerate() {
            if s < 0.0 {
                match upper[k] {
                    Some(u) => lower += s * u,
                    None => ok = false,
                }
            }
        }
        (ok && lower.is_finite()).then(|| sign * (lower + constant))
    };
    Ok(LpReport { status, value, bound, x, iterations: r.iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximise_with_upper_row() {
        let lp = LinearProgram {
            sense: Sense::Maximize,
            c: vec![1.0],
            eq: vec![],
            ub: vec![(vec![1.0], 3.0)],
            bounds: vec![(Some(0.0), None)],
        };
        let r = solve_lp(&lp, 1e-10, 100).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.value - 3.0).abs() < 1e-8);
        assert!((r.bound.unwrap() - 3.0).abs() < 1e-8);
        assert!(r.bound.unwrap() >= r.value - 1e-12);
    }

    #[test]
    fn degenerate_equality() {
        let lp = LinearProgram {
            sense: Sense::Minimize,
            c: vec![1.0],
            eq: vec![(vec![2.0], 1.0)],
            ub: vec![],
            bounds: vec![(None, None)],
        };
        let r = solve_lp(&lp, 1e-10, 100).unwrap();
        assert!((r.x[0] - 0.5).abs() < 1e-8);
        assert!((r.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn boxed_variables_and_infeasibility() {
        let lp = LinearProgram {
            sense: Sense::Minimize,
            c: vec![1.0, -1.0],
            eq: vec![],
            ub: vec![(vec![1.0, 1.0], 1.5)],
            bounds: vec![(Some(0.2), Some(1.0)), (Some(0.0), Some(1.0))],
        };
        let r = solve_lp(&lp, 1e-10, 100).unwrap();
        assert!((r.value - (0.2 - 1.0)).abs() < 1e-8);
        assert!(r.bound.unwrap() <= r.value + 1e-12);
        let bad = LinearProgram { ub: vec![(vec![1.0, 1.0], 0.1)], ..lp };
        let r = solve_lp(&bad, 1e-10, 200).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            sense: Sense::Maximize,
            c: vec![1.0, 0.0],
            eq: vec![(vec![1.0, -1.0], 0.0)],
            ub: vec![],
            bounds: vec![(Some(0.0), None), (Some(0.0), None)],
        };
        let r = solve_lp(&lp, 1e-10, 200).unwrap();
        assert_eq!(r.status, LpStatus::Unbounded);
    }
}
