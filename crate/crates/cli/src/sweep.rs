//! Sweep execution and CSV output.
//!
//! One row per sweep value, in sweep order:
//!
//! `axis_value, <intensities>, e_bit, P_pass, e_ph_sdp, gap, rate_sdp,
//! rate_coin, rate_plob, rate_infinite, solver_status`
//!
//! The intensity columns, `e_bit` and `P_pass` describe the grid point that
//! maximises the certified SDP rate. Without `sdp` in the methods they
//! describe the best coin point, then the best infinite-test point. Rates
//! are raw (negative when no key can be extracted). Cells of methods that
//! were not requested or do not apply are left empty. `rate_coin` and
//! `rate_infinite` are each maximised over the whole grid.

use std::io::Write;

use mdiqkd::pipeline::{optimize, OptimizedPoint, PipelineOptions};
use mdiqkd::rates::{plob_bound, KeyRatePoint};
use rayon::prelude::*;

use crate::config::{Method, Scenario};
use crate::error::Result;

pub const NO_ELIGIBLE_POINT: &str = "no_eligible_point";

/// Outcome of one sweep value.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_value: f64,
    pub intensities: Option<Vec<f64>>,
    pub e_bit: Option<f64>,
    pub p_pass: Option<f64>,
    pub e_ph_sdp: Option<f64>,
    pub gap: Option<f64>,
    pub rate_sdp: Option<f64>,
    pub rate_coin: Option<f64>,
    pub rate_plob: Option<f64>,
    pub rate_infinite: Option<f64>,
    pub status: String,
    /// Set when a requested SDP point has no verified optimal candidate or
    /// the evaluation errored.
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.failed)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        let n_int = self.header.len() - 10;
        let cell = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        for r in &self.rows {
            let mut rec = vec![format!("{:?}", r.axis_value)];
            match &r.intensities {
                Some(v) => rec.extend(v.iter().map(|x| format!("{x:?}"))),
                None => rec.extend(std::iter::repeat_n(String::new(), n_int)),
            }
            for v in [r.e_bit, r.p_pass, r.e_ph_sdp, r.gap, r.rate_sdp, r.rate_coin, r.rate_plob, r.rate_infinite] {
                rec.push(cell(v));
            }
            rec.push(r.status.clone());
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

pub fn header(s: &Scenario) -> Vec<String> {
    let mut h = vec!["axis_value".to_string()];
    h.extend(s.intensity_names());
    for c in ["e_bit", "P_pass", "e_ph_sdp", "gap", "rate_sdp", "rate_coin", "rate_plob", "rate_infinite", "solver_status"] {
        h.push(c.to_string());
    }
    h
}

fn argmax<'a>(points: &'a [KeyRatePoint], key: impl Fn(&KeyRatePoint) -> Option<f64>) -> Option<&'a KeyRatePoint> {
    let mut best: Option<(&KeyRatePoint, f64)> = None;
    for p in points {
        if let Some(v) = key(p) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((p, v));
            }
        }
    }
    best.map(|(p, _)| p)
}

fn row_from(s: &Scenario, axis_value: f64, plob: Option<f64>, opt: &OptimizedPoint) -> SweepRow {
    let points = &opt.search.points;
    let sdp = s.wants(Method::Sdp);
    let best_inf = argmax(points, |p| p.rate_infinite);
    let reference = if sdp {
        opt.best()
    } else if s.wants(Method::Coin) {
        argmax(points, |p| p.rate_coin.map(|r| r.raw))
    } else if s.wants(Method::InfiniteTest) {
        best_inf
    } else {
        points.first()
    };
    let failed = sdp && reference.is_none();
    let status = match reference {
        Some(p) => p.status.to_string(),
        None if sdp => NO_ELIGIBLE_POINT.to_string(),
        None => String::new(),
    };
    SweepRow {
        axis_value,
        // Phase-encoding points repeat the shared intensity once per basis.
        intensities: reference.map(|p| p.intensities[..s.template.arity()].to_vec()),
        e_bit: reference.map(|p| p.e_bit),
        p_pass: reference.map(|p| p.p_pass),
        e_ph_sdp: if sdp { reference.and_then(|p| p.e_ph) } else { None },
        gap: if sdp { reference.and_then(|p| p.gap) } else { None },
        rate_sdp: if sdp { reference.and_then(|p| p.rate_sdp.map(|r| r.raw)) } else { None },
        rate_coin: if s.wants(Method::Coin) { opt.coin_rate.map(|r| r.raw) } else { None },
        rate_plob: if s.wants(Method::Plob) { plob } else { None },
        rate_infinite: if s.wants(Method::InfiniteTest) { best_inf.and_then(|p| p.rate_infinite) } else { None },
        status,
        failed,
    }
}

fn error_row(s: &Scenario, axis_value: f64, plob: Option<f64>, err: &mdiqkd::Error) -> SweepRow {
    eprintln!("{} {axis_value}: {err}", s.axis.name());
    SweepRow {
        axis_value,
        intensities: None,
        e_bit: None,
        p_pass: None,
        e_ph_sdp: None,
        gap: None,
        rate_sdp: None,
        rate_coin: None,
        rate_plob: if s.wants(Method::Plob) { plob } else { None },
        rate_infinite: None,
        status: "error".to_string(),
        failed: true,
    }
}

/// Runs every sweep value; rows come back in sweep order.
pub fn run_sweep(s: &Scenario) -> SweepResult {
    let opts = PipelineOptions { solver: s.solver, ..PipelineOptions::default() };
    let rows = s
        .sweep
        .par_iter()
        .map(|&v| {
            let dev = s.axis.device_at(&s.device, v);
            let plob = plob_bound(dev.total_transmittance()).ok();
            match optimize(&s.template, &s.grids, &dev, &opts, v) {
                Ok(opt) => row_from(s, v, plob, &opt),
                Err(e) => error_row(s, v, plob, &e),
            }
        })
        .collect();
    SweepResult { header: header(s), rows }
}
