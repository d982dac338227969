//! Decoy-state bounds against the honest single-photon values.
//!
//! One row per sweep value, `(mu, zeta)` candidate and basis:
//!
//! `axis_value, mu, zeta, omega, basis, yield_lower, yield_true,
//! error_mass_upper, error_mass_true, error_rate_upper, error_rate_true,
//! sound`
//!
//! With a seed, three more columns compare the model signal gain with a
//! photon-counting Monte Carlo estimate: `gain_model, gain_mc,
//! gain_mc_std_err`.

use std::io::Write;

use mdiqkd::channel::montecarlo::sample_decoy_pair;
use mdiqkd::channel::{decoy_stats, single_photon_stats};
use mdiqkd::decoy::bound_single_photon;
use mdiqkd::pipeline::{PipelineOptions, Template, WEAK_DECOY_RATIO};
use mdiqkd::rates::cartesian;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;

use crate::config::Scenario;
use crate::error::{CliError, Result};

/// Monte Carlo trials per row.
pub const MC_TRIALS: u64 = 200_000;

/// Slack allowed when comparing bounds with the truth.
const SOUNDNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DecoyRow {
    pub axis_value: f64,
    pub mu: f64,
    pub zeta: f64,
    pub omega: f64,
    pub basis: &'static str,
    pub yield_lower: f64,
    pub yield_true: f64,
    pub error_mass_upper: f64,
    pub error_mass_true: f64,
    pub error_rate_upper: f64,
    pub error_rate_true: f64,
    pub sound: bool,
    /// `(model, estimate, std_err)` of the signal gain.
    pub gain_check: Option<(f64, f64, f64)>,
}

pub fn run_decoy_bounds(s: &Scenario, seed: Option<u64>) -> Result<Vec<DecoyRow>> {
    if !matches!(s.template, Template::Decoy { .. }) {
        return Err(CliError::Unsupported("decoy-bounds needs protocol.family = \"decoy\"".into()));
    }
    let opts = PipelineOptions::default();
    let mut candidates = cartesian(&s.grids);
    candidates.retain(|c| c[0] >= c[1] && c[1] >= c[0] * WEAK_DECOY_RATIO);
    let jobs: Vec<(usize, f64, Vec<f64>)> = s
        .sweep
        .iter()
        .flat_map(|&v| candidates.iter().map(move |c| (v, c.clone())))
        .enumerate()
        .map(|(i, (v, c))| (i, v, c))
        .collect();
    let rows: Vec<Vec<DecoyRow>> = jobs
        .par_iter()
        .map(|(i, v, c)| -> Result<Vec<DecoyRow>> {
            let dev = s.axis.device_at(&s.device, *v);
            let (mu, zeta) = (c[0], c[1]);
            let omega = mu * WEAK_DECOY_RATIO;
            let stats = decoy_stats(&[mu, zeta, omega], &dev, opts.quadrature_order)?;
            let bounds = bound_single_photon(&stats, opts.n_cut)?;
            let truth = single_photon_stats(&dev)?;
            let mut rng = seed.map(|s| StdRng::seed_from_u64(s.wrapping_add(*i as u64)));
            let mut out = Vec::with_capacity(2);
            for (x, name) in ["Z", "X"].into_iter().enumerate() {
                let b = bounds.bases[x];
                let (y, e) = (truth.yield_11[x], truth.error_rate_11[x]);
                let sound = b.yield_lower <= y + SOUNDNESS_TOL && b.error_mass_upper >= y * e - SOUNDNESS_TOL;
                let gain_check = match rng.as_mut() {
                    Some(r) => {
                        let est = sample_decoy_pair(&dev, x, mu, mu, MC_TRIALS, r)?;
                        Some((stats.bases[x].gain[0][0], est.pass.value, est.pass.std_err))
                    }
                    None => None,
                };
                out.push(DecoyRow {
                    axis_value: *v,
                    mu,
                    zeta,
                    omega,
                    basis: name,
                    yield_lower: b.yield_lower,
                    yield_true: y,
                    error_mass_upper: b.error_mass_upper,
                    error_mass_true: y * e,
                    error_rate_upper: b.error_rate_upper,
                    error_rate_true: e,
                    sound,
                    gain_check,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_decoy_csv<W: Write>(rows: &[DecoyRow], with_mc: bool, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "axis_value",
        "mu",
        "zeta",
        "omega",
        "basis",
        "yield_lower",
        "yield_true",
        "error_mass_upper",
        "error_mass_true",
        "error_rate_upper",
        "error_rate_true",
        "sound",
    ];
    if with_mc {
        header.extend(["gain_model", "gain_mc", "gain_mc_std_err"]);
    }
    out.write_record(&header)?;
    for r in rows {
        let mut rec: Vec<String> = [r.axis_value, r.mu, r.zeta, r.omega].iter().map(|v| format!("{v:?}")).collect();
        rec.push(r.basis.to_string());
        rec.extend(
            [r.yield_lower, r.yield_true, r.error_mass_upper, r.error_mass_true, r.error_rate_upper, r.error_rate_true]
                .iter()
                .map(|v| format!("{v:?}")),
        );
        rec.push(r.sound.to_string());
        if with_mc {
            match r.gain_check {
                Some((m, e, se)) => rec.extend([format!("{m:?}"), format!("{e:?}"), format!("{se:?}")]),
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
