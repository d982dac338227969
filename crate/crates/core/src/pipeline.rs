//! End-to-end evaluation of one operating point: honest statistics, SDP
//! assembly, solve, independent certificate check and key rates.

use crate::channel::{decoy_stats, phase_protocol_stats, DeviceParams};
use crate::coin::{coin_key_rate, coin_phase_error, delta_init, CoinInputs};
use crate::decoy::{bound_single_photon, decoy_key_rate, DecoyBounds, DEFAULT_N_CUT};
use crate::error::{invalid, Result};
use crate::rates::{cartesian, infinite_test_rate, optimize_point, plob_bound, shor_preskill_rate, GridSearch, KeyRatePoint, Rate};
use crate::sdp_model::{assemble_sdp_with, BasisObservation, InputSet, ObservedStats, SdpProblem};
use crate::solver::{solve, verify_certificate, SolveReport, SolveStatus, SolverOptions, VerificationResult};
use crate::states::{build_protocol, Family};

/// Extinction ratio of the weakest decoy: `ω = μ / 1000`.
pub const WEAK_DECOY_RATIO: f64 = 1e-3;
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    pub inputs: InputSet,
    pub quadrature_order: usize,
    pub n_cut: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            solver: SolverOptions::default(),
            inputs: InputSet::Matched,
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
            n_cut: DEFAULT_N_CUT,
        }
    }
}

/// Protocol family with its intensities left open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Template {
    /// One intensity shared by all `bases`.
    Phase { bases: usize },
    PhaseTrojan { bases: usize, nu: f64 },
    /// One intensity per basis, key basis first.
    PhaseMatching { bases: usize },
    /// Signal and first decoy intensity; the weak decoy is fixed by
    /// [`WEAK_DECOY_RATIO`].
    Decoy { nu: f64 },
}

impl Template {
    /// Number of free intensities.
    pub fn arity(&self) -> usize {
        match *self {
            Template::Phase { .. } | Template::PhaseTrojan { .. } => 1,
            Template::PhaseMatching { bases } => bases,
            Template::Decoy { .. } => 2,
        }
    }

    pub fn family(&self, intensities: &[f64]) -> Result<Family> {
        if intensities.len() != self.arity() {
            return Err(invalid(format!("expected {} intensities, got {}", self.arity(), intensities.len())));
        }
        Ok(match *self {
            Template::Phase { bases } => Family::PhaseEncoding { bases, mu: intensities[0] },
            Template::PhaseTrojan { bases, nu } => Family::PhaseEncodingTrojan { bases, mu: intensities[0], nu },
            Template::PhaseMatching { .. } => Family::PhaseMatching { intensities: intensities.to_vec() },
            Template::Decoy { nu } => Family::DecoySinglePhoton { nu },
        })
    }
}

/// Solve outcome with the independently verified bound.
#[derive(Debug, Clone)]
pub struct CertifiedSolve {
    pub problem: SdpProblem,
    pub report: SolveReport,
    pub verification: Option<VerificationResult>,
}

impl CertifiedSolve {
    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.passed)
    }

    /// Sound phase-error bound, capped at 1/2. Only emitted for optimal,
    /// verified solves.
    pub fn e_ph(&self) -> Option<f64> {
        match (&self.verification, self.report.status) {
            (Some(v), SolveStatus::Optimal) if v.passed => Some(v.certified_bound.min(0.5)),
            _ => None,
        }
    }
}

pub fn certified_solve(problem: SdpProblem, opts: &SolverOptions) -> Result<CertifiedSolve> {
    let report = solve(&problem, opts)?;
    let verification = match &report.certificate {
        Some(c) => Some(verify_certificate(&problem, c, opts.cert_tol)?),
        None => None,
    };
    Ok(CertifiedSolve { problem, report, verification })
}

fn key_observation(o: &ObservedStats, x: usize) -> (f64, f64) {
    match o.bases.get(x).copied().flatten() {
        Some(BasisObservation::Exact { pass, e_bit }) => (pass, e_bit),
        _ => (0.0, 0.0),
    }
}

/// Everything computed for one coherent-state operating point.
#[derive(Debug, Clone)]
pub struct PhaseEvaluation {
    pub point: KeyRatePoint,
    pub stats: ObservedStats,
    pub solve: CertifiedSolve,
    pub e_ph_coin: Option<f64>,
}

fn plob_at(dev: &DeviceParams) -> Option<f64> {
    plob_bound(dev.total_transmittance()).ok()
}

/// Evaluates a coherent-state family (phase encoding, Trojan or phase
/// matching) at one device setting.
pub fn evaluate_phase(
    family: &Family,
    dev: &DeviceParams,
    opts: &PipelineOptions,
    axis_value: f64,
) -> Result<PhaseEvaluation> {
    let p = build_protocol(family.clone())?;
    let stats = phase_protocol_stats(&p, dev)?;
    let (p_pass, e_bit) = key_observation(&stats, p.key_basis);
    let problem = assemble_sdp_with(&p, &stats, opts.inputs)?;
    let solve = certified_solve(problem, &opts.solver)?;
    let e_ph = solve.e_ph();
    let rate_sdp = e_ph.map(|e| shor_preskill_rate(p_pass, e, e_bit));

    // The coin comparison is defined for one key and one test pair.
    let (e_ph_coin, rate_coin) = if p.num_bases == 2 && p_pass > 0.0 {
        let (_, e_y) = key_observation(&stats, 1 - p.key_basis);
        let inputs = CoinInputs { delta_init: delta_init(&p)?, p_pass, e_y: e_y.min(0.5), e_x: e_bit.min(0.5) };
        let e = coin_phase_error(&inputs)?;
        (Some(e), Some(coin_key_rate(p_pass, e, e_bit)))
    } else {
        (None, None)
    };
    let rate_infinite = match family {
        Family::PhaseMatching { intensities } if dev.total_transmittance() > 0.0 => {
            infinite_test_rate(intensities[0], dev.total_transmittance()).ok()
        }
        _ => None,
    };
    let point = KeyRatePoint {
        axis_value,
        intensities: p.intensities.clone(),
        e_bit,
        p_pass,
        e_ph,
        gap: solve.report.gap.is_finite().then_some(solve.report.gap),
        rate_sdp,
        rate_coin,
        rate_plob: plob_at(dev),
        rate_infinite,
        status: solve.report.status,
        verified: solve.verified(),
    };
    Ok(PhaseEvaluation { point, stats, solve, e_ph_coin })
}

/// Everything computed for one decoy-state operating point.
#[derive(Debug, Clone)]
pub struct DecoyEvaluation {
    pub point: KeyRatePoint,
    pub bounds: DecoyBounds,
    pub solve: CertifiedSolve,
    pub e_ph_coin: Option<f64>,
    /// Signal-signal gain and QBER in the key basis.
    pub signal_gain: f64,
    pub signal_qber: f64,
}

/// Decoy-state intervals for the single-photon SDP.
pub fn decoy_observation(bounds: &DecoyBounds) -> ObservedStats {
    ObservedStats {
        bases: bounds
            .bases
            .iter()
            .map(|b| {
                Some(BasisObservation::Bounded {
                    pass: (b.yield_lower.min(1.0), 1.0),
                    error_mass: (0.0, b.error_mass_upper.min(1.0)),
                })
            })
            .collect(),
    }
}

/// Evaluates the decoy-state protocol with signal `mu`, decoy `zeta` and
/// weak decoy `mu / 1000`, leaking Trojan intensity `nu`.
pub fn evaluate_decoy(
    nu: f64,
    mu: f64,
    zeta: f64,
    dev: &DeviceParams,
    opts: &PipelineOptions,
    axis_value: f64,
) -> Result<DecoyEvaluation> {
    let omega = mu * WEAK_DECOY_RATIO;
    if !(mu >= zeta && zeta >= omega && omega >= 0.0) {
        return Err(invalid(format!("decoy intensities must satisfy mu >= zeta >= mu/1000, got {mu}, {zeta}")));
    }
    let stats = decoy_stats(&[mu, zeta, omega], dev, opts.quadrature_order)?;
    let bounds = bound_single_photon(&stats, opts.n_cut)?;
    let p = build_protocol(Family::DecoySinglePhoton { nu })?;
    let problem = assemble_sdp_with(&p, &decoy_observation(&bounds), opts.inputs)?;
    let solve = certified_solve(problem, &opts.solver)?;
    let e_ph = solve.e_ph();
    let (signal_gain, signal_qber) = (stats.bases[0].gain[0][0], stats.bases[0].qber[0][0]);
    let z = bounds.bases[0];
    let x = bounds.bases[1];
    let rate_sdp = e_ph.map(|e| decoy_key_rate(mu, z.yield_lower, e, signal_gain, signal_qber));
    let e_ph_coin = if z.yield_lower > 0.0 {
        let inputs = CoinInputs {
            delta_init: delta_init(&p)?,
            p_pass: z.yield_lower,
            e_y: x.error_rate_upper.min(0.5),
            e_x: signal_qber.min(0.5),
        };
        Some(coin_phase_error(&inputs)?)
    } else {
        None
    };
    let rate_coin: Option<Rate> = e_ph_coin.map(|e| decoy_key_rate(mu, z.yield_lower, e, signal_gain, signal_qber));
    let point = KeyRatePoint {
        axis_value,
        intensities: vec![mu, zeta],
        e_bit: signal_qber,
        p_pass: signal_gain,
        e_ph,
        gap: solve.report.gap.is_finite().then_some(solve.report.gap),
        rate_sdp,
        rate_coin,
        rate_plob: plob_at(dev),
        rate_infinite: None,
        status: solve.report.status,
        verified: solve.verified(),
    };
    Ok(DecoyEvaluation { point, bounds, solve, e_ph_coin, signal_gain, signal_qber })
}

/// Evaluates `template` at one intensity choice.
pub fn evaluate(
    template: &Template,
    intensities: &[f64],
    dev: &DeviceParams,
    opts: &PipelineOptions,
    axis_value: f64,
) -> Result<KeyRatePoint> {
    match *template {
        Template::Decoy { nu } => {
            if intensities.len() != 2 {
                return Err(invalid("the decoy template takes (mu, zeta)"));
            }
            Ok(evaluate_decoy(nu, intensities[0], intensities[1], dev, opts, axis_value)?.point)
        }
        _ => Ok(evaluate_phase(&template.family(intensities)?, dev, opts, axis_value)?.point),
    }
}

/// Result of optimising one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizedPoint {
    pub search: GridSearch,
    /// Best coin rate over the same grid, optimised separately.
    pub coin_rate: Option<Rate>,
}

impl OptimizedPoint {
    pub fn best(&self) -> Option<&KeyRatePoint> {
        self.search.best_point()
    }
}

/// Grid search over per-intensity grids. Decoy candidates violating
/// `mu >= zeta` are skipped.
pub fn optimize(
    template: &Template,
    grids: &[Vec<f64>],
    dev: &DeviceParams,
    opts: &PipelineOptions,
    axis_value: f64,
) -> Result<OptimizedPoint> {
    if grids.len() != template.arity() {
        return Err(invalid(format!("expected {} intensity grids, got {}", template.arity(), grids.len())));
    }
    let mut candidates = cartesian(grids);
    if matches!(template, Template::Decoy { .. }) {
        candidates.retain(|c| c[0] >= c[1] && c[1] >= c[0] * WEAK_DECOY_RATIO);
    }
    let search = optimize_point(&candidates, |c| evaluate(template, c, dev, opts, axis_value))?;
    let coin_rate = search
        .points
        .iter()
        .filter_map(|p| p.rate_coin)
        .fold(None, |best: Option<Rate>, r| if best.is_none_or(|b| r.raw > b.raw) { Some(r) } else { best });
    Ok(OptimizedPoint { search, coin_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::honest_gram_blocks;
    use crate::sdp_model::{phase_error_functional, CorrectionConvention};

    #[test]
    fn phase_point_is_certified_and_above_honest_value() {
        let dev = DeviceParams::parameter2();
        let family = Family::PhaseEncoding { bases: 2, mu: 0.1 };
        let ev = evaluate_phase(&family, &dev, &PipelineOptions::default(), 0.0).unwrap();
        let e = ev.point.e_ph.expect("certified bound");
        assert!(ev.point.verified);
        assert!(e >= ev.point.e_bit && e <= 0.5, "{e} {}", ev.point.e_bit);
        let p = build_protocol(family).unwrap();
        let (gp, gm) = honest_gram_blocks(&p, &dev).unwrap();
        let f = phase_error_functional(&p, &CorrectionConvention::phase_encoding(), ev.point.p_pass).unwrap();
        assert!(f.eval(&gp, &gm) <= e + 1e-9);
        assert!(ev.point.gap.unwrap().abs() < 1e-6);
    }

    #[test]
    fn template_arity() {
        assert!(Template::Phase { bases: 2 }.family(&[0.1, 0.2]).is_err());
        assert_eq!(Template::PhaseMatching { bases: 3 }.arity(), 3);
        assert!(evaluate_decoy(0.0, 0.1, 0.3, &DeviceParams::parameter1(), &PipelineOptions::default(), 0.0).is_err());
    }
}
