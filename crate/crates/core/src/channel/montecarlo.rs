//! Photon-counting Monte Carlo for the honest devices. Independent of the
//! closed forms and of the quadrature: photon numbers are Poisson samples,
//! dark counts are Bernoulli trials and phases are drawn uniformly.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::decoy_sim::{misaligned, time_bin_state};
use super::DeviceParams;
use crate::error::{Error, Result};
use crate::sdp_model::is_error;
use crate::states::{build_protocol, Announcement, Family, ProtocolSpec, StateFactor};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate { value: p, std_err: (p * (1.0 - p) / trials as f64).sqrt() }
    }

    /// Whether `v` lies within `k` standard errors.
    pub fn agrees(&self, v: f64, k: f64) -> bool {
        (self.value - v).abs() <= k * self.std_err.max(1.0 / f64::MAX.sqrt())
    }
}

fn photons<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

fn clicks<R: Rng + ?Sized>(rng: &mut R, mean: f64, p_dc: f64) -> bool {
    photons(rng, mean) > 0 || rng.random::<f64>() < p_dc
}

/// Estimates of the pass probability and the error mass of one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisEstimate {
    pub pass: Estimate,
    pub error_mass: Estimate,
}

/// Samples the single-beam-splitter node with random bits in basis `x`.
pub fn sample_phase_basis<R: Rng + ?Sized>(
    p: &ProtocolSpec,
    dev: &DeviceParams,
    x: usize,
    trials: u64,
    rng: &mut R,
) -> Result<BasisEstimate> {
    dev.validate()?;
    let amp = |s: &crate::states::PureState| match s.factors.first() {
        Some(StateFactor::Coherent(a)) => Ok(*a),
        _ => Err(Error::Unsupported("Monte Carlo sampling needs coherent signals".into())),
    };
    let t = dev.arm_transmittance().sqrt();
    let rot = Complex64::from_polar(1.0, dev.misalignment_phase());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (mut pass, mut err) = (0u64, 0u64);
    for _ in 0..trials {
        let a = rng.random_range(0..2);
        let b = rng.random_range(0..2);
        let aa = amp(p.alice(x, a))? * t;
        let bb = amp(p.bob(x, b))? * t * rot;
        let plus = clicks(rng, ((aa + bb) * r).norm_sqr(), dev.p_dc);
        let minus = clicks(rng, ((aa - bb) * r).norm_sqr(), dev.p_dc);
        let z = match (plus, minus) {
            (true, false) => Announcement::PsiPlus,
            (false, true) => Announcement::PsiMinus,
            _ => continue,
        };
        pass += 1;
        if is_error(p, x, a, b, z) {
            err += 1;
        }
    }
    Ok(BasisEstimate { pass: Estimate::from_counts(pass, trials), error_mass: Estimate::from_counts(err, trials) })
}

/// Samples the time-bin analyser for one basis and intensity pair with
/// uniformly random global phases.
pub fn sample_decoy_pair<R: Rng + ?Sized>(
    dev: &DeviceParams,
    x: usize,
    mu_a: f64,
    mu_b: f64,
    trials: u64,
    rng: &mut R,
) -> Result<BasisEstimate> {
    dev.validate()?;
    let p = build_protocol(Family::DecoySinglePhoton { nu: 0.0 })?;
    let eta = dev.arm_transmittance();
    let (ra, rb) = ((eta * mu_a).sqrt(), (eta * mu_b).sqrt());
    let (mut pass, mut err) = (0u64, 0u64);
    for _ in 0..trials {
        let a = rng.random_range(0..2);
        let b = rng.random_range(0..2);
        let ca = time_bin_state(x, a);
        let db = misaligned(dev, time_bin_state(x, b));
        let pa = Complex64::from_polar(ra, rng.random::<f64>() * std::f64::consts::TAU);
        let pb = Complex64::from_polar(rb, rng.random::<f64>() * std::f64::consts::TAU);
        let mut slot = [false; 4];
        for t in 0..2 {
            let (al, be) = (ca[t] * pa, db[t] * pb);
            slot[t] = clicks(rng, (al + be).norm_sqr() / 2.0, dev.p_dc);
            slot[2 + t] = clicks(rng, (al - be).norm_sqr() / 2.0, dev.p_dc);
        }
        let z = match slot {
            [true, true, false, false] | [false, false, true, true] => Announcement::PsiPlus,
            [true, false, false, true] | [false, true, true, false] => Announcement::PsiMinus,
            _ => continue,
        };
        pass += 1;
        if is_error(&p, x, a, b, z) {
            err += 1;
        }
    }
    Ok(BasisEstimate { pass: Estimate::from_counts(pass, trials), error_mass: Estimate::from_counts(err, trials) })
}
