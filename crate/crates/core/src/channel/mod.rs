//! Honest-device statistics: what Alice and Bob observe without an
//! eavesdropper.
//!
//! Both arms see the same transmittance `η_arm` (detector efficiency
//! included) and the node sits halfway. For single-mode phase encoding the
//! node is one 50:50 beam splitter followed by two threshold detectors;
//! Ψ+ means only `D+` clicked and Ψ- only `D-`.

mod decoy_sim;
pub mod montecarlo;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CMatrix};
use crate::sdp_model::{is_error, BasisObservation, ObservedStats};
use crate::states::{coherent_overlap, state_overlap, Announcement, JointIndex, ProtocolSpec, PureState, StateFactor};

pub use decoy_sim::{
    decoy_stats, single_photon_gram_blocks, single_photon_stats, DecoyBasisStats, DecoyStats, SinglePhotonStats,
    MIN_QUADRATURE_ORDER,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Dark-count probability per detector and gate.
    pub p_dc: f64,
    pub eta_det: f64,
    /// Fibre attenuation in dB/km.
    pub xi: f64,
    pub e_ali: f64,
    /// Alice-to-Bob distance in km.
    pub distance_km: f64,
    /// When set, the total Alice-to-Bob loss in dB including detectors;
    /// overrides `distance_km`, `xi` and `eta_det`.
    pub total_loss_db: Option<f64>,
}

impl DeviceParams {
    pub fn parameter1() -> Self {
        DeviceParams { p_dc: 6.02e-6, eta_det: 0.145, xi: 0.20, e_ali: 0.015, distance_km: 0.0, total_loss_db: None }
    }

    pub fn parameter2() -> Self {
        DeviceParams { p_dc: 5e-8, eta_det: 0.85, xi: 0.20, e_ali: 0.015, distance_km: 0.0, total_loss_db: None }
    }

    /// Lossless, noiseless devices.
    pub fn ideal() -> Self {
        DeviceParams { p_dc: 0.0, eta_det: 1.0, xi: 0.0, e_ali: 0.0, distance_km: 0.0, total_loss_db: None }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "parameter1" => Some(Self::parameter1()),
            "parameter2" => Some(Self::parameter2()),
            "ideal" => Some(Self::ideal()),
            _ => None,
        }
    }

    pub fn at_distance(mut self, km: f64) -> Self {
        self.distance_km = km;
        self.total_loss_db = None;
        self
    }

    pub fn at_total_loss(mut self, db: f64) -> Self {
        self.total_loss_db = Some(db);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.p_dc) {
            return Err(invalid(format!("p_dc = {} is not a probability", self.p_dc)));
        }
        if !unit(self.eta_det) {
            return Err(invalid(format!("eta_det = {} is not in [0, 1]", self.eta_det)));
        }
        if !(0.0..=0.5).contains(&self.e_ali) {
            return Err(invalid(format!("e_ali = {} is not in [0, 0.5]", self.e_ali)));
        }
        if !(self.xi >= 0.0) || !(self.distance_km >= 0.0) {
            return Err(invalid("attenuation and distance must be nonnegative"));
        }
        if let Some(db) = self.total_loss_db {
            if !(db >= 0.0) {
                return Err(invalid("total loss must be nonnegative"));
            }
        }
        Ok(())
    }

    /// Transmittance of one arm (source to detector).
    pub fn arm_transmittance(&self) -> f64 {
        match self.total_loss_db {
            Some(db) => 10f64.powf(-db / 20.0),
            None => self.eta_det * 10f64.powf(-self.xi * (self.distance_km / 2.0) / 10.0),
        }
    }

    /// Alice-to-Bob transmittance `η_arm²`.
    pub fn total_transmittance(&self) -> f64 {
        self.arm_transmittance().powi(2)
    }

    /// Relative phase offset on Bob's arm modelling misalignment.
    pub fn misalignment_phase(&self) -> f64 {
        2.0 * self.e_ali.sqrt().asin()
    }
}

fn signal(s: &PureState) -> Result<Complex64> {
    match s.factors.first() {
        Some(StateFactor::Coherent(a)) if s.is_coherent_only() => Ok(*a),
        _ => Err(Error::Unsupported("beam-splitter statistics need coherent-state families".into())),
    }
}

/// Output amplitudes `(β+, β-)` at the node for signal amplitudes `a`, `b`.
fn node_amplitudes(dev: &DeviceParams, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let t = dev.arm_transmittance().sqrt();
    let bb = b * Complex64::from_polar(1.0, dev.misalignment_phase());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ((a + bb) * (t * r), (a - bb) * (t * r))
}

/// `[P(Ψ+), P(Ψ-)]` for one pair of signal amplitudes.
pub fn announcement_probabilities(dev: &DeviceParams, a: Complex64, b: Complex64) -> [f64; 2] {
    let (bp, bm) = node_amplitudes(dev, a, b);
    let keep = 1.0 - dev.p_dc;
    let none_p = keep * (-bp.norm_sqr()).exp();
    let none_m = keep * (-bm.norm_sqr()).exp();
    [(1.0 - none_p) * none_m, none_p * (1.0 - none_m)]
}

/// Pass probability and bit-error rate per basis for families built from
/// coherent states. Trojan modes do not reach the detectors.
pub fn phase_protocol_stats(p: &ProtocolSpec, dev: &DeviceParams) -> Result<ObservedStats> {
    dev.validate()?;
    let mut bases = Vec::with_capacity(p.num_bases);
    for x in 0..p.num_bases {
        let mut pass = 0.0;
        let mut err = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let w = p.bit_prior[a][b];
                let probs = announcement_probabilities(dev, signal(p.alice(x, a))?, signal(p.bob(x, b))?);
                for (z, pz) in Announcement::CONCLUSIVE.iter().zip(probs) {
                    pass += w * pz;
                    if is_error(p, x, a, b, *z) {
                        err += w * pz;
                    }
                }
            }
        }
        let e_bit = if pass > 0.0 { (err / pass).clamp(0.0, 1.0) } else { 0.0 };
        bases.push(Some(BasisObservation::Exact { pass, e_bit }));
    }
    Ok(ObservedStats { bases })
}

fn trailing(s: &PureState) -> PureState {
    PureState::new(s.factors[1..].to_vec())
}

/// Gram blocks of Eve's vectors for the honest channel, over `index`.
///
/// Eve keeps the fibre losses and the reflected Trojan modes; the detector
/// POVM elements for Ψ± are `(1 - (1-p)|0><0|) ⊗ (1-p)|0><0|` and its mirror.
pub fn honest_gram_blocks_on(p: &ProtocolSpec, dev: &DeviceParams, index: &[JointIndex]) -> Result<(CMatrix, CMatrix)> {
    dev.validate()?;
    let d = index.len();
    let eta = dev.arm_transmittance();
    let leak = (1.0 - eta).max(0.0).sqrt();
    let keep = 1.0 - dev.p_dc;
    struct Row {
        bp: Complex64,
        bm: Complex64,
        la: Complex64,
        lb: Complex64,
        ta: PureState,
        tb: PureState,
    }
    let rows: Vec<Row> = index
        .iter()
        .map(|j| {
            let sa = p.alice(j.x, j.a);
            let sb = p.bob(j.y, j.b);
            let (a, b) = (signal(sa)?, signal(sb)?);
            let (bp, bm) = node_amplitudes(dev, a, b);
            Ok(Row { bp, bm, la: a * leak, lb: b * leak, ta: trailing(sa), tb: trailing(sb) })
        })
        .collect::<Result<_>>()?;
    let mut gp = CMatrix::zeros(d, d);
    let mut gm = CMatrix::zeros(d, d);
    for (i, ri) in rows.iter().enumerate() {
        for (j, rj) in rows.iter().enumerate().skip(i) {
            let common = coherent_overlap(ri.la, rj.la)
                * coherent_overlap(ri.lb, rj.lb)
                * state_overlap(&ri.ta, &rj.ta)?
                * state_overlap(&ri.tb, &rj.tb)?;
            let vac_p = c(keep * (-(ri.bp.norm_sqr() + rj.bp.norm_sqr()) / 2.0).exp(), 0.0);
            let vac_m = c(keep * (-(ri.bm.norm_sqr() + rj.bm.norm_sqr()) / 2.0).exp(), 0.0);
            let ov_p = coherent_overlap(ri.bp, rj.bp);
            let ov_m = coherent_overlap(ri.bm, rj.bm);
            let vp = (ov_p - vac_p) * vac_m * common;
            let vm = vac_p * (ov_m - vac_m) * common;
            gp[(i, j)] = vp;
            gp[(j, i)] = vp.conj();
            gm[(i, j)] = vm;
            gm[(j, i)] = vm.conj();
        }
    }
    Ok((gp, gm))
}

/// Honest Gram blocks over the matched-basis index used by the SDP.
pub fn honest_gram_blocks(p: &ProtocolSpec, dev: &DeviceParams) -> Result<(CMatrix, CMatrix)> {
    honest_gram_blocks_on(p, dev, &p.matched_indices())
}
