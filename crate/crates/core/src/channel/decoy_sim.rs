//! Time-bin Bell-state analyser with phase-randomised weak coherent pulses.
//!
//! Each time bin is interfered on a 50:50 beam splitter with outputs
//! `c = (a + b)/√2`, `d = (a - b)/√2`, giving four threshold-detector slots
//! `(c,e) (c,l) (d,e) (d,l)`. Ψ+ is a click in the same detector in both bins
//! and nothing else; Ψ- is a click in different detectors in the two bins.
//! Bob's qubit is rotated by `θ` with `sin²θ = e_ali`.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use super::DeviceParams;
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::sdp_model::is_error;
use crate::states::{build_protocol, qubit, Announcement, Family, JointIndex, ProtocolSpec, PureState, StateFactor};

/// Below this many nodes per phase the periodic integrand is not resolved
/// to the accuracy the decoy bounds need.
pub const MIN_QUADRATURE_ORDER: usize = 8;

type Qubit = [Complex64; 2];

/// Time-bin qubit for basis `x` (0 = Z, 1 = X) and bit `a`.
pub(crate) fn time_bin_state(x: usize, a: usize) -> Qubit {
    match (x, a) {
        (0, 0) => qubit::zero(),
        (0, _) => qubit::one(),
        (_, 0) => qubit::plus(),
        _ => qubit::minus(),
    }
}

pub(crate) fn misaligned(dev: &DeviceParams, d: Qubit) -> Qubit {
    let s = dev.e_ali.sqrt();
    let co = (1.0 - dev.e_ali).sqrt();
    [d[0] * co - d[1] * s, d[0] * s + d[1] * co]
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoyBasisStats {
    /// `gain[i][j]` for Alice intensity `i`, Bob intensity `j`.
    pub gain: Vec<Vec<f64>>,
    pub qber: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoyStats {
    /// Intensity settings, shared by both parties, signal first.
    pub intensities: Vec<f64>,
    /// Z basis first, then X.
    pub bases: Vec<DecoyBasisStats>,
}

fn decoy_protocol() -> ProtocolSpec {
    build_protocol(Family::DecoySinglePhoton { nu: 0.0 }).expect("valid built-in protocol")
}

/// `[P(Ψ+), P(Ψ-)]` given the four slot intensities `[ce, cl, de, dl]`.
fn pattern_probabilities(p_dc: f64, intensity: [f64; 4]) -> [f64; 2] {
    let none: Vec<f64> = intensity.iter().map(|i| (1.0 - p_dc) * (-i).exp()).collect();
    let click: Vec<f64> = none.iter().map(|n| 1.0 - n).collect();
    let (ce, cl, de, dl) = (0, 1, 2, 3);
    let plus = click[ce] * click[cl] * none[de] * none[dl] + click[de] * click[dl] * none[ce] * none[cl];
    let minus = click[ce] * click[dl] * none[de] * none[cl] + click[de] * click[cl] * none[ce] * none[dl];
    [plus, minus]
}

fn slot_intensities(alpha: [Complex64; 2], beta: [Complex64; 2]) -> [f64; 4] {
    let r = 0.5;
    [
        (alpha[0] + beta[0]).norm_sqr() * r,
        (alpha[1] + beta[1]).norm_sqr() * r,
        (alpha[0] - beta[0]).norm_sqr() * r,
        (alpha[1] - beta[1]).norm_sqr() * r,
    ]
}

/// Phase-averaged `[P(Ψ+), P(Ψ-)]` for one input pair.
fn averaged(
    rule: &[(f64, f64)],
    dev: &DeviceParams,
    mu_a: f64,
    mu_b: f64,
    ca: Qubit,
    db: Qubit,
) -> [f64; 2] {
    let eta = dev.arm_transmittance();
    let (ra, rb) = ((eta * mu_a).sqrt(), (eta * mu_b).sqrt());
    let map = |x: f64| std::f64::consts::PI * (x + 1.0);
    let mut acc = [0.0; 2];
    for &(xa, wa) in rule {
        let pa = Complex64::from_polar(ra, map(xa));
        let alpha = [ca[0] * pa, ca[1] * pa];
        for &(xb, wb) in rule {
            let pb = Complex64::from_polar(rb, map(xb));
            let beta = [db[0] * pb, db[1] * pb];
            let probs = pattern_probabilities(dev.p_dc, slot_intensities(alpha, beta));
            acc[0] += wa * wb * probs[0];
            acc[1] += wa * wb * probs[1];
        }
    }
    // Weights sum to 2 per axis on [-1, 1].
    [acc[0] / 4.0, acc[1] / 4.0]
}

/// Gains and QBERs for every basis and intensity pair, averaged over both
/// global phases with an `order x order` Gauss-Legendre rule.
pub fn decoy_stats(intensities: &[f64], dev: &DeviceParams, order: usize) -> Result<DecoyStats> {
    dev.validate()?;
    if order < MIN_QUADRATURE_ORDER {
        return Err(invalid(format!("quadrature order {order} is below the minimum of {MIN_QUADRATURE_ORDER}")));
    }
    if intensities.is_empty() || intensities.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
        return Err(invalid("intensities must be finite and nonnegative"));
    }
    let rule = GaussLegendre::new(order).map_err(|e| invalid(e.to_string()))?;
    let rule: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    let p = decoy_protocol();
    let n = intensities.len();
    let mut bases = Vec::with_capacity(2);
    for x in 0..2 {
        let mut gain = vec![vec![0.0; n]; n];
        let mut qber = vec![vec![0.0; n]; n];
        for (i, &mu_a) in intensities.iter().enumerate() {
            for (j, &mu_b) in intensities.iter().enumerate() {
                let mut q = 0.0;
                let mut err = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let w = p.bit_prior[a][b];
                        let probs = averaged(&rule, dev, mu_a, mu_b, time_bin_state(x, a), misaligned(dev, time_bin_state(x, b)));
                        for (z, pz) in Announcement::CONCLUSIVE.iter().zip(probs) {
                            q += w * pz;
                            if is_error(&p, x, a, b, *z) {
                                err += w * pz;
                            }
                        }
                    }
                }
                gain[i][j] = q;
                qber[i][j] = if q > 0.0 { (err / q).clamp(0.0, 1.0) } else { 0.0 };
            }
        }
        bases.push(DecoyBasisStats { gain, qber });
    }
    Ok(DecoyStats { intensities: intensities.to_vec(), bases })
}

/// Single-photon-pair yield and error rate per basis (Z, X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonStats {
    pub yield_11: [f64; 2],
    pub error_rate_11: [f64; 2],
}

/// Amplitude sums for the coincidence patterns: `Ψ+` uses
/// `c_e d_l + c_l d_e`, `Ψ-` uses `c_l d_e - c_e d_l`, each weighted 1/2.
fn pattern_amplitudes(ca: &Qubit, db: &Qubit) -> (Complex64, Complex64) {
    (ca[0] * db[1] + ca[1] * db[0], ca[1] * db[0] - ca[0] * db[1])
}

/// Weights of the loss branches: both photons arrive, one does, none does,
/// each with the dark-count factors that complete a conclusive pattern.
struct Branches {
    both: f64,
    both_dark: f64,
    other: f64,
}

fn branches(dev: &DeviceParams) -> Branches {
    let eta = dev.arm_transmittance();
    let p = dev.p_dc;
    let q2 = (1.0 - p).powi(2);
    Branches {
        both: eta * eta * q2,
        both_dark: eta * eta * p * q2,
        other: 2.0 * eta * (1.0 - eta) * p * q2 + (1.0 - eta).powi(2) * 2.0 * p * p * q2,
    }
}

fn two_photon_term(br: &Branches, ci: &Qubit, di: &Qubit, cj: &Qubit, dj: &Qubit) -> [Complex64; 2] {
    let (si, ti) = pattern_amplitudes(ci, di);
    let (sj, tj) = pattern_amplitudes(cj, dj);
    let bunch: Complex64 = (0..2).map(|t| (ci[t] * di[t]).conj() * cj[t] * dj[t]).sum();
    let overlap = qubit::inner(ci, cj) * qubit::inner(di, dj);
    let plus = si.conj() * sj * (0.5 * br.both) + bunch * br.both_dark + overlap * br.other;
    let minus = ti.conj() * tj * (0.5 * br.both) + bunch * br.both_dark + overlap * br.other;
    [plus, minus]
}

pub fn single_photon_stats(dev: &DeviceParams) -> Result<SinglePhotonStats> {
    dev.validate()?;
    let p = decoy_protocol();
    let br = branches(dev);
    let mut out = SinglePhotonStats { yield_11: [0.0; 2], error_rate_11: [0.0; 2] };
    for x in 0..2 {
        let mut y = 0.0;
        let mut err = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let ca = time_bin_state(x, a);
                let db = misaligned(dev, time_bin_state(x, b));
                let probs = two_photon_term(&br, &ca, &db, &ca, &db);
                for (z, pz) in Announcement::CONCLUSIVE.iter().zip(probs) {
                    y += 0.25 * pz.re;
                    if is_error(&p, x, a, b, *z) {
                        err += 0.25 * pz.re;
                    }
                }
            }
        }
        out.yield_11[x] = y;
        out.error_rate_11[x] = if y > 0.0 { err / y } else { 0.0 };
    }
    Ok(out)
}

fn split(s: &PureState) -> Result<(Qubit, PureState)> {
    match s.factors.first() {
        Some(StateFactor::Qubit(q)) => Ok((*q, PureState::new(s.factors[1..].to_vec()))),
        _ => Err(Error::Unsupported("single-photon blocks need a qubit signal factor".into())),
    }
}

/// Honest Gram blocks for single-photon inputs of the time-bin family.
/// Eve holds lost photons and the Trojan modes.
pub fn single_photon_gram_blocks_on(
    p: &ProtocolSpec,
    dev: &DeviceParams,
    index: &[JointIndex],
) -> Result<(CMatrix, CMatrix)> {
    dev.validate()?;
    let br = branches(dev);
    let rows: Vec<(Qubit, Qubit, PureState, PureState)> = index
        .iter()
        .map(|j| {
            let (ca, ta) = split(p.alice(j.x, j.a))?;
            let (db, tb) = split(p.bob(j.y, j.b))?;
            Ok((ca, misaligned(dev, db), ta, tb))
        })
        .collect::<Result<_>>()?;
    let d = index.len();
    let mut gp = CMatrix::zeros(d, d);
    let mut gm = CMatrix::zeros(d, d);
    for (i, ri) in rows.iter().enumerate() {
        for (j, rj) in rows.iter().enumerate().skip(i) {
            let trojan = crate::states::state_overlap(&ri.2, &rj.2)? * crate::states::state_overlap(&ri.3, &rj.3)?;
            let [vp, vm] = two_photon_term(&br, &ri.0, &ri.1, &rj.0, &rj.1);
            gp[(i, j)] = vp * trojan;
            gp[(j, i)] = (vp * trojan).conj();
            gm[(i, j)] = vm * trojan;
            gm[(j, i)] = (vm * trojan).conj();
        }
    }
    Ok((gp, gm))
}

pub fn single_photon_gram_blocks(p: &ProtocolSpec, dev: &DeviceParams) -> Result<(CMatrix, CMatrix)> {
    single_photon_gram_blocks_on(p, dev, &p.matched_indices())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::sdp_model::{phase_error_functional, statistics_functionals, CorrectionConvention};
    use crate::states::lambda_on;

    #[test]
    fn dark_free_vacuum_has_no_gain() {
        let s = decoy_stats(&[0.0, 0.0], &DeviceParams::ideal(), 16).unwrap();
        for b in &s.bases {
            assert!(b.gain.iter().flatten().all(|g| *g == 0.0));
        }
    }

    #[test]
    fn low_order_rejected() {
        assert!(decoy_stats(&[0.3], &DeviceParams::parameter1(), 4).is_err());
    }

    #[test]
    fn ideal_single_photons_are_error_free() {
        let s = single_photon_stats(&DeviceParams::ideal()).unwrap();
        assert!((s.yield_11[0] - 0.5).abs() < 1e-15);
        assert!((s.yield_11[1] - 0.5).abs() < 1e-15);
        assert!(s.error_rate_11[0].abs() < 1e-15 && s.error_rate_11[1].abs() < 1e-15);
    }

    #[test]
    fn misalignment_shows_up_in_x_errors() {
        let dev = DeviceParams { e_ali: 0.015, ..DeviceParams::ideal() };
        let s = single_photon_stats(&dev).unwrap();
        assert!(s.error_rate_11[1] > 0.0);
    }

    #[test]
    fn single_photon_yield_matches_mixed_derivative() {
        // Q e^{μA+μB} = Σ μA^n μB^m Y_nm / (n! m!), so the mixed difference
        // at small μ isolates Y_11.
        let dev = DeviceParams::parameter1().at_distance(10.0);
        let h = 1e-3;
        let s = decoy_stats(&[0.0, h, 2.0 * h], &dev, 32).unwrap();
        let sp = single_photon_stats(&dev).unwrap();
        for x in 0..2 {
            let f = |i: usize, j: usize| s.bases[x].gain[i][j] * ((i + j) as f64 * h).exp();
            let d2 = (f(1, 1) - f(1, 0) - f(0, 1) + f(0, 0)) / (h * h);
            let rel = (d2 - sp.yield_11[x]).abs() / sp.yield_11[x];
            assert!(rel < 2e-2, "basis {x}: {d2} vs {}", sp.yield_11[x]);
        }
    }

    #[test]
    fn gram_blocks_are_physical_and_consistent() {
        let p = build_protocol(Family::DecoySinglePhoton { nu: 1e-4 }).unwrap();
        let dev = DeviceParams::parameter1().at_distance(10.0);
        let (gp, gm) = single_photon_gram_blocks(&p, &dev).unwrap();
        let lam = lambda_on(&p, p.matched_indices()).unwrap().entries;
        assert!(min_eigenvalue(&gp) > -1e-12);
        assert!(min_eigenvalue(&gm) > -1e-12);
        assert!(min_eigenvalue(&(lam - &gp - &gm)) > -1e-12);
        let sp = single_photon_stats(&dev).unwrap();
        for f in statistics_functionals(&p).unwrap() {
            let pass = f.pass.eval(&gp, &gm, 0.0);
            assert!((pass - sp.yield_11[f.basis]).abs() < 1e-14);
            let e = f.error_mass.eval(&gp, &gm, 0.0) / pass;
            assert!((e - sp.error_rate_11[f.basis]).abs() < 1e-12);
        }
    }

    #[test]
    fn leak_free_phase_error_equals_x_error() {
        let p = build_protocol(Family::DecoySinglePhoton { nu: 0.0 }).unwrap();
        let dev = DeviceParams::parameter1().at_distance(10.0);
        let (gp, gm) = single_photon_gram_blocks(&p, &dev).unwrap();
        let sp = single_photon_stats(&dev).unwrap();
        let e = phase_error_functional(&p, &CorrectionConvention::time_bin(), sp.yield_11[0]).unwrap();
        assert!((e.eval(&gp, &gm) - sp.error_rate_11[1]).abs() < 1e-12, "{} vs {}", e.eval(&gp, &gm), sp.error_rate_11[1]);
    }
}
