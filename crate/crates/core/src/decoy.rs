//! Decoy-state bounds on the single-photon yield and error rate.
//!
//! For each basis the gains obey
//! `Q_ij = Σ_{n,m} P_i(n) P_j(m) Y_nm` over Poisson weights. Truncating at
//! `n, m <= N_cut` leaves a tail in `[0, T_ij]` with
//! `T_ij = 1 - (Σ_{n<=N} P_i(n)) (Σ_{m<=N} P_j(m))`, so every pair gives
//! `Q_ij - T_ij <= Σ P P Y <= Q_ij`. The same holds for the error masses
//! `E_ij Q_ij` with per-component masses `b_nm`. Components with negligible
//! weight are folded into the tail as well. `Y_11` is minimised and
//! `b_11` maximised over these relaxations; the truth is always feasible.

use crate::channel::{DecoyBasisStats, DecoyStats};
use crate::error::{invalid, Error, Result};
use crate::rates::{h2, Rate};
use crate::solver::{solve_lp, LinearProgram, LpStatus, Sense};

pub const DEFAULT_N_CUT: usize = 12;
const LP_GAP_TOL: f64 = 1e-9;
const LP_MAX_ITER: usize = 200;

/// Bounds for one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisBounds {
    pub yield_lower: f64,
    /// Upper bound on the single-photon error mass `e_11 Y_11`.
    pub error_mass_upper: f64,
    /// `error_mass_upper / yield_lower`, capped at 1.
    pub error_rate_upper: f64,
    pub yield_status: LpStatus,
    pub error_status: LpStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoyBounds {
    /// Z basis first, then X.
    pub bases: Vec<BasisBounds>,
    pub n_cut: usize,
}

fn poisson_weights(mu: f64, n_cut: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n_cut + 1);
    let mut t = (-mu).exp();
    for n in 0..=n_cut {
        w.push(t);
        t *= mu / (n + 1) as f64;
    }
    w
}

/// Photon-number components kept as LP variables: all `n, m <= N_cut`
/// whose largest mixing weight reaches `WEIGHT_FLOOR`, plus `(1, 1)`.
/// Dropped components lie in `[0, 1]`, so their mass joins the tail.
const WEIGHT_FLOOR: f64 = 1e-12;

struct Components {
    kept: Vec<(usize, usize)>,
    weights: Vec<Vec<f64>>,
}

impl Components {
    fn new(intensities: &[f64], pairs: &[(usize, usize)], n_cut: usize) -> Self {
        let weights: Vec<Vec<f64>> = intensities.iter().map(|&mu| poisson_weights(mu, n_cut)).collect();
        let mut kept = Vec::new();
        for n in 0..=n_cut {
            for m in 0..=n_cut {
                let w = pairs.iter().map(|&(i, j)| weights[i][n] * weights[j][m]).fold(0.0, f64::max);
                if w >= WEIGHT_FLOOR || (n, m) == (1, 1) {
                    kept.push((n, m));
                }
            }
        }
        Components { kept, weights }
    }

    fn target(&self) -> usize {
        self.kept.iter().position(|&c| c == (1, 1)).expect("(1, 1) is always kept")
    }

    /// Rows `Q - T <= Σ w v <= Q` for one observed quantity per pair.
    fn rows(&self, pairs: &[(usize, usize)], observed: impl Fn(usize, usize) -> f64) -> Vec<(Vec<f64>, f64)> {
        let mut rows = Vec::with_capacity(2 * pairs.len());
        for &(i, j) in pairs {
            let a: Vec<f64> = self.kept.iter().map(|&(n, m)| self.weights[i][n] * self.weights[j][m]).collect();
            let tail = (1.0 - a.iter().sum::<f64>()).max(0.0);
            let q = observed(i, j);
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            rows.push((a, q));
            rows.push((neg, tail - q));
        }
        rows
    }
}

fn check_stats(b: &DecoyBasisStats, n: usize) -> Result<()> {
    if b.gain.len() != n || b.qber.len() != n || b.gain.iter().chain(&b.qber).any(|r| r.len() != n) {
        return Err(invalid("decoy statistics must cover every intensity pair"));
    }
    for (g, e) in b.gain.iter().flatten().zip(b.qber.iter().flatten()) {
        if !(0.0..=1.0).contains(g) || !(0.0..=1.0).contains(e) {
            return Err(Error::InconsistentStatistics(format!("gain {g} or QBER {e} is not a probability")));
        }
    }
    Ok(())
}

/// Bounds for one basis using only the listed intensity pairs.
pub fn bound_basis_with(
    stats: &DecoyBasisStats,
    intensities: &[f64],
    pairs: &[(usize, usize)],
    n_cut: usize,
) -> Result<BasisBounds> {
    if n_cut < 2 {
        return Err(invalid(format!("photon-number cutoff {n_cut} is below 2")));
    }
    if intensities.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
        return Err(invalid("intensities must be finite and nonnegative"));
    }
    check_stats(stats, intensities.len())?;
    if pairs.iter().any(|&(i, j)| i >= intensities.len() || j >= intensities.len()) {
        return Err(invalid("intensity pair out of range"));
    }
    // Equal intensities give identical rows, which leave the LP degenerate.
    let mut seen: Vec<(f64, f64)> = Vec::new();
    let pairs: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let key = (intensities[i], intensities[j]);
            let fresh = !seen.contains(&key);
            seen.push(key);
            fresh
        })
        .collect();
    let pairs = &pairs[..];
    let comps = Components::new(intensities, pairs, n_cut);
    let nv = comps.kept.len();
    let mut c = vec![0.0; nv];
    c[comps.target()] = 1.0;
    let bounds = vec![(Some(0.0), Some(1.0)); nv];

    let yield_lp = LinearProgram {
        sense: Sense::Minimize,
        c: c.clone(),
        eq: vec![],
        ub: comps.rows(pairs, |i, j| stats.gain[i][j]),
        bounds: bounds.clone(),
    };
    let y = solve_lp(&yield_lp, LP_GAP_TOL, LP_MAX_ITER)?;
    if y.status == LpStatus::Infeasible {
        return Err(Error::InconsistentStatistics("no yield table reproduces the observed gains".into()));
    }
    let error_lp = LinearProgram {
        sense: Sense::Maximize,
        c,
        eq: vec![],
        ub: comps.rows(pairs, |i, j| stats.gain[i][j] * stats.qber[i][j]),
        bounds,
    };
    let e = solve_lp(&error_lp, LP_GAP_TOL, LP_MAX_ITER)?;
    if e.status == LpStatus::Infeasible {
        return Err(Error::InconsistentStatistics("no error table reproduces the observed error masses".into()));
    }
    // Only the dual bounds are sound; without one fall back to the trivial
    // range.
    let yield_lower = y.bound.map(|b| b.clamp(0.0, 1.0)).unwrap_or(0.0);
    let error_mass_upper = e.bound.map(|b| b.clamp(0.0, 1.0)).unwrap_or(1.0);
    let error_rate_upper = if yield_lower > 0.0 { (error_mass_upper / yield_lower).min(1.0) } else { 1.0 };
    Ok(BasisBounds { yield_lower, error_mass_upper, error_rate_upper, yield_status: y.status, error_status: e.status })
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect()
}

/// Bounds for both bases from the full intensity grid.
pub fn bound_single_photon(stats: &DecoyStats, n_cut: usize) -> Result<DecoyBounds> {
    let pairs = all_pairs(stats.intensities.len());
    let bases = stats
        .bases
        .iter()
        .map(|b| bound_basis_with(b, &stats.intensities, &pairs, n_cut))
        .collect::<Result<_>>()?;
    Ok(DecoyBounds { bases, n_cut })
}

/// `μ² e^{-2μ} Y_11 [1 - h(e_ph)] - Q_μμ h(E_μμ)` for signal intensity
/// `mu` on both sides.
pub fn decoy_key_rate(mu: f64, yield_lower: f64, e_ph: f64, signal_gain: f64, signal_qber: f64) -> Rate {
    let q11 = mu * mu * (-2.0 * mu).exp() * yield_lower;
    Rate { raw: q11 * (1.0 - h2(e_ph)) - signal_gain * h2(signal_qber) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{decoy_stats, single_photon_stats, DeviceParams};
    use proptest::prelude::*;

    /// Statistics of an explicit yield/error table over `n, m <= K`, with a
    /// constant `(y_tail, e_tail)` beyond it summed in closed form.
    fn table_stats(intensities: &[f64], yields: &[Vec<f64>], errs: &[Vec<f64>], y_tail: f64, e_tail: f64) -> DecoyBasisStats {
        let k = yields.len() - 1;
        let n = intensities.len();
        let mut gain = vec![vec![0.0; n]; n];
        let mut qber = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let (wi, wj) = (poisson_weights(intensities[i], k), poisson_weights(intensities[j], k));
                let (mut q, mut e, mut mass) = (0.0, 0.0, 0.0);
                for a in 0..=k {
                    for b in 0..=k {
                        let w = wi[a] * wj[b];
                        q += w * yields[a][b];
                        e += w * yields[a][b] * errs[a][b];
                        mass += w;
                    }
                }
                let rest = (1.0 - mass).max(0.0);
                q += rest * y_tail;
                e += rest * y_tail * e_tail;
                gain[i][j] = q;
                qber[i][j] = if q > 0.0 { e / q } else { 0.0 };
            }
        }
        DecoyBasisStats { gain, qber }
    }

    /// Gains and error masses of a yield table that is constant in photon
    /// number, summed in closed form.
    fn constant_stats(intensities: &[f64], y: f64, e: f64) -> DecoyBasisStats {
        let n = intensities.len();
        DecoyBasisStats { gain: vec![vec![y; n]; n], qber: vec![vec![e; n]; n] }
    }

    #[test]
    fn constant_yield_is_feasible() {
        let mu = [0.3, 0.1, 3e-4];
        let b = bound_basis_with(&constant_stats(&mu, 0.02, 0.1), &mu, &all_pairs(3), 12).unwrap();
        assert!(b.yield_lower <= 0.02 + 1e-9, "{b:?}");
        assert!(b.error_mass_upper >= 0.002 - 1e-9, "{b:?}");
    }

    #[test]
    fn zero_errors_give_zero_error_rate() {
        let mu = [0.3, 0.1, 3e-4];
        let b = bound_basis_with(&constant_stats(&mu, 0.02, 0.0), &mu, &all_pairs(3), 12).unwrap();
        assert!(b.error_mass_upper < 1e-9, "{b:?}");
        assert!(b.error_rate_upper < 1e-7, "{b:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let mu = [0.3, 0.1, 3e-4];
        let s = constant_stats(&mu, 0.02, 0.0);
        assert!(bound_basis_with(&s, &mu, &all_pairs(3), 1).is_err());
        assert!(bound_basis_with(&s, &mu[..2], &all_pairs(2), 12).is_err());
        let mut bad = s.clone();
        bad.gain[0][0] = 1.5;
        assert!(bound_basis_with(&bad, &mu, &all_pairs(3), 12).is_err());
    }

    #[test]
    fn honest_bounds_bracket_single_photon_values() {
        let dev = DeviceParams::parameter1().at_distance(10.0);
        let mu = [0.3, 0.1, 3e-4];
        let stats = decoy_stats(&mu, &dev, 64).unwrap();
        let truth = single_photon_stats(&dev).unwrap();
        let b = bound_single_photon(&stats, 12).unwrap();
        for x in 0..2 {
            let bb = b.bases[x];
            assert!(bb.yield_lower <= truth.yield_11[x] + 1e-9, "basis {x}: {bb:?} vs {truth:?}");
            assert!(bb.yield_lower > 0.5 * truth.yield_11[x], "basis {x}: {bb:?} vs {truth:?}");
            assert!(bb.error_rate_upper >= truth.error_rate_11[x] - 1e-9, "basis {x}: {bb:?} vs {truth:?}");
        }
    }

    #[test]
    fn equal_signal_and_decoy_stay_finite_and_sound() {
        let truth = single_photon_stats(&DeviceParams::parameter1()).unwrap();
        for (km, mu) in [(0.0, 0.39810717055349737), (40.0, 0.6309573444801934)] {
            let dev = DeviceParams::parameter1().at_distance(km);
            let truth = if km == 0.0 { truth } else { single_photon_stats(&dev).unwrap() };
            let stats = decoy_stats(&[mu, mu, mu * 1e-3], &dev, 64).unwrap();
            let b = bound_single_photon(&stats, 12).unwrap();
            for x in 0..2 {
                let bb = b.bases[x];
                assert!(bb.yield_lower.is_finite() && bb.error_mass_upper.is_finite(), "{km} km basis {x}: {bb:?}");
                assert!(bb.yield_lower <= truth.yield_11[x] + 1e-12, "{km} km basis {x}: {bb:?}");
                assert!(bb.error_mass_upper >= truth.yield_11[x] * truth.error_rate_11[x] - 1e-12, "{km} km basis {x}: {bb:?}");
            }
        }
    }

    #[test]
    fn rate_limits() {
        let mu: f64 = 0.3;
        assert!(decoy_key_rate(mu, 0.01, 0.5, 0.001, 0.02).raw <= 0.0);
        let r = decoy_key_rate(mu, 0.01, 0.0, 0.001, 0.0).raw;
        assert!((r - mu * mu * (-2.0 * mu).exp() * 0.01).abs() < 1e-18);
    }

    #[test]
    fn fewer_pairs_never_tighten() {
        let dev = DeviceParams::parameter1().at_distance(10.0);
        let mu = [0.3, 0.1, 3e-4];
        let stats = decoy_stats(&mu, &dev, 32).unwrap();
        let full = bound_basis_with(&stats.bases[1], &mu, &all_pairs(3), 12).unwrap();
        for drop in 0..9 {
            let pairs: Vec<_> = all_pairs(3).into_iter().enumerate().filter(|(k, _)| *k != drop).map(|(_, p)| p).collect();
            let part = bound_basis_with(&stats.bases[1], &mu, &pairs, 12).unwrap();
            assert!(part.yield_lower <= full.yield_lower + 1e-9, "dropped {drop}: {part:?} vs {full:?}");
            assert!(part.error_mass_upper >= full.error_mass_upper - 1e-9, "dropped {drop}: {part:?} vs {full:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn generated_truth_lies_within_bounds(
            yields in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 16), 16),
            errs in proptest::collection::vec(proptest::collection::vec(0.0f64..0.5, 16), 16),
            y_tail in 0.0f64..1.0,
            e_tail in 0.0f64..0.5,
            mu in 0.2f64..0.8,
            ratio in 0.1f64..0.6,
        ) {
            let intensities = [mu, mu * ratio, mu / 1000.0];
            let stats = table_stats(&intensities, &yields, &errs, y_tail, e_tail);
            let b = bound_basis_with(&stats, &intensities, &all_pairs(3), 12).unwrap();
            prop_assert!(b.yield_lower <= yields[1][1] + 1e-9, "{:?} vs {}", b, yields[1][1]);
            prop_assert!(b.error_mass_upper >= yields[1][1] * errs[1][1] - 1e-9, "{:?} vs {}", b, yields[1][1] * errs[1][1]);
        }
    }
}
