//! Quantum-coin phase-error bound used as the comparison baseline.
//!
//! Each party's key and test families are attached to label qubits,
//! `|Φ_x> = Σ_a |k_a>|s_{key,a}>/√2` and `|Φ_y> = Σ_a |t_a>|s_{test,a}>/√2`,
//! and the coin imbalance is `Δ_init = (1 - Re <Φ_x^A|Φ_y^A><Φ_x^B|Φ_y^B>)/2`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::rates::{shor_preskill_rate, Rate};
use crate::states::{qubit, state_overlap, Encoding, ProtocolSpec, PureState};

type Qubit = [Complex64; 2];

/// Label qubits attached to the key and test states, indexed by bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinLabels {
    pub key: [Qubit; 2],
    pub test: [Qubit; 2],
}

impl CoinLabels {
    /// Phase encoding: `|±>` on the key pair, `|-i>` on the first test
    /// state and `|+i>` on the second.
    pub fn phase_encoding() -> Self {
        CoinLabels { key: [qubit::plus(), qubit::minus()], test: [qubit::minus_i(), qubit::plus_i()] }
    }

    /// Time-bin qubits: labels equal to the encoded qubits, so that without
    /// side channels `Φ_x = Φ_y` and the coin is unbiased.
    pub fn time_bin() -> Self {
        CoinLabels { key: [qubit::zero(), qubit::one()], test: [qubit::plus(), qubit::minus()] }
    }

    pub fn for_encoding(e: Encoding) -> Self {
        match e {
            Encoding::Phase => Self::phase_encoding(),
            Encoding::TimeBin => Self::time_bin(),
        }
    }
}

/// Index of the test basis paired with the key basis.
fn test_basis(p: &ProtocolSpec) -> Result<usize> {
    if p.num_bases < 2 {
        return Err(Error::Unsupported("the coin bound needs a two-state test basis".into()));
    }
    Ok(if p.key_basis == 0 { 1 } else { 0 })
}

fn phi_overlap(states: impl Fn(usize, usize) -> PureState, key: usize, test: usize, l: &CoinLabels) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for a in 0..2 {
        for b in 0..2 {
            sum += qubit::inner(&l.key[a], &l.test[b]) * state_overlap(&states(key, a), &states(test, b))?;
        }
    }
    Ok(sum * 0.5)
}

/// Coin imbalance before conditioning on a successful measurement.
pub fn delta_init(p: &ProtocolSpec) -> Result<f64> {
    delta_init_with(p, &CoinLabels::for_encoding(p.encoding))
}

pub fn delta_init_with(p: &ProtocolSpec, labels: &CoinLabels) -> Result<f64> {
    let t = test_basis(p)?;
    let k = p.key_basis;
    let oa = phi_overlap(|x, a| p.alice(x, a).clone(), k, t, labels)?;
    let ob = phi_overlap(|x, a| p.bob(x, a).clone(), k, t, labels)?;
    Ok(((1.0 - (oa * ob).re) / 2.0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinInputs {
    pub delta_init: f64,
    pub p_pass: f64,
    /// Test-basis bit error rate.
    pub e_y: f64,
    /// Key-basis bit error rate.
    pub e_x: f64,
}

impl CoinInputs {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta_init) {
            return Err(invalid(format!("delta_init = {} is outside [0, 1]", self.delta_init)));
        }
        if !(self.p_pass > 0.0 && self.p_pass <= 1.0) {
            return Err(invalid(format!("p_pass = {} is outside (0, 1]", self.p_pass)));
        }
        for (name, v) in [("e_y", self.e_y), ("e_x", self.e_x)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(invalid(format!("{name} = {v} is outside [0, 1/2]")));
            }
        }
        Ok(())
    }
}

/// Largest `e_ph` allowed by the Bloch-sphere bound for coin imbalance
/// `delta`; saturates at 1/2.
pub fn coin_bound(delta: f64, e_y: f64) -> f64 {
    if delta >= 0.5 {
        return 0.5;
    }
    let d = delta.max(0.0);
    let e = e_y.clamp(0.0, 1.0);
    let v = e + 4.0 * d * (1.0 - d) * (1.0 - 2.0 * e) + 4.0 * (1.0 - 2.0 * d) * (d * (1.0 - d) * e * (1.0 - e)).sqrt();
    v.min(0.5)
}

/// Phase-error bound with `Δ = Δ_init / P_pass`.
pub fn coin_phase_error(inputs: &CoinInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(coin_bound(inputs.delta_init / inputs.p_pass, inputs.e_y))
}

pub fn coin_key_rate(p_pass: f64, e_ph: f64, e_x: f64) -> Rate {
    shor_preskill_rate(p_pass, e_ph, e_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_protocol, Family};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// `<Φ_x|Φ_y>` for phase encoding at total intensity `m`, expanded by
    /// hand: `e^{-m}(cos m + sin m)`.
    fn phase_phi_overlap(m: f64) -> f64 {
        (-m).exp() * (m.cos() + m.sin())
    }

    #[test]
    fn phase_family_matches_expansion() {
        let p = build_protocol(Family::PhaseEncoding { bases: 2, mu: 0.1 }).unwrap();
        let o = phase_phi_overlap(0.1);
        assert_relative_eq!(delta_init(&p).unwrap(), (1.0 - o * o) / 2.0, max_relative = 1e-12);
        let t = build_protocol(Family::PhaseEncodingTrojan { bases: 2, mu: 0.1, nu: 1e-4 }).unwrap();
        let o = phase_phi_overlap(0.1 + 1e-4);
        assert_relative_eq!(delta_init(&t).unwrap(), (1.0 - o * o) / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn vacuum_limit_and_identical_families() {
        let p = build_protocol(Family::PhaseEncoding { bases: 2, mu: 1e-9 }).unwrap();
        assert!(delta_init(&p).unwrap() < 1e-8);
        // Without leakage the time-bin Φ states coincide.
        let d = build_protocol(Family::DecoySinglePhoton { nu: 0.0 }).unwrap();
        assert!(delta_init(&d).unwrap().abs() < 1e-15);
        let d = build_protocol(Family::DecoySinglePhoton { nu: 1e-3 }).unwrap();
        assert!(delta_init(&d).unwrap() > 0.0);
        let one = build_protocol(Family::PhaseEncoding { bases: 1, mu: 0.1 }).unwrap();
        assert!(delta_init(&one).is_err());
    }

    #[test]
    fn bound_special_cases() {
        let base = CoinInputs { delta_init: 0.0, p_pass: 0.5, e_y: 0.03, e_x: 0.01 };
        assert_relative_eq!(coin_phase_error(&base).unwrap(), 0.03, max_relative = 1e-15);
        let d = 0.1;
        assert_relative_eq!(coin_bound(d, 0.0), 4.0 * d * (1.0 - d), max_relative = 1e-15);
        assert_eq!(coin_bound(0.6, 0.01), 0.5);
        assert!(coin_phase_error(&CoinInputs { p_pass: 0.0, ..base }).is_err());
    }

    /// Solves `1 - 2Δ = √(e_y e) + √((1-e_y)(1-e))` for the extremal `e`
    /// above `e_y` by bisection.
    fn bloch_root(delta: f64, e_y: f64) -> f64 {
        let f = |e: f64| (e_y * e).sqrt() + ((1.0 - e_y) * (1.0 - e)).sqrt() - (1.0 - 2.0 * delta);
        let (mut lo, mut hi) = (e_y, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn bound_inverts_bloch_inequality() {
        let (d, e) = (0.3, 0.05);
        let root = bloch_root(d, e);
        let closed = e + 4.0 * d * (1.0 - d) * (1.0 - 2.0 * e) + 4.0 * (1.0 - 2.0 * d) * (d * (1.0 - d) * e * (1.0 - e)).sqrt();
        assert_relative_eq!(closed, root, max_relative = 1e-10);
        assert_eq!(coin_bound(d, e), closed.min(0.5));
        assert_relative_eq!(coin_bound(0.02, 0.05), bloch_root(0.02, 0.05), max_relative = 1e-10);
    }

    #[test]
    fn rate_limits() {
        assert_eq!(coin_key_rate(0.2, 0.0, 0.0).raw, 0.2);
        assert!(coin_key_rate(0.2, 0.5, 0.0).raw <= 0.0);
    }

    proptest! {
        #[test]
        fn bound_monotone_and_above_e_y(d in 0.0f64..0.5, e in 0.0f64..0.5, dd in 0.0f64..0.05, de in 0.0f64..0.05) {
            let v = coin_bound(d, e);
            prop_assert!(v >= e.min(0.5) - 1e-15);
            prop_assert!(coin_bound((d + dd).min(0.5), e) >= v - 1e-12);
            prop_assert!(coin_bound(d, (e + de).min(0.5)) >= v - 1e-12);
        }
    }
}
