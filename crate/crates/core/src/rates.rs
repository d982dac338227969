//! Scalar rate formulas and grid optimisation of intensities.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::solver::SolveStatus;

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("binary entropy argument {p} is outside [0, 1]")));
    }
    Ok(h2(p))
}

/// Binary entropy with the argument clamped into `[0, 1]`.
pub(crate) fn h2(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// A rate with its unclamped value kept alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub raw: f64,
}

impl Rate {
    pub fn clamped(&self) -> f64 {
        self.raw.max(0.0)
    }
}

/// `P [1 - h(e_ph) - h(e_bit)]`.
pub fn shor_preskill_rate(p_pass: f64, e_ph: f64, e_bit: f64) -> Rate {
    Rate { raw: p_pass * (1.0 - h2(e_ph) - h2(e_bit)) }
}

/// Repeaterless secret-key capacity `-log2(1 - η)`.
pub fn plob_bound(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(invalid(format!("transmittance {eta} is outside [0, 1)")));
    }
    Ok(-(-eta).ln_1p() / std::f64::consts::LN_2)
}

/// Loss-only rate of the phase-matching protocol in the limit of
/// infinitely many test states.
pub fn infinite_test_rate(mu: f64, eta: f64) -> Result<f64> {
    if !(mu >= 0.0) || !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("need mu >= 0 and eta in (0, 1]"));
    }
    let t = eta.sqrt();
    let click = -(-2.0 * mu * t).exp_m1();
    let e = 0.5 * (1.0 - (-4.0 * mu * (1.0 - t) - 2.0 * mu * t).exp());
    Ok(click * (1.0 - h2(e)))
}

/// One evaluated sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRatePoint {
    /// Distance in km or total loss in dB, depending on the sweep.
    pub axis_value: f64,
    pub intensities: Vec<f64>,
    /// Key-basis bit error rate.
    pub e_bit: f64,
    /// Key-basis pass probability.
    pub p_pass: f64,
    /// Certified phase-error bound; `None` unless the solve was verified.
    pub e_ph: Option<f64>,
    pub gap: Option<f64>,
    pub rate_sdp: Option<Rate>,
    pub rate_coin: Option<Rate>,
    pub rate_plob: Option<f64>,
    pub rate_infinite: Option<f64>,
    pub status: SolveStatus,
    pub verified: bool,
}

impl KeyRatePoint {
    /// Whether the point may take part in an optimisation.
    pub fn eligible(&self) -> bool {
        self.status == SolveStatus::Optimal && self.verified && self.rate_sdp.is_some()
    }
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub points: Vec<KeyRatePoint>,
    /// Index of the best eligible point, or `None` if every point failed.
    pub best: Option<usize>,
}

impl GridSearch {
    pub fn best_point(&self) -> Option<&KeyRatePoint> {
        self.best.map(|i| &self.points[i])
    }
}

/// All combinations of the per-axis grids, first axis varying slowest.
pub fn cartesian(grids: &[Vec<f64>]) -> Vec<Vec<f64>> {
    grids.iter().fold(vec![vec![]], |acc, g| {
        acc.iter()
            .flat_map(|prefix| {
                g.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

/// Evaluates every candidate in parallel and keeps the eligible point with
/// the largest certified rate. Ties go to the smallest index.
pub fn optimize_point<F>(candidates: &[Vec<f64>], eval: F) -> Result<GridSearch>
where
    F: Fn(&[f64]) -> Result<KeyRatePoint> + Sync,
{
    if candidates.is_empty() {
        return Err(invalid("the search grid is empty"));
    }
    let points: Vec<KeyRatePoint> = candidates.par_iter().map(|c| eval(c)).collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.eligible() {
            continue;
        }
        let r = p.rate_sdp.map(|r| r.raw).unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((i, r));
        }
    }
    Ok(GridSearch { points, best: best.map(|(i, _)| i) })
}

/// `n` points from `lo` to `hi` spaced evenly on a log scale.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.5).unwrap(), 1.0, max_relative = 1e-15);
        // -0.11 log2 0.11 - 0.89 log2 0.89 expanded by hand with natural logs.
        let direct = -(0.11 * 0.11f64.ln() + 0.89 * 0.89f64.ln()) / 2f64.ln();
        assert_relative_eq!(binary_entropy(0.11).unwrap(), direct, max_relative = 1e-14);
        assert!((direct - 0.499916).abs() < 5e-7);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn shor_preskill_limits() {
        assert_eq!(shor_preskill_rate(0.3, 0.0, 0.0).raw, 0.3);
        assert!(shor_preskill_rate(0.3, 0.5, 0.01).raw <= 0.0);
        assert_eq!(shor_preskill_rate(0.3, 0.5, 0.01).clamped(), 0.0);
    }

    #[test]
    fn plob_values() {
        assert_relative_eq!(plob_bound(0.5).unwrap(), 1.0, max_relative = 1e-15);
        let direct = -(1.0f64 - 1e-3).log2();
        assert_relative_eq!(plob_bound(1e-3).unwrap(), direct, max_relative = 1e-12);
        assert!((direct - 0.0014434).abs() < 5e-8);
        let tiny = 1e-9;
        assert_relative_eq!(plob_bound(tiny).unwrap(), tiny / 2f64.ln(), max_relative = 1e-8);
        assert!(plob_bound(1.0).is_err());
    }

    #[test]
    fn infinite_test_limits() {
        assert_eq!(infinite_test_rate(0.0, 0.3).unwrap(), 0.0);
        let mu: f64 = 0.2;
        let q = 1.0 - (-2.0 * mu).exp();
        let expected = q * (1.0 - h2(q / 2.0));
        assert_relative_eq!(infinite_test_rate(mu, 1.0).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn infinite_test_double_evaluation() {
        let (mu, eta) = (0.1f64, 0.01f64);
        // Second evaluation: powers instead of exponent sums.
        let t = eta.powf(0.5);
        let a = (-2.0 * mu * t).exp();
        let b = (-4.0 * mu * (1.0 - t)).exp();
        let e = (1.0 - b * a) / 2.0;
        let h = -(e * e.ln() + (1.0 - e) * (1.0 - e).ln()) / 2f64.ln();
        let second = (1.0 - a) * (1.0 - h);
        assert_relative_eq!(infinite_test_rate(mu, eta).unwrap(), second, max_relative = 1e-10);
    }

    fn point(rate: f64, status: SolveStatus, verified: bool) -> KeyRatePoint {
        KeyRatePoint {
            axis_value: 0.0,
            intensities: vec![],
            e_bit: 0.0,
            p_pass: 0.0,
            e_ph: Some(0.1),
            gap: Some(0.0),
            rate_sdp: Some(Rate { raw: rate }),
            rate_coin: None,
            rate_plob: None,
            rate_infinite: None,
            status,
            verified,
        }
    }

    #[test]
    fn grid_search_picks_first_best_eligible() {
        let rates = [0.1, 0.5, 0.9, 0.5, 0.9];
        let cands: Vec<Vec<f64>> = (0..rates.len()).map(|i| vec![i as f64]).collect();
        let g = optimize_point(&cands, |c| {
            let i = c[0] as usize;
            Ok(if i == 2 { point(rates[i], SolveStatus::MaxIter, true) } else { point(rates[i], SolveStatus::Optimal, true) })
        })
        .unwrap();
        assert_eq!(g.best, Some(4));
        let single = optimize_point(&[vec![0.0]], |_| Ok(point(0.3, SolveStatus::Optimal, true))).unwrap();
        assert_eq!(single.best_point().unwrap().rate_sdp.unwrap().raw, 0.3);
        let none = optimize_point(&[vec![0.0]], |_| Ok(point(0.3, SolveStatus::Optimal, false))).unwrap();
        assert_eq!(none.best, None);
        assert!(optimize_point(&[], |_| Ok(point(0.0, SolveStatus::Optimal, true))).is_err());
    }

    #[test]
    fn cartesian_order() {
        let c = cartesian(&[vec![1.0, 2.0], vec![3.0, 4.0, 5.0]]);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![1.0, 3.0]);
        assert_eq!(c[1], vec![1.0, 4.0]);
        assert_eq!(c[5], vec![2.0, 5.0]);
        assert_eq!(geomspace(1e-3, 1e-1, 3)[1], 1e-2f64.ln().exp());
    }

    proptest! {
        #[test]
        fn entropy_symmetric(p in 0.0f64..=1.0) {
            prop_assert!((h2(p) - h2(1.0 - p)).abs() < 1e-14);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&h2(p)));
        }

        #[test]
        fn plob_decreases_with_loss(db in 0.01f64..80.0, step in 0.01f64..5.0) {
            let eta = |l: f64| 10f64.powf(-l / 10.0);
            prop_assert!(plob_bound(eta(db + step)).unwrap() < plob_bound(eta(db)).unwrap());
        }

        #[test]
        fn argmax_dominates_grid(rates in proptest::collection::vec(-1.0f64..1.0, 1..20)) {
            let cands: Vec<Vec<f64>> = (0..rates.len()).map(|i| vec![i as f64]).collect();
            let g = optimize_point(&cands, |c| Ok(point(rates[c[0] as usize], SolveStatus::Optimal, true))).unwrap();
            let best = g.best_point().unwrap().rate_sdp.unwrap().raw;
            prop_assert!(rates.iter().all(|r| best >= *r));
        }
    }
}
