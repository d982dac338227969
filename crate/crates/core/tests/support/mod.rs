//! Shared pieces of the integration tests: fixtures, random SDPs and the
//! property suites. Each suite is a plain function so that the standalone
//! test targets and the acceptance run share one implementation.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use mdiqkd::channel::{decoy_stats, single_photon_stats, DecoyBasisStats, DeviceParams};
use mdiqkd::decoy::{all_pairs, bound_basis_with, bound_single_photon};
use mdiqkd::linalg::{c, hermiticity_defect, min_eigenvalue, CMatrix};
use mdiqkd::rates::{binary_entropy, infinite_test_rate, plob_bound, shor_preskill_rate};
use mdiqkd::sdp_model::{from_text, Equality, Functional, Interval, SdpProblem};
use mdiqkd::solver::{solve, verify_certificate, SolveStatus, SolverOptions};
use mdiqkd::states::{build_protocol, coherent_overlap, lambda_matrix, Family};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Random SDP fixtures with their reference optima.
pub fn fixtures() -> Vec<(String, SdpProblem, f64)> {
    let dir = fixture_dir();
    let refs: BTreeMap<String, f64> =
        serde_json::from_str(&std::fs::read_to_string(dir.join("reference.json")).expect("reference.json")).expect("valid JSON");
    refs.into_iter()
        .map(|(name, v)| {
            let text = std::fs::read_to_string(dir.join(&name)).expect("fixture file");
            let p = from_text(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, p, v)
        })
        .collect()
}

fn normal(rng: &mut StdRng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(normal(rng), normal(rng)))
}

fn random_hermitian(rng: &mut StdRng, d: usize) -> CMatrix {
    let a = random_matrix(rng, d, d);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

fn random_psd(rng: &mut StdRng, d: usize) -> CMatrix {
    let a = random_matrix(rng, d, d);
    &a * a.adjoint() * c(1.0 / d as f64, 0.0)
}

/// A random SDP together with a strictly feasible point `(G+, G-, s)`.
pub struct RandomSdp {
    pub problem: SdpProblem,
    pub g_plus: CMatrix,
    pub g_minus: CMatrix,
    pub s: f64,
}

pub fn random_sdp(seed: u64, d: usize) -> RandomSdp {
    let mut rng = StdRng::seed_from_u64(seed);
    let lambda = random_psd(&mut rng, d) + CMatrix::identity(d, d) * c(0.1, 0.0);
    let scale_bounds = if rng.random::<bool>() { (1.0, 1.0) } else { (0.5, 2.0) };
    let s = 0.5 * (scale_bounds.0 + scale_bounds.1);
    // G+ = t L U L† with 0 ⪯ U ⪯ I, so G+ + G- stays strictly inside sΛ.
    let l = lambda.clone().cholesky().expect("Λ is positive definite").l();
    let u = random_psd(&mut rng, d);
    let u = &u * c(1.0 / mdiqkd::linalg::hermitian_eigenvalues(&u).into_iter().fold(0.0, f64::max), 0.0);
    let g_plus = &l * u * l.adjoint() * c(0.45 * s, 0.0);
    let g_minus = &lambda * c(0.45 * s, 0.0) - &g_plus * c(0.5, 0.0);
    let functional =
        |rng: &mut StdRng| Functional { plus: random_hermitian(rng, d), minus: random_hermitian(rng, d), scale: normal(rng) };
    let objective = functional(&mut rng);
    let mut equalities = Vec::new();
    for k in 0..rng.random_range(0..3) {
        let f = functional(&mut rng);
        let value = f.eval(&g_plus, &g_minus, s);
        equalities.push(Equality { label: format!("eq{k}"), functional: f, value });
    }
    let mut intervals = Vec::new();
    for k in 0..rng.random_range(1..4) {
        let f = functional(&mut rng);
        let v = f.eval(&g_plus, &g_minus, s);
        let kind = rng.random_range(0..3);
        let lower = (kind != 2).then(|| v - normal(&mut rng).abs() - 0.05);
        let upper = (kind != 1).then(|| v + normal(&mut rng).abs() + 0.05);
        intervals.push(Interval { label: format!("iv{k}"), functional: f, lower, upper });
    }
    let objective_constant = normal(&mut rng);
    let cap = rng
        .random_bool(0.25)
        .then(|| objective_constant + objective.eval(&g_plus, &g_minus, s) + 0.5 * normal(&mut rng).abs());
    RandomSdp {
        problem: SdpProblem { lambda, objective, objective_constant, equalities, intervals, cap, scale_bounds },
        g_plus,
        g_minus,
        s,
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

/// Overlaps and Λ: conjugate symmetry, the coherent-state modulus, and Λ
/// Hermitian PSD with unit diagonal equal to the explicit Gram matrix.
pub fn overlap_lambda_suite(cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    let amp = (-2.0f64..2.0, -2.0f64..2.0);
    r.run(&(amp.clone(), amp), |((ar, ai), (br, bi))| {
        let (a, b) = (c(ar, ai), c(br, bi));
        let ab = coherent_overlap(a, b);
        prop_assert!((ab - coherent_overlap(b, a).conj()).norm() < 1e-14);
        prop_assert!((ab.norm() - (-(a - b).norm_sqr() / 2.0).exp()).abs() < 1e-14);
        Ok(())
    })
    .map_err(|e| format!("coherent overlap: {e}"))?;

    let mut r = runner(cases);
    let fam = prop_oneof![
        (1usize..4, 0.0f64..1.5).prop_map(|(bases, mu)| Family::PhaseEncoding { bases, mu }),
        (1usize..4, 0.0f64..1.5, 0.0f64..0.01).prop_map(|(bases, mu, nu)| Family::PhaseEncodingTrojan { bases, mu, nu }),
        (0.0f64..0.01).prop_map(|nu| Family::DecoySinglePhoton { nu }),
        proptest::collection::vec(0.0f64..1.5, 1..4).prop_map(|intensities| Family::PhaseMatching { intensities }),
    ];
    r.run(&fam, |fam| {
        let p = build_protocol(fam.clone()).map_err(|e| fail(e.to_string()))?;
        let l = lambda_matrix(&p).map_err(|e| fail(e.to_string()))?;
        prop_assert!(hermiticity_defect(&l.entries) < 1e-14);
        prop_assert!(min_eigenvalue(&l.entries) >= -1e-10, "{:?}: λ_min {}", fam, min_eigenvalue(&l.entries));
        for i in 0..l.dim() {
            prop_assert!((l.entries[(i, i)] - c(1.0, 0.0)).norm() < 1e-15);
        }
        if let Family::PhaseMatching { intensities } = &fam {
            let m = intensities.len();
            let alpha = |x: usize, a: usize| {
                Complex64::from_polar(intensities[x].sqrt(), std::f64::consts::PI * x as f64 / m as f64) * if a == 0 { 1.0 } else { -1.0 }
            };
            for (r, i) in l.index.iter().enumerate() {
                for (s, j) in l.index.iter().enumerate() {
                    let want = coherent_overlap(alpha(i.x, i.a), alpha(j.x, j.a)) * coherent_overlap(alpha(i.y, i.b), alpha(j.y, j.b));
                    prop_assert!((l.entries[(r, s)] - want).norm() < 1e-13);
                }
            }
        }
        Ok(())
    })
    .map_err(|e| format!("Λ: {e}"))
}

/// Weak duality on random feasible SDPs: the certified bound dominates the
/// solver's primal value and every known feasible point.
pub fn weak_duality_suite(cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    r.run(&(any::<u64>(), 2usize..6), |(seed, d)| {
        let rs = random_sdp(seed, d);
        let p = &rs.problem;
        let opts = SolverOptions::default();
        let rep = solve(p, &opts).map_err(|e| fail(e.to_string()))?;
        prop_assert_eq!(rep.status, SolveStatus::Optimal);
        let cert = rep.certificate.as_ref().ok_or_else(|| fail("no certificate".into()))?;
        let v = verify_certificate(p, cert, opts.cert_tol).map_err(|e| fail(e.to_string()))?;
        prop_assert!(v.passed, "{:?}", v.residuals);
        let tol = 1e-7 * (1.0 + v.certified_bound.abs());
        prop_assert!(p.max_violation(&rs.g_plus, &rs.g_minus, rs.s) <= 1e-9);
        let known = p.objective_value(&rs.g_plus, &rs.g_minus, rs.s);
        prop_assert!(known <= v.certified_bound + tol, "feasible {} above bound {}", known, v.certified_bound);
        prop_assert!(rep.primal_value <= v.certified_bound + tol);
        prop_assert!(rep.relative_gap() <= 1e-7, "gap {}", rep.relative_gap());
        // Any certificate at all, even a wrong one, gives a valid bound.
        let mut bad = cert.clone();
        for y in &mut bad.equality {
            *y += 0.3;
        }
        let vb = verify_certificate(p, &bad, opts.cert_tol).map_err(|e| fail(e.to_string()))?;
        prop_assert!(known <= vb.certified_bound + tol, "perturbed bound {} below feasible {}", vb.certified_bound, known);
        Ok(())
    })
    .map_err(|e| e.to_string())
}

fn poisson(mu: f64, n: usize) -> f64 {
    (-mu + n as f64 * mu.ln() - (1..=n).map(|k| (k as f64).ln()).sum::<f64>()).exp()
}

/// Gains and QBERs of an explicit photon-number table; beyond the table the
/// yield and error rate are constant.
fn table_stats(intensities: &[f64], yields: &[Vec<f64>], errs: &[Vec<f64>], tail: (f64, f64)) -> DecoyBasisStats {
    let k = yields.len();
    let n = intensities.len();
    let mut gain = vec![vec![0.0; n]; n];
    let mut qber = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (mut q, mut e, mut mass) = (0.0, 0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    let w = poisson(intensities[i], a) * poisson(intensities[j], b);
                    q += w * yields[a][b];
                    e += w * yields[a][b] * errs[a][b];
                    mass += w;
                }
            }
            let rest = (1.0 - mass).max(0.0);
            q += rest * tail.0;
            e += rest * tail.0 * tail.1;
            gain[i][j] = q.min(1.0);
            qber[i][j] = if q > 0.0 { (e / q).min(1.0) } else { 0.0 };
        }
    }
    DecoyBasisStats { gain, qber }
}

/// Decoy bounds contain the generating single-photon values, both for
/// arbitrary photon-number tables and for the honest device model.
pub fn decoy_soundness_suite(cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    let table = proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 12), 12);
    let errs = proptest::collection::vec(proptest::collection::vec(0.0f64..0.5, 12), 12);
    r.run(&(table, errs, (0.0f64..1.0, 0.0f64..0.5), 0.1f64..0.9, 0.05f64..0.7), |(y, e, tail, mu, ratio)| {
        let intensities = [mu, mu * ratio, mu / 1000.0];
        let stats = table_stats(&intensities, &y, &e, tail);
        let b = bound_basis_with(&stats, &intensities, &all_pairs(3), 12).map_err(|e| fail(e.to_string()))?;
        prop_assert!(b.yield_lower <= y[1][1] + 1e-9, "{:?} vs {}", b, y[1][1]);
        prop_assert!(b.error_mass_upper >= y[1][1] * e[1][1] - 1e-9, "{:?} vs {}", b, y[1][1] * e[1][1]);
        Ok(())
    })
    .map_err(|e| format!("table: {e}"))?;

    let mut r = runner(cases.div_ceil(4));
    let dev = (0.0f64..1e-5, 0.1f64..1.0, 0.0f64..0.05, 0.0f64..150.0);
    r.run(&(dev, 0.1f64..0.8, 0.05f64..0.7), |((p_dc, eta_det, e_ali, km), mu, ratio)| {
        let dev = DeviceParams { p_dc, eta_det, e_ali, ..DeviceParams::parameter1() }.at_distance(km);
        let intensities = [mu, mu * ratio, mu / 1000.0];
        let stats = decoy_stats(&intensities, &dev, 64).map_err(|e| fail(e.to_string()))?;
        let b = bound_single_photon(&stats, 12).map_err(|e| fail(e.to_string()))?;
        let truth = single_photon_stats(&dev).map_err(|e| fail(e.to_string()))?;
        for x in 0..2 {
            let bb = b.bases[x];
            let y11 = truth.yield_11[x];
            prop_assert!(bb.yield_lower <= y11 * (1.0 + 1e-9) + 1e-12, "basis {}: {:?} vs {}", x, bb, y11);
            prop_assert!(bb.error_mass_upper >= y11 * truth.error_rate_11[x] * (1.0 - 1e-9) - 1e-12, "basis {}: {:?}", x, bb);
        }
        Ok(())
    })
    .map_err(|e| format!("device: {e}"))
}

/// Entropy, key-rate and PLOB identities.
pub fn scalar_suite(cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    r.run(&(0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..1.0), |(p, q, t)| {
        let h = |v: f64| binary_entropy(v).unwrap();
        prop_assert!((h(p) - h(1.0 - p)).abs() < 1e-14);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&h(p)));
        prop_assert!(h(0.5) == 1.0 && h(0.0) == 0.0);
        // Concavity along the chord.
        let mid = t * p + (1.0 - t) * q;
        prop_assert!(h(mid) >= t * h(p) + (1.0 - t) * h(q) - 1e-12);
        let (lo, hi) = (p.min(q).min(0.5), p.max(q).min(0.5));
        prop_assert!(shor_preskill_rate(0.3, hi, 0.01).raw <= shor_preskill_rate(0.3, lo, 0.01).raw + 1e-15);
        let eta = t.min(0.999_999);
        let plob = plob_bound(eta).unwrap();
        prop_assert!((plob - (-(1.0 - eta).log2())).abs() <= 1e-12 * (1.0 + plob));
        prop_assert!(plob >= eta / std::f64::consts::LN_2 - 1e-15);
        if eta > 0.0 {
            let eta2 = (eta * (1.0 + p)).min(0.999_999);
            prop_assert!(plob_bound(eta2).unwrap() >= plob);
            prop_assert!(infinite_test_rate(q, eta).unwrap() >= -1e-15);
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    if binary_entropy(-0.1).is_ok() || binary_entropy(1.1).is_ok() || plob_bound(1.0).is_ok() {
        return Err("out-of-range arguments were accepted".into());
    }
    Ok(())
}
