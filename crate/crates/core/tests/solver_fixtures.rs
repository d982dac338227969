mod support;

use std::time::Instant;

use mdiqkd::sdp_model::{from_text, to_text};
use mdiqkd::solver::{solve, verify_certificate, SolveStatus, SolverOptions};

#[test]
fn random_fixtures_match_reference() {
    let fixtures = support::fixtures();
    assert!(fixtures.len() >= 30);
    let opts = SolverOptions::default();
    for (name, p, reference) in fixtures {
        assert!(p.dim() <= 6, "{name}");
        let t = Instant::now();
        let rep = solve(&p, &opts).unwrap();
        let elapsed = t.elapsed().as_secs_f64();
        assert_eq!(rep.status, SolveStatus::Optimal, "{name}");
        assert!(rep.relative_gap() <= 1e-7, "{name}: gap {}", rep.relative_gap());
        let v = verify_certificate(&p, rep.certificate.as_ref().unwrap(), opts.cert_tol).unwrap();
        assert!(v.passed, "{name}: {:?}", v.residuals);
        let scale = reference.abs().max(1.0);
        assert!((rep.primal_value - reference).abs() <= 1e-6 * scale, "{name}: {} vs {reference}", rep.primal_value);
        assert!(v.certified_bound >= reference - 1e-6 * scale, "{name}: bound {} below {reference}", v.certified_bound);
        assert!(elapsed < 1.0, "{name}: {elapsed} s");
    }
}

#[test]
fn fixtures_survive_text_round_trip() {
    for (name, p, _) in support::fixtures() {
        let q = from_text(&to_text(&p)).unwrap();
        assert_eq!(p, q, "{name}");
    }
}
