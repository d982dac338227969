//! Closed-form channel statistics against photon-counting simulation
//! (10^7 trials, agreement within 3 standard errors).

use mdiqkd::channel::montecarlo::{sample_decoy_pair, sample_phase_basis};
use mdiqkd::channel::{decoy_stats, phase_protocol_stats, DeviceParams};
use mdiqkd::sdp_model::BasisObservation;
use mdiqkd::states::{build_protocol, Family};
use rand::rngs::StdRng;
use rand::SeedableRng;

const TRIALS: u64 = 10_000_000;

#[test]
fn phase_encoding_statistics() {
    let mut rng = StdRng::seed_from_u64(7);
    let dev = DeviceParams { p_dc: 1e-3, ..DeviceParams::parameter1() }.at_distance(5.0);
    let p = build_protocol(Family::PhaseEncoding { bases: 2, mu: 0.3 }).unwrap();
    let stats = phase_protocol_stats(&p, &dev).unwrap();
    for x in 0..2 {
        let Some(BasisObservation::Exact { pass, e_bit }) = stats.bases[x] else { panic!("basis {x} not exact") };
        let est = sample_phase_basis(&p, &dev, x, TRIALS, &mut rng).unwrap();
        assert!(est.pass.agrees(pass, 3.0), "basis {x}: pass {pass} vs {:?}", est.pass);
        assert!(est.error_mass.agrees(pass * e_bit, 3.0), "basis {x}: errors {} vs {:?}", pass * e_bit, est.error_mass);
    }
}

#[test]
fn phase_matching_statistics() {
    let mut rng = StdRng::seed_from_u64(11);
    let dev = DeviceParams::parameter2().at_total_loss(10.0);
    let p = build_protocol(Family::PhaseMatching { intensities: vec![0.05, 0.4] }).unwrap();
    let stats = phase_protocol_stats(&p, &dev).unwrap();
    for x in 0..2 {
        let Some(BasisObservation::Exact { pass, e_bit }) = stats.bases[x] else { panic!("basis {x} not exact") };
        let est = sample_phase_basis(&p, &dev, x, TRIALS, &mut rng).unwrap();
        assert!(est.pass.agrees(pass, 3.0), "basis {x}: pass {pass} vs {:?}", est.pass);
        assert!(est.error_mass.agrees(pass * e_bit, 3.0), "basis {x}: errors {} vs {:?}", pass * e_bit, est.error_mass);
    }
}

#[test]
fn decoy_statistics() {
    let mut rng = StdRng::seed_from_u64(13);
    let dev = DeviceParams { p_dc: 1e-3, ..DeviceParams::parameter1() }.at_distance(5.0);
    let mu = [0.4, 0.1];
    let stats = decoy_stats(&mu, &dev, 64).unwrap();
    for x in 0..2 {
        for (i, j) in [(0, 0), (0, 1)] {
            let (gain, qber) = (stats.bases[x].gain[i][j], stats.bases[x].qber[i][j]);
            let est = sample_decoy_pair(&dev, x, mu[i], mu[j], TRIALS, &mut rng).unwrap();
            assert!(est.pass.agrees(gain, 3.0), "basis {x} pair ({i},{j}): gain {gain} vs {:?}", est.pass);
            assert!(est.error_mass.agrees(gain * qber, 3.0), "basis {x} pair ({i},{j}): {} vs {:?}", gain * qber, est.error_mass);
        }
    }
}
