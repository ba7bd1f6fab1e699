use lopwire::cxample::*;
use lopwire::lop::classify_channel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn every_pair_is_rigid() {
    let c = certify_not_lop(&build_counterexample());
    assert_eq!(c.pairwise_rigidity.len(), 6);
    assert!(c.pairwise_rigidity.iter().all(|p| p.rigid));
}

#[test]
fn certificate_json_has_the_verdict() {
    let j = certify_not_lop(&build_counterexample()).to_json();
    assert_eq!(j["verdict"], true);
    assert_eq!(j["pairwise_rigidity"].as_array().unwrap().len(), 6);
}

#[test]
fn control_is_pio_and_fails_rigidity() {
    let ch = pio_control();
    assert!(classify_channel(&ch, &wire_layout(3)).pio);
    let c = certify_not_lop(&ch);
    assert!(c.k4_rank_one && !c.verdict);
    assert!(c.pairwise_rigidity.iter().all(|p| !p.rigid));
}

#[test]
fn stochastic_rate_over_many_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let r = stochastic_rate_check(&build_counterexample(), 50, &mut rng).unwrap();
    assert!((r.mean() - 1.0 / 3.0).abs() < 1e-9);
    assert!(r.variance() < 1e-18);
    assert!(r.max_state_error < 1e-9);
}
