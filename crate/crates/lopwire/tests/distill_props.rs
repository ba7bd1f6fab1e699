use lopwire::distill::*;
use lopwire::lop::{Register, SystemLayout};
use lopwire::qcore::random::haar_pure;
use lopwire::qcore::max_dist;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn expected(p: f64, q: f64) -> f64 {
    step_update(p, q).iter().map(|o| o.prob * o.p).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn update_matches_protocol(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let cf = step_update(p, q);
        let or = step_oracle(p, q).unwrap();
        let tot: f64 = cf.iter().map(|o| o.prob).sum();
        prop_assert!((tot - 1.0).abs() < 1e-12);
        for (x, (y, _)) in cf.iter().zip(&or) {
            prop_assert!((x.prob - y.prob).abs() < 1e-12 && (x.p - y.p).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_parameter_is_preserved(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        // the one-step mean never drops, and in fact equals p
        prop_assert!(expected(p, q) >= p - 1e-12);
        prop_assert!((expected(p, q) - p).abs() < 1e-12);
    }

    #[test]
    fn parameter_stays_in_range(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        for o in step_update(p, q) {
            prop_assert!(o.p.abs() <= 1.0 + 1e-12);
            prop_assert!(o.prob >= 0.0);
        }
    }
}

#[test]
fn grid_agreement_is_tight() {
    assert!(grid_agreement(40).unwrap() < 1e-12);
}

#[test]
fn survivors_gain_coherence() {
    let p = DistillParams { trials: 2000, steps: 1500, ..DistillParams::standard() };
    let t = run_chain(&p).unwrap();
    let r = &t.records;
    assert!((r[0].mean_p_half - 0.01).abs() < 1e-15);
    assert!(r[1500].mean_p_half > 0.3);
    assert!(r.windows(2).all(|w| w[1].survivors <= w[0].survivors));
}

#[test]
fn without_dropping_the_mean_stays_put() {
    let p = DistillParams { trials: 4000, steps: 200, drop_negative: false, ..DistillParams::standard() };
    let t = run_chain(&p).unwrap();
    assert!(t.records.iter().all(|r| r.survivors == 1.0));
    // martingale: mean drifts only by sampling noise
    assert!((t.final_mean() - 0.01).abs() < 0.02);
}

#[test]
fn invalid_parameters_are_rejected() {
    for p in [
        DistillParams { p0: 1.5, ..DistillParams::standard() },
        DistillParams { q: -0.1, ..DistillParams::standard() },
        DistillParams { trials: 0, ..DistillParams::standard() },
    ] {
        assert!(matches!(run_chain(&p), Err(DistillError::Params(_))));
    }
}

#[test]
fn extraction_reaches_a_free_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("Q", 2)]).unwrap();
    for k in 0..10 {
        let rho = haar_pure(4, &mut rng).density().into_matrix();
        let ex = extract_qubit_block(&rho, &l, k).unwrap();
        let want = extraction_oracle(&rho, &ex).unwrap();
        assert!(max_dist(&ex.state, &want) < 1e-10, "{k}");
    }
}

#[test]
fn incoherent_input_has_nothing_to_extract() {
    let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("Q", 2)]).unwrap();
    let rho = lopwire::qcore::DensityMatrix::maximally_mixed(4).into_matrix();
    assert!(matches!(extract_qubit_block(&rho, &l, 0), Err(DistillError::Incoherent)));
}
