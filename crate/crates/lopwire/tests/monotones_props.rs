use lopwire::lop::*;
use lopwire::monotones::*;
use lopwire::protocol::random::random_tree;
use lopwire::protocol::{execute_average, execute_branches, reduce_named};
use lopwire::protocols_std::{b_layout, bijection_b};
use lopwire::qcore::random::{haar_pure, random_density};
use lopwire::qcore::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layout(dw: usize, dq: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W", dw), Register::quantum("Q", dq)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn coherence_does_not_grow(seed: u64, dw in 2usize..=3, depth in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout(dw, 2);
        let rho = random_density(l.total_dim(), &mut rng);
        let tree = random_tree(&l, depth, 48, &mut rng);
        let before = rel_ent_coherence(rho.matrix(), &l).unwrap();
        let (out, lo) = execute_average(&tree, rho.matrix(), &l).unwrap();
        prop_assert!(rel_ent_coherence(&out, &lo).unwrap() <= before + 1e-9);
        let rep = execute_branches(&tree, rho.matrix(), &l).unwrap();
        let mut avg = 0.0;
        for b in &rep.paths {
            avg += b.probability * rel_ent_coherence(b.state.matrix(), &b.layout).unwrap();
        }
        prop_assert!(avg <= before + 1e-9, "{} {}", avg, before);
    }

    #[test]
    fn two_computations_agree(seed: u64, dw in 1usize..=3, dq in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout(dw, dq);
        let rho = random_density(l.total_dim(), &mut rng);
        let d = dephase(rho.matrix(), &l.dims(), &l.wire_mask()).unwrap();
        let a = rel_ent_coherence(rho.matrix(), &l).unwrap();
        prop_assert!((a - relative_entropy(rho.matrix(), &d).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn l1_vanishes_with_relative_entropy(seed: u64, dw in 2usize..=3, free: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout(dw, 2);
        let rho = if free { lopwire::lop::random::random_cq_state(&l, &mut rng) } else { random_density(l.total_dim(), &mut rng).into_matrix() };
        let l1 = l1_coherence(&rho, &l).unwrap();
        let re = rel_ent_coherence(&rho, &l).unwrap();
        prop_assert_eq!(l1 < PATTERN_TOL, re < PATTERN_TOL);
        prop_assert_eq!(free, l1 < PATTERN_TOL);
    }

    #[test]
    fn bijection_maps_coherence_to_entanglement(seed: u64, d in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = haar_pure(d, &mut rng);
        let lw = b_layout(d);
        let c = rel_ent_coherence(psi.density().matrix(), &lw).unwrap();
        let (out, lo) = execute_average(&bijection_b("W", "Q", d), psi.density().matrix(), &lw).unwrap();
        let wq = reduce_named(&out, &lo, &["W", "Q"]).unwrap();
        let e = ent_entropy(&wq, &layout(d, d), &["W"]).unwrap();
        prop_assert!((c - e).abs() < 1e-9);
    }
}

#[test]
fn bound_uses_the_larger_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let dq = rng.random_range(2..=3);
        let l = SystemLayout::new(vec![Register::wire("W", 2), Register::quantum("A", dq), Register::quantum("B", 2)]).unwrap();
        let w = haar_pure(2, &mut rng).density();
        let ab = haar_pure(dq * 2, &mut rng).density();
        let b = cq_lower_bound(w.kron(&ab).matrix(), &l).unwrap();
        let e = b.entanglement_term.expect("pure state");
        assert!((b.value - b.wire_term.max(e)).abs() < 1e-15);
        assert!(b.wire_term >= 0.0 && e >= 0.0);
    }
}

#[test]
fn report_serializes_every_field() {
    let l = layout(2, 2);
    let psi = PureState::from_real(&[0.6, 0.0, 0.0, 0.8]).unwrap();
    let r = monotone_report(psi.density().matrix(), &l).unwrap();
    let j = r.to_json();
    for k in ["rel_ent_coherence", "l1_coherence", "ent_entropy_pure", "cq_lower_bound", "cq_entanglement_term"] {
        assert!(j.get(k).is_some(), "{k}");
    }
    let h = -(0.36f64 * 0.36f64.log2() + 0.64 * 0.64f64.log2());
    assert!((r.rel_ent_coherence - h).abs() < 1e-12);
    assert!((r.ent_entropy_pure.unwrap() - h).abs() < 1e-12);
}
