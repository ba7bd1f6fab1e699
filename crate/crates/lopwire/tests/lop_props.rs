use lopwire::lop::random::{random_cq_state, random_iqo_channel};
use lopwire::lop::*;
use lopwire::protocol::execute_branches;
use lopwire::protocol::random::random_tree;
use lopwire::qcore::random::random_channel;
use lopwire::qcore::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layout(dw: usize, dq: usize) -> SystemLayout {
    SystemLayout::new(vec![Register::wire("W", dw), Register::quantum("Q", dq)]).unwrap()
}

/// Shared permutation, random complex diagonal weights per outcome.
fn random_pio(d: usize, n: usize, rng: &mut impl Rng) -> QuantumChannel {
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let w: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() + 0.05).collect()).collect();
    let k = (0..n)
        .map(|a| {
            CMat::from_fn(d, d, |r, c| {
                if r == perm[c] {
                    let tot: f64 = w.iter().map(|x| x[c]).sum();
                    C64::from_polar((w[a][c] / tot).sqrt(), rng.random::<f64>() * 6.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    QuantumChannel::new(k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn free_states_stay_free(seed: u64, dw in 2usize..=3, dq in 1usize..=2, depth in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout(dw, dq);
        let rho = random_cq_state(&l, &mut rng);
        let tree = random_tree(&l, depth, 48, &mut rng);
        let rep = execute_branches(&tree, &rho, &l).unwrap();
        for b in &rep.paths {
            let r = cq_report(b.state.matrix(), &b.layout, false);
            prop_assert!(r.wire_violation < 1e-9, "{:?} {}", b.outcomes, r.wire_violation);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn classes_are_nested(seed: u64, d in 2usize..=4, which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layout(d, 1);
        let ch = match which {
            0 => random_pio(d, 3, &mut rng),
            1 => random_iqo_channel(d, 1, 3, &mut rng),
            _ => random_channel(d, d, 2, &mut rng),
        };
        let c = classify_channel(&ch, &l);
        prop_assert!(!c.pio || c.sio);
        prop_assert!(!c.sio || c.iqo);
        if which == 0 {
            prop_assert!(c.pio);
        }
        if which == 2 {
            prop_assert!(!c.iqo);
        }
    }

    #[test]
    fn forwarding_then_measuring_reads_the_wire(d in 2usize..=4, dq in 1usize..=2) {
        let l = layout(d, dq);
        let (fwd, l1) = elemental(&ElementalOp::forward("W", "F"), &l).unwrap();
        let proj: Vec<CMat> = (0..d).map(|i| basis_ket(d, i).adjoint()).collect();
        let meas = ElementalOp::Observed { targets: vec!["F".into()], kraus: proj, outputs: Some(vec![]), ancilla: Some(("M".into(), d)) };
        let (m, l2) = elemental(&meas, &l1).unwrap();
        let via = fwd.then(&m).unwrap();
        // direct: write the populations of W into M, dropping W; output order [Q, M]
        let direct: Vec<CMat> = (0..d)
            .map(|i| {
                let mut k = CMat::zeros(dq * d, d * dq);
                for q in 0..dq {
                    k[(q * d + i, i * dq + q)] = C64::new(1.0, 0.0);
                }
                k
            })
            .collect();
        prop_assert_eq!(l2.dims(), vec![dq, d]);
        let direct = QuantumChannel::new(direct).unwrap();
        prop_assert!(choi_distance(&via, &direct) < 1e-9);
    }
}
