use lopwire::qcore::random::{random_channel, random_density};
use lopwire::qcore::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_channels_are_complete(seed: u64, din in 1usize..=6, dout in 1usize..=6, n in 1usize..=4) {
        prop_assume!(dout * n >= din);
        let ch = random_channel(din, dout, n, &mut rng(seed));
        prop_assert!(ch.completeness_residual() < 1e-9);
        prop_assert!(ch.is_full(1e-9));
    }

    #[test]
    fn channel_output_is_a_state(seed: u64, d in 1usize..=6, n in 1usize..=4) {
        let mut r = rng(seed);
        let ch = random_channel(d, d, n, &mut r);
        let rho = random_density(d, &mut r);
        let img = apply_channel(&ch, &rho).unwrap();
        prop_assert!((img.trace - 1.0).abs() < 1e-9);
        prop_assert!(min_eig(&img.matrix) >= -1e-9);
        prop_assert!(is_hermitian(&img.matrix, 1e-12));
    }

    #[test]
    fn choi_distance_tracks_action(seed: u64, d in 1usize..=4) {
        let mut r = rng(seed);
        let a = random_channel(d, d, 2, &mut r);
        let b = if seed % 2 == 0 {
            // same channel, Kraus operators mixed by a unitary
            let u = random::haar_unitary(2, &mut r);
            let k: Vec<CMat> = (0..2).map(|i| &a.kraus()[0] * u[(i, 0)] + &a.kraus()[1] * u[(i, 1)]).collect();
            QuantumChannel::new(k).unwrap()
        } else {
            random_channel(d, d, 2, &mut r)
        };
        let mut act = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let e = basis_ket(d, i) * basis_ket(d, j).adjoint();
                act = act.max(max_dist(&a.apply_raw(&e), &b.apply_raw(&e)));
            }
        }
        prop_assert_eq!(choi_distance(&a, &b) < 1e-9, act < 1e-9);
    }

    #[test]
    fn dephasing_is_idempotent(seed: u64, d1 in 1usize..=3, d2 in 1usize..=3, m1: bool, m2: bool) {
        let rho = random_density(d1 * d2, &mut rng(seed));
        let dims = [d1, d2];
        let mask = [m1, m2];
        let once = dephase(rho.matrix(), &dims, &mask).unwrap();
        let twice = dephase(&once, &dims, &mask).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn relative_entropy_to_dephased(seed: u64, d in 2usize..=6) {
        let rho = random_density(d, &mut rng(seed));
        let dd = dephase(rho.matrix(), &[d], &[true]).unwrap();
        let lhs = relative_entropy(rho.matrix(), &dd).unwrap();
        prop_assert!((lhs - (entropy(&dd) - entropy(rho.matrix()))).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_keeps_trace(seed: u64, d1 in 1usize..=3, d2 in 1usize..=3, d3 in 1usize..=3) {
        let rho = random_density(d1 * d2 * d3, &mut rng(seed));
        let r = partial_trace(rho.matrix(), &[d1, d2, d3], &[0, 2]).unwrap();
        prop_assert_eq!(r.nrows(), d1 * d3);
        prop_assert!((trace_re(&r) - 1.0).abs() < 1e-12);
    }
}
