use lopwire::lop::random::random_iqo_channel;
use lopwire::lop::SystemLayout;
use lopwire::monotones::rel_ent_coherence;
use lopwire::protocol::execute_average as run_avg;
use lopwire::protocol::{effective_channel, execute_average, execute_branches, reduce_named};
use lopwire::protocols_std::*;
use lopwire::qcore::random::{haar_pure, random_channel, random_density};
use lopwire::qcore::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn bijection_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 2..=4 {
        let tree = bijection_b("W", "Q", d).then(bijection_b_inv("W", "Q", "F", d));
        for _ in 0..10 {
            let rho = random_density(d, &mut rng);
            let (out, l) = execute_average(&tree, rho.matrix(), &b_layout(d)).unwrap();
            let back = reduce_named(&out, &l, &["W"]).unwrap();
            assert!(max_dist(&back, rho.matrix()) < 1e-12);
        }
    }
}

#[test]
fn bijection_gives_maximally_correlated() {
    let psi = PureState::from_real(&[1.0, 2.0, 0.5]).unwrap();
    let (out, l) = execute_average(&bijection_b("W", "Q", 3), psi.density().matrix(), &b_layout(3)).unwrap();
    let got = reduce_named(&out, &l, &["W", "Q"]).unwrap();
    let mut amps = vec![C64::new(0.0, 0.0); 9];
    for i in 0..3 {
        amps[i * 3 + i] = psi.amplitudes()[i];
    }
    let want = PureState::new(amps).unwrap().density();
    assert!(max_dist(&got, want.matrix()) < 1e-14);
}

#[test]
fn phase_loop_success_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in 2..=4 {
        let phases: Vec<f64> = (0..d).map(|j| 0.7 * j as f64 + 0.1).collect();
        let u = CMat::from_fn(d, d, |r, c| if r == c { C64::from_polar(1.0, phases[r]) } else { C64::new(0.0, 0.0) });
        for m in 1..=4 {
            let lp = phase_via_loop(&phases, d, m);
            let psi = haar_pure(d, &mut rng);
            let rep = execute_branches(&lp.tree, psi.density().matrix(), &b_layout(d)).unwrap();
            let mut p = 0.0;
            for b in &rep.paths {
                if phase_loop_success(&lp.tree, &b.outcomes) {
                    p += b.probability;
                    let w = reduce_named(b.state.matrix(), &b.layout, &["W"]).unwrap();
                    let v = &u * psi.ket();
                    assert!(max_dist(&w, &(&v * v.adjoint())) < 1e-10, "d={d} m={m}");
                }
            }
            let want = 1.0 - (1.0 - 1.0 / d as f64).powi(m as i32);
            assert!((p - want).abs() < 1e-12, "d={d} m={m} {p} {want}");
        }
    }
}

#[test]
fn teleport_reproduces_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (d, dq) in [(2, 2), (3, 2), (2, 3)] {
        let ch = random_channel(d * dq, d * dq, 2, &mut rng);
        let spec = ChannelSpec::new(ch.clone(), d, dq).unwrap();
        let got = teleported_channel(&spec, &PureState::maximally_coherent(d)).unwrap();
        assert!(choi_distance(&got, &ch) < 1e-10);
        for (a, _, op) in teleport_branch_operators(&spec).unwrap() {
            assert!(max_dist(&op, &(&ch.kraus()[a] / C64::new(d as f64, 0.0))) < 1e-10);
        }
    }
}

#[test]
fn teleport_needs_maximal_coherence() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = CMat::from_row_slice(2, 2, &[cr(h), cr(h), cr(h), cr(-h)]);
    let ch = QuantumChannel::unitary(had.kronecker(&CMat::identity(2, 2))).unwrap();
    let spec = ChannelSpec::new(ch.clone(), 2, 2).unwrap();
    let psi = PureState::from_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]).unwrap();
    assert!(choi_distance(&teleported_channel(&spec, &psi).unwrap(), &ch) > 1e-6);
}

#[test]
fn qubit_iqo_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let ch = random_iqo_channel(2, 2, 4, &mut rng);
        let (s1, s2) = qubit_exact_stages(&ch, 2).unwrap();
        assert!(s1.completeness_residual() < 1e-10 && s2.completeness_residual() < 1e-10);
        let tree = iqo_qubit_exact(&ch, 2).unwrap();
        let got = effective_channel(&tree, &iqo_layout(2, 2), &CMat::identity(4, 4), &["W1", "Q"]).unwrap();
        assert!(choi_distance(&got, &ch) < 1e-9);
    }
}

#[test]
fn stochastic_iqo_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ch = random_iqo_channel(3, 2, 3, &mut rng);
    let tree = iqo_stochastic(&ch, 3, 2).unwrap();
    let layout: SystemLayout = iqo_layout(3, 2);
    for _ in 0..10 {
        let rho = random_density(6, &mut rng);
        let out = stochastic_success(&tree, rho.matrix(), 3, 2).unwrap();
        assert!((out.success_probability - 1.0 / 3.0).abs() < 1e-12);
        let want = DensityMatrix::normalized(ch.apply_raw(rho.matrix())).unwrap();
        assert!(max_dist(&out.state.unwrap(), want.matrix()) < 1e-10);
    }
    assert_eq!(layout.len(), 2);
}

#[test]
fn stochastic_rate_is_input_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ch = random_iqo_channel(3, 1, 3, &mut rng);
    let tree = iqo_stochastic(&ch, 3, 1).unwrap();
    let ps: Vec<f64> = (0..100)
        .map(|_| stochastic_success(&tree, random_density(3, &mut rng).matrix(), 3, 1).unwrap().success_probability)
        .collect();
    let m = ps.iter().sum::<f64>() / ps.len() as f64;
    let var = ps.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / ps.len() as f64;
    assert!(var < 1e-18, "{var:e}");
}

#[test]
fn factories_use_only_elemental_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ch = random_iqo_channel(2, 2, 3, &mut rng);
    let spec = ChannelSpec::new(random_channel(4, 4, 2, &mut rng), 2, 2).unwrap();
    let trees = vec![
        bijection_b("W", "Q", 3),
        phase_via_loop(&[0.1, 0.2, 0.3], 3, 2).tree,
        teleport_channel(&spec),
        iqo_qubit_exact(&ch, 2).unwrap(),
        iqo_stochastic(&ch, 2, 2).unwrap(),
        prepare_ghz(3, Topology::Chain).unwrap().tree,
        prepare_w(3, Topology::Chain).unwrap().tree,
    ];
    for t in &trees {
        for op in t.ops() {
            assert!(["permutation", "phase", "observed", "forward"].contains(&op.kind_name()), "{}", op.kind_name());
        }
    }
}

#[test]
fn preparations_do_not_create_coherence() {
    for n in 2..=4 {
        let mut preps = vec![
            prepare_ghz(n, Topology::SingleWire).unwrap(),
            prepare_ghz(n, Topology::Chain).unwrap(),
            prepare_w(n, Topology::SingleWire).unwrap(),
        ];
        if n == 3 {
            preps.push(prepare_w(3, Topology::Chain).unwrap());
        }
        for p in preps {
            let before = rel_ent_coherence(p.input.matrix(), &p.layout).unwrap();
            let (out, l) = run_avg(&p.tree, p.input.matrix(), &p.layout).unwrap();
            let after = rel_ent_coherence(&out, &l).unwrap();
            assert!(after <= before + 1e-9, "n={n} {after} {before}");
        }
    }
}
