mod common;

use common::props;
use proptest::prelude::*;
use switchcons::demo::{self, Vtol};
use switchcons::linalg::Matrix;
use switchcons::simulator::{
    build_closed_loop, consensus_verdict, disagreement, lyapunov_monitor, simulate, sweep,
    sweep_seq, SimError, INTERTWINING_TOL,
};
use switchcons::synthesis::{topology_certificates, CouplingChoice, TopologyCertificate};
use switchcons::topology::{reduced_laplacian, GraphSet, SwitchingSignal};

const DT: f64 = 0.05;

fn tree_graph(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> switchcons::topology::DirectedGraph {
    loop {
        let g = common::random_graph(rng, n, 0.5);
        if common::brute_force_has_tree(&g) {
            return g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn common_translation_leaves_disagreement_alone(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let x0 = props::random_state(&mut rng, cl.agents() * cl.state_dim());
        let v = props::random_state(&mut rng, cl.state_dim());
        let err = props::translation_error(&cl, &x0, &v, DT);
        prop_assert!(err <= 1e-9, "relative gap {err:e}");
    }

    #[test]
    fn reduced_system_reproduces_disagreement(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let x0 = props::random_state(&mut rng, cl.agents() * cl.state_dim());
        let err = props::reduction_error(&cl, &x0, DT);
        prop_assert!(err <= 1e-9, "relative gap {err:e}");
    }

    #[test]
    fn consensus_subspace_is_invariant(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let v = props::random_state(&mut rng, cl.state_dim());
        let leak = props::subspace_leak(&cl, &v, DT);
        prop_assert!(leak <= 1e-9, "leak {leak:e}");
    }

    #[test]
    fn exact_samples_do_not_depend_on_step(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let x0 = props::random_state(&mut rng, cl.agents() * cl.state_dim());
        let gap = props::sampling_gap(&cl, &x0, 0.1);
        prop_assert!(gap <= 1e-10, "gap {gap:e}");
    }

    #[test]
    fn rk4_reference_is_fourth_order(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let x0 = props::random_state(&mut rng, cl.agents() * cl.state_dim());
        let orders = props::rk4_orders(&cl, &x0, 0.5);
        for o in &orders[..2] {
            prop_assert!((3.5..=4.6).contains(o), "orders {orders:?}");
        }
    }

    #[test]
    fn disagreement_matches_kronecker_oracle(seed in any::<u64>(), agents in 2usize..=6, n in 1usize..=4) {
        let mut rng = common::rng(seed);
        let x = props::random_state(&mut rng, agents * n);
        let (e, norm) = disagreement(&x, agents, n).unwrap();
        let oracle = common::xi_kron_times(&x, agents, n);
        prop_assert!(common::max_abs_diff(&e, &oracle) <= 1e-15);
        prop_assert!((norm - common::vec_norm(&oracle)).abs() <= 1e-14);
    }

    #[test]
    fn jumps_respect_generalized_eigenvalue_bound(seed in any::<u64>(), dwell in 0.1f64..0.6) {
        let mut rng = common::rng(seed);
        let agents = 4;
        let graphs = GraphSet::new((0..3).map(|_| tree_graph(&mut rng, agents)).collect()).unwrap();
        let certs = topology_certificates(&graphs, &CouplingChoice::Fraction(0.9)).unwrap();
        let a = common::random_matrix(&mut rng, 2, 2).scale(0.5);
        let b = common::random_matrix(&mut rng, 2, 1);
        let k = common::random_matrix(&mut rng, 1, 2);
        let p = common::random_spd(&mut rng, 2);
        let sig = SwitchingSignal::periodic(3, dwell, 3.0).unwrap();
        let cl = build_closed_loop(&a, &b, &k, 0.7, &graphs, &sig).unwrap();
        let x0 = props::random_state(&mut rng, agents * 2);
        let tr = simulate(&cl, &x0, DT).unwrap();
        let mon = lyapunov_monitor(&tr, &certs, &p).unwrap();
        prop_assert_eq!(mon.jumps.len(), sig.breakpoints().len() - 1);
        for j in &mon.jumps {
            if let Some(r) = j.ratio {
                prop_assert!(r <= j.bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn identity_weights_give_squared_norm(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let cl = props::random_loop(&mut rng);
        let x0 = props::random_state(&mut rng, cl.agents() * cl.state_dim());
        let tr = simulate(&cl, &x0, DT).unwrap();
        let unit: Vec<TopologyCertificate> = (0..cl.topology_count())
            .map(|index| TopologyCertificate {
                index,
                c: 0.5,
                q: Matrix::identity(cl.agents() - 1),
                lmi_margin: 1.0,
                antistability_margin: 1.0,
            })
            .collect();
        let mon = lyapunov_monitor(&tr, &unit, &Matrix::identity(cl.state_dim())).unwrap();
        for (vals, e) in mon.values.iter().zip(&tr.disagreement_norm) {
            for v in vals {
                prop_assert!((v - e * e).abs() <= 1e-12 * (1.0 + e * e));
            }
        }
        for j in &mon.jumps {
            prop_assert_eq!(j.bound, 1.0);
            if let Some(r) = j.ratio {
                prop_assert!((r - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn single_tree_with_integrators_reaches_consensus(seed in any::<u64>(), agents in 2usize..=6) {
        let mut rng = common::rng(seed);
        let g = tree_graph(&mut rng, agents);
        let margin = reduced_laplacian(&g).unwrap().antistability_margin().unwrap();
        let graphs = GraphSet::new(vec![g]).unwrap();
        let one = Matrix::identity(1);
        let sig = SwitchingSignal::new(vec![0.0], vec![0], 10.0).unwrap();
        let cl = build_closed_loop(&Matrix::zeros(1, 1), &one, &one, 2.0 / margin, &graphs, &sig).unwrap();
        let x0 = props::random_state(&mut rng, agents);
        let tr = simulate(&cl, &x0, 0.1).unwrap();
        let v = consensus_verdict(&tr, 1e-3, 2.0);
        prop_assert!(v.passed, "{v:?}");
        // integrators converge to a fixed weighted average
        let spread = tr.final_state().iter().fold(0.0f64, |m, x| m.max((x - v.final_mean[0]).abs()));
        prop_assert!(spread <= 1e-3 * common::max_abs(&x0) * 2.0);
    }
}

#[test]
fn demo_loop_intertwines() {
    let v = Vtol::load();
    let sig = SwitchingSignal::periodic(2, 0.5, demo::HORIZON).unwrap();
    let cl = build_closed_loop(
        &v.a,
        &v.b,
        &v.reference.k,
        v.reference.alpha,
        &v.graphs,
        &sig,
    )
    .unwrap();
    assert!(cl.intertwining_residual() < INTERTWINING_TOL);
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let v = Vtol::load();
    let sig = SwitchingSignal::periodic(2, 0.5, 4.0).unwrap();
    let cl = build_closed_loop(
        &v.a,
        &v.b,
        &v.reference.k,
        v.reference.alpha,
        &v.graphs,
        &sig,
    )
    .unwrap();
    let seeds: Vec<u64> = (0..8).collect();
    let par: Vec<_> = sweep(&cl, &seeds, demo::DT, 1e-3, 1.0)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let seq: Vec<_> = sweep_seq(&cl, &seeds, demo::DT, 1e-3, 1.0)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(par, seq);
    assert_eq!(par.iter().map(|o| o.seed).collect::<Vec<_>>(), seeds);
}

#[test]
fn unstable_loop_reports_divergence() {
    let v = Vtol::load();
    let sig = SwitchingSignal::periodic(2, 0.5, 200.0).unwrap();
    let cl = build_closed_loop(&v.a, &v.b, &Matrix::zeros(2, 4), 1.0, &v.graphs, &sig).unwrap();
    let x0 = switchcons::simulator::random_initial_state(1, cl.agents() * cl.state_dim());
    match simulate(&cl, &x0, 0.5) {
        Err(SimError::Divergence { t, norm }) => assert!(t > 0.0 && norm > 1e12),
        other => panic!("{:?}", other.map(|t| t.len())),
    }
}
