use proptest::prelude::*;

use qsampling_core::density::{PullbackDensity, TargetDensity};
use qsampling_core::ginibre::ginibre_state;
use qsampling_core::hmc::{kinetic, leapfrog, run_chain, HmcConfig, LogDensity};
use qsampling_core::povm::{born_probabilities, make_tetrahedron, Povm};
use qsampling_core::rng::chain_rng;
use qsampling_core::state::{params_to_state, StateParams};
use qsampling_core::weights::systematic_indices;

struct Gaussian;

impl LogDensity for Gaussian {
    fn dim(&self) -> usize {
        2
    }
    fn log_density(&self, q: &[f64]) -> f64 {
        -0.5 * (q[0] * q[0] + 4.0 * q[1] * q[1])
    }
    fn grad_log_density(&self, q: &[f64]) -> Option<Vec<f64>> {
        Some(vec![-q[0], -4.0 * q[1]])
    }
}

#[test]
fn acceptance_rate_at_default_tuning() {
    let pd = PullbackDensity::new(make_tetrahedron(), TargetDensity::primitive()).unwrap();
    let cfg = HmcConfig {
        numstep: 10_000,
        seed: 1,
        ..HmcConfig::default()
    };
    let set = run_chain(&cfg, &pd, None).unwrap();
    let rate = set.meta.acceptrate.unwrap();
    assert!(rate > 0.5 && rate < 1.0, "{rate}");
}

#[test]
fn tiny_steps_conserve_energy() {
    let pd = PullbackDensity::new(make_tetrahedron(), TargetDensity::jeffreys()).unwrap();
    let q = StateParams::balanced(2).to_flat();
    let p = vec![0.3, -0.2, 0.5];
    let g = pd.grad_log_density(&q).unwrap();
    let h0 = -pd.log_density(&q) + kinetic(&p, 1.0);
    let mut last = f64::INFINITY;
    for n in [10, 100, 1000] {
        let t = leapfrog(&pd, &q, &p, &g, 0.01 / n as f64, n, 1.0);
        let dh = (-t.log_density + kinetic(&t.p, 1.0) - h0).abs();
        assert!(dh < last);
        last = dh;
    }
    assert!(last < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leapfrog_is_reversible(q0 in -2.0f64..2.0, q1 in -2.0f64..2.0, p0 in -2.0f64..2.0, p1 in -2.0f64..2.0,
                              eps in 0.01f64..0.3, n in 1usize..40) {
        let q = vec![q0, q1];
        let g = Gaussian.grad_log_density(&q).unwrap();
        let f = leapfrog(&Gaussian, &q, &[p0, p1], &g, eps, n, 1.0);
        let back: Vec<f64> = f.p.iter().map(|v| -v).collect();
        let b = leapfrog(&Gaussian, &f.q, &back, &f.grad, eps, n, 1.0);
        prop_assert!((b.q[0] - q0).abs() < 1e-10 && (b.q[1] - q1).abs() < 1e-10);
        prop_assert!((b.p[0] + p0).abs() < 1e-10 && (b.p[1] + p1).abs() < 1e-10);
    }

    #[test]
    fn chart_states_are_valid(seed in any::<u64>(), d in 2usize..6) {
        let mut rng = chain_rng(seed, 0);
        let x = StateParams::random(d, &mut rng);
        let rho = params_to_state(&x);
        prop_assert!(rho.validate().is_ok());
        let back = StateParams::from_flat(d, &x.to_flat()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn born_probabilities_sum_to_one(seed in any::<u64>(), name in prop::sample::select(vec!["tetrahedron", "pauli", "trine", "crosshair", "qutrit-sic", "2tthd", "tat", "bb84"])) {
        let povm = Povm::by_name(name).unwrap();
        let rho = ginibre_state(povm.d(), &mut chain_rng(seed, 0));
        let p = born_probabilities(&povm, &rho).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn systematic_counts_track_weights(seed in any::<u64>(), n_out in 1usize..500,
                                       w in prop::collection::vec(0.0f64..1.0, 1..40)) {
        prop_assume!(w.iter().any(|&v| v > 0.0));
        let mut rng = chain_rng(seed, 0);
        let idx = systematic_indices(&w, n_out, &mut rng).unwrap();
        prop_assert_eq!(idx.len(), n_out);
        let total: f64 = w.iter().sum();
        for (i, &wi) in w.iter().enumerate() {
            let count = idx.iter().filter(|&&j| j == i).count() as f64;
            let expected = n_out as f64 * wi / total;
            prop_assert!((count - expected).abs() < 1.0 + 1e-9, "{count} vs {expected}");
            if wi == 0.0 {
                prop_assert_eq!(count, 0.0);
            }
        }
    }
}
