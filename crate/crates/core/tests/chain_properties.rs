//! Property tests of the buffer chain: closed form against the truncated
//! power-iteration oracle, global balance, root quality, regime monotonicity
//! and fixed-point robustness.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aoi_probe::{
    characteristic_root, default_truncation, oracle_stationary, solve_self_consistent_from,
    stability_condition, stationary_distribution, Mechanism, Regime,
};
use common::{config, max_balance_residual, random_kernel};

fn kernel_strategy() -> impl Strategy<Value = (aoi_probe::TransitionKernel, u32)> {
    (any::<u64>(), 1u32..=10).prop_map(|(seed, m)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (random_kernel(&mut rng), m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_form_matches_oracle_and_balance((kernel, m) in kernel_strategy()) {
        prop_assume!(stability_condition(&kernel, m));
        let z = characteristic_root(&kernel, m).unwrap();
        prop_assume!(z > 1e-6 && z < 1.0 - 1e-6);
        let dist = stationary_distribution(&kernel, z, m).unwrap();

        let oracle = oracle_stationary(&kernel, m, default_truncation(m)).unwrap();
        let mut worst = 0.0f64;
        for (state, &truth) in oracle.iter().enumerate() {
            worst = worst.max((dist.prob(state as u32) - truth).abs());
        }
        prop_assert!(worst < 1e-7, "inf-norm vs oracle {worst}");

        let residual = max_balance_residual(&kernel, m, |s| dist.prob(s), 4 * m + 8);
        prop_assert!(residual < 1e-10, "balance residual {residual}");

        // nonnegativity and normalization
        for state in 0..=4 * m + 8 {
            prop_assert!(dist.prob(state) >= 0.0);
        }
        prop_assert!((dist.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn root_has_tiny_residual((kernel, m) in kernel_strategy()) {
        prop_assume!(stability_condition(&kernel, m));
        let z = characteristic_root(&kernel, m).unwrap();
        let coeffs = kernel.characteristic_coefficients(m);
        let f = coeffs
            .iter()
            .rev()
            .fold(0.0f64, |acc, &c| acc * z + c);
        prop_assert!(f.abs() < 1e-12, "f({z}) = {f}");
        // row sums make f(1) vanish
        let f1: f64 = coeffs.iter().sum();
        prop_assert!(f1.abs() < 1e-12);
    }
}

#[test]
fn fixed_point_is_initial_guess_independent() {
    let cases = [
        (Mechanism::Auc, 50, 0.1, 7, 0.44, 0.08),
        (Mechanism::Auc, 10, 0.1, 7, 0.17, 0.02),
        (Mechanism::Ruc, 50, 0.1, 7, 0.99, 0.14),
        (Mechanism::Ruc, 20, 0.2, 3, 0.3, 0.4),
        (Mechanism::Safc, 50, 0.1, 7, 0.1, 0.0),
        (Mechanism::Safc, 100, 0.1, 7, 0.3, 0.0),
    ];
    for (mech, n, xi, m, q, eta) in cases {
        let c = config(mech, n, xi, m, q, eta);
        let from_low = solve_self_consistent_from(&c, 0.01).unwrap();
        let from_high = solve_self_consistent_from(&c, 1.0).unwrap();
        assert_eq!(from_low.regime, from_high.regime, "{mech} q={q}");
        assert!(
            (from_low.p_a - from_high.p_a).abs() < 1e-8,
            "{mech} q={q}: {} vs {}",
            from_low.p_a,
            from_high.p_a
        );
    }
}

#[test]
fn raising_xi_never_returns_to_ecr() {
    // regime monotonicity along the energy-arrival axis
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        use rand::Rng;
        let mech = [Mechanism::Auc, Mechanism::Ruc, Mechanism::Safc][rng.gen_range(0..3)];
        let n = rng.gen_range(2..40);
        let m = rng.gen_range(1..6);
        let q = rng.gen_range(0.05..0.9);
        let eta = rng.gen_range(0.0..0.9);
        let mut seen_esr = false;
        for step in 1..=24 {
            let xi = step as f64 / 25.0;
            let c = config(mech, n, xi, m, q, eta);
            let sol = match aoi_probe::solve_self_consistent(&c) {
                Ok(s) => s,
                Err(_) => continue, // degenerate boundary points
            };
            match sol.regime {
                Regime::Esr => seen_esr = true,
                Regime::Ecr => assert!(
                    !seen_esr,
                    "{mech} n={n} m={m} q={q} eta={eta}: ECR at xi={xi} after ESR"
                ),
            }
        }
    }
}

#[test]
fn oracle_agrees_at_mechanism_fixed_points() {
    // end-to-end: solve the self-consistency, then check the closed form
    // against the oracle at the solved kernel
    // note: SAFC near its stability boundary (e.g. q = 0.1 at defaults) has
    // z ~ 0.95 and mixes too slowly for plain power iteration; the closed
    // form there is covered by the balance-equation checks instead
    for (mech, q, eta) in [
        (Mechanism::Auc, 0.44, 0.08),
        (Mechanism::Ruc, 0.3, 0.14),
        (Mechanism::Safc, 0.3, 0.0),
    ] {
        let c = config(mech, 50, 0.1, 7, q, eta);
        let sol = aoi_probe::solve_self_consistent(&c).unwrap();
        let dist = sol.stationary.as_ref().unwrap();
        let oracle = oracle_stationary(&sol.kernel, 7, default_truncation(7)).unwrap();
        let mut worst = 0.0f64;
        for (state, &truth) in oracle.iter().enumerate() {
            worst = worst.max((dist.prob(state as u32) - truth).abs());
        }
        assert!(worst < 1e-8, "{mech}: {worst}");
        // the fixed point equals the oracle's active mass
        let tail: f64 = oracle[(7 + 1)..].iter().sum();
        assert!((sol.p_a - tail).abs() < 1e-8, "{mech}: p_a {} vs {tail}", sol.p_a);
    }
}
