//! Invariants over random weighted trees with random magnetic phases.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use specgraph::generators::{random_tree, randomize, RandomizeSpec, WeightLaw};
use specgraph::operators::{adjacency_matrix, degree_matrix, hardy_potential, laplacian_matrix, potential_matrix, signing_matrix};
use specgraph::spectral::{counting_function, eigh_dense};
use specgraph::suites::SuiteConfig;
use specgraph::verify::{quadratic_form, random_reweighting, to_frame};
use specgraph::{ball_section, parity_map, FiniteSection, Graph, Vertex};

fn weighted_tree(n: u64, seed: u64, spread: f64) -> Graph {
    let rule = RandomizeSpec { phase_seed: Some(seed), weight_law: WeightLaw::LogUniform { spread }, weight_seed: seed };
    randomize(&random_tree(n, seed).unwrap(), &rule)
}

fn whole(g: &Graph, n: u64) -> FiniteSection {
    ball_section(g, Vertex::id(0), n as usize).unwrap()
}

fn random_vector(len: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edge_sum_form_matches_operator(n in 2u64..40, seed in any::<u64>(), spread in 0.0f64..1.0) {
        let g = weighted_tree(n, seed, spread);
        let s = whole(&g, n);
        let f = random_vector(s.len(), seed ^ 1);
        let direct = quadratic_form(&s, &f).unwrap();
        let via_matrix = laplacian_matrix(&s, None).unwrap().form(&to_frame(&s, &f));
        prop_assert!((direct - via_matrix).abs() <= 1e-10 * direct.abs().max(1.0), "{direct} vs {via_matrix}");
    }

    #[test]
    fn form_between_zero_and_twice_degree(n in 2u64..40, seed in any::<u64>(), spread in 0.0f64..1.0) {
        let g = weighted_tree(n, seed, spread);
        let s = whole(&g, n);
        let f = to_frame(&s, &random_vector(s.len(), seed ^ 2));
        let q = laplacian_matrix(&s, None).unwrap().form(&f);
        let d = degree_matrix(&s).form(&f);
        prop_assert!(q >= -1e-12 * d);
        prop_assert!(q <= 2.0 * d * (1.0 + 1e-12));
    }

    #[test]
    fn hardy_lower_bound(n in 2u64..30, seed in any::<u64>(), spread in 0.0f64..1.0) {
        let g = weighted_tree(n, seed, 0.5);
        let s = whole(&g, n);
        let hp = hardy_potential(&s, &random_reweighting(&g, spread, seed ^ 3)).unwrap();
        let f = to_frame(&s, &random_vector(s.len(), seed ^ 4));
        let q = laplacian_matrix(&s, None).unwrap().form(&f);
        let v = potential_matrix(&s, &hp.v).unwrap().form(&f);
        prop_assert!(v <= q + 1e-10 * q.abs().max(1.0), "{v} > {q}");
    }

    #[test]
    fn min_max_and_counting(n in 2u64..30, seed in any::<u64>(), lam in 0.0f64..8.0) {
        let g = weighted_tree(n, seed, 0.5);
        let s = whole(&g, n);
        let deg = degree_matrix(&s);
        let two_d = deg.combine(2.0, &deg, 0.0).unwrap();
        let a = eigh_dense(&laplacian_matrix(&s, None).unwrap(), false).unwrap();
        let b = eigh_dense(&two_d, false).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!(*x <= y + 1e-10 * y.abs().max(1.0));
        }
        prop_assert!(counting_function(&a, lam).unwrap() >= counting_function(&b, lam).unwrap());
    }

    #[test]
    fn tree_phases_are_a_gauge(n in 2u64..30, seed in any::<u64>()) {
        let plain = randomize(&random_tree(n, seed).unwrap(), &RandomizeSpec::weights(WeightLaw::LogUniform { spread: 0.5 }, seed));
        let twisted = weighted_tree(n, seed, 0.5);
        let a = eigh_dense(&laplacian_matrix(&whole(&plain, n), None).unwrap(), false).unwrap();
        let b = eigh_dense(&laplacian_matrix(&whole(&twisted, n), None).unwrap(), false).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn signing_turns_laplacian_into_signless(n in 2u64..30, seed in any::<u64>()) {
        let g = weighted_tree(n, seed, 0.5);
        let s = whole(&g, n);
        let u = signing_matrix(&s, &parity_map(&g, Vertex::id(0), None).unwrap()).unwrap().to_dense();
        let lhs = &u * laplacian_matrix(&s, None).unwrap().to_dense() * &u;
        let rhs = degree_matrix(&s).to_dense() + adjacency_matrix(&s).to_dense();
        prop_assert!((lhs - rhs).iter().all(|x| x.norm() <= 1e-12));
    }

    #[test]
    fn suite_config_round_trips(radius in proptest::option::of(1usize..20), seeds in proptest::collection::vec(any::<u64>(), 0..6), trials in 1usize..200, tol in 1e-14f64..1e-6) {
        let cfg = SuiteConfig { radius, seeds, trials, tol, ..Default::default() };
        let back: SuiteConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
