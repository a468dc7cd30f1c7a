use proptest::prelude::*;
use wlasso::ensemble::{derive_seed, sample_instance, seeded_rng, sparsity_rule, EnsembleConfig};

#[test]
fn support_draws_are_uniform_over_pairs() {
    let (n, k, draws) = (16usize, 2usize, 100_000usize);
    let pairs = n * (n - 1) / 2;
    let mut counts = vec![0usize; n * n];
    let mut rng = seeded_rng(11);
    for _ in 0..draws {
        let mut s = rng.sample_indices(n, k);
        s.sort_unstable();
        counts[s[0] * n + s[1]] += 1;
    }
    let p = 1.0 / pairs as f64;
    let expected = draws as f64 * p;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    let mut seen = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let c = counts[i * n + j] as f64;
            seen += 1;
            assert!((c - expected).abs() <= 4.0 * sd, "pair ({i},{j}) drawn {c} times, expected {expected}");
        }
    }
    assert_eq!(seen, pairs);

    let q = k as f64 / n as f64;
    let sd = (draws as f64 * q * (1.0 - q)).sqrt();
    for i in 0..n {
        let c: usize = (0..n).map(|j| counts[i * n + j] + counts[j * n + i]).sum();
        let dev = (c as f64 - draws as f64 * q).abs();
        assert!(dev <= 3.0 * sd, "index {i} included {c} times");
    }
}

#[test]
fn column_variance_matches_sigma_a() {
    let mut cfg = EnsembleConfig::new(8, 2, 10_000, 0.5, 5);
    cfg.sigma_a = 1.5;
    let inst = sample_instance(&cfg).unwrap();
    for j in 0..inst.n() {
        let col = inst.a.column(j);
        let var = col.iter().map(|v| v * v).sum::<f64>() / col.len() as f64;
        assert!((var / 2.25 - 1.0).abs() <= 0.05, "column {j} variance {var}");
    }
}

#[test]
fn sparsity_rule_matches_integer_definition() {
    for n in 1..5000usize {
        let k = sparsity_rule(n);
        assert!(25 * k * k >= 4 * n);
        assert!(k == 1 || 25 * (k - 1) * (k - 1) < 4 * n);
    }
    assert_eq!(sparsity_rule(512), 10);
}

#[test]
fn noise_free_instances_have_zero_noise() {
    let inst = sample_instance(&EnsembleConfig::new(30, 3, 12, 0.0, 9)).unwrap();
    assert!(inst.z.iter().all(|&v| v == 0.0));
    assert_eq!(inst.y, inst.a.matvec(&inst.signal.to_dense()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_identity_holds(n in 2usize..80, m in 1usize..40, seed in any::<u64>(), sz in 0.0f64..2.0) {
        let k = 1 + (seed % (n as u64 - 1)) as usize;
        let inst = sample_instance(&EnsembleConfig::new(n, k, m, sz, seed)).unwrap();
        prop_assert!(inst.reconstruction_error() <= 1e-12);
        prop_assert_eq!(inst.signal.support().len(), k);
        prop_assert!(inst.signal.values().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let inst = sample_instance(&EnsembleConfig::new(20, 3, 9, 0.5, seed)).unwrap();
        let back = wlasso::ProblemInstance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back.a, inst.a);
        prop_assert_eq!(back.y, inst.y);
        prop_assert_eq!(back.signal, inst.signal);
    }

    #[test]
    fn same_seed_same_instance(seed in any::<u64>()) {
        let cfg = EnsembleConfig::new(25, 2, 7, 0.3, derive_seed(seed, &[1, 2]));
        prop_assert_eq!(sample_instance(&cfg).unwrap().y, sample_instance(&cfg).unwrap().y);
    }
}
