use proptest::prelude::*;
use wlasso::ensemble::{derive_seed, sparsity_rule};
use wlasso::linalg::max_abs_diff;
use wlasso::solver::sign;
use wlasso::theory::{
    check_recovery_events, eta_of, rescaled_theta, sample_threshold, select_h, threshold_with_selected_h, xi_of,
};
use wlasso::{sample_instance, solve_weighted_l1, EnsembleConfig, SolverConfig, WeightVector};

fn weights(values: &[f64]) -> WeightVector {
    WeightVector::new(values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eta_is_scale_invariant(raw in prop::collection::vec(0.1f64..3.0, 6..20), c in 0.01f64..100.0) {
        let s = [0usize, 2, 3];
        let w = weights(&raw);
        let a = eta_of(&w, &s).unwrap();
        let b = eta_of(&w.scaled(c).unwrap(), &s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn eta_grows_with_support_weight_and_shrinks_with_off_support_minimum(
        raw in prop::collection::vec(0.1f64..3.0, 6..20),
        bump in 1.01f64..4.0,
    ) {
        let s = [1usize, 4];
        let base = eta_of(&weights(&raw), &s).unwrap();
        let mut up = raw.clone();
        up[1] *= bump;
        prop_assert!(eta_of(&weights(&up), &s).unwrap() > base);
        let off_min = (0..raw.len()).filter(|i| !s.contains(i)).min_by(|&a, &b| raw[a].total_cmp(&raw[b])).unwrap();
        let mut lower = raw.clone();
        lower[off_min] /= bump;
        prop_assert!(eta_of(&weights(&lower), &s).unwrap() > base);
        prop_assert!((xi_of(&weights(&raw), &s).unwrap() - (raw[1] * raw[1] + raw[4] * raw[4]) / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn threshold_is_monotone_in_h_and_noise(
        n in 20usize..5000,
        eta in 0.1f64..2.0,
        h in 0.01f64..2.0,
        dh in 0.001f64..1.0,
        sz in 0.01f64..2.0,
        dsz in 0.001f64..1.0,
        eps in 0.0f64..0.5,
    ) {
        let k = sparsity_rule(n);
        let at = |h: f64, sz: f64| sample_threshold(n, k, eta, h, sz, 1.0, eps);
        prop_assert!(at(h + dh, sz) < at(h, sz));
        prop_assert!(at(h, sz + dsz) > at(h, sz));
    }

    #[test]
    fn selected_h_closed_form_is_a_fixed_point(
        n in 20usize..100_000,
        eta in 0.05f64..3.0,
        sz in 0.05f64..2.0,
        sa in 0.2f64..3.0,
        phi in 2.5f64..40.0,
        eps in 0.0f64..0.3,
    ) {
        let k = sparsity_rule(n);
        let m_star = threshold_with_selected_h(n, k, eta, eps, phi);
        let l = ((n - k) as f64).ln();
        let h = (2.0 * phi * eta * sz * sz * sa * sa * l / m_star).sqrt();
        let again = sample_threshold(n, k, eta, h, sz, sa, eps);
        prop_assert!((again / m_star - 1.0).abs() <= 1e-9, "{} vs {}", again, m_star);
    }

    #[test]
    fn noise_free_threshold_rescales_to_eta(n in 3usize..1_000_000, eta in 0.01f64..5.0) {
        let k = 1 + n / 7;
        let m = sample_threshold(n.max(k + 2), k, eta, f64::INFINITY, 0.5, 1.0, 0.0);
        prop_assert!((rescaled_theta(m, n.max(k + 2), k) - eta).abs() <= 1e-12);
    }
}

#[test]
fn select_h_rejects_degenerate_inputs() {
    assert!(select_h(100, 512, 10, 1.0, 0.0, 1.0, 9.0).is_err());
    assert!(select_h(100, 512, 10, 1.0, 0.5, 1.0, 1.5).is_err());
}

#[test]
fn certificate_pins_down_the_solver_output() {
    let mut certified = 0;
    for idx in 0..150u64 {
        let seed = derive_seed(8, &[idx]);
        let (n, k, m) = (96, 3, 40 + (idx % 30) as usize);
        let inst = sample_instance(&EnsembleConfig::new(n, k, m, 0.5, seed)).unwrap();
        let w = WeightVector::uniform(n, 1.0).unwrap();
        let h = select_h(m, n, k, 1.0, 0.5, 1.0, 9.0).unwrap();
        let cert = check_recovery_events(&inst, &w, h).unwrap();
        if !cert.holds() {
            continue;
        }
        certified += 1;
        let res = solve_weighted_l1(&inst, &w, &SolverConfig { tol_kkt: 1e-10, ..SolverConfig::with_h(h) }).unwrap();
        let truth = inst.signal.to_dense();
        assert!(res.x_hat.iter().zip(&truth).all(|(a, b)| sign(*a) == sign(*b)), "instance {idx}");
        assert!(max_abs_diff(&res.x_hat, &cert.x_dagger) <= 1e-6, "instance {idx}");
    }
    assert!(certified >= 30, "only {certified} certified instances");
}

#[test]
fn certificate_frequency_crosses_half_near_the_threshold() {
    let (n, trials) = (128usize, 200u64);
    let k = sparsity_rule(n);
    let m_star = threshold_with_selected_h(n, k, 1.0, 0.0, 9.0);
    let w = WeightVector::uniform(n, 1.0).unwrap();
    let freq = |m: usize| {
        let h = select_h(m, n, k, 1.0, 0.5, 1.0, 9.0).unwrap();
        let hits = (0..trials)
            .filter(|&t| {
                let inst = sample_instance(&EnsembleConfig::new(n, k, m, 0.5, derive_seed(21, &[m as u64, t]))).unwrap();
                check_recovery_events(&inst, &w, h).map(|c| c.holds()).unwrap_or(false)
            })
            .count();
        hits as f64 / trials as f64
    };
    let grid: Vec<usize> = (20..=110).step_by(6).collect();
    let probs: Vec<f64> = grid.iter().map(|&m| freq(m)).collect();
    let i = probs.iter().position(|&p| p >= 0.5).expect("frequency never reaches 1/2");
    assert!(i > 0, "frequency already above 1/2 at m = {}", grid[0]);
    let (m0, m1) = (grid[i - 1] as f64, grid[i] as f64);
    let crossing = m0 + (0.5 - probs[i - 1]) / (probs[i] - probs[i - 1]) * (m1 - m0);
    assert!(
        (crossing / m_star - 1.0).abs() <= 0.35,
        "crossing at m = {crossing:.1}, threshold {m_star:.1}, curve {probs:?}"
    );
}
