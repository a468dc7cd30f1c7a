//! Predicted sample thresholds for the three standard weightings as `n` grows.
//!
//! cargo run --release --example scaling_law

use wlasso::ensemble::sparsity_rule;
use wlasso::theory::{rescaled_theta, sample_threshold, threshold_with_selected_h};

fn main() {
    println!(
        "{:>8} {:>4} {:>6} {:>14} {:>14} {:>10}",
        "n", "k", "eta", "m (h = inf)", "m (h rule)", "theta"
    );
    for n in [128, 512, 2048, 8192, 32768] {
        let k = sparsity_rule(n);
        for eta in [1.0, 0.5, 0.25] {
            let m_edge = sample_threshold(n, k, eta, f64::INFINITY, 0.5, 1.0, 0.0);
            let m_rule = threshold_with_selected_h(n, k, eta, 0.0, 9.0);
            println!(
                "{n:>8} {k:>4} {eta:>6} {m_edge:>14.1} {m_rule:>14.1} {:>10.4}",
                rescaled_theta(m_rule, n, k)
            );
        }
    }
}
