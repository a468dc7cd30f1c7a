//! Enumerate every sign pattern of a small problem and compare the global
//! minimizer with the proximal-gradient solver across a range of `h`.
//!
//! cargo run --release --example brute_force_oracle

use wlasso::linalg::max_abs_diff;
use wlasso::{brute_force_minimum, sample_instance, solve_weighted_l1, EnsembleConfig, SolverConfig, WeightVector};

fn main() -> wlasso::Result<()> {
    let inst = sample_instance(&EnsembleConfig::new(10, 2, 7, 0.3, 2024))?;
    let w = WeightVector::new(vec![0.5, 1.0, 1.5, 1.0, 0.8, 1.2, 1.0, 0.9, 1.1, 1.0])?;
    println!("true support {:?}", inst.signal.support());
    println!("{:>8} {:>24} {:>10} {:>7} {:>12}", "h", "oracle support", "margin", "unique", "|x̂ − x|∞");
    for h in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0] {
        let oracle = brute_force_minimum(&inst, &w, h)?;
        let res = solve_weighted_l1(&inst, &w, &SolverConfig::with_h(h))?;
        println!(
            "{h:>8} {:>24} {:>10.4} {:>7} {:>12.2e}",
            format!("{:?}", oracle.support),
            oracle.dual_margin,
            oracle.unique,
            max_abs_diff(&res.x_hat, &oracle.x_opt)
        );
    }
    Ok(())
}
