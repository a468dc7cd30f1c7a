//! Evaluate the two recovery events on random instances and compare the
//! certified candidate `x†` with the solver output.
//!
//! cargo run --release --example certificates

use wlasso::linalg::max_abs_diff;
use wlasso::solver::{sign, strict_dual_feasibility};
use wlasso::theory::select_h;
use wlasso::{check_recovery_events, sample_instance, solve_weighted_l1, EnsembleConfig, SolverConfig, WeightVector};

fn main() -> wlasso::Result<()> {
    let (n, k) = (256, 8);
    println!("{:>4} {:>6} {:>8} {:>8} {:>10} {:>10} {:>12}", "m", "seed", "event1", "event2", "margin", "recovered", "|x̂ − x†|∞");
    for m in [40, 70, 100, 130] {
        for seed in 0..3 {
            let inst = sample_instance(&EnsembleConfig::new(n, k, m, 0.5, seed))?;
            let w = WeightVector::uniform(n, 1.0)?;
            let h = select_h(m, n, k, 1.0, 0.5, 1.0, 9.0)?;
            let cert = check_recovery_events(&inst, &w, h)?;
            let res = solve_weighted_l1(&inst, &w, &SolverConfig::with_h(h))?;
            let truth = inst.signal.to_dense();
            let recovered = res.x_hat.iter().zip(&truth).all(|(a, b)| sign(*a) == sign(*b));
            let dual = strict_dual_feasibility(&inst.a, &inst.y, &res.x_hat, &w, h)?;
            println!(
                "{m:>4} {seed:>6} {:>8} {:>8} {:>10.4} {:>10} {:>12.2e}",
                cert.event1_holds,
                cert.event2_holds,
                dual.margin,
                recovered,
                max_abs_diff(&res.x_hat, &cert.x_dagger)
            );
        }
    }
    Ok(())
}
