//! Lowering the weights on the support moves the transition left by the
//! factor `η`.
//!
//! cargo run --release --example weighted_speedup -- [trials]

use wlasso::harness::{first_crossing, run_sweep, MGrid, SweepConfig, WeightScheme};

fn main() -> wlasso::Result<()> {
    let trials = std::env::args().nth(1).map(|t| t.parse().expect("trial count")).unwrap_or(60);
    let thetas: Vec<f64> = (1..=24).map(|i| 0.125 * i as f64).collect();
    let schemes = [
        ("uniform", 1.0, WeightScheme::Uniform),
        ("support 1/sqrt 2", 0.5, WeightScheme::SupportWeight(std::f64::consts::FRAC_1_SQRT_2)),
        ("support 1/2", 0.25, WeightScheme::SupportWeight(0.5)),
    ];
    let mut baseline = None;
    for (name, eta, scheme) in schemes {
        let cfg = SweepConfig {
            m_grid: MGrid::ThetaList(thetas.clone()),
            weight_scheme: scheme,
            ..SweepConfig::new(vec![256], trials, 5)
        };
        let crossing = first_crossing(&run_sweep(&cfg)?, 0.5);
        let base = *baseline.get_or_insert(crossing);
        let ratio = crossing.zip(base).map(|(c, b)| c / b);
        println!("{name:<18} eta = {eta:<5} crossing theta = {crossing:.3?}  ratio to uniform = {ratio:.3?}");
    }
    Ok(())
}
