//! Draw a noisy Gaussian instance, pick `h` with the `φₙ` rule and recover
//! the support with the weighted LASSO.
//!
//! cargo run --release --example recover_sparse_signal -- [n] [m] [seed]

use wlasso::solver::sign;
use wlasso::theory::{eta_of, select_h};
use wlasso::{ensemble::sparsity_rule, sample_instance, solve_weighted_l1, EnsembleConfig, SolverConfig, WeightVector};

fn main() -> wlasso::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = *args.first().unwrap_or(&512) as usize;
    let m = *args.get(1).unwrap_or(&250) as usize;
    let seed = *args.get(2).unwrap_or(&7);
    let k = sparsity_rule(n);

    let inst = sample_instance(&EnsembleConfig::new(n, k, m, 0.5, seed))?;
    let w = WeightVector::uniform(n, 1.0)?;
    let eta = eta_of(&w, inst.signal.support())?;
    let h = select_h(m, n, k, eta, 0.5, 1.0, 9.0)?;
    let res = solve_weighted_l1(&inst, &w, &SolverConfig::with_h(h))?;

    let truth = inst.signal.to_dense();
    let exact = res.x_hat.iter().zip(&truth).all(|(a, b)| sign(*a) == sign(*b));
    println!("n = {n}, k = {k}, m = {m}, h = {h:.4}");
    println!("true support      {:?}", inst.signal.support());
    println!("recovered support {:?}", res.support());
    println!(
        "iterations {}, KKT residual {:.2e}, sign pattern recovered: {exact}",
        res.iterations, res.kkt_residual
    );
    Ok(())
}
