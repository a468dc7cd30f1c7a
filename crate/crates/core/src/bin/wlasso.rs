//! Command-line front end: solve, certify, predict, enumerate, sweep, plot.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use wlasso::ensemble::RNG_ALGORITHM;
use wlasso::harness::{emit_csv, emit_plot, read_csv, run_sweep, SweepConfig, XAxis};
use wlasso::solver::{critical_h, strict_dual_feasibility, WeightSpec};
use wlasso::theory::{
    check_recovery_events, eta_of, gap_from_max_weight, rescaled_theta, sample_threshold, select_h,
    threshold_with_selected_h, zeta,
};
use wlasso::{brute_force_minimum, solve_weighted_l1, Error, ProblemInstance, Result, SolverConfig};

#[derive(Parser)]
#[command(name = "wlasso", version, about = "Weighted l1 sparse recovery")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the weighted LASSO for a problem file.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        /// uniform:<v>, support:<v>, or a weight file.
        #[arg(long, default_value = "uniform:1.0")]
        weights: String,
        /// Regularization, or `auto` for the φₙ rule.
        #[arg(long, default_value = "auto")]
        h: String,
        #[arg(long, default_value_t = 9.0)]
        phi_n: f64,
        #[arg(long)]
        tol_kkt: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the support-recovery certificate using the true signal.
    Check {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "uniform:1.0")]
        weights: String,
        #[arg(long, default_value = "auto")]
        h: String,
        #[arg(long, default_value_t = 9.0)]
        phi_n: f64,
    },
    /// Print the regularization rule, sample threshold and magnitude gap.
    Predict {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma_z: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_a: f64,
        #[arg(long, default_value_t = 9.0)]
        phi_n: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon_prime: f64,
        #[arg(long, default_value_t = 1.0)]
        c3: f64,
        /// Largest support weight, for the magnitude gap.
        #[arg(long, default_value_t = 1.0)]
        support_weight: f64,
    },
    /// Exhaustive global minimizer (n <= 14).
    Oracle {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value = "uniform:1.0")]
        weights: String,
        #[arg(long, default_value = "auto")]
        h: String,
        #[arg(long, default_value_t = 9.0)]
        phi_n: f64,
    },
    /// Run a phase-transition sweep and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot a sweep CSV as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "theta")]
        x: String,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Loaded {
    inst: ProblemInstance,
    w: wlasso::WeightVector,
    h: f64,
}

fn load(problem: &Path, weights: &str, h: &str, phi_n: f64) -> Result<Loaded> {
    let inst = ProblemInstance::load(problem)?;
    let w = WeightSpec::parse(weights)?.resolve(&inst)?;
    let h = if h == "auto" {
        let eta = eta_of(&w, inst.signal.support())?;
        let c = &inst.config;
        select_h(inst.m(), inst.n(), inst.k(), eta, c.sigma_z, c.sigma_a, phi_n)?
    } else {
        h.parse()
            .map_err(|_| Error::InvalidConfig(format!("h must be a number or auto, got {h:?}")))?
    };
    Ok(Loaded { inst, w, h })
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json value"));
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            problem,
            weights,
            h,
            phi_n,
            tol_kkt,
            max_iters,
            out,
        } => {
            let Loaded { inst, w, h } = load(&problem, &weights, &h, phi_n)?;
            let mut cfg = SolverConfig::with_h(h);
            if let Some(t) = tol_kkt {
                cfg.tol_kkt = t;
            }
            if let Some(it) = max_iters {
                cfg.max_iters = it;
            }
            let res = solve_weighted_l1(&inst, &w, &cfg)?;
            let dual = strict_dual_feasibility(&inst.a, &inst.y, &res.x_hat, &w, h)?;
            let doc = json!({
                "h": h,
                "x_hat": res.x_hat,
                "support": res.support(),
                "kkt_residual": res.kkt_residual,
                "iterations": res.iterations,
                "objective": res.objective(),
                "converged": res.converged,
                "dual_margin": dual.margin,
                "unique": dual.unique(),
                "critical_h": critical_h(&inst.a, &inst.y, &w),
            });
            match out {
                Some(path) => std::fs::write(&path, serde_json::to_string_pretty(&doc).expect("json"))
                    .map_err(|e| Error::Io { path, source: e })?,
                None => print_json(&doc),
            }
        }
        Command::Check {
            problem,
            weights,
            h,
            phi_n,
        } => {
            let Loaded { inst, w, h } = load(&problem, &weights, &h, phi_n)?;
            let cert = check_recovery_events(&inst, &w, h)?;
            let mut doc = serde_json::to_value(&cert).expect("certificate");
            doc["h"] = json!(h);
            print_json(&doc);
        }
        Command::Predict {
            n,
            k,
            eta,
            sigma_z,
            sigma_a,
            phi_n,
            m,
            epsilon_prime,
            c3,
            support_weight,
        } => {
            if !(0 < k && k < n) {
                return Err(Error::InvalidConfig(format!("need 0 < k < n, got k = {k}, n = {n}")));
            }
            let h = select_h(m, n, k, eta, sigma_z, sigma_a, phi_n)?;
            let m_star = sample_threshold(n, k, eta, h, sigma_z, sigma_a, epsilon_prime);
            let m_edge = sample_threshold(n, k, eta, f64::INFINITY, sigma_z, sigma_a, epsilon_prime);
            let rows = [
                ("h", h),
                ("m_threshold", m_star),
                ("theta_of_m_threshold", rescaled_theta(m_star, n, k)),
                ("theta_of_m", rescaled_theta(m as f64, n, k)),
                ("zeta", zeta(k, h, sigma_z, sigma_a, epsilon_prime)),
                ("m_threshold_noise_free", m_edge),
                ("m_threshold_rule_h", threshold_with_selected_h(n, k, eta, epsilon_prime, phi_n)),
                ("gap", gap_from_max_weight(h, support_weight, k, m, sigma_z, sigma_a, c3)),
            ];
            for (name, value) in rows {
                println!("{name:<24} {value:.6}");
            }
        }
        Command::Oracle {
            problem,
            weights,
            h,
            phi_n,
        } => {
            let Loaded { inst, w, h } = load(&problem, &weights, &h, phi_n)?;
            let res = brute_force_minimum(&inst, &w, h)?;
            let mut doc = serde_json::to_value(&res).expect("oracle result");
            doc["h"] = json!(h);
            print_json(&doc);
        }
        Command::Sweep { config, out } => {
            let cfg = SweepConfig::load(&config)?;
            let records = run_sweep(&cfg)?;
            emit_csv(&records, &out)?;
            let meta_path = out.with_extension("meta.json");
            let meta = json!({ "rng": RNG_ALGORITHM, "config": cfg, "records": records.len() });
            std::fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("json"))
                .map_err(|e| Error::Io { path: meta_path, source: e })?;
            eprintln!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Plot { csv, x, out } => {
            let axis: XAxis = x.parse()?;
            let records = read_csv(&csv)?;
            emit_plot(&records, &out, axis)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
