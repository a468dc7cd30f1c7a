//! Empirical phase transition for uniform weights at several `n`, written as
//! CSV and SVG.
//!
//! cargo run --release --example phase_transition -- [out_dir] [trials]

use std::path::PathBuf;

use wlasso::harness::{emit_csv, emit_plot, first_crossing, records_for_n, run_sweep, MGrid, SweepConfig, ThetaGrid, XAxis};

fn main() -> wlasso::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/phase_transition".into()));
    let trials = args.next().map(|t| t.parse().expect("trial count")).unwrap_or(50);
    std::fs::create_dir_all(&out).map_err(|e| wlasso::Error::Io { path: out.clone(), source: e })?;

    let n_list = vec![128, 256, 512];
    let cfg = SweepConfig {
        m_grid: MGrid::ThetaGrid(ThetaGrid {
            theta_min: 0.25,
            theta_max: 3.0,
            steps: 12,
        }),
        ..SweepConfig::new(n_list.clone(), trials, 1)
    };
    let records = run_sweep(&cfg)?;
    emit_csv(&records, &out.join("phase_transition.csv"))?;
    emit_plot(&records, &out.join("phase_transition.svg"), XAxis::Theta)?;
    emit_plot(&records, &out.join("phase_transition_m.svg"), XAxis::M)?;

    for n in n_list {
        let crossing = first_crossing(&records_for_n(&records, n), 0.5);
        println!("n = {n:>4}: P(success) crosses 1/2 at theta = {crossing:.3?}");
    }
    println!("wrote {}", out.display());
    Ok(())
}
