//! Monte Carlo phase-transition experiments.
//!
//! A sweep draws `trials` independent problems at each `(n, m)` grid point,
//! solves each with `h` from the regularization rule, and records how often
//! the exact sign pattern of the ground truth is recovered. Every trial
//! seeds its own generator from `(master_seed, n, m, trial)`, so results do
//! not depend on scheduling and reruns are bit-identical.

mod analysis;
mod csv_io;
mod plot;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use analysis::{first_crossing, isotonic_increasing, largest_drop, records_for_n};
pub use csv_io::{emit_csv, read_csv, CSV_HEADER};
pub use plot::{emit_plot, render_svg, XAxis};

use crate::ensemble::{derive_seed, sample_instance, sparsity_rule, EnsembleConfig};
use crate::error::{Error, Result};
use crate::solver::{read_weight_file, sign, solve_weighted_l1, SolverConfig, WeightVector};
use crate::theory::{check_recovery_events, eta_of, rescaled_theta, samples_for_theta, select_h};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sparsity {
    /// `k = ⌈0.4 √n⌉`.
    #[default]
    Rule,
    Explicit(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub theta_min: f64,
    pub theta_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MGrid {
    Explicit(Vec<usize>),
    /// Evenly spaced `θ` values, each converted to the nearest integer `m`.
    ThetaGrid(ThetaGrid),
    /// Given `θ` values, converted to the nearest integer `m`.
    ThetaList(Vec<f64>),
}

impl Default for MGrid {
    fn default() -> Self {
        MGrid::ThetaGrid(ThetaGrid {
            theta_min: 0.25,
            theta_max: 3.0,
            steps: 25,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// All weights 1 (`η = 1`).
    #[default]
    Uniform,
    /// Given weight on each trial's true support, 1 elsewhere.
    SupportWeight(f64),
    /// Fixed weight per coordinate, read from a file.
    PerIndexFile(PathBuf),
    /// Fixed weight per coordinate.
    PerIndex(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SuccessDefinition {
    /// `sign(x̂) = sign(x*)` in every coordinate, zeros included.
    #[default]
    SignPattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub max_iters: usize,
    pub tol_kkt: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            max_iters: d.max_iters,
            tol_kkt: d.tol_kkt,
        }
    }
}

fn default_sigma_z() -> f64 {
    0.5
}

fn default_one() -> f64 {
    1.0
}

fn default_phi_n() -> f64 {
    9.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub sparsity: Sparsity,
    #[serde(default)]
    pub m_grid: MGrid,
    pub trials: usize,
    #[serde(default)]
    pub weight_scheme: WeightScheme,
    #[serde(default = "default_sigma_z")]
    pub sigma_z: f64,
    #[serde(default = "default_one")]
    pub sigma_a: f64,
    #[serde(default = "default_phi_n")]
    pub phi_n: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub success_definition: SuccessDefinition,
    /// Fixed regularization instead of the `φₙ` rule; required when `sigma_z = 0`.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Also evaluate the recovery certificate on every trial.
    #[serde(default)]
    pub certificate_check: bool,
}

impl SweepConfig {
    /// Uniform weights, `σ_Z = 0.5`, `σ_A = 1`, `φₙ = 9`, default grid.
    pub fn new(n_list: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        Self {
            n_list,
            sparsity: Sparsity::Rule,
            m_grid: MGrid::default(),
            trials,
            weight_scheme: WeightScheme::Uniform,
            sigma_z: 0.5,
            sigma_a: 1.0,
            phi_n: 9.0,
            master_seed,
            success_definition: SuccessDefinition::SignPattern,
            h: None,
            solver: SolverSettings::default(),
            certificate_check: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })?;
        // Weight files are resolved next to the config.
        if let WeightScheme::PerIndexFile(p) = &cfg.weight_scheme {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.weight_scheme = WeightScheme::PerIndexFile(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn k_for(&self, n: usize) -> usize {
        match self.sparsity {
            Sparsity::Rule => sparsity_rule(n),
            Sparsity::Explicit(k) => k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_list.is_empty() {
            return bad("n_list is empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for &n in &self.n_list {
            let k = self.k_for(n);
            if !(0 < k && k < n) {
                return bad(format!("need 0 < k < n, got k = {k} for n = {n}"));
            }
        }
        match &self.m_grid {
            MGrid::Explicit(ms) if ms.is_empty() || ms.contains(&0) => {
                return bad("explicit m grid must be nonempty and positive".into())
            }
            MGrid::ThetaGrid(g) if !(g.theta_min > 0.0 && g.theta_max >= g.theta_min && g.steps >= 1) => {
                return bad("theta grid needs 0 < theta_min <= theta_max and steps >= 1".into())
            }
            MGrid::ThetaList(ts) if ts.is_empty() || ts.iter().any(|t| !(*t > 0.0)) => {
                return bad("theta list must be nonempty and positive".into())
            }
            _ => {}
        }
        if !(self.sigma_a > 0.0) || !(self.sigma_z >= 0.0) {
            return bad("need sigma_a > 0 and sigma_z >= 0".into());
        }
        match self.h {
            Some(h) if !(h > 0.0 && h.is_finite()) => return bad(format!("h must be positive, got {h}")),
            None if self.sigma_z == 0.0 => {
                return bad("sigma_z = 0 needs an explicit h".into())
            }
            None if !(self.phi_n >= 2.0) => return bad(format!("phi_n must be >= 2, got {}", self.phi_n)),
            _ => {}
        }
        match &self.weight_scheme {
            WeightScheme::SupportWeight(v) if !(*v > 0.0 && v.is_finite()) => {
                return Err(Error::InvalidWeights(format!("support weight must be positive, got {v}")))
            }
            WeightScheme::PerIndex(w) => self.check_per_index(w)?,
            WeightScheme::PerIndexFile(p) => self.check_per_index(read_weight_file(p)?.as_slice())?,
            _ => {}
        }
        if !(self.solver.tol_kkt > 0.0) {
            return bad("solver.tol_kkt must be positive".into());
        }
        Ok(())
    }

    fn check_per_index(&self, w: &[f64]) -> Result<()> {
        WeightVector::new(w.to_vec())?;
        if self.n_list.iter().any(|&n| n != w.len()) {
            return Err(Error::InvalidWeights(format!(
                "{} per-index weights do not match every n in n_list",
                w.len()
            )));
        }
        Ok(())
    }

    /// Grid points ordered by `n` then `m`, duplicates removed.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut ns = self.n_list.clone();
        ns.sort_unstable();
        ns.dedup();
        let mut out = Vec::new();
        for n in ns {
            let k = self.k_for(n);
            let from_theta = |t: f64| (samples_for_theta(t, n, k).round() as usize).max(1);
            let mut ms: Vec<usize> = match &self.m_grid {
                MGrid::Explicit(ms) => ms.clone(),
                MGrid::ThetaList(ts) => ts.iter().map(|&t| from_theta(t)).collect(),
                MGrid::ThetaGrid(g) => (0..g.steps)
                    .map(|i| {
                        let frac = if g.steps == 1 { 0.0 } else { i as f64 / (g.steps - 1) as f64 };
                        from_theta(g.theta_min + frac * (g.theta_max - g.theta_min))
                    })
                    .collect(),
            };
            ms.sort_unstable();
            ms.dedup();
            out.extend(ms.into_iter().map(|m| GridPoint { n, k, m }));
        }
        out
    }

    fn fixed_weights(&self) -> Result<Option<Vec<f64>>> {
        Ok(match &self.weight_scheme {
            WeightScheme::PerIndex(w) => Some(w.clone()),
            WeightScheme::PerIndexFile(p) => Some(read_weight_file(p)?.into()),
            _ => None,
        })
    }

    fn weights_for(&self, n: usize, support: &[usize], fixed: Option<&[f64]>) -> Result<WeightVector> {
        match (&self.weight_scheme, fixed) {
            (_, Some(w)) => WeightVector::new(w.to_vec()),
            (WeightScheme::SupportWeight(v), None) => WeightVector::on_support(n, support, *v),
            _ => WeightVector::uniform(n, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

impl GridPoint {
    pub fn theta(&self) -> f64 {
        rescaled_theta(self.m as f64, self.n, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// Solver converged and `sign(x̂) = sign(x*)` exactly.
    pub success: bool,
    pub converged: bool,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub eta: f64,
    pub h: f64,
    /// Certificate events, when requested and the true support is full rank.
    pub event1_holds: Option<bool>,
    pub event2_holds: Option<bool>,
}

/// One row of a phase-transition curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub theta: f64,
    pub eta: f64,
    pub h: f64,
    pub trials: usize,
    pub successes: usize,
    pub prob: f64,
    pub master_seed: u64,
}

/// Seed of trial `trial` at `point`.
pub fn trial_seed(master_seed: u64, point: GridPoint, trial: usize) -> u64 {
    derive_seed(master_seed, &[point.n as u64, point.m as u64, trial as u64])
}

/// Run one trial.
pub fn run_trial(cfg: &SweepConfig, point: GridPoint, trial: usize) -> Result<TrialOutcome> {
    let fixed = cfg.fixed_weights()?;
    run_trial_with(cfg, point, trial, fixed.as_deref())
}

fn run_trial_with(cfg: &SweepConfig, point: GridPoint, trial: usize, fixed: Option<&[f64]>) -> Result<TrialOutcome> {
    let GridPoint { n, k, m } = point;
    let seed = trial_seed(cfg.master_seed, point, trial);
    let inst = sample_instance(&EnsembleConfig {
        sigma_a: cfg.sigma_a,
        ..EnsembleConfig::new(n, k, m, cfg.sigma_z, seed)
    })?;
    let support = inst.signal.support();
    let w = cfg.weights_for(n, support, fixed)?;
    let eta = eta_of(&w, support)?;
    let h = match cfg.h {
        Some(h) => h,
        None => select_h(m, n, k, eta, cfg.sigma_z, cfg.sigma_a, cfg.phi_n)?,
    };
    let solver = SolverConfig {
        h,
        max_iters: cfg.solver.max_iters,
        tol_kkt: cfg.solver.tol_kkt,
        ..SolverConfig::default()
    };
    let (converged, kkt_residual, iterations, matches) = match solve_weighted_l1(&inst, &w, &solver) {
        Ok(res) => {
            let truth = inst.signal.to_dense();
            let matches = res.x_hat.iter().zip(&truth).all(|(a, b)| sign(*a) == sign(*b));
            (res.converged, res.kkt_residual, res.iterations, matches)
        }
        Err(Error::StepSize { iterations, .. }) => (false, f64::INFINITY, iterations, false),
        Err(e) => return Err(e),
    };
    let (event1, event2) = if cfg.certificate_check {
        match check_recovery_events(&inst, &w, h) {
            Ok(c) => (Some(c.event1_holds), Some(c.event2_holds)),
            Err(Error::Singular { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(TrialOutcome {
        seed,
        success: converged && matches,
        converged,
        kkt_residual,
        iterations,
        eta,
        h,
        event1_holds: event1,
        event2_holds: event2,
    })
}

/// All trial outcomes, grouped by grid point in [`SweepConfig::points`] order.
pub fn run_sweep_outcomes(cfg: &SweepConfig) -> Result<Vec<(GridPoint, Vec<TrialOutcome>)>> {
    cfg.validate()?;
    let fixed = cfg.fixed_weights()?;
    let points = cfg.points();
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let outcomes: Vec<TrialOutcome> = tasks
        .par_iter()
        .map(|&(p, t)| run_trial_with(cfg, points[p], t, fixed.as_deref()))
        .collect::<Result<_>>()?;
    let mut chunks = outcomes.chunks(cfg.trials);
    Ok(points
        .into_iter()
        .map(|p| (p, chunks.next().expect("one chunk per point").to_vec()))
        .collect())
}

/// Success-probability curve for every grid point.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    Ok(run_sweep_outcomes(cfg)?
        .iter()
        .map(|(p, outs)| aggregate(*p, outs, cfg.master_seed))
        .collect())
}

fn common_or_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let first = it.next().unwrap_or(f64::NAN);
    if it.all(|v| v == first) {
        first
    } else {
        let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        sum / count as f64
    }
}

/// Collapse trials at one grid point into a record. `eta` and `h` are the
/// shared value when every trial used the same one, otherwise their mean.
pub fn aggregate(point: GridPoint, outcomes: &[TrialOutcome], master_seed: u64) -> SweepRecord {
    let successes = outcomes.iter().filter(|o| o.success).count();
    let trials = outcomes.len();
    SweepRecord {
        n: point.n,
        k: point.k,
        m: point.m,
        theta: point.theta(),
        eta: common_or_mean(outcomes.iter().map(|o| o.eta)),
        h: common_or_mean(outcomes.iter().map(|o| o.h)),
        trials,
        successes,
        prob: successes as f64 / trials as f64,
        master_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SweepConfig {
        SweepConfig {
            sparsity: Sparsity::Explicit(2),
            m_grid: MGrid::Explicit(vec![6, 12, 24]),
            ..SweepConfig::new(vec![32], 5, 17)
        }
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SweepConfig = serde_json::from_str(r#"{"n_list":[128],"trials":10}"#).unwrap();
        assert_eq!(cfg.sigma_z, 0.5);
        assert_eq!(cfg.phi_n, 9.0);
        assert_eq!(cfg.m_grid, MGrid::default());
        assert_eq!(cfg.points().len(), 25);
        let cfg: SweepConfig = serde_json::from_str(
            r#"{"n_list":[64],"trials":3,"sparsity":{"explicit":3},
                "m_grid":{"theta_grid":{"theta_min":0.5,"theta_max":1.0,"steps":3}},
                "weight_scheme":{"support_weight":0.5},"master_seed":4,
                "success_definition":"sign_pattern"}"#,
        )
        .unwrap();
        assert_eq!(cfg.k_for(64), 3);
        assert_eq!(cfg.weight_scheme, WeightScheme::SupportWeight(0.5));
        assert!(serde_json::from_str::<SweepConfig>(r#"{"n_list":[8],"trials":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = small_cfg();
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.sigma_z = 0.0;
        assert!(cfg.validate().is_err());
        cfg.h = Some(0.1);
        assert!(cfg.validate().is_ok());
        let mut cfg = small_cfg();
        cfg.weight_scheme = WeightScheme::SupportWeight(0.0);
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.weight_scheme = WeightScheme::PerIndex(vec![1.0; 31]);
        assert!(cfg.validate().is_err());
        let mut cfg = small_cfg();
        cfg.sparsity = Sparsity::Explicit(32);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn points_are_sorted_and_unique() {
        let cfg = SweepConfig {
            m_grid: MGrid::Explicit(vec![30, 10, 30, 20]),
            ..SweepConfig::new(vec![256, 128], 1, 0)
        };
        let pts = cfg.points();
        let keys: Vec<(usize, usize)> = pts.iter().map(|p| (p.n, p.m)).collect();
        assert_eq!(keys, vec![(128, 10), (128, 20), (128, 30), (256, 10), (256, 20), (256, 30)]);
        assert_eq!(pts[0].k, 5);
        assert_eq!(pts[3].k, 7);
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = small_cfg();
        let p = cfg.points()[1];
        assert_eq!(run_trial(&cfg, p, 3).unwrap(), run_trial(&cfg, p, 3).unwrap());
        assert_ne!(run_trial(&cfg, p, 3).unwrap().seed, run_trial(&cfg, p, 4).unwrap().seed);
    }

    #[test]
    fn noiseless_overdetermined_trial_succeeds() {
        let cfg = SweepConfig {
            sigma_z: 0.0,
            h: Some(0.01),
            sparsity: Sparsity::Explicit(2),
            m_grid: MGrid::Explicit(vec![16]),
            ..SweepConfig::new(vec![16], 4, 2)
        };
        for t in 0..4 {
            let out = run_trial(&cfg, cfg.points()[0], t).unwrap();
            assert!(out.success, "trial {t}: {out:?}");
        }
    }

    #[test]
    fn too_few_samples_always_fail() {
        let cfg = SweepConfig {
            sparsity: Sparsity::Explicit(4),
            m_grid: MGrid::Explicit(vec![3]),
            certificate_check: true,
            ..SweepConfig::new(vec![20], 30, 8)
        };
        let recs = run_sweep(&cfg).unwrap();
        assert_eq!(recs[0].successes, 0);
        let (_, outs) = &run_sweep_outcomes(&cfg).unwrap()[0];
        assert!(outs.iter().all(|o| o.event1_holds.is_none()));
    }

    #[test]
    fn records_are_consistent() {
        let cfg = small_cfg();
        let recs = run_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 3);
        for r in &recs {
            assert!(r.successes <= r.trials);
            assert_eq!(r.prob, r.successes as f64 / r.trials as f64);
            assert_eq!(r.theta, rescaled_theta(r.m as f64, r.n, r.k));
            assert_eq!(r.eta, 1.0);
            assert_eq!(r.master_seed, 17);
        }
        assert_eq!(recs, run_sweep(&cfg).unwrap());
    }

    #[test]
    fn support_weights_set_eta() {
        let cfg = SweepConfig {
            weight_scheme: WeightScheme::SupportWeight(0.5),
            ..small_cfg()
        };
        let recs = run_sweep(&cfg).unwrap();
        assert!(recs.iter().all(|r| r.eta == 0.25));
    }
}
