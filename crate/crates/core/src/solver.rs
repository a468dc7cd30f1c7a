//! Weighted LASSO
//!
//! ```text
//! minimize  (1/2m) ‖A x − y‖² + h Σ wᵢ |xᵢ|
//! ```
//!
//! solved by accelerated proximal gradient (FISTA) with function-value
//! restart and backtracking. Whenever the sign pattern of the iterate is
//! stable between two checks, the stationarity equation restricted to that
//! pattern is solved directly; the candidate is kept only if its KKT
//! residual clears the tolerance. Convergence is always judged on the KKT
//! residual.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ensemble::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq, Cholesky, DenseMatrix, DenseVector};

/// Diagonal of `W`; every entry is finite and strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("weight vector is empty".into()));
        }
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidWeights(format!(
                "weight {i} is {v}; weights must lie in (0, inf)"
            )));
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// `value` on `support`, 1 elsewhere.
    pub fn on_support(n: usize, support: &[usize], value: f64) -> Result<Self> {
        let mut w = vec![1.0; n];
        for &i in support {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            w[i] = value;
        }
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|w| w * c).collect())
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Textual weight choice used by the command line: `uniform:<v>`,
/// `support:<v>` (value on the instance's true support, 1 elsewhere) or a
/// path to a file holding one weight per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform(f64),
    Support(f64),
    File(std::path::PathBuf),
}

impl WeightSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let number = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::InvalidWeights(format!("cannot parse weight value {v:?}")))
        };
        if let Some(v) = s.strip_prefix("uniform:") {
            Ok(Self::Uniform(number(v)?))
        } else if let Some(v) = s.strip_prefix("support:") {
            Ok(Self::Support(number(v)?))
        } else {
            Ok(Self::File(s.into()))
        }
    }

    pub fn resolve(&self, inst: &ProblemInstance) -> Result<WeightVector> {
        let n = inst.n();
        let w = match self {
            Self::Uniform(v) => WeightVector::uniform(n, *v)?,
            Self::Support(v) => WeightVector::on_support(n, inst.signal.support(), *v)?,
            Self::File(path) => read_weight_file(path)?,
        };
        if w.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for n = {n}",
                w.len()
            )));
        }
        Ok(w)
    }
}

/// A JSON array, or numbers separated by whitespace or commas.
pub fn read_weight_file(path: &Path) -> Result<WeightVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values: Vec<f64> = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(_) => text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| {
                    Error::InvalidWeights(format!("{}: bad number {t:?}", path.display()))
                })
            })
            .collect::<Result<_>>()?,
    };
    WeightVector::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `1/L` with `L` the top eigenvalue of `AᵀA/m` from power iteration.
    Fixed,
    /// Start at `1/L` and halve until the quadratic upper bound holds.
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub h: f64,
    pub max_iters: usize,
    pub tol_kkt: f64,
    /// Relative objective decrease over a check window below which the run
    /// stops unconverged. 0 disables.
    pub tol_obj: f64,
    pub step_rule: StepRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.1,
            max_iters: 50_000,
            tol_kkt: 1e-9,
            tol_obj: 0.0,
            step_rule: StepRule::Backtracking,
        }
    }
}

impl SolverConfig {
    pub fn with_h(h: f64) -> Self {
        Self {
            h,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidConfig(format!("h must be positive, got {}", self.h)));
        }
        if !(self.tol_kkt > 0.0) {
            return Err(Error::InvalidConfig("tol_kkt must be positive".into()));
        }
        if !(self.tol_obj >= 0.0) {
            return Err(Error::InvalidConfig("tol_obj must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x_hat: DenseVector,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    pub converged: bool,
}

impl SolveResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the starting point")
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.x_hat)
    }
}

/// Proximal map of `tau |·|`. Returns literal `0.0` inside the dead zone.
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if v.abs() <= tau {
        0.0
    } else {
        v - tau.copysign(v)
    }
}

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn support_of(x: &[f64]) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

fn check_dims(a: &DenseMatrix, y: &[f64], x: &[f64], w: &WeightVector) -> Result<()> {
    if y.len() != a.rows() || x.len() != a.cols() || w.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, y has {}, x has {}, w has {}",
            a.rows(),
            a.cols(),
            y.len(),
            x.len(),
            w.len()
        )));
    }
    Ok(())
}

fn penalty(x: &[f64], w: &WeightVector) -> f64 {
    x.iter().zip(w.as_slice()).map(|(xi, wi)| wi * xi.abs()).sum()
}

/// `(1/2m) ‖A x − y‖² + h Σ wᵢ |xᵢ|`.
pub fn objective(a: &DenseMatrix, y: &[f64], x: &[f64], w: &WeightVector, h: f64) -> Result<f64> {
    check_dims(a, y, x, w)?;
    let m = a.rows() as f64;
    let r: Vec<f64> = a.matvec(x).iter().zip(y).map(|(p, q)| p - q).collect();
    Ok(norm_sq(&r) / (2.0 * m) + h * penalty(x, w))
}

/// `(1/m) Aᵀ (A x − y)`.
pub fn smooth_gradient(a: &DenseMatrix, y: &[f64], x: &[f64]) -> DenseVector {
    let m = a.rows() as f64;
    let r: Vec<f64> = a.matvec(x).iter().zip(y).map(|(p, q)| p - q).collect();
    a.matvec_t(&r).into_iter().map(|g| g / m).collect()
}

fn residual_from_gradient(grad: &[f64], x: &[f64], w: &[f64], h: f64) -> f64 {
    grad.iter()
        .zip(x)
        .zip(w)
        .map(|((&g, &xi), &wi)| {
            if xi != 0.0 {
                (g + h * wi * sign(xi)).abs()
            } else {
                (g.abs() - h * wi).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `ℓ∞` distance from `−(1/m)Aᵀ(Ax − y)` to the scaled subdifferential
/// `h W ∂‖x‖₁`; zero exactly at global minimizers.
pub fn kkt_residual(a: &DenseMatrix, y: &[f64], x: &[f64], w: &WeightVector, h: f64) -> Result<f64> {
    check_dims(a, y, x, w)?;
    Ok(residual_from_gradient(&smooth_gradient(a, y, x), x, w.as_slice(), h))
}

/// Smallest `h` at which `x = 0` is optimal: `maxᵢ |Aᵢᵀy| / (m wᵢ)`.
pub fn critical_h(a: &DenseMatrix, y: &[f64], w: &WeightVector) -> f64 {
    let m = a.rows() as f64;
    a.matvec_t(y)
        .iter()
        .zip(w.as_slice())
        .map(|(c, wi)| c.abs() / (m * wi))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualFeasibility {
    /// `margin > 0`.
    pub strict: bool,
    /// `min_{i ∉ Ŝ} (h wᵢ − |(1/m) Aᵢᵀ (y − A x)|)`; `+inf` if `x` has full support.
    pub margin: f64,
    /// Gram matrix of the columns on the support of `x` is positive definite.
    pub full_rank: bool,
}

impl DualFeasibility {
    /// Strict dual feasibility plus full rank: `x` is the unique minimizer.
    pub fn unique(&self) -> bool {
        self.strict && self.full_rank
    }
}

/// Off-support slack of the subgradient at `x` and rank of its active columns.
pub fn strict_dual_feasibility(
    a: &DenseMatrix,
    y: &[f64],
    x: &[f64],
    w: &WeightVector,
    h: f64,
) -> Result<DualFeasibility> {
    check_dims(a, y, x, w)?;
    let m = a.rows() as f64;
    let r: Vec<f64> = y.iter().zip(a.matvec(x)).map(|(p, q)| p - q).collect();
    let corr = a.matvec_t(&r);
    let margin = (0..x.len())
        .filter(|&i| x[i] == 0.0)
        .map(|i| h * w.as_slice()[i] - corr[i].abs() / m)
        .fold(f64::INFINITY, f64::min);
    let active = support_of(x);
    let full_rank = active.is_empty()
        || (active.len() <= a.rows() && Cholesky::factor(&a.column_submatrix(&active)?.gram()).is_ok());
    Ok(DualFeasibility {
        strict: margin > 0.0,
        margin,
        full_rank,
    })
}

/// Solve the stationarity system on a fixed sign pattern:
/// `x_T = (A_TᵀA_T)⁻¹ (A_Tᵀ y − m h W_T s)`.
/// Returns `None` if the Gram matrix is not positive definite.
pub fn solve_on_pattern(
    a: &DenseMatrix,
    y: &[f64],
    w: &WeightVector,
    h: f64,
    pattern: &[usize],
    signs: &[f64],
) -> Result<Option<DenseVector>> {
    let a_t = a.column_submatrix(pattern)?;
    let chol = match Cholesky::factor(&a_t.gram()) {
        Ok(c) => c,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let m = a.rows() as f64;
    let rhs: Vec<f64> = a_t
        .matvec_t(y)
        .iter()
        .zip(pattern.iter().zip(signs))
        .map(|(c, (&i, s))| c - m * h * w.as_slice()[i] * s)
        .collect();
    Ok(Some(chol.solve(&rhs)?))
}

/// Top eigenvalue of `AᵀA / m` by power iteration from a fixed start.
fn lipschitz_estimate(a: &DenseMatrix, iterations: usize) -> f64 {
    let m = a.rows() as f64;
    let n = a.cols();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let nv = norm_sq(&v).sqrt();
        if nv == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        let av = a.matvec(&v);
        let next: Vec<f64> = a.matvec_t(&av).into_iter().map(|x| x / m).collect();
        lambda = dot(&v, &next);
        v = next;
    }
    lambda
}

const CHECK_EVERY: usize = 10;

struct Problem<'a> {
    a: &'a DenseMatrix,
    y: &'a [f64],
    w: &'a [f64],
    h: f64,
    m: f64,
}

impl Problem<'_> {
    fn residual(&self, ax: &[f64]) -> Vec<f64> {
        ax.iter().zip(self.y).map(|(p, q)| p - q).collect()
    }

    fn smooth(&self, r: &[f64]) -> f64 {
        norm_sq(r) / (2.0 * self.m)
    }

    fn gradient(&self, r: &[f64]) -> Vec<f64> {
        self.a.matvec_t(r).into_iter().map(|g| g / self.m).collect()
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        self.h * x.iter().zip(self.w).map(|(xi, wi)| wi * xi.abs()).sum::<f64>()
    }

    fn prox_step(&self, v: &[f64], grad: &[f64], step: f64) -> Vec<f64> {
        v.iter()
            .zip(grad)
            .zip(self.w)
            .map(|((vi, gi), wi)| soft_threshold(vi - step * gi, step * self.h * wi))
            .collect()
    }

    fn kkt(&self, x: &[f64], r: &[f64]) -> f64 {
        residual_from_gradient(&self.gradient(r), x, self.w, self.h)
    }
}

fn sign_pattern(x: &[f64]) -> Vec<(usize, bool)> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| (i, *v > 0.0))
        .collect()
}

/// Solve the weighted LASSO for `inst.a`, `inst.y`.
pub fn solve_weighted_l1(inst: &ProblemInstance, w: &WeightVector, cfg: &SolverConfig) -> Result<SolveResult> {
    solve(&inst.a, &inst.y, w, cfg)
}

/// Solve the weighted LASSO for an explicit design and measurement.
pub fn solve(a: &DenseMatrix, y: &[f64], w: &WeightVector, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let n = a.cols();
    check_dims(a, y, &vec![0.0; n], w)?;
    let p = Problem {
        a,
        y,
        w: w.as_slice(),
        h: cfg.h,
        m: a.rows() as f64,
    };

    let mut x = vec![0.0; n];
    let mut ax = vec![0.0; a.rows()];
    let mut r = p.residual(&ax);
    let mut obj = p.smooth(&r);
    let mut trace = vec![obj];
    let mut kkt = p.kkt(&x, &r);
    if kkt <= cfg.tol_kkt {
        return Ok(SolveResult {
            x_hat: x,
            iterations: 0,
            objective_trace: trace,
            kkt_residual: kkt,
            converged: true,
        });
    }

    let lipschitz = lipschitz_estimate(a, 50).max(f64::MIN_POSITIVE);
    let mut step = match cfg.step_rule {
        StepRule::Fixed => 1.0 / (1.01 * lipschitz),
        StepRule::Backtracking => 1.0 / lipschitz,
    };

    let mut v = x.clone();
    let mut av = ax.clone();
    let mut t = 1.0_f64;
    let mut last_pattern: Option<Vec<(usize, bool)>> = None;
    let mut window_start_obj = obj;

    for iter in 1..=cfg.max_iters {
        let rv = p.residual(&av);
        let fv = p.smooth(&rv);
        let gv = p.gradient(&rv);

        let (x_new, ax_new, r_new, f_new) = loop {
            let cand = p.prox_step(&v, &gv, step);
            let a_cand = a.matvec(&cand);
            let r_cand = p.residual(&a_cand);
            let f_cand = p.smooth(&r_cand);
            if cfg.step_rule == StepRule::Fixed {
                break (cand, a_cand, r_cand, f_cand);
            }
            let diff: Vec<f64> = cand.iter().zip(&v).map(|(c, vi)| c - vi).collect();
            let bound = fv + dot(&gv, &diff) + norm_sq(&diff) / (2.0 * step);
            if f_cand <= bound + 1e-12 * fv.abs().max(1e-300) || !f_cand.is_finite() {
                break (cand, a_cand, r_cand, f_cand);
            }
            step *= 0.5;
        };
        let obj_new = f_new + p.penalty(&x_new);
        if !obj_new.is_finite() {
            return Err(Error::StepSize {
                iterations: iter,
                step,
            });
        }

        if obj_new > obj && t > 1.0 {
            // Momentum overshot: restart from the last accepted iterate.
            t = 1.0;
            v.clone_from(&x);
            av.clone_from(&ax);
            continue;
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        v = x_new.iter().zip(&x).map(|(xn, xo)| xn + beta * (xn - xo)).collect();
        av = ax_new.iter().zip(&ax).map(|(xn, xo)| xn + beta * (xn - xo)).collect();
        t = t_next;
        x = x_new;
        ax = ax_new;
        r = r_new;
        obj = obj_new;
        trace.push(obj);

        if iter % CHECK_EVERY != 0 && iter != cfg.max_iters {
            continue;
        }
        kkt = p.kkt(&x, &r);
        if kkt <= cfg.tol_kkt {
            return Ok(done(x, iter, trace, kkt, true));
        }
        let pattern = sign_pattern(&x);
        if last_pattern.as_ref() == Some(&pattern) {
            if let Some((xp, rp, objp)) = polish(&p, w, &pattern)? {
                let kp = p.kkt(&xp, &rp);
                if kp <= cfg.tol_kkt && objp <= obj + 1e-12 * obj.abs().max(1.0) {
                    trace.push(objp.min(obj));
                    return Ok(done(xp, iter, trace, kp, true));
                }
            }
        }
        last_pattern = Some(pattern);
        if cfg.tol_obj > 0.0 && (window_start_obj - obj) <= cfg.tol_obj * obj.abs() {
            return Ok(done(x, iter, trace, kkt, false));
        }
        window_start_obj = obj;
    }
    let kkt = p.kkt(&x, &r);
    let converged = kkt <= cfg.tol_kkt;
    Ok(done(x, cfg.max_iters, trace, kkt, converged))
}

fn done(x: Vec<f64>, iterations: usize, trace: Vec<f64>, kkt: f64, converged: bool) -> SolveResult {
    SolveResult {
        x_hat: x,
        iterations,
        objective_trace: trace,
        kkt_residual: kkt,
        converged,
    }
}

/// Polished iterate, its residual `Ax − y` and objective value.
type Polished = (Vec<f64>, Vec<f64>, f64);

/// Exact solve on a sign pattern; kept only if the signs come out as assumed.
fn polish(p: &Problem<'_>, w: &WeightVector, pattern: &[(usize, bool)]) -> Result<Option<Polished>> {
    if pattern.is_empty() || pattern.len() > p.a.rows() {
        return Ok(None);
    }
    let idx: Vec<usize> = pattern.iter().map(|(i, _)| *i).collect();
    let signs: Vec<f64> = pattern.iter().map(|(_, pos)| if *pos { 1.0 } else { -1.0 }).collect();
    let Some(xt) = solve_on_pattern(p.a, p.y, w, p.h, &idx, &signs)? else {
        return Ok(None);
    };
    if xt.iter().zip(&signs).any(|(v, s)| v * s <= 0.0) {
        return Ok(None);
    }
    let mut x = vec![0.0; p.a.cols()];
    for (&i, v) in idx.iter().zip(xt) {
        x[i] = v;
    }
    let r = p.residual(&p.a.matvec(&x));
    let obj = p.smooth(&r) + p.penalty(&x);
    Ok(Some((x, r, obj)))
}
