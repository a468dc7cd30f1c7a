//! Exhaustive global minimizer for small weighted LASSO problems.
//!
//! Every support `T ⊆ {0..n}` and sign vector `s ∈ {±1}^|T|` is tried. The
//! stationarity equation on `(T, s)` fixes `x_T`; the pattern is kept when
//! the solution has the assumed signs and every off-support correlation is
//! within its weighted bound. Any such point satisfies the first-order
//! optimality condition, so it is a global minimizer; a strictly positive
//! off-support slack makes it the unique one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseMatrix, DenseVector};
use crate::solver::{objective, WeightVector};

/// Largest dimension accepted (the pattern count grows as `3ⁿ`).
pub const MAX_ORACLE_N: usize = 14;

/// Entries of `x_T` at or below this magnitude do not count as carrying their sign.
pub const SIGN_TOLERANCE: f64 = 1e-12;

/// Relative slack on the off-support bound, absorbing rounding on exact ties.
const DUAL_SLACK: f64 = 1e-12;

/// One KKT-feasible sign pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCertificate {
    pub support: Vec<usize>,
    pub signs: Vec<f64>,
    pub x: DenseVector,
    /// `min_{i ∉ T} (h wᵢ − |Aᵢᵀ(y − A_T x_T)| / m)`; `+inf` if `T` is everything.
    pub margin: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub x_opt: DenseVector,
    pub support: Vec<usize>,
    pub signs: Vec<f64>,
    pub dual_margin: f64,
    pub unique: bool,
    pub objective: f64,
    /// Number of KKT-feasible patterns found.
    pub candidates: usize,
}

fn check(a: &DenseMatrix, y: &[f64], w: &WeightVector) -> Result<()> {
    let n = a.cols();
    if n > MAX_ORACLE_N {
        return Err(Error::OracleTooLarge {
            n,
            max: MAX_ORACLE_N,
        });
    }
    if y.len() != a.rows() || w.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, y has {}, w has {}",
            a.rows(),
            n,
            y.len(),
            w.len()
        )));
    }
    Ok(())
}

/// Subsets of `0..n` with `size` elements, lexicographic.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..size).rev().find(|&i| cur[i] < n - size + i) else {
            return out;
        };
        cur[pos] += 1;
        for j in pos + 1..size {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn patterns_on(
    a: &DenseMatrix,
    y: &[f64],
    w: &WeightVector,
    h: f64,
    correlations: &[f64],
    support: &[usize],
) -> Result<Vec<PatternCertificate>> {
    let n = a.cols();
    let m = a.rows() as f64;
    let wv = w.as_slice();
    let a_t = a.column_submatrix(support)?;
    let chol = match Cholesky::factor(&a_t.gram()) {
        Ok(c) => c,
        Err(Error::Singular { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let aty: Vec<f64> = support.iter().map(|&i| correlations[i]).collect();
    let mut in_t = vec![false; n];
    for &i in support {
        in_t[i] = true;
    }

    let size = support.len();
    let mut found = Vec::new();
    // Bit j of the mask set means s_j = +1.
    for mask in 0u32..(1u32 << size) {
        let signs: Vec<f64> = (0..size)
            .map(|j| if mask >> j & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let rhs: Vec<f64> = aty
            .iter()
            .zip(support.iter().zip(&signs))
            .map(|(c, (&i, s))| c - m * h * wv[i] * s)
            .collect();
        let xt = chol.solve(&rhs)?;
        if xt.iter().zip(&signs).any(|(v, s)| v * s <= SIGN_TOLERANCE) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&i, &v) in support.iter().zip(&xt) {
            x[i] = v;
        }
        let r: Vec<f64> = y.iter().zip(a.matvec(&x)).map(|(p, q)| p - q).collect();
        let corr = a.matvec_t(&r);
        let mut margin = f64::INFINITY;
        let mut feasible = true;
        for i in (0..n).filter(|&i| !in_t[i]) {
            let bound = h * wv[i];
            let c = corr[i].abs() / m;
            if c > bound * (1.0 + DUAL_SLACK) {
                feasible = false;
                break;
            }
            margin = margin.min(bound - c);
        }
        if !feasible {
            continue;
        }
        let obj = objective(a, y, &x, w, h)?;
        found.push(PatternCertificate {
            support: support.to_vec(),
            signs,
            x,
            margin,
            objective: obj,
        });
    }
    Ok(found)
}

/// All KKT-feasible patterns, ordered by support size, then support
/// (lexicographic), then sign mask.
pub fn enumerate_certificates_for(a: &DenseMatrix, y: &[f64], w: &WeightVector, h: f64) -> Result<Vec<PatternCertificate>> {
    check(a, y, w)?;
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("h must be positive, got {h}")));
    }
    let n = a.cols();
    let correlations = a.matvec_t(y);
    let max_size = n.min(a.rows());
    let supports: Vec<Vec<usize>> = (0..=max_size).flat_map(|c| combinations(n, c)).collect();
    let per_support: Vec<Vec<PatternCertificate>> = supports
        .par_iter()
        .map(|t| patterns_on(a, y, w, h, &correlations, t))
        .collect::<Result<_>>()?;
    Ok(per_support.into_iter().flatten().collect())
}

pub fn enumerate_certificates(inst: &ProblemInstance, w: &WeightVector, h: f64) -> Result<Vec<PatternCertificate>> {
    enumerate_certificates_for(&inst.a, &inst.y, w, h)
}

/// Global minimizer by enumeration. Prefers a pattern with strictly
/// positive margin (the unique minimizer); otherwise returns the lowest
/// objective among the tied patterns with `unique = false`.
pub fn brute_force_minimum_for(a: &DenseMatrix, y: &[f64], w: &WeightVector, h: f64) -> Result<OracleResult> {
    let certs = enumerate_certificates_for(a, y, w, h)?;
    let candidates = certs.len();
    let by_objective = |p: &&PatternCertificate, q: &&PatternCertificate| p.objective.total_cmp(&q.objective);
    let best = certs
        .iter()
        .filter(|c| c.margin > 0.0)
        .min_by(by_objective)
        .or_else(|| certs.iter().min_by(by_objective))
        .ok_or(Error::OracleFailure)?;
    Ok(OracleResult {
        x_opt: best.x.clone(),
        support: best.support.clone(),
        signs: best.signs.clone(),
        dual_margin: best.margin,
        unique: best.margin > 0.0,
        objective: best.objective,
        candidates,
    })
}

pub fn brute_force_minimum(inst: &ProblemInstance, w: &WeightVector, h: f64) -> Result<OracleResult> {
    brute_force_minimum_for(&inst.a, &inst.y, w, h)
}
