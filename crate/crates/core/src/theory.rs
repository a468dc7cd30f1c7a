//! Closed-form quantities of the weighted-ℓ1 support recovery analysis:
//! the candidate minimizer built on the true support, the two events that
//! certify it, and the sample-size scaling law with its companion
//! regularization rule. Logarithms are natural throughout.

use serde::{Deserialize, Serialize};

use crate::ensemble::ProblemInstance;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, DenseVector};
use crate::solver::{sign, WeightVector};

/// Parameters of the scaling law.
///
/// `c3` multiplies the shrinkage term of the magnitude gap. Its value is
/// not pinned down by the analysis; the default of 1 is a heuristic and the
/// gap is only reported, never used to accept or reject anything. The
/// probability constants of the recovery guarantee have no computable value
/// and are not represented.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub xi: f64,
    pub eta: f64,
    pub epsilon_prime: f64,
    pub phi_n: f64,
    pub c3: f64,
}

impl ScalingParams {
    pub fn new(xi: f64, eta: f64) -> Result<Self> {
        let p = Self {
            xi,
            eta,
            epsilon_prime: 0.0,
            phi_n: 9.0,
            c3: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `ξ` and `η` of `w` on support `s`, default `ε′ = 0`, `φₙ = 9`, `c₃ = 1`.
    pub fn from_weights(w: &WeightVector, s: &[usize]) -> Result<Self> {
        Self::new(xi_of(w, s)?, eta_of(w, s)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0 && self.eta > 0.0) {
            return Err(Error::InvalidConfig("xi and eta must be positive".into()));
        }
        if !(self.phi_n >= 2.0) {
            return Err(Error::InvalidConfig(format!("phi_n must be >= 2, got {}", self.phi_n)));
        }
        if !(self.epsilon_prime >= 0.0) || !(self.c3 > 0.0) {
            return Err(Error::InvalidConfig("need epsilon' >= 0 and c3 > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCertificate {
    /// Every off-support correlation stays strictly below `h wᵢ`.
    pub event1_holds: bool,
    /// `min_{i ∈ Sᶜ} (h wᵢ − |Aᵢᵀ v| / m)`; `+inf` when `Sᶜ` is empty.
    pub event1_margin: f64,
    /// `sign(x†_S) = sign(x*_S)`.
    pub event2_holds: bool,
    pub x_dagger: DenseVector,
}

impl RecoveryCertificate {
    pub fn holds(&self) -> bool {
        self.event1_holds && self.event2_holds
    }
}

struct SupportSystem {
    chol: Cholesky,
    a_s: crate::linalg::DenseMatrix,
    /// `W_S u_S`.
    wu: Vec<f64>,
}

fn support_system(inst: &ProblemInstance, w: &WeightVector) -> Result<SupportSystem> {
    if w.len() != inst.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for n = {}",
            w.len(),
            inst.n()
        )));
    }
    let s = inst.signal.support();
    let a_s = inst.a.column_submatrix(s)?;
    let chol = Cholesky::factor(&a_s.gram())?;
    let wu = s
        .iter()
        .zip(inst.signal.signs())
        .map(|(&i, u)| w.as_slice()[i] * u)
        .collect();
    Ok(SupportSystem { chol, a_s, wu })
}

/// `x†_S = x*_S + A_S⁺ Z − m h (A_SᵀA_S)⁻¹ W_S u_S`, zero off the support.
pub fn x_dagger(inst: &ProblemInstance, w: &WeightVector, h: f64) -> Result<DenseVector> {
    let sys = support_system(inst, w)?;
    x_dagger_from(inst, &sys, h)
}

fn x_dagger_from(inst: &ProblemInstance, sys: &SupportSystem, h: f64) -> Result<DenseVector> {
    let m = inst.m() as f64;
    // (A_SᵀA_S)⁻¹ (A_SᵀZ − m h W_S u_S)
    let rhs: Vec<f64> = sys
        .a_s
        .matvec_t(&inst.z)
        .iter()
        .zip(&sys.wu)
        .map(|(c, wu)| c - m * h * wu)
        .collect();
    let delta = sys.chol.solve(&rhs)?;
    let mut x = vec![0.0; inst.n()];
    for ((&i, v), d) in inst.signal.support().iter().zip(inst.signal.values()).zip(delta) {
        x[i] = v + d;
    }
    Ok(x)
}

/// Evaluate both recovery events using the true support, signs and noise.
pub fn check_recovery_events(inst: &ProblemInstance, w: &WeightVector, h: f64) -> Result<RecoveryCertificate> {
    let sys = support_system(inst, w)?;
    let m = inst.m() as f64;
    let xd = x_dagger_from(inst, &sys, h)?;

    // v = (I − A_S A_S⁺) Z + m h A_S (A_SᵀA_S)⁻¹ W_S u_S
    //   = Z − A_S (A_SᵀA_S)⁻¹ (A_SᵀZ − m h W_S u_S)
    //   = y − A_S x†_S
    let s = inst.signal.support();
    let delta: Vec<f64> = s
        .iter()
        .zip(inst.signal.values())
        .map(|(&i, v)| xd[i] - v)
        .collect();
    let fitted = sys.a_s.matvec(&delta);
    let v: Vec<f64> = inst.z.iter().zip(&fitted).map(|(z, f)| z - f).collect();

    let margin = inst
        .signal
        .complement()
        .into_iter()
        .map(|i| h * w.as_slice()[i] - inst.a.column_dot(i, &v).abs() / m)
        .fold(f64::INFINITY, f64::min);
    let event2 = s
        .iter()
        .zip(inst.signal.values())
        .all(|(&i, &v)| sign(xd[i]) == sign(v));
    Ok(RecoveryCertificate {
        event1_holds: margin > 0.0,
        event1_margin: margin,
        event2_holds: event2,
        x_dagger: xd,
    })
}

fn support_weights<'a>(w: &'a WeightVector, s: &'a [usize]) -> Result<impl Iterator<Item = f64> + 'a> {
    if let Some(&bad) = s.iter().find(|&&i| i >= w.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: w.len(),
        });
    }
    Ok(s.iter().map(|&i| w.as_slice()[i]))
}

/// `ξ`: mean squared weight over the support.
pub fn xi_of(w: &WeightVector, s: &[usize]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::EmptyInput("support"));
    }
    Ok(support_weights(w, s)?.map(|v| v * v).sum::<f64>() / s.len() as f64)
}

/// `η = ξ / (min_{i ∈ Sᶜ} wᵢ)²`.
pub fn eta_of(w: &WeightVector, s: &[usize]) -> Result<f64> {
    let xi = xi_of(w, s)?;
    let mut on = vec![false; w.len()];
    for &i in s {
        on[i] = true;
    }
    let min_off = (0..w.len())
        .filter(|&i| !on[i])
        .map(|i| w.as_slice()[i])
        .fold(f64::INFINITY, f64::min);
    if min_off.is_infinite() {
        return Err(Error::EmptyInput("support complement"));
    }
    Ok(xi / (min_off * min_off))
}

/// Sample size above which recovery is predicted:
/// `2 η k log(n − k) (1 + ε′) (1 + σ_Z² σ_A² / (h² k))`.
/// `h = +inf` gives the noise-free limit.
pub fn sample_threshold(n: usize, k: usize, eta: f64, h: f64, sigma_z: f64, sigma_a: f64, epsilon_prime: f64) -> f64 {
    let kf = k as f64;
    let noise = sigma_z * sigma_z * sigma_a * sigma_a / (h * h * kf);
    2.0 * eta * kf * ((n - k) as f64).ln() * (1.0 + epsilon_prime) * (1.0 + noise)
}

/// Noise-scaled multiplier `ζ = (1 + ε′)(1 + σ_Z²σ_A²/(h²k))` so that
/// `sample_threshold = 2 η ζ k log(n − k)`.
pub fn zeta(k: usize, h: f64, sigma_z: f64, sigma_a: f64, epsilon_prime: f64) -> f64 {
    (1.0 + epsilon_prime) * (1.0 + sigma_z * sigma_z * sigma_a * sigma_a / (h * h * k as f64))
}

/// Regularization `h = √(2 φₙ η σ_Z² σ_A² log(n − k) / m)`.
///
/// Rejects `σ_Z = 0`, which would leave the program unregularized; pass an
/// explicit `h` for noiseless problems instead.
pub fn select_h(m: usize, n: usize, k: usize, eta: f64, sigma_z: f64, sigma_a: f64, phi_n: f64) -> Result<f64> {
    if !(sigma_z > 0.0) {
        return Err(Error::InvalidConfig(
            "select_h needs sigma_z > 0; supply h explicitly for noiseless problems".into(),
        ));
    }
    if !(phi_n >= 2.0) {
        return Err(Error::InvalidConfig(format!("phi_n must be >= 2, got {phi_n}")));
    }
    if m == 0 || n <= k {
        return Err(Error::InvalidConfig(format!("need m >= 1 and n > k, got m = {m}, n = {n}, k = {k}")));
    }
    let log = ((n - k) as f64).ln();
    Ok((2.0 * phi_n * eta * sigma_z * sigma_z * sigma_a * sigma_a * log / m as f64).sqrt())
}

/// Sample size at which the threshold is met exactly when `h` follows
/// [`select_h`]: `2 η k log(n − k) / ((1 + ε′)⁻¹ − 1/φₙ)`.
/// Infinite when `φₙ ≤ 1 + ε′`.
pub fn threshold_with_selected_h(n: usize, k: usize, eta: f64, epsilon_prime: f64, phi_n: f64) -> f64 {
    let denom = 1.0 / (1.0 + epsilon_prime) - 1.0 / phi_n;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    2.0 * eta * k as f64 * ((n - k) as f64).ln() / denom
}

/// Magnitude gap `g(h) = c₃ h ‖W_S u_S‖∞ + 6 √(σ_Z² log k / (m σ_A²))`.
/// Signs are ±1 so `‖W_S u_S‖∞` is the largest support weight.
pub fn gap(h: f64, w: &WeightVector, s: &[usize], m: usize, sigma_z: f64, sigma_a: f64, c3: f64) -> Result<f64> {
    if s.is_empty() || m == 0 {
        return Err(Error::InvalidConfig("gap needs k >= 1 and m >= 1".into()));
    }
    let wmax = support_weights(w, s)?.fold(0.0, f64::max);
    Ok(gap_from_max_weight(h, wmax, s.len(), m, sigma_z, sigma_a, c3))
}

/// [`gap`] given `‖W_S u_S‖∞` directly.
pub fn gap_from_max_weight(h: f64, max_support_weight: f64, k: usize, m: usize, sigma_z: f64, sigma_a: f64, c3: f64) -> f64 {
    let noise = sigma_z * sigma_z * (k as f64).ln() / (m as f64 * sigma_a * sigma_a);
    c3 * h * max_support_weight + 6.0 * noise.sqrt()
}

/// Rescaled sample size `θ = m / (2 k log(n − k))`.
pub fn rescaled_theta(m: f64, n: usize, k: usize) -> f64 {
    m / (2.0 * k as f64 * ((n - k) as f64).ln())
}

/// Inverse of [`rescaled_theta`].
pub fn samples_for_theta(theta: f64, n: usize, k: usize) -> f64 {
    theta * 2.0 * k as f64 * ((n - k) as f64).ln()
}
