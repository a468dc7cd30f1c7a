//! Reproducible problem instances `y = A x* + Z` with Gaussian `A` and `Z`
//! and a k-sparse ground truth.
//!
//! Randomness comes from ChaCha20 keyed by a 64-bit seed. Normals use the
//! Box–Muller transform on 53-bit uniforms, consuming two uniforms per pair
//! of normals, so a given seed produces the same instance on every platform.

use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, norm_inf, DenseMatrix, DenseVector};

/// Recorded alongside generated data so streams can be traced to a generator.
pub const RNG_ALGORITHM: &str = "chacha20/box-muller v1";

/// Deterministic random stream.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller; the second value of each pair is cached.
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - U lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    pub fn normal(&mut self, std_dev: f64) -> f64 {
        std_dev * self.standard_normal()
    }

    /// Uniform integer in `0..bound` (Lemire's widening multiply with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let wide = u128::from(self.next_u64()) * u128::from(bound);
            if (wide as u64) >= threshold {
                return (wide >> 64) as u64;
            }
        }
    }

    pub fn rademacher(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `k` distinct indices from `0..n`, uniformly, returned sorted.
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool.sort_unstable();
        pool
    }
}

/// Deterministic random stream for `seed`.
pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::new(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `(master, path...)`, independent of evaluation order.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// `⌈0.4 √n⌉`, computed exactly as the least `k` with `25 k² ≥ 4 n`.
pub fn sparsity_rule(n: usize) -> usize {
    let target = 4 * n as u128;
    let mut k = ((0.4 * (n as f64).sqrt()).floor() as u128).saturating_sub(1);
    while 25 * k * k < target {
        k += 1;
    }
    k as usize
}

/// Ground-truth k-sparse signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} support indices but {} values",
                support.len(),
                values.len()
            )));
        }
        if support.len() > n {
            return Err(Error::InvalidConfig("support larger than n".into()));
        }
        if let Some(&bad) = support.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedIndices);
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "support values must be finite and nonzero".into(),
            ));
        }
        Ok(Self { n, support, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `u_S = sign(x*_S)`, each entry ±1.
    pub fn signs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.signum()).collect()
    }

    /// Indices outside the support, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let mut on = vec![false; self.n];
        for &i in &self.support {
            on[i] = true;
        }
        (0..self.n).filter(|&i| !on[i]).collect()
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

/// How nonzero entries of the ground truth are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeRule {
    /// Independent ±1 with equal probability.
    Rademacher,
    /// Random sign times a fixed magnitude.
    Fixed(f64),
    /// Values used as given, in support order.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub sigma_a: f64,
    pub sigma_z: f64,
    pub magnitude: MagnitudeRule,
    pub seed: u64,
}

impl EnsembleConfig {
    /// ±1 signal, unit-variance matrix.
    pub fn new(n: usize, k: usize, m: usize, sigma_z: f64, seed: u64) -> Self {
        Self {
            n,
            k,
            m,
            sigma_a: 1.0,
            sigma_z,
            magnitude: MagnitudeRule::Rademacher,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0 < self.k && self.k < self.n) {
            return bad(format!("need 0 < k < n, got k = {}, n = {}", self.k, self.n));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if !(self.sigma_a > 0.0 && self.sigma_a.is_finite()) {
            return bad(format!("sigma_a must be positive, got {}", self.sigma_a));
        }
        if !(self.sigma_z >= 0.0 && self.sigma_z.is_finite()) {
            return bad(format!("sigma_z must be non-negative, got {}", self.sigma_z));
        }
        match &self.magnitude {
            MagnitudeRule::Rademacher => {}
            MagnitudeRule::Fixed(mu) if *mu > 0.0 && mu.is_finite() => {}
            MagnitudeRule::Fixed(mu) => return bad(format!("fixed magnitude must be positive, got {mu}")),
            MagnitudeRule::Custom(v) if v.len() != self.k => {
                return bad(format!("custom magnitudes: {} values for k = {}", v.len(), self.k))
            }
            MagnitudeRule::Custom(v) if v.iter().any(|x| *x == 0.0 || !x.is_finite()) => {
                return bad("custom magnitudes must be finite and nonzero".into())
            }
            MagnitudeRule::Custom(_) => {}
        }
        Ok(())
    }
}

/// A sampled (or loaded) measurement problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub z: DenseVector,
    pub y: DenseVector,
    pub signal: SparseSignal,
    pub config: EnsembleConfig,
}

impl ProblemInstance {
    /// Assemble `y = A x* + Z` from given parts.
    pub fn from_parts(a: DenseMatrix, signal: SparseSignal, z: DenseVector, config: EnsembleConfig) -> Result<Self> {
        if a.cols() != signal.n() || z.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, signal has n = {}, noise has length {}",
                a.rows(),
                a.cols(),
                signal.n(),
                z.len()
            )));
        }
        let ax = a.matvec(&signal.to_dense());
        let y = ax.iter().zip(&z).map(|(p, q)| p + q).collect();
        Ok(Self {
            a,
            z,
            y,
            signal,
            config,
        })
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn k(&self) -> usize {
        self.signal.k()
    }

    /// `‖y − A x* − Z‖∞`.
    pub fn reconstruction_error(&self) -> f64 {
        let ax = self.a.matvec(&self.signal.to_dense());
        let pred: Vec<f64> = ax.iter().zip(&self.z).map(|(p, q)| p + q).collect();
        max_abs_diff(&pred, &self.y)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance().map_err(serde::de::Error::custom)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Draw an instance: support, then signal values, then `A` row by row, then `Z`.
pub fn sample_instance(cfg: &EnsembleConfig) -> Result<ProblemInstance> {
    cfg.validate()?;
    let mut rng = SeededRng::new(cfg.seed);
    let support = rng.sample_indices(cfg.n, cfg.k);
    let values = match &cfg.magnitude {
        MagnitudeRule::Rademacher => (0..cfg.k).map(|_| rng.rademacher()).collect(),
        MagnitudeRule::Fixed(mu) => (0..cfg.k).map(|_| mu * rng.rademacher()).collect(),
        MagnitudeRule::Custom(v) => v.clone(),
    };
    let signal = SparseSignal::new(cfg.n, support, values)?;
    let data = (0..cfg.m * cfg.n).map(|_| rng.normal(cfg.sigma_a)).collect();
    let a = DenseMatrix::new(cfg.m, cfg.n, data)?;
    let z = if cfg.sigma_z == 0.0 {
        vec![0.0; cfg.m]
    } else {
        (0..cfg.m).map(|_| rng.normal(cfg.sigma_z)).collect()
    };
    ProblemInstance::from_parts(a, signal, z, cfg.clone())
}

/// On-disk JSON layout of a problem instance.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    k: usize,
    m: usize,
    sigma_a: f64,
    sigma_z: f64,
    seed: u64,
    support: Vec<usize>,
    values: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<f64>,
    z: Vec<f64>,
    y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rng: Option<String>,
}

impl From<&ProblemInstance> for InstanceFile {
    fn from(p: &ProblemInstance) -> Self {
        Self {
            n: p.n(),
            k: p.k(),
            m: p.m(),
            sigma_a: p.config.sigma_a,
            sigma_z: p.config.sigma_z,
            seed: p.config.seed,
            support: p.signal.support().to_vec(),
            values: p.signal.values().to_vec(),
            a: p.a.as_slice().to_vec(),
            z: p.z.clone(),
            y: p.y.clone(),
            rng: Some(RNG_ALGORITHM.to_string()),
        }
    }
}

impl InstanceFile {
    fn into_instance(self) -> Result<ProblemInstance> {
        if self.support.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "k = {} but {} support indices",
                self.k,
                self.support.len()
            )));
        }
        let a = DenseMatrix::new(self.m, self.n, self.a)?;
        let signal = SparseSignal::new(self.n, self.support, self.values.clone())?;
        if self.z.len() != self.m || self.y.len() != self.m {
            return Err(Error::DimensionMismatch("z and y must have length m".into()));
        }
        let config = EnsembleConfig {
            n: self.n,
            k: self.k,
            m: self.m,
            sigma_a: self.sigma_a,
            sigma_z: self.sigma_z,
            magnitude: MagnitudeRule::Custom(self.values),
            seed: self.seed,
        };
        let mut inst = ProblemInstance::from_parts(a, signal, self.z, config)?;
        let drift = max_abs_diff(&inst.y, &self.y);
        if drift > 1e-9 * (1.0 + norm_inf(&self.y)) {
            return Err(Error::InvalidConfig(format!(
                "y differs from A x* + z by {drift:e}"
            )));
        }
        inst.y = self.y;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = seeded_rng(1);
        let mut d = seeded_rng(2);
        let same = (0..16).filter(|_| c.next_u64() == d.next_u64()).count();
        assert!(same < 16);
    }

    #[test]
    fn normal_mean_is_near_zero() {
        let mut rng = seeded_rng(7);
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.standard_normal();
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((sq / n as f64 - 1.0).abs() < 0.01);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = seeded_rng(3);
        let mut hits = [0u32; 7];
        for _ in 0..70_000 {
            hits[rng.below(7) as usize] += 1;
        }
        assert!(hits.iter().all(|&h| (9_000..11_000).contains(&h)));
    }

    #[test]
    fn sparsity_rule_values() {
        assert_eq!(sparsity_rule(512), 10);
        assert_eq!(sparsity_rule(1024), 13);
        assert_eq!(sparsity_rule(2048), 19);
        assert_eq!(sparsity_rule(128), 5);
        assert_eq!(sparsity_rule(256), 7);
        // 0.4 * sqrt(25) = 2 exactly.
        assert_eq!(sparsity_rule(25), 2);
        assert_eq!(sparsity_rule(1), 1);
    }

    #[test]
    fn noiseless_instance() {
        let cfg = EnsembleConfig::new(8, 2, 6, 0.0, 11);
        let inst = sample_instance(&cfg).unwrap();
        assert!(inst.z.iter().all(|&v| v == 0.0));
        assert_eq!(inst.y, inst.a.matvec(&inst.signal.to_dense()));
        assert_eq!(inst, sample_instance(&cfg).unwrap());
    }

    #[test]
    fn n512_support() {
        let k = sparsity_rule(512);
        let inst = sample_instance(&EnsembleConfig::new(512, k, 40, 0.5, 9)).unwrap();
        assert_eq!(inst.signal.support().len(), 10);
        assert!(inst.signal.values().iter().all(|v| v.abs() == 1.0));
        assert!(inst.reconstruction_error() <= 1e-12);
    }

    #[test]
    fn magnitude_rules() {
        let mut cfg = EnsembleConfig::new(10, 3, 5, 0.1, 1);
        cfg.magnitude = MagnitudeRule::Fixed(2.5);
        let inst = sample_instance(&cfg).unwrap();
        assert!(inst.signal.values().iter().all(|v| v.abs() == 2.5));
        cfg.magnitude = MagnitudeRule::Custom(vec![1.0, -2.0, 3.0]);
        let inst = sample_instance(&cfg).unwrap();
        assert_eq!(inst.signal.values(), &[1.0, -2.0, 3.0]);
        cfg.magnitude = MagnitudeRule::Custom(vec![1.0, 0.0, 3.0]);
        assert!(sample_instance(&cfg).is_err());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            EnsembleConfig::new(8, 0, 4, 0.0, 0),
            EnsembleConfig::new(8, 8, 4, 0.0, 0),
            EnsembleConfig::new(8, 2, 0, 0.0, 0),
            EnsembleConfig::new(8, 2, 4, -1.0, 0),
            EnsembleConfig {
                sigma_a: 0.0,
                ..EnsembleConfig::new(8, 2, 4, 0.0, 0)
            },
        ] {
            assert!(matches!(sample_instance(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn json_round_trip() {
        let inst = sample_instance(&EnsembleConfig::new(6, 2, 4, 0.3, 5)).unwrap();
        let text = inst.to_json();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["n", "k", "m", "sigma_a", "sigma_z", "seed", "support", "values", "A", "z", "y"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back = ProblemInstance::from_json(&text).unwrap();
        assert_eq!(back.a, inst.a);
        assert_eq!(back.y, inst.y);
        assert_eq!(back.signal, inst.signal);

        let mut tampered = v.clone();
        tampered["y"][0] = serde_json::json!(1e6);
        assert!(ProblemInstance::from_json(&tampered.to_string()).is_err());
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        let a = derive_seed(1, &[512, 100, 0]);
        let b = derive_seed(1, &[512, 100, 1]);
        let c = derive_seed(2, &[512, 100, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, &[512, 100, 0]));
    }
}
