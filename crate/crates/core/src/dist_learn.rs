//! Learning junta distributions from samples and sparse low-degree functions
//! from labeled examples, both by estimating and thresholding low-degree
//! Fourier coefficients.
//!
//! Coefficients of distributions are handled internally at the scale
//! `q̂(S) = 2^n p̂(S) = E_{x∼p}[χ_S(x)]`, so that `q̂(∅) = 1`; values handed back
//! through the API are in the usual `p̂(S) = 2^{-n} q̂(S)` convention.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypercube::{
    character_sign, mask_indices, project_bits, subsets_up_to, walsh_hadamard_in_place, CubeFunction,
    CubePoint, Distribution, FourierSpectrum,
};
use crate::scalar::{count, lit, pow2, to_f64, Scalar};

/// Histogram-based estimation (one transform over all `2^n` points) is used
/// up to this many variables; beyond it coefficients are summed directly.
const HISTOGRAM_MAX_BITS: usize = 20;

/// Source of i.i.d. points of an unknown distribution.
pub trait PointSampler {
    fn n(&self) -> usize;
    fn sample(&mut self) -> Result<CubePoint>;
}

/// Source of labeled examples `(x, f(x))` with `x` uniform.
pub trait ExampleOracle<T> {
    fn n(&self) -> usize;
    fn example(&mut self) -> Result<(CubePoint, T)>;
}

/// Draws from an explicit distribution.
#[derive(Clone, Debug)]
pub struct DistributionSampler {
    n: usize,
    table: WeightedIndex<f64>,
    rng: ChaCha8Rng,
}

impl DistributionSampler {
    pub fn new<T: Scalar>(p: &Distribution<T>, rng: ChaCha8Rng) -> Result<Self> {
        let table = WeightedIndex::new(p.values().iter().map(|&v| to_f64(v)))
            .map_err(|e| Error::Sampler(e.to_string()))?;
        Ok(Self {
            n: p.n(),
            table,
            rng,
        })
    }
}

impl PointSampler for DistributionSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn sample(&mut self) -> Result<CubePoint> {
        CubePoint::new(self.n, self.table.sample(&mut self.rng) as u32)
    }
}

/// Uniform examples labeled by an explicit function.
#[derive(Clone, Debug)]
pub struct FunctionOracle<T> {
    f: CubeFunction<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> FunctionOracle<T> {
    pub fn new(f: CubeFunction<T>, rng: ChaCha8Rng) -> Self {
        Self { f, rng }
    }
}

impl<T: Scalar> ExampleOracle<T> for FunctionOracle<T> {
    fn n(&self) -> usize {
        self.f.n()
    }

    fn example(&mut self) -> Result<(CubePoint, T)> {
        let n = self.f.n();
        let bits = if n == 0 { 0 } else { self.rng.gen_range(0..1u32 << n) };
        let x = CubePoint::new(n, bits)?;
        Ok((x, self.f.value(x)))
    }
}

/// Points drawn from an unknown distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    n: usize,
    points: Vec<u32>,
}

impl SampleSet {
    pub fn new(n: usize, points: Vec<CubePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("sample set is empty".into()));
        }
        if let Some(p) = points.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: p.n(),
            });
        }
        Ok(Self {
            n,
            points: points.into_iter().map(|p| p.bits()).collect(),
        })
    }

    /// Draws `t` points.
    pub fn draw(sampler: &mut dyn PointSampler, t: usize) -> Result<Self> {
        let n = sampler.n();
        let points = (0..t).map(|_| sampler.sample()).collect::<Result<Vec<_>>>()?;
        Self::new(n, points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    /// `Σ_s χ_S(x^s)` for every subset in `subsets`, exactly in integers.
    fn character_sums(&self, subsets: &[u32]) -> Vec<i64> {
        if self.n <= HISTOGRAM_MAX_BITS && (self.n << self.n) <= self.points.len() * subsets.len().max(1) * 4 {
            let mut hist = vec![0i64; 1 << self.n];
            for &x in &self.points {
                hist[x as usize] += 1;
            }
            integer_walsh_hadamard(&mut hist);
            subsets.iter().map(|&s| hist[s as usize]).collect()
        } else {
            subsets
                .iter()
                .map(|&s| self.points.iter().map(|&x| character_sign(s, x) as i64).sum())
                .collect()
        }
    }
}

fn integer_walsh_hadamard(data: &mut [i64]) {
    let mut h = 1;
    while h < data.len() {
        for block in data.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Parameters of the junta-distribution learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    /// Multiplier of the sample bound.
    pub c: f64,
}

impl LearnerConfig {
    pub fn new(k: usize, eps: f64, delta: f64) -> Self {
        Self {
            k,
            eps,
            delta,
            c: 8.0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidConfig(format!("ε = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("δ = {} must lie in (0, 1)", self.delta)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidConfig(format!("c = {} must be positive", self.c)));
        }
        if self.k > n {
            return Err(Error::InvalidConfig(format!("k = {} exceeds n = {n}", self.k)));
        }
        Ok(())
    }
}

/// `T = ⌈c · 2^k · max(k, 1) · ln(n/δ) / ε²⌉`.
pub fn sample_count_dist(n: usize, k: usize, eps: f64, delta: f64, c: f64) -> Result<u64> {
    LearnerConfig { k, eps, delta, c }.validate(n)?;
    let t = c * 2f64.powi(k as i32) * k.max(1) as f64 * (n as f64 / delta).ln() / (eps * eps);
    Ok(t.ceil().max(1.0) as u64)
}

/// `p̂′(S) = (1/(2^n T)) Σ_s χ_S(x^s)`.
pub fn empirical_coefficient<T: Scalar>(samples: &SampleSet, subset: u32) -> Result<T> {
    if subset >> samples.n() != 0 {
        return Err(Error::InvalidConfig("subset outside the sample dimension".into()));
    }
    let sum = samples.character_sums(&[subset])[0];
    Ok(lit::<T>(sum as f64) * pow2::<T>(-(samples.n() as i32)) / count::<T>(samples.len()))
}

/// Zeroes (drops) every coefficient with `|ĉ(S)| ≤ τ`.
pub fn threshold_spectrum<T: Scalar>(raw: &FourierSpectrum<T>, tau: T) -> FourierSpectrum<T> {
    let mut out = FourierSpectrum::new(raw.n()).expect("same n");
    for (s, c) in raw.iter() {
        if c.abs() > tau {
            out.insert(s, c).expect("same n");
        }
    }
    out
}

/// Result of a junta-distribution learning run.
#[derive(Clone, Debug)]
pub struct JuntaLearnOutcome<T> {
    pub distribution: Distribution<T>,
    /// Samples consumed.
    pub samples_used: u64,
    /// Variables the output depends on, ascending.
    pub junta_set: Vec<usize>,
    /// Coefficients that survived thresholding (unnormalized scale `p̂`), restricted
    /// to subsets of `junta_set`.
    pub surviving: FourierSpectrum<T>,
}

/// Draws `sample_count_dist` samples and learns from them.
pub fn learn_junta_distribution<T: Scalar>(
    sampler: &mut dyn PointSampler,
    cfg: &LearnerConfig,
) -> Result<JuntaLearnOutcome<T>> {
    let n = sampler.n();
    let t = sample_count_dist(n, cfg.k, cfg.eps, cfg.delta, cfg.c)?;
    let samples = SampleSet::draw(sampler, t as usize)?;
    learn_from_samples(&samples, cfg)
}

/// Estimates every `|S| ≤ k` coefficient from `samples`, thresholds and
/// rounds to a distribution.
pub fn learn_from_samples<T: Scalar>(samples: &SampleSet, cfg: &LearnerConfig) -> Result<JuntaLearnOutcome<T>> {
    let n = samples.n();
    cfg.validate(n)?;
    let subsets = subsets_up_to(n, cfg.k);
    let sums = samples.character_sums(&subsets);
    let t = count::<T>(samples.len());
    let q: Vec<(u32, T)> = subsets
        .iter()
        .zip(sums)
        .map(|(&s, v)| (s, lit::<T>(v as f64) / t))
        .collect();
    let mut out = learn_from_scaled(n, &q, cfg)?;
    out.samples_used = samples.len() as u64;
    Ok(out)
}

/// The learner with the estimates replaced by given coefficients `p̂(S)`
/// (usual scale). Subsets of size above `k` are ignored.
pub fn learn_from_coefficients<T: Scalar>(
    n: usize,
    coeffs: &FourierSpectrum<T>,
    cfg: &LearnerConfig,
) -> Result<JuntaLearnOutcome<T>> {
    cfg.validate(n)?;
    let scale = pow2::<T>(n as i32);
    let q: Vec<(u32, T)> = coeffs
        .iter()
        .filter(|(s, _)| s.count_ones() as usize <= cfg.k)
        .map(|(s, c)| (s, c * scale))
        .collect();
    learn_from_scaled(n, &q, cfg)
}

fn learn_from_scaled<T: Scalar>(n: usize, q: &[(u32, T)], cfg: &LearnerConfig) -> Result<JuntaLearnOutcome<T>> {
    // |p̂′(S)| ≤ ε/(2·2^n·√(2^k)) becomes |q̂(S)| ≤ ε/(2·√(2^k)).
    let tau = lit::<T>(cfg.eps / (2.0 * 2f64.powi(cfg.k as i32).sqrt()));
    let kept: Vec<(u32, T)> = q
        .iter()
        .copied()
        .filter(|&(s, c)| s != 0 && c.abs() > tau)
        .collect();

    let union = kept.iter().fold(0u32, |acc, &(s, _)| acc | s);
    let mut vars = mask_indices(union);
    if vars.len() > cfg.k {
        let mut score: Vec<(usize, T)> = vars
            .iter()
            .map(|&i| {
                let mass = kept
                    .iter()
                    .filter(|(s, _)| s >> i & 1 == 1)
                    .map(|&(_, c)| c * c)
                    .sum::<T>();
                (i, mass)
            })
            .collect();
        score.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
        vars = score.into_iter().take(cfg.k).map(|(i, _)| i).collect();
        vars.sort_unstable();
    }
    let vars_mask = vars.iter().fold(0u32, |acc, &i| acc | 1 << i);
    let kept: Vec<(u32, T)> = kept.into_iter().filter(|(s, _)| s & !vars_mask == 0).collect();

    // q(z) = 1 + Σ_{S ⊆ K} q̂(S) χ_S(z) on the 2^{|K|} restrictions.
    let w = vars.len();
    let mut local = vec![T::zero(); 1 << w];
    local[0] = T::one();
    for &(s, c) in &kept {
        local[project_bits(s, &vars) as usize] = c;
    }
    walsh_hadamard_in_place(&mut local);
    // Clip negatives and renormalize: the restricted probabilities are
    // max(q(z), 0) / Σ_z max(q(z), 0); the constant term keeps the sum ≥ 2^{|K|}.
    let clipped: Vec<T> = local.into_iter().map(|v| v.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    let restricted: Vec<T> = clipped.into_iter().map(|v| v / total).collect();
    let distribution = Distribution::junta(n, &vars, &restricted)?;

    let unscale = pow2::<T>(-(n as i32));
    let mut surviving = FourierSpectrum::new(n)?;
    surviving.insert(0, unscale)?;
    for (s, c) in kept {
        surviving.insert(s, c * unscale)?;
    }
    Ok(JuntaLearnOutcome {
        distribution,
        samples_used: 0,
        junta_set: vars,
        surviving,
    })
}

/// A random `k`-junta: `k` distinct variables and Dirichlet(1) probabilities
/// on their `2^k` patterns.
pub fn random_junta<T: Scalar, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<(Vec<usize>, Distribution<T>)> {
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let mut vars = rand::seq::index::sample(rng, n, k).into_vec();
    vars.sort_unstable();
    let raw: Vec<f64> = (0..1usize << k)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let restricted: Vec<T> = raw.iter().map(|v| lit(v / total)).collect();
    let p = Distribution::junta(n, &vars, &restricted)?;
    Ok((vars, p))
}

/// Parameters of the sparse low-degree learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparseConfig {
    /// Number of sets the spectrum concentrates on.
    pub m: usize,
    /// Degree bound.
    pub degree: usize,
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
}

/// `T = ⌈c · m · ln(n^D/δ) / ε⌉`.
pub fn sample_count_sparse(n: usize, cfg: &SparseConfig) -> Result<u64> {
    if cfg.m == 0 || cfg.degree > n || !(cfg.eps > 0.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) || !(cfg.c > 0.0) {
        return Err(Error::InvalidConfig(format!("invalid sparse learner parameters {cfg:?}")));
    }
    let log_term = cfg.degree as f64 * (n.max(1) as f64).ln() - cfg.delta.ln();
    Ok((cfg.c * cfg.m as f64 * log_term / cfg.eps).ceil().max(1.0) as u64)
}

/// Learns a bounded function whose spectrum is concentrated on `m` sets of
/// degree at most `D`: estimates every `|S| ≤ D` coefficient and keeps those
/// with magnitude above `√(ε/(4m))`.
pub fn learn_sparse_lowdeg_function<T: Scalar>(
    oracle: &mut dyn ExampleOracle<T>,
    cfg: &SparseConfig,
) -> Result<FourierSpectrum<T>> {
    let n = oracle.n();
    let t = sample_count_sparse(n, cfg)? as usize;
    let subsets = subsets_up_to(n, cfg.degree);
    let mut estimates = vec![T::zero(); subsets.len()];
    if n <= HISTOGRAM_MAX_BITS {
        let mut hist = vec![T::zero(); 1 << n];
        for _ in 0..t {
            let (x, y) = oracle.example()?;
            hist[x.bits() as usize] += y;
        }
        walsh_hadamard_in_place(&mut hist);
        for (e, &s) in estimates.iter_mut().zip(&subsets) {
            *e = hist[s as usize];
        }
    } else {
        for _ in 0..t {
            let (x, y) = oracle.example()?;
            for (e, &s) in estimates.iter_mut().zip(&subsets) {
                *e += y * lit::<T>(character_sign(s, x.bits()) as f64);
            }
        }
    }
    let tau = lit::<T>((cfg.eps / (4.0 * cfg.m as f64)).sqrt());
    let mut raw = FourierSpectrum::new(n)?;
    for (e, &s) in estimates.into_iter().zip(&subsets) {
        raw.insert(s, e / count::<T>(t))?;
    }
    Ok(threshold_spectrum(&raw, tau))
}
