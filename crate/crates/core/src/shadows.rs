//! Single-copy Pauli-basis measurements and the classical-shadows estimator
//! of low-weight Pauli coefficients.
//!
//! Eigenbasis conventions: `X` measures in `(|0⟩ ± |1⟩)/√2`, `Y` in
//! `(|0⟩ ± i|1⟩)/√2`, `Z` in `|0⟩, |1⟩`; the `+` vector is outcome `+1`.
//! Outcomes are stored as qubit-indexed masks, bit `q` set meaning `x_q = −1`.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_complex::Complex;
use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::{subsets_up_to, CubePoint};
use crate::linalg::ComplexMatrix;
use crate::qstate::{DensityMatrix, Pauli, PauliSpectrum, PauliString};
use crate::rng::substream;
use crate::scalar::{count, cplx, lit, pow2, to_f64, Scalar};

/// Largest qubit count for simulated Pauli-basis measurements.
pub const MAX_MEASURE_QUBITS: usize = 10;
/// Born tables for all `3^n` bases are precomputed when `3^n · 2^n` is at most
/// this many entries.
const TABLE_BUDGET: usize = 1 << 22;

/// A measurement basis: one of `X, Y, Z` on every qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliBasisString(PauliString);

impl PauliBasisString {
    pub fn new(codes: &[Pauli]) -> Result<Self> {
        if codes.contains(&Pauli::I) {
            return Err(Error::InvalidConfig(
                "measurement bases use only X, Y and Z".into(),
            ));
        }
        Ok(Self(PauliString::new(codes)?))
    }

    /// Basis number `idx ∈ [0, 3^n)`, base-3 digit `q` selecting X/Y/Z on qubit `q`.
    pub fn from_index(n: usize, mut idx: usize) -> Self {
        let mut codes = Vec::with_capacity(n);
        for _ in 0..n {
            codes.push([Pauli::X, Pauli::Y, Pauli::Z][idx % 3]);
            idx /= 3;
        }
        Self(PauliString::new(&codes).expect("n ≤ 32"))
    }

    /// Inverse of [`from_index`](Self::from_index).
    pub fn index(&self) -> usize {
        (0..self.n()).rev().fold(0, |acc, q| acc * 3 + self.digit(q))
    }

    /// A uniformly random basis.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut x = 0u32;
        let mut z = 0u32;
        for q in 0..n {
            match rng.gen_range(0..3u8) {
                0 => x |= 1 << q,
                1 => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                _ => z |= 1 << q,
            }
        }
        Self(PauliString::from_masks(n, x, z).expect("n ≤ 32"))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_pauli(&self) -> &PauliString {
        &self.0
    }

    /// The bases on `qubits`, in that order, as a smaller basis string.
    pub fn select(&self, qubits: &[usize]) -> Self {
        Self(self.0.select(qubits))
    }

    /// 0 for X, 1 for Y, 2 for Z.
    fn digit(&self, q: usize) -> usize {
        match self.0.code(q) {
            Pauli::X => 0,
            Pauli::Y => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for PauliBasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for PauliBasisString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let p: PauliString = s.parse()?;
        Self::new(&p.codes())
    }
}

/// One measured copy: the basis and the outcome mask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShadowSample {
    pub basis: PauliBasisString,
    pub outcome: u32,
}

impl ShadowSample {
    /// `x_q ∈ {−1, +1}`.
    pub fn sign(&self, q: usize) -> i32 {
        1 - 2 * ((self.outcome >> q) & 1) as i32
    }
}

/// A sequence of shadow samples on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSet {
    n: usize,
    seed: Option<u64>,
    samples: Vec<ShadowSample>,
}

impl ShadowSet {
    pub fn from_samples(n: usize, samples: Vec<ShadowSample>, seed: Option<u64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("a shadow set needs at least one sample".into()));
        }
        if let Some(s) = samples.iter().find(|s| s.basis.n() != n || s.outcome >> n != 0) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: s.basis.n(),
            });
        }
        Ok(Self { n, seed, samples })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ShadowSample] {
        &self.samples
    }

    /// Writes a header line `{"n", "T", "seed"}` followed by one
    /// `{"Q", "x"}` line per sample.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = ShadowHeader {
            n: self.n,
            t: self.samples.len(),
            seed: self.seed,
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for s in &self.samples {
            let line = ShadowLine {
                q: s.basis.to_string(),
                x: (0..self.n).map(|q| s.sign(q)).collect(),
            };
            serde_json::to_writer(&mut w, &line)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header: ShadowHeader = match lines.next() {
            Some(l) => serde_json::from_str(&l?)?,
            None => return Err(Error::Parse("empty shadow file".into())),
        };
        let mut samples = Vec::with_capacity(header.t);
        for l in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let line: ShadowLine = serde_json::from_str(&l)?;
            let basis: PauliBasisString = line.q.parse()?;
            if line.x.len() != header.n {
                return Err(Error::Parse("outcome length differs from n".into()));
            }
            let mut outcome = 0u32;
            for (q, &v) in line.x.iter().enumerate() {
                match v {
                    1 => {}
                    -1 => outcome |= 1 << q,
                    _ => return Err(Error::Parse(format!("outcome entry {v} is not ±1"))),
                }
            }
            samples.push(ShadowSample { basis, outcome });
        }
        if samples.len() != header.t {
            return Err(Error::Parse(format!(
                "header announces {} samples, found {}",
                header.t,
                samples.len()
            )));
        }
        Self::from_samples(header.n, samples, header.seed)
    }
}

#[derive(Serialize, Deserialize)]
struct ShadowHeader {
    n: usize,
    #[serde(rename = "T")]
    t: usize,
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ShadowLine {
    #[serde(rename = "Q")]
    q: String,
    x: Vec<i32>,
}

fn rotation<T: Scalar>(p: Pauli) -> Option<[Complex<T>; 4]> {
    let h = lit::<T>(0.5).sqrt();
    let z = T::zero();
    match p {
        Pauli::X => Some([cplx(h, z), cplx(h, z), cplx(h, z), cplx(-h, z)]),
        Pauli::Y => Some([cplx(h, z), cplx(z, -h), cplx(h, z), cplx(z, h)]),
        _ => None,
    }
}

/// Outcome probabilities `Pr[x] = Tr[ρ ⊗_q |Q_q(x_q)⟩⟨Q_q(x_q)|]`, indexed by
/// the qubit-indexed outcome mask.
pub fn born_probabilities<T: Scalar>(rho: &DensityMatrix<T>, basis: &PauliBasisString) -> Result<Vec<T>> {
    let n = rho.n();
    if basis.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: basis.n(),
        });
    }
    if n > MAX_MEASURE_QUBITS {
        return Err(Error::SizeCap {
            what: "measured qubits",
            value: n,
            max: MAX_MEASURE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut m: ComplexMatrix<T> = rho.matrix().clone();
    for q in 0..n {
        let Some(u) = rotation::<T>(basis.as_pauli().code(q)) else {
            continue;
        };
        let bit = 1usize << (n - 1 - q);
        // rows: M ← U M
        for i0 in (0..dim).filter(|i| i & bit == 0) {
            let i1 = i0 | bit;
            for j in 0..dim {
                let (a, b) = (m[(i0, j)], m[(i1, j)]);
                m[(i0, j)] = u[0] * a + u[1] * b;
                m[(i1, j)] = u[2] * a + u[3] * b;
            }
        }
        // columns: M ← M U†
        for j0 in (0..dim).filter(|j| j & bit == 0) {
            let j1 = j0 | bit;
            for i in 0..dim {
                let (a, b) = (m[(i, j0)], m[(i, j1)]);
                m[(i, j0)] = a * u[0].conj() + b * u[1].conj();
                m[(i, j1)] = a * u[2].conj() + b * u[3].conj();
            }
        }
    }
    let mut probs = vec![T::zero(); dim];
    for idx in 0..dim {
        let p = m[(idx, idx)].re;
        if p < -T::psd_tol() {
            return Err(Error::InvalidState(format!(
                "negative outcome probability {p}"
            )));
        }
        probs[crate::qstate::reverse_low_bits(idx as u32, n) as usize] = p.max(T::zero());
    }
    Ok(probs)
}

fn weighted<T: Scalar>(probs: &[T]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(probs.iter().map(|&p| to_f64(p)))
        .map_err(|e| Error::Sampler(format!("Born table: {e}")))
}

/// Samples Pauli-basis measurements of a fixed state, caching Born tables.
#[derive(Clone, Debug)]
pub struct BornSampler<T> {
    rho: DensityMatrix<T>,
    tables: HashMap<usize, WeightedIndex<f64>>,
    cached_entries: usize,
}

impl<T: Scalar> BornSampler<T> {
    pub fn new(rho: DensityMatrix<T>) -> Result<Self> {
        if rho.n() > MAX_MEASURE_QUBITS {
            return Err(Error::SizeCap {
                what: "measured qubits",
                value: rho.n(),
                max: MAX_MEASURE_QUBITS,
            });
        }
        Ok(Self {
            rho,
            tables: HashMap::new(),
            cached_entries: 0,
        })
    }

    /// Builds the tables of all `3^n` bases up front (in parallel) when they
    /// fit the cache budget.
    pub fn with_all_tables(rho: DensityMatrix<T>) -> Result<Self> {
        let mut s = Self::new(rho)?;
        let n = s.rho.n();
        let bases = 3usize.pow(n as u32);
        if bases << n <= TABLE_BUDGET {
            let rho = &s.rho;
            let tables: Vec<_> = (0..bases)
                .into_par_iter()
                .map(|i| born_probabilities(rho, &PauliBasisString::from_index(n, i)).and_then(|p| weighted(&p)))
                .collect::<Result<_>>()?;
            s.tables = tables.into_iter().enumerate().collect();
            s.cached_entries = bases << n;
        }
        Ok(s)
    }

    pub fn state(&self) -> &DensityMatrix<T> {
        &self.rho
    }

    pub fn n(&self) -> usize {
        self.rho.n()
    }

    /// One measurement outcome mask in `basis`.
    pub fn sample<R: Rng + ?Sized>(&mut self, basis: &PauliBasisString, rng: &mut R) -> Result<u32> {
        let key = basis.index();
        if let Some(t) = self.tables.get(&key) {
            return Ok(t.sample(rng) as u32);
        }
        let table = weighted(&born_probabilities(&self.rho, basis)?)?;
        let out = table.sample(rng) as u32;
        let dim = 1usize << self.rho.n();
        if self.cached_entries + dim <= TABLE_BUDGET {
            self.cached_entries += dim;
            self.tables.insert(key, table);
        }
        Ok(out)
    }

    /// Sampling without mutation: uses a cached table if present.
    fn sample_shared<R: Rng + ?Sized>(&self, basis: &PauliBasisString, rng: &mut R) -> Result<u32> {
        match self.tables.get(&basis.index()) {
            Some(t) => Ok(t.sample(rng) as u32),
            None => Ok(weighted(&born_probabilities(&self.rho, basis)?)?.sample(rng) as u32),
        }
    }
}

/// Measures one copy of `ρ` in `basis` by rotating into the computational
/// basis and sampling the diagonal.
pub fn measure_in_pauli_basis<T: Scalar, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    basis: &PauliBasisString,
    rng: &mut R,
) -> Result<CubePoint> {
    let probs = born_probabilities(rho, basis)?;
    let idx = weighted(&probs)?.sample(rng);
    CubePoint::new(rho.n(), idx as u32)
}

/// `T` shadow samples of `ρ`; sample `s` draws its basis and outcome from
/// stream `s` of `seed`, so the set does not depend on the thread count.
pub fn collect_shadows<T: Scalar>(rho: &DensityMatrix<T>, t: usize, seed: u64) -> Result<ShadowSet> {
    if t == 0 {
        return Err(Error::InvalidConfig("T must be at least 1".into()));
    }
    let n = rho.n();
    let sampler = BornSampler::with_all_tables(rho.clone())?;
    let samples = (0..t)
        .into_par_iter()
        .map(|s| {
            let mut rng = substream(seed, s as u64);
            let basis = PauliBasisString::random(n, &mut rng);
            let outcome = sampler.sample_shared(&basis, &mut rng)?;
            Ok(ShadowSample { basis, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    ShadowSet::from_samples(n, samples, Some(seed))
}

fn check_string(set: &ShadowSet, p: &PauliString) -> Result<()> {
    if p.n() != set.n() {
        return Err(Error::DimensionMismatch {
            expected: set.n(),
            actual: p.n(),
        });
    }
    Ok(())
}

/// `Σ_s Π_{i∈supp P} x_i^s δ[P_i = Q_i^s]` and the number of matching samples.
fn signed_matches(set: &ShadowSet, p: &PauliString) -> (i64, u64) {
    let supp = p.support_mask();
    set.samples
        .par_iter()
        .fold(
            || (0i64, 0u64),
            |(sum, hits), s| {
                let q = s.basis.as_pauli();
                if (q.x_mask() ^ p.x_mask()) & supp == 0 && (q.z_mask() ^ p.z_mask()) & supp == 0 {
                    let sign = if (s.outcome & supp).count_ones().is_multiple_of(2) { 1 } else { -1 };
                    (sum + sign, hits + 1)
                } else {
                    (sum, hits)
                }
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// `ρ̂′(P) = 3^{|supp P|}/(2^n T) Σ_s Π_{i∈supp P} x_i^s δ[P_i = Q_i^s]`.
///
/// The sum is accumulated in integers, so the estimate is independent of
/// summation order.
pub fn estimate_coefficient<T: Scalar>(set: &ShadowSet, p: &PauliString) -> Result<T> {
    check_string(set, p)?;
    let (sum, _) = signed_matches(set, p);
    Ok(scale_factor::<T>(set.n(), p.weight(), set.len()) * lit::<T>(sum as f64))
}

/// Mean of the squared single-sample estimator of `P`, whose expectation is
/// `3^{|supp P|}/4^n`.
pub fn single_sample_second_moment<T: Scalar>(set: &ShadowSet, p: &PauliString) -> Result<T> {
    check_string(set, p)?;
    let (_, hits) = signed_matches(set, p);
    let w = p.weight() as i32;
    let per_hit = lit::<T>(9f64.powi(w)) * pow2::<T>(-2 * set.n() as i32);
    Ok(per_hit * lit::<T>(hits as f64) / count::<T>(set.len()))
}

fn scale_factor<T: Scalar>(n: usize, w: usize, t: usize) -> T {
    lit::<T>(3f64.powi(w as i32)) * pow2::<T>(-(n as i32)) / count::<T>(t)
}

/// Estimates of every `P` with `|supp P| ≤ k`, in one pass over the samples.
pub fn estimate_lowdeg<T: Scalar>(set: &ShadowSet, k: usize) -> Result<PauliSpectrum<T>> {
    let n = set.n();
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let supports: Vec<Vec<usize>> = subsets_up_to(n, k)
        .into_iter()
        .map(crate::hypercube::mask_indices)
        .collect();
    let sizes: Vec<usize> = supports.iter().map(|s| 3usize.pow(s.len() as u32)).collect();
    let zero = || sizes.iter().map(|&m| vec![0i64; m]).collect::<Vec<_>>();
    let totals = set
        .samples
        .par_iter()
        .fold(zero, |mut acc, s| {
            let digits: Vec<usize> = (0..n).map(|q| s.basis.digit(q)).collect();
            for (j, supp) in supports.iter().enumerate() {
                let mut code = 0usize;
                let mut parity = 0u32;
                for &q in supp.iter().rev() {
                    code = code * 3 + digits[q];
                    parity ^= s.outcome >> q & 1;
                }
                acc[j][code] += if parity == 0 { 1 } else { -1 };
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
            }
            a
        });
    let mut spec = PauliSpectrum::new(n);
    for (supp, counts) in supports.iter().zip(totals) {
        let scale = scale_factor::<T>(n, supp.len(), set.len());
        for (code, c) in counts.into_iter().enumerate() {
            let mut codes = vec![Pauli::I; n];
            let mut rest = code;
            for &q in supp {
                codes[q] = [Pauli::X, Pauli::Y, Pauli::Z][rest % 3];
                rest /= 3;
            }
            spec.insert(PauliString::new(&codes)?, scale * lit::<T>(c as f64))?;
        }
    }
    Ok(spec)
}

/// `T = ⌈c · 3^k · ln((3n)^k/δ) / (4^n · η²)⌉` samples for per-coefficient
/// absolute accuracy `η` on all strings of weight at most `k`.
pub fn shadow_sample_count(n: usize, k: usize, eta: f64, delta: f64, c: f64) -> Result<u64> {
    if n == 0 || k > n || !(eta > 0.0) || !(delta > 0.0 && delta < 1.0) || !(c > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "invalid shadow sample parameters n={n} k={k} η={eta} δ={delta} c={c}"
        )));
    }
    let log_term = k as f64 * (3.0 * n as f64).ln() - delta.ln();
    let t = c * 3f64.powi(k as i32) * log_term / (4f64.powi(n as i32) * eta * eta);
    Ok(t.ceil().max(1.0) as u64)
}
