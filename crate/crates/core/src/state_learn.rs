//! Learning junta states from single-copy Pauli measurements, and learning
//! QAC⁰ Choi states through their concentration on a few qubits.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::qstate::{pauli_reconstruct, DensityMatrix, PauliSpectrum, PauliString};
use crate::rng::substream;
use crate::scalar::{lit, pow2, Scalar};
use crate::shadows::{estimate_lowdeg, BornSampler, PauliBasisString, ShadowSample, ShadowSet};

/// Copy-consuming access to an unknown state: each call measures one fresh
/// copy in the given Pauli basis.
pub trait StateAccess {
    fn n(&self) -> usize;
    /// Outcome mask (bit `q` set meaning `x_q = −1`).
    fn measure(&mut self, basis: &PauliBasisString, rng: &mut dyn RngCore) -> Result<u32>;
    fn copies_used(&self) -> u64;
}

/// A simulated unknown state with an optional copy budget.
#[derive(Clone, Debug)]
pub struct SimulatedState<T> {
    sampler: BornSampler<T>,
    used: u64,
    budget: Option<u64>,
}

impl<T: Scalar> SimulatedState<T> {
    pub fn new(rho: DensityMatrix<T>) -> Result<Self> {
        Ok(Self {
            sampler: BornSampler::with_all_tables(rho)?,
            used: 0,
            budget: None,
        })
    }

    pub fn with_budget(rho: DensityMatrix<T>, budget: u64) -> Result<Self> {
        let mut s = Self::new(rho)?;
        s.budget = Some(budget);
        Ok(s)
    }

    pub fn state(&self) -> &DensityMatrix<T> {
        self.sampler.state()
    }
}

impl<T: Scalar> StateAccess for SimulatedState<T> {
    fn n(&self) -> usize {
        self.sampler.n()
    }

    fn measure(&mut self, basis: &PauliBasisString, rng: &mut dyn RngCore) -> Result<u32> {
        if let Some(b) = self.budget {
            if self.used >= b {
                return Err(Error::AccessExhausted { used: self.used });
            }
        }
        self.used += 1;
        self.sampler.sample(basis, rng)
    }

    fn copies_used(&self) -> u64 {
        self.used
    }
}

/// Measures `t` copies in uniformly random bases; copy `s` uses stream `s` of
/// `seed`.
pub fn collect_from_access(access: &mut dyn StateAccess, t: u64, seed: u64) -> Result<ShadowSet> {
    let n = access.n();
    let mut samples = Vec::with_capacity(t as usize);
    for s in 0..t {
        let mut rng = substream(seed, s);
        let basis = PauliBasisString::random(n, &mut rng);
        let outcome = access.measure(&basis, &mut rng)?;
        samples.push(ShadowSample { basis, outcome });
    }
    ShadowSet::from_samples(n, samples, Some(seed))
}

/// A learned state: the thresholded spectrum, its (possibly non-PSD)
/// reconstruction and a physical projection of it.
#[derive(Clone, Debug)]
pub struct LearnedState<T> {
    pub spectrum: PauliSpectrum<T>,
    pub matrix: ComplexMatrix<T>,
    pub psd_projected: Option<DensityMatrix<T>>,
    pub copies_used: u64,
    /// Weight bound used for thresholding.
    pub k: usize,
}

/// Cutoff `ε/(2 · 2^n · √(4^k))` below which (inclusive) estimates are zeroed.
pub fn threshold_cutoff(n: usize, k: usize, eps: f64) -> f64 {
    eps / (2.0 * 2f64.powi(n as i32) * 2f64.powi(k as i32))
}

/// Keeps `P` iff `|supp P| ≤ k` and `|ρ̂′(P)| > ε/(2·2^n·√(4^k))`; the
/// identity coefficient is fixed at `2^{-n}`.
pub fn threshold_pauli<T: Scalar>(estimates: &PauliSpectrum<T>, k: usize, eps: f64) -> PauliSpectrum<T> {
    let n = estimates.n();
    let cutoff = lit::<T>(threshold_cutoff(n, k, eps));
    let id = PauliString::identity(n);
    let mut out = PauliSpectrum::new(n);
    out.insert(id, pow2::<T>(-(n as i32))).expect("same n");
    for (p, c) in estimates.iter() {
        if *p != id && p.weight() <= k && c.abs() > cutoff {
            out.insert(*p, c).expect("same n");
        }
    }
    out
}

/// Shadow samples used to learn a `k`-junta state:
/// `T = ⌈c · 12^k · ln((3n)^k/δ) / ε²⌉`.
pub fn junta_state_sample_count(n: usize, k: usize, eps: f64, delta: f64, c: f64) -> Result<u64> {
    if n == 0 || k > n || !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) || !(c > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "invalid junta-state parameters n={n} k={k} ε={eps} δ={delta} c={c}"
        )));
    }
    // the shadow bound at per-coefficient accuracy ε/(4·√(4^k)·2^n), up to
    // the constant
    let log_term = k as f64 * (3.0 * n as f64).ln() - delta.ln();
    let t = c * 12f64.powi(k as i32) * log_term / (eps * eps);
    Ok(t.ceil().max(1.0) as u64)
}

/// Closest density matrix in the sense of eigenvalue clipping: negative
/// eigenvalues are set to 0 and the trace renormalized to 1.
pub fn psd_project<T: Scalar>(m: &ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    let tol = T::state_tol() * m.frobenius_norm().max(T::one());
    if m.hermiticity_defect() > tol {
        return Err(Error::InvalidState("PSD projection needs a Hermitian matrix".into()));
    }
    let eig = hermitian_eigen(m)?;
    let total: T = eig.values.iter().map(|&v| v.max(T::zero())).sum();
    if !(total > T::zero()) {
        return Err(Error::InvalidState("no positive eigenvalue to keep".into()));
    }
    let mut out = eig.reconstruct_with(|v| v.max(T::zero()) / total).hermitian_part();
    for i in 0..out.dim() {
        out[(i, i)].im = T::zero();
    }
    DensityMatrix::new(out)
}

/// Parameters of the junta-state learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateLearnConfig {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
}

/// Measures `junta_state_sample_count` copies, estimates every coefficient of
/// weight at most `k`, thresholds and reconstructs.
pub fn learn_junta_state<T: Scalar>(access: &mut dyn StateAccess, cfg: &StateLearnConfig) -> Result<LearnedState<T>> {
    let n = access.n();
    if cfg.k > n {
        return Err(Error::InvalidConfig(format!("k = {} exceeds n = {n}", cfg.k)));
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::InvalidConfig("ε must be positive".into()));
    }
    let t = junta_state_sample_count(n, cfg.k, cfg.eps, cfg.delta, cfg.c)?;
    let before = access.copies_used();
    let set = collect_from_access(access, t, cfg.seed)?;
    let estimates = estimate_lowdeg::<T>(&set, cfg.k)?;
    let spectrum = threshold_pauli(&estimates, cfg.k, cfg.eps);
    let matrix = pauli_reconstruct(&spectrum)?;
    let psd_projected = psd_project(&matrix).ok();
    Ok(LearnedState {
        spectrum,
        matrix,
        psd_projected,
        copies_used: access.copies_used() - before,
        k: cfg.k,
    })
}

/// Concentration weight for a QAC⁰ Choi state:
/// `k = ⌈(log₂(s² · 2^{a+1} / ε))^d⌉`, clamped to `[0, n + 1]`. Returns the
/// clamped value and whether clamping to `n + 1` occurred.
pub fn qac0_concentration_k(n: usize, s: usize, d: usize, a: usize, eps: f64) -> (usize, bool) {
    if s == 0 {
        return (0, false);
    }
    let l = ((s * s) as f64 * 2f64.powi(a as i32 + 1) / eps).log2();
    if l <= 0.0 {
        return (0, false);
    }
    let k = l.powi(d as i32).ceil();
    if k > (n + 1) as f64 {
        (n + 1, true)
    } else {
        (k as usize, false)
    }
}

/// Parameters of the QAC⁰ Choi-state learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qac0LearnConfig {
    /// Number of circuit inputs; the Choi state has `n + 1` qubits.
    pub n: usize,
    /// Number of multi-qubit gates.
    pub s: usize,
    pub depth: usize,
    pub ancillas: usize,
    /// Target for `2^n ‖ρ − ρ″‖_F²`.
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
}

/// Result of learning a Choi state.
#[derive(Clone, Debug)]
pub struct Qac0Learned<T> {
    pub learned: LearnedState<T>,
    pub k: usize,
    pub clamped: bool,
}

/// Learns the `(n+1)`-qubit Choi state of a QAC⁰ circuit by junta-state
/// learning at weight `qac0_concentration_k`. The junta learner runs at
/// accuracy `√ε`, so its Frobenius target `2^n ‖ρ − ρ″‖_F² ≲ ε` matches.
pub fn learn_qac0_choi<T: Scalar>(access: &mut dyn StateAccess, cfg: &Qac0LearnConfig) -> Result<Qac0Learned<T>> {
    if access.n() != cfg.n + 1 {
        return Err(Error::DimensionMismatch {
            expected: cfg.n + 1,
            actual: access.n(),
        });
    }
    if !(cfg.eps > 0.0) {
        return Err(Error::InvalidConfig("ε must be positive".into()));
    }
    let (k, clamped) = qac0_concentration_k(cfg.n, cfg.s, cfg.depth, cfg.ancillas, cfg.eps);
    let learned = learn_junta_state(
        access,
        &StateLearnConfig {
            k,
            eps: cfg.eps.sqrt(),
            delta: cfg.delta,
            c: cfg.c,
            seed: cfg.seed,
        },
    )?;
    Ok(Qac0Learned { learned, k, clamped })
}

/// `2^n ‖ρ − σ‖_F²` for an `(n+1)`-qubit Choi state.
pub fn frobenius_merit<T: Scalar>(truth: &ComplexMatrix<T>, learned: &ComplexMatrix<T>, n: usize) -> Result<T> {
    let d = crate::qstate::frobenius_distance(truth, learned)?;
    Ok(pow2::<T>(n as i32) * d * d)
}
