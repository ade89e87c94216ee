//! Testing whether an unknown state is close to a junta state: local
//! tomography on every candidate subset followed by certification of the
//! resulting junta hypothesis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{combinations, project_bits};
use crate::qstate::{
    embed_junta, pauli_expand_dense, pauli_reconstruct, trace_distance, DensityMatrix, JuntaStateDescriptor,
    PauliString,
};
use crate::rng::derive_seed;
use crate::scalar::{to_f64, Scalar};
use crate::shadows::{estimate_lowdeg, shadow_sample_count, ShadowSample, ShadowSet};
use crate::state_learn::{collect_from_access, psd_project, StateAccess};

/// Largest register the Frobenius certifier accepts.
pub const MAX_FROBENIUS_QUBITS: usize = 6;
/// Largest subset handled by local tomography.
pub const MAX_TOMOGRAPHY_QUBITS: usize = 4;

/// Outcome of one certification call.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certification {
    pub close: bool,
    /// The quantity compared against the decision threshold.
    pub statistic: f64,
    pub copies_used: u64,
}

/// Decides whether the unknown state is within `close` or beyond `far` of a
/// known reference (trace distance).
pub trait Certifier<T: Scalar> {
    fn name(&self) -> &'static str;

    /// Copies a call with these parameters consumes.
    fn copies_required(&self, n: usize, close: f64, far: f64, delta: f64) -> Result<u64>;

    fn certify(
        &self,
        access: &mut dyn StateAccess,
        reference: &DensityMatrix<T>,
        close: f64,
        far: f64,
        delta: f64,
        seed: u64,
    ) -> Result<Certification>;
}

fn check_radii(close: f64, far: f64) -> Result<()> {
    if !(close >= 0.0 && far > close) {
        return Err(Error::InvalidConfig(format!(
            "certification radii need 0 ≤ close < far, got ({close}, {far})"
        )));
    }
    Ok(())
}

/// Computes the exact trace distance to the hidden state and compares it to
/// the midpoint of the two radii. Uses no copies; for validating the tester.
#[derive(Clone, Debug)]
pub struct OracleCertifier<T> {
    truth: DensityMatrix<T>,
}

impl<T: Scalar> OracleCertifier<T> {
    pub fn new(truth: DensityMatrix<T>) -> Self {
        Self { truth }
    }
}

impl<T: Scalar> Certifier<T> for OracleCertifier<T> {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn copies_required(&self, _n: usize, close: f64, far: f64, _delta: f64) -> Result<u64> {
        check_radii(close, far)?;
        Ok(0)
    }

    fn certify(
        &self,
        _access: &mut dyn StateAccess,
        reference: &DensityMatrix<T>,
        close: f64,
        far: f64,
        _delta: f64,
        _seed: u64,
    ) -> Result<Certification> {
        check_radii(close, far)?;
        let d = to_f64(trace_distance(&self.truth, reference)?);
        Ok(Certification {
            close: d <= 0.5 * (close + far),
            statistic: d,
            copies_used: 0,
        })
    }
}

/// Certifies through the Frobenius distance: two independent halves of
/// shadow samples give an unbiased estimate `D̂` of `Σ_P (ρ̂(P) − σ̂(P))²`,
/// and `4^n D̂` estimates the square of the bound
/// `Tr|ρ − σ| ≤ 2^{n/2} ‖ρ − σ‖_F`. The state is declared far iff that
/// estimate exceeds the squared midpoint of the radii.
#[derive(Clone, Copy, Debug)]
pub struct FrobeniusCertifier {
    pub c: f64,
}

impl Default for FrobeniusCertifier {
    fn default() -> Self {
        Self { c: 8.0 }
    }
}

impl FrobeniusCertifier {
    /// Samples per half: `⌈c · 28^{n/2} · ln(2/δ) / (m² − close²)⌉` with `m`
    /// the midpoint; `28^{n/2}` bounds the standard deviation of `4^n D̂`
    /// per inverse sample.
    pub fn half_samples(&self, n: usize, close: f64, far: f64, delta: f64) -> Result<u64> {
        check_radii(close, far)?;
        if n > MAX_FROBENIUS_QUBITS {
            return Err(Error::Unsupported(format!(
                "Frobenius certification supports at most {MAX_FROBENIUS_QUBITS} qubits; use the oracle certifier"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) || !(self.c > 0.0) {
            return Err(Error::InvalidConfig(format!("δ = {delta}, c = {}", self.c)));
        }
        let mid = 0.5 * (close + far);
        let margin = mid * mid - close * close;
        let t = self.c * 28f64.powf(n as f64 / 2.0) * (2.0 / delta).ln() / margin;
        Ok(t.ceil().max(1.0) as u64)
    }
}

impl<T: Scalar> Certifier<T> for FrobeniusCertifier {
    fn name(&self) -> &'static str {
        "frobenius"
    }

    fn copies_required(&self, n: usize, close: f64, far: f64, delta: f64) -> Result<u64> {
        Ok(2 * self.half_samples(n, close, far, delta)?)
    }

    fn certify(
        &self,
        access: &mut dyn StateAccess,
        reference: &DensityMatrix<T>,
        close: f64,
        far: f64,
        delta: f64,
        seed: u64,
    ) -> Result<Certification> {
        let n = access.n();
        if reference.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: reference.n(),
            });
        }
        let half = self.half_samples(n, close, far, delta)?;
        let before = access.copies_used();
        let a = collect_from_access(access, half, derive_seed(seed, &[0]))?;
        let b = collect_from_access(access, half, derive_seed(seed, &[1]))?;
        let ea = estimate_lowdeg::<f64>(&a, n)?;
        let eb = estimate_lowdeg::<f64>(&b, n)?;
        let dense = pauli_expand_dense(reference.matrix())?;
        let dim = 1usize << n;
        let mut d_hat = 0.0;
        for (idx, r) in dense.iter().enumerate() {
            let p = PauliString::from_basis_masks(n, (idx / dim) as u32, (idx % dim) as u32);
            let r = to_f64(r.re);
            d_hat += (ea.get(&p) - r) * (eb.get(&p) - r);
        }
        let statistic = 4f64.powi(n as i32) * d_hat;
        let mid = 0.5 * (close + far);
        Ok(Certification {
            close: statistic <= mid * mid,
            statistic,
            copies_used: access.copies_used() - before,
        })
    }
}

/// Shadow samples used by [`local_tomography`] on `w` qubits: the shadow
/// bound at per-coefficient accuracy `ε / 2^{2.5 w}` on the reduced register.
pub fn tomography_samples(w: usize, eps: f64, delta: f64, c: f64) -> Result<u64> {
    if w == 0 {
        return Ok(0);
    }
    if w > MAX_TOMOGRAPHY_QUBITS {
        return Err(Error::SizeCap {
            what: "tomography qubits",
            value: w,
            max: MAX_TOMOGRAPHY_QUBITS,
        });
    }
    shadow_sample_count(w, w, eps / 2f64.powf(2.5 * w as f64), delta, c)
}

/// Restricts shadow samples of the full register to the qubits `subset`
/// (qubit `j` of the result is `subset[j]`).
pub fn restrict_shadows(set: &ShadowSet, subset: &[usize]) -> Result<ShadowSet> {
    let samples = set
        .samples()
        .iter()
        .map(|s| ShadowSample {
            basis: s.basis.select(subset),
            outcome: project_bits(s.outcome, subset),
        })
        .collect();
    ShadowSet::from_samples(subset.len(), samples, set.seed())
}

/// Estimates the reduced state on `subset` from Pauli-basis measurements of
/// whole copies and projects the estimate onto density matrices.
pub fn local_tomography<T: Scalar>(
    access: &mut dyn StateAccess,
    subset: &[usize],
    eps: f64,
    delta: f64,
    c: f64,
    seed: u64,
) -> Result<(DensityMatrix<T>, u64)> {
    let w = subset.len();
    if w == 0 {
        return Ok((DensityMatrix::scalar_one(), 0));
    }
    if subset.iter().any(|&q| q >= access.n()) {
        return Err(Error::InvalidConfig("tomography subset outside the register".into()));
    }
    let t = tomography_samples(w, eps, delta, c)?;
    let before = access.copies_used();
    let full = collect_from_access(access, t, seed)?;
    let local = restrict_shadows(&full, subset)?;
    let spec = estimate_lowdeg::<T>(&local, w)?;
    let state = psd_project(&pauli_reconstruct(&spec)?)?;
    Ok((state, access.copies_used() - before))
}

/// Verdict of the junta tester.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    JuntaClose,
    JuntaFar,
}

/// What happened on one candidate subset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetRecord {
    pub subset: Vec<usize>,
    pub tomography_copies: u64,
    pub certification: Option<Certification>,
    pub error: Option<String>,
}

impl SubsetRecord {
    fn certified_close(&self) -> bool {
        self.certification.as_ref().is_some_and(|c| c.close)
    }
}

/// Result of [`test_junta`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestVerdict {
    pub decision: Decision,
    /// First subset certified close, or the one with the smallest statistic.
    pub best_subset: Option<Vec<usize>>,
    pub copies_used: u64,
    pub transcript: Vec<SubsetRecord>,
}

/// Parameters of the junta tester.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JuntaTestConfig {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    /// Constant for the tomography sample bound.
    pub c: f64,
    pub seed: u64,
}

/// Largest register the tester accepts.
pub const MAX_TEST_QUBITS: usize = 6;
/// Largest junta size the tester accepts.
pub const MAX_TEST_K: usize = 2;

fn validate_test(n: usize, cfg: &JuntaTestConfig) -> Result<()> {
    if n > MAX_TEST_QUBITS {
        return Err(Error::SizeCap {
            what: "tester qubits",
            value: n,
            max: MAX_TEST_QUBITS,
        });
    }
    if cfg.k > MAX_TEST_K && cfg.k < n {
        return Err(Error::SizeCap {
            what: "tester junta size",
            value: cfg.k,
            max: MAX_TEST_K,
        });
    }
    if !(cfg.eps > 0.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::InvalidConfig(format!("ε = {}, δ = {}", cfg.eps, cfg.delta)));
    }
    Ok(())
}

fn per_subset_delta(n: usize, k: usize, delta: f64) -> f64 {
    delta / (n as f64).powi(k as i32).max(1.0)
}

/// Total copies [`test_junta`] consumes when every subroutine succeeds.
pub fn test_junta_budget<T: Scalar>(n: usize, cfg: &JuntaTestConfig, certifier: &dyn Certifier<T>) -> Result<u64> {
    validate_test(n, cfg)?;
    if cfg.k >= n {
        return Ok(0);
    }
    let d = per_subset_delta(n, cfg.k, cfg.delta);
    let per = tomography_samples(cfg.k, cfg.eps, d, cfg.c)?
        + certifier.copies_required(n, 3.0 * cfg.eps, 6.0 * cfg.eps, d)?;
    Ok(per * combinations(n, cfg.k).len() as u64)
}

/// For every `|K| = k`: tomography of `ρ_K` to accuracy `ε`, then
/// certification of `ρ̃_K ⊗ I/2^{n−k}` at radii `(3ε, 6ε)`, each with failure
/// budget `δ/n^k`. Accepts iff some subset is certified close. Every state is
/// an `n`-junta, so `k ≥ n` accepts without measuring.
pub fn test_junta<T: Scalar>(
    access: &mut dyn StateAccess,
    cfg: &JuntaTestConfig,
    certifier: &dyn Certifier<T>,
) -> Result<TestVerdict> {
    let n = access.n();
    validate_test(n, cfg)?;
    if cfg.k >= n {
        return Ok(TestVerdict {
            decision: Decision::JuntaClose,
            best_subset: Some((0..n).collect()),
            copies_used: 0,
            transcript: Vec::new(),
        });
    }
    let d = per_subset_delta(n, cfg.k, cfg.delta);
    let before = access.copies_used();
    let mut transcript = Vec::new();
    for (i, subset) in combinations(n, cfg.k).into_iter().enumerate() {
        let tomo_seed = derive_seed(cfg.seed, &[i as u64, 0]);
        let cert_seed = derive_seed(cfg.seed, &[i as u64, 1]);
        let mut record = SubsetRecord {
            subset: subset.clone(),
            tomography_copies: 0,
            certification: None,
            error: None,
        };
        let outcome = local_tomography::<T>(access, &subset, cfg.eps, d, cfg.c, tomo_seed).and_then(|(rk, used)| {
            record.tomography_copies = used;
            let hypothesis = embed_junta(&JuntaStateDescriptor {
                n,
                qubits: subset.clone(),
                state: rk,
            })?;
            certifier.certify(access, &hypothesis, 3.0 * cfg.eps, 6.0 * cfg.eps, d, cert_seed)
        });
        match outcome {
            Ok(c) => record.certification = Some(c),
            Err(e @ Error::AccessExhausted { .. }) => return Err(e),
            Err(e) => record.error = Some(e.to_string()),
        }
        transcript.push(record);
    }
    let accepted = transcript.iter().find(|r| r.certified_close());
    let best_subset = match accepted {
        Some(r) => Some(r.subset.clone()),
        None => transcript
            .iter()
            .filter_map(|r| r.certification.as_ref().map(|c| (r, c.statistic)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(r, _)| r.subset.clone()),
    };
    Ok(TestVerdict {
        decision: if accepted.is_some() {
            Decision::JuntaClose
        } else {
            Decision::JuntaFar
        },
        best_subset,
        copies_used: access.copies_used() - before,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_pure, random_state, rho_eps};
    use crate::state_learn::SimulatedState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_subset_tomography_is_trivial() {
        let rho = DensityMatrix::<f64>::maximally_mixed(2).unwrap();
        let mut access = SimulatedState::new(rho).unwrap();
        let (s, used) = local_tomography::<f64>(&mut access, &[], 0.1, 0.1, 8.0, 1).unwrap();
        assert_eq!(used, 0);
        assert_eq!(s.dim(), 1);
    }

    #[test]
    fn tomography_of_a_pure_qubit() {
        let zero = DensityMatrix::<f64>::basis_state(1, 0).unwrap();
        let rho = zero.tensor(&DensityMatrix::maximally_mixed(2).unwrap()).unwrap();
        let mut access = SimulatedState::new(rho).unwrap();
        let (est, used) = local_tomography::<f64>(&mut access, &[0], 0.1, 0.1, 8.0, 2).unwrap();
        assert_eq!(used, tomography_samples(1, 0.1, 0.1, 8.0).unwrap());
        assert!(trace_distance(&est, &zero).unwrap() <= 0.1);
    }

    #[test]
    fn restriction_selects_qubits() {
        let rho = DensityMatrix::<f64>::maximally_mixed(3).unwrap();
        let set = crate::shadows::collect_shadows(&rho, 10, 4).unwrap();
        let r = restrict_shadows(&set, &[2, 0]).unwrap();
        for (a, b) in set.samples().iter().zip(r.samples()) {
            assert_eq!(b.basis.as_pauli().code(0), a.basis.as_pauli().code(2));
            assert_eq!(b.basis.as_pauli().code(1), a.basis.as_pauli().code(0));
            assert_eq!(b.sign(0), a.sign(2));
            assert_eq!(b.sign(1), a.sign(0));
        }
    }

    #[test]
    fn frobenius_certifier_basic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_state::<f64, _>(2, 2, &mut rng).unwrap();
        let cert = FrobeniusCertifier::default();
        let mut access = SimulatedState::new(rho.clone()).unwrap();
        let same = cert.certify(&mut access, &rho, 0.3, 0.6, 0.1, 1).unwrap();
        assert!(same.close);
        assert_eq!(same.copies_used, Certifier::<f64>::copies_required(&cert, 2, 0.3, 0.6, 0.1).unwrap());

        let a = DensityMatrix::<f64>::basis_state(2, 0).unwrap();
        let b = DensityMatrix::<f64>::basis_state(2, 3).unwrap();
        let mut access = SimulatedState::new(a).unwrap();
        assert!(!cert.certify(&mut access, &b, 0.3, 0.6, 0.1, 2).unwrap().close);
        assert!(Certifier::<f64>::copies_required(&cert, 7, 0.3, 0.6, 0.1).is_err());
    }

    #[test]
    fn oracle_tester_on_planted_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = JuntaTestConfig {
            k: 1,
            eps: 0.1,
            delta: 0.1,
            c: 8.0,
            seed: 7,
        };
        let close = crate::qstate::embed_junta(&JuntaStateDescriptor {
            n: 3,
            qubits: vec![1],
            state: rho_eps(0.3f64).unwrap(),
        })
        .unwrap();
        let oracle = OracleCertifier::new(close.clone());
        let mut access = SimulatedState::new(close).unwrap();
        let v = test_junta(&mut access, &cfg, &oracle).unwrap();
        assert_eq!(v.decision, Decision::JuntaClose);
        assert_eq!(v.copies_used, test_junta_budget(3, &cfg, &oracle).unwrap());

        let far = DensityMatrix::<f64>::basis_state(1, 0)
            .unwrap()
            .tensor(&random_pure(2, &mut rng).unwrap())
            .unwrap();
        let oracle = OracleCertifier::new(far.clone());
        let mut access = SimulatedState::new(far).unwrap();
        let v = test_junta(&mut access, &cfg, &oracle).unwrap();
        assert_eq!(v.decision, Decision::JuntaFar);
        assert_eq!(v.transcript.len(), 3);

        let mut access = SimulatedState::new(DensityMatrix::<f64>::basis_state(2, 1).unwrap()).unwrap();
        let all = JuntaTestConfig { k: 2, ..cfg };
        let v = test_junta::<f64>(&mut access, &all, &FrobeniusCertifier::default()).unwrap();
        assert_eq!(v.decision, Decision::JuntaClose);
        assert_eq!(v.copies_used, 0);
    }
}
