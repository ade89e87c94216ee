//! Dense density matrices: validation, distances, partial traces, junta
//! embeddings and a few reference state families.
//!
//! Qubit 0 is the most significant tensor factor, so qubit `q` of an
//! `n`-qubit state corresponds to bit `n − 1 − q` of a basis index.
//!
//! Trace distance is the full trace norm `Tr|ρ − σ|` without a factor ½:
//! orthogonal pure states are at distance 2.

pub mod pauli;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hypercube::{combinations, Distribution};
use crate::linalg::{hermitian_eigen, is_psd_within, ComplexMatrix};
use crate::scalar::{count, cplx, lit, pow2, Scalar};

pub use pauli::{
    pauli_coefficient, pauli_expand, pauli_expand_dense, pauli_matrix, pauli_reconstruct,
    qubits_of_dim, reverse_low_bits, Pauli, PauliSpectrum, PauliString,
};

/// Largest qubit count for a dense density matrix.
pub const MAX_STATE_QUBITS: usize = 12;
/// Largest qubit count for the exhaustive proxy-distance search.
pub const MAX_PROXY_QUBITS: usize = 8;

/// Validated `n`-qubit density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    n: usize,
    m: ComplexMatrix<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates Hermiticity and unit trace (both within `state_tol`) and
    /// PSD-ness (smallest eigenvalue at least `−psd_tol`).
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        let n = qubits_of_dim(m.dim())?;
        if n > MAX_STATE_QUBITS {
            return Err(Error::SizeCap {
                what: "state qubits",
                value: n,
                max: MAX_STATE_QUBITS,
            });
        }
        if m.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let defect = m.hermiticity_defect();
        if defect > T::state_tol() {
            return Err(Error::InvalidState(format!(
                "Hermiticity defect {defect} exceeds tolerance"
            )));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > T::state_tol() || tr.im.abs() > T::state_tol() {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if !is_psd_within(&m.hermitian_part(), T::psd_tol()) {
            return Err(Error::InvalidState(
                "matrix has an eigenvalue below the PSD tolerance".into(),
            ));
        }
        Ok(Self { n, m })
    }

    /// Wraps a matrix that is a state by construction.
    pub(crate) fn trusted(m: ComplexMatrix<T>) -> Self {
        let n = m.dim().trailing_zeros() as usize;
        debug_assert_eq!(1usize << n, m.dim());
        Self { n, m }
    }

    /// The one-dimensional state `[1]` on zero qubits.
    pub fn scalar_one() -> Self {
        Self::trusted(ComplexMatrix::identity(1))
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(Self::trusted(
            ComplexMatrix::identity(dim).scale(pow2::<T>(-(n as i32))),
        ))
    }

    /// `|j⟩⟨j|` for a computational basis index `j`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidState(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut m = ComplexMatrix::zeros(dim);
        m[(index, index)] = cplx(T::one(), T::zero());
        Ok(Self::trusted(m))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let n = qubits_of_dim(psi.len())?;
        check_qubits(n)?;
        let norm: T = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        let scale = norm.sqrt().recip();
        let psi: Vec<_> = psi.iter().map(|z| z * scale).collect();
        Ok(Self::trusted(ComplexMatrix::outer(&psi)))
    }

    /// Diagonal state with the given probabilities on basis indices.
    pub fn from_diagonal(probs: &[T]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(probs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.m
    }

    /// `ρ ⊗ σ` with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_qubits(self.n + other.n)?;
        Ok(Self::trusted(self.m.kron(&other.m)))
    }

    /// Pauli spectrum of the state.
    pub fn pauli_spectrum(&self) -> Result<PauliSpectrum<T>> {
        pauli_expand(&self.m)
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(hermitian_eigen(&self.m)?.values)
    }
}

impl<T> AsRef<ComplexMatrix<T>> for DensityMatrix<T> {
    fn as_ref(&self) -> &ComplexMatrix<T> {
        &self.m
    }
}

impl<T> AsRef<ComplexMatrix<T>> for ComplexMatrix<T> {
    fn as_ref(&self) -> &ComplexMatrix<T> {
        self
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_STATE_QUBITS {
        return Err(Error::SizeCap {
            what: "state qubits",
            value: n,
            max: MAX_STATE_QUBITS,
        });
    }
    Ok(())
}

fn same_dim<T: Scalar>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// `Tr|A − B|`, the sum of absolute eigenvalues of the (Hermitian) difference.
pub fn trace_distance<T: Scalar>(
    a: &impl AsRef<ComplexMatrix<T>>,
    b: &impl AsRef<ComplexMatrix<T>>,
) -> Result<T> {
    let (a, b) = (a.as_ref(), b.as_ref());
    same_dim(a, b)?;
    (a - b).trace_norm_hermitian()
}

/// `‖A − B‖_F = √Tr[(A − B)†(A − B)]`.
pub fn frobenius_distance<T: Scalar>(
    a: &impl AsRef<ComplexMatrix<T>>,
    b: &impl AsRef<ComplexMatrix<T>>,
) -> Result<T> {
    let (a, b) = (a.as_ref(), b.as_ref());
    same_dim(a, b)?;
    Ok((a - b).frobenius_norm())
}

fn check_qubit_list(n: usize, qubits: &[usize]) -> Result<()> {
    let mut seen = 0u64;
    for &q in qubits {
        if q >= n {
            return Err(Error::InvalidConfig(format!(
                "qubit {q} out of range for {n} qubits"
            )));
        }
        if seen >> q & 1 == 1 {
            return Err(Error::InvalidConfig(format!("qubit {q} listed twice")));
        }
        seen |= 1 << q;
    }
    Ok(())
}

/// Basis-index offsets: `kept[a]` places the bits of the reduced index `a`
/// (qubit `j` of the reduced register ↔ `keep[j]`), `rest[e]` places the
/// bits of the complementary index over the remaining qubits (ascending).
fn scatter_tables(n: usize, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = keep.len();
    let others: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let table = |qubits: &[usize]| -> Vec<usize> {
        let w = qubits.len();
        (0..1usize << w)
            .map(|a| {
                let mut idx = 0usize;
                for (j, &q) in qubits.iter().enumerate() {
                    if a >> (w - 1 - j) & 1 == 1 {
                        idx |= 1 << (n - 1 - q);
                    }
                }
                idx
            })
            .collect()
    };
    let kept = table(keep);
    let rest = table(&others);
    debug_assert_eq!(kept.len(), 1 << k);
    (kept, rest)
}

/// Reduced state on `keep`. Qubit `j` of the result is qubit `keep[j]` of
/// `ρ`; an empty `keep` gives the one-dimensional state `[Tr ρ] = [1]`.
pub fn partial_trace<T: Scalar>(rho: &DensityMatrix<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    Ok(DensityMatrix::trusted(partial_trace_matrix(
        rho.matrix(),
        rho.n(),
        keep,
    )?))
}

/// Partial trace of an arbitrary `2^n`-dimensional matrix.
pub fn partial_trace_matrix<T: Scalar>(
    m: &ComplexMatrix<T>,
    n: usize,
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    if m.dim() != 1usize << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            actual: m.dim(),
        });
    }
    check_qubit_list(n, keep)?;
    let (kept, rest) = scatter_tables(n, keep);
    let mut out = ComplexMatrix::zeros(kept.len());
    for (a, &ia) in kept.iter().enumerate() {
        for (b, &ib) in kept.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &e in &rest {
                acc += m[(ia | e, ib | e)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// A `k`-qubit state placed on qubits `qubits` of an `n`-qubit register,
/// with the maximally mixed state on the remaining qubits.
#[derive(Clone, Debug)]
pub struct JuntaStateDescriptor<T> {
    pub n: usize,
    pub qubits: Vec<usize>,
    pub state: DensityMatrix<T>,
}

/// `ρ_K ⊗ I/2^{n−k}` with qubit `j` of `ρ_K` placed on qubit `qubits[j]`.
pub fn embed_junta<T: Scalar>(desc: &JuntaStateDescriptor<T>) -> Result<DensityMatrix<T>> {
    let n = desc.n;
    check_qubits(n)?;
    if desc.qubits.len() > n {
        return Err(Error::InvalidConfig(format!(
            "junta set of size {} exceeds {n} qubits",
            desc.qubits.len()
        )));
    }
    if desc.state.n() != desc.qubits.len() {
        return Err(Error::DimensionMismatch {
            expected: desc.qubits.len(),
            actual: desc.state.n(),
        });
    }
    check_qubit_list(n, &desc.qubits)?;
    let (kept, rest) = scatter_tables(n, &desc.qubits);
    let w = pow2::<T>(-((n - desc.qubits.len()) as i32));
    let rk = desc.state.matrix();
    let mut out = ComplexMatrix::zeros(1 << n);
    for (a, &ia) in kept.iter().enumerate() {
        for (b, &ib) in kept.iter().enumerate() {
            let v = rk[(a, b)] * w;
            for &e in &rest {
                out[(ia | e, ib | e)] = v;
            }
        }
    }
    Ok(DensityMatrix::trusted(out))
}

/// Best junta approximation of `ρ` on `qubits`: `ρ_K ⊗ I/2^{n−k}`.
pub fn junta_projection<T: Scalar>(rho: &DensityMatrix<T>, qubits: &[usize]) -> Result<DensityMatrix<T>> {
    embed_junta(&JuntaStateDescriptor {
        n: rho.n(),
        qubits: qubits.to_vec(),
        state: partial_trace(rho, qubits)?,
    })
}

/// `min_{|K| = k} ‖ρ − ρ_K ⊗ I/2^{n−k}‖_tr` with its minimizer; subsets are
/// scanned in lexicographic order and a later subset replaces the incumbent
/// only if it is smaller by more than `1e-12`.
pub fn proxy_distance<T: Scalar>(rho: &DensityMatrix<T>, k: usize) -> Result<(Vec<usize>, T)> {
    let n = rho.n();
    if n > MAX_PROXY_QUBITS {
        return Err(Error::SizeCap {
            what: "proxy distance qubits",
            value: n,
            max: MAX_PROXY_QUBITS,
        });
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let tie = lit::<T>(1e-12);
    let mut best: Option<(Vec<usize>, T)> = None;
    for subset in combinations(n, k) {
        let d = trace_distance(rho, &junta_projection(rho, &subset)?)?;
        match &best {
            Some((_, b)) if d >= *b - tie => {}
            _ => best = Some((subset, d)),
        }
    }
    Ok(best.expect("at least one subset"))
}

/// Diagonal state `Σ_x p(x)|x⟩⟨x|`, where cube coordinate `i` is qubit `i`
/// and `x_i = −1` is the basis value 1.
pub fn distribution_to_state<T: Scalar>(p: &Distribution<T>) -> Result<DensityMatrix<T>> {
    let n = p.n();
    if n > pauli::MAX_EXPANSION_QUBITS {
        return Err(Error::SizeCap {
            what: "distribution state qubits",
            value: n,
            max: pauli::MAX_EXPANSION_QUBITS,
        });
    }
    let mut diag = vec![T::zero(); 1 << n];
    for (x, &v) in p.values().iter().enumerate() {
        diag[reverse_low_bits(x as u32, n) as usize] = v;
    }
    Ok(DensityMatrix::trusted(ComplexMatrix::from_real_diagonal(&diag)))
}

/// `ρ_ε = ½ diag(1 + ε, 1 − ε)`.
pub fn rho_eps<T: Scalar>(eps: T) -> Result<DensityMatrix<T>> {
    let half = lit::<T>(0.5);
    if !(eps > T::zero() && eps < half) {
        return Err(Error::InvalidConfig(format!("ε = {eps} must lie in (0, 1/2)")));
    }
    Ok(DensityMatrix::trusted(ComplexMatrix::from_real_diagonal(&[
        (T::one() + eps) * half,
        (T::one() - eps) * half,
    ])))
}

/// The `n` one-junta states with `ρ_ε` on qubit `i` and `I/2` elsewhere.
pub fn rho_eps_family<T: Scalar>(n: usize, eps: T) -> Result<Vec<DensityMatrix<T>>> {
    let r = rho_eps(eps)?;
    (0..n)
        .map(|i| {
            embed_junta(&JuntaStateDescriptor {
                n,
                qubits: vec![i],
                state: r.clone(),
            })
        })
        .collect()
}

/// Random mixed state `G G† / Tr[G G†]` with a complex Gaussian `2^n × rank`
/// matrix `G`.
pub fn random_state<T: Scalar, R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let rank = rank.clamp(1, dim);
    let g: Vec<Complex<T>> = (0..dim * rank)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            cplx(lit(re), lit(im))
        })
        .collect();
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = Complex::new(T::zero(), T::zero());
            for r in 0..rank {
                acc += g[i * rank + r] * g[j * rank + r].conj();
            }
            m[(i, j)] = acc;
        }
    }
    let tr = m.trace().re;
    let mut m = m.scale(tr.recip());
    for i in 0..dim {
        m[(i, i)].im = T::zero();
    }
    Ok(DensityMatrix::trusted(m.hermitian_part()))
}

/// Haar-random pure state.
pub fn random_pure<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix<T>> {
    random_state(n, 1, rng)
}

/// Computational-basis measurement probabilities (the real diagonal).
pub fn diagonal<T: Scalar>(rho: &DensityMatrix<T>) -> Vec<T> {
    (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect()
}

/// `2^{-n}` as a scalar, the identity coefficient of every `n`-qubit state.
pub fn identity_coefficient<T: Scalar>(n: usize) -> T {
    T::one() / count::<T>(1usize << n)
}
