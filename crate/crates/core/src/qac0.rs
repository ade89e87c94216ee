//! QAC⁰ circuits: layered single-qubit gates and generalized Toffolis, their
//! unitaries and Choi states, light cones, Pauli-mass concentration, and the
//! address function used as a far-from-junta example.
//!
//! Register layout of a circuit on `n` inputs and `a` ancillas: qubits
//! `0..n` are inputs, `n..n+a` ancillas and `n+a` the output. A Toffoli flips
//! its target iff every control is in state `|1⟩` (the `−1` value of a cube
//! coordinate).
//!
//! Choi states use a normalized EPR pair per input, so they have trace 1.
//! Qubit 0 of a Choi state is the channel output, qubits `1..` are the
//! reference copies of the channel inputs in register order.

use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypercube::{combinations, project_bits, CubeFunction};
use crate::linalg::ComplexMatrix;
use crate::qstate::{pauli_expand_dense, reverse_low_bits, DensityMatrix, PauliString};
use crate::scalar::{cplx, czero, lit, pow2, to_f64, Scalar};

/// Largest register (inputs, ancillas and output) that is simulated.
pub const MAX_CIRCUIT_QUBITS: usize = 10;
/// Largest register whose full Choi state is built; the state has one more
/// qubit.
pub const MAX_FULL_CHOI_QUBITS: usize = 6;
/// Largest input count for ancilla-initialized and Boolean Choi states.
pub const MAX_CHOI_INPUTS: usize = 4;
/// Largest state for the exhaustive concentration search.
pub const MAX_CONCENTRATION_QUBITS: usize = 8;
/// Largest variable count for the Boolean junta distance.
pub const MAX_BOOLEAN_VARS: usize = 12;

/// A gate of a QAC⁰ circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate<T> {
    /// A 2×2 unitary `[[u00, u01], [u10, u11]]` on one qubit.
    SingleQubit { qubit: usize, matrix: [Complex<T>; 4] },
    /// Flips `target` iff all `controls` are `|1⟩`.
    Toffoli { controls: Vec<usize>, target: usize },
}

impl<T: Scalar> Gate<T> {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::SingleQubit { qubit, .. } => vec![*qubit],
            Gate::Toffoli { controls, target } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
        }
    }

    pub fn is_toffoli(&self) -> bool {
        matches!(self, Gate::Toffoli { .. })
    }

    /// Qubits touched: controls plus target for a Toffoli, 1 otherwise.
    pub fn arity(&self) -> usize {
        match self {
            Gate::SingleQubit { .. } => 1,
            Gate::Toffoli { controls, .. } => controls.len() + 1,
        }
    }

    fn validate(&self, total: usize) -> Result<()> {
        let qubits = self.qubits();
        if let Some(&q) = qubits.iter().find(|&&q| q >= total) {
            return Err(Error::InvalidCircuit(format!(
                "gate uses qubit {q} of a {total}-qubit register"
            )));
        }
        match self {
            Gate::SingleQubit { matrix: u, .. } => {
                // U†U = I
                let d00 = u[0].norm_sqr() + u[2].norm_sqr() - T::one();
                let d11 = u[1].norm_sqr() + u[3].norm_sqr() - T::one();
                let d01 = (u[0].conj() * u[1] + u[2].conj() * u[3]).norm();
                if d00.abs().max(d11.abs()).max(d01) > T::unitary_tol() {
                    return Err(Error::InvalidCircuit("single-qubit gate is not unitary".into()));
                }
            }
            Gate::Toffoli { controls, target } => {
                if controls.is_empty() {
                    return Err(Error::InvalidCircuit("Toffoli without controls".into()));
                }
                let mut seen = 1u64 << target;
                for &c in controls {
                    if seen >> c & 1 == 1 {
                        return Err(Error::InvalidCircuit(
                            "Toffoli controls must be distinct and differ from the target".into(),
                        ));
                    }
                    seen |= 1 << c;
                }
            }
        }
        Ok(())
    }
}

/// A layered QAC⁰ circuit with its ancilla/output initial state `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Qac0Circuit<T> {
    n: usize,
    a: usize,
    layers: Vec<Vec<Gate<T>>>,
    sigma: DensityMatrix<T>,
}

impl<T: Scalar> Qac0Circuit<T> {
    pub fn new(n: usize, a: usize, layers: Vec<Vec<Gate<T>>>, sigma: DensityMatrix<T>) -> Result<Self> {
        let total = n + a + 1;
        if total > MAX_CIRCUIT_QUBITS {
            return Err(Error::SizeCap {
                what: "circuit qubits",
                value: total,
                max: MAX_CIRCUIT_QUBITS,
            });
        }
        if sigma.n() != a + 1 {
            return Err(Error::DimensionMismatch {
                expected: a + 1,
                actual: sigma.n(),
            });
        }
        for (i, layer) in layers.iter().enumerate() {
            let mut used = 0u64;
            for g in layer {
                g.validate(total)?;
                for q in g.qubits() {
                    if used >> q & 1 == 1 {
                        return Err(Error::InvalidCircuit(format!(
                            "layer {i} uses qubit {q} twice"
                        )));
                    }
                    used |= 1 << q;
                }
            }
        }
        Ok(Self { n, a, layers, sigma })
    }

    /// A circuit with `σ = |0…0⟩⟨0…0|`.
    pub fn with_zero_ancillas(n: usize, a: usize, layers: Vec<Vec<Gate<T>>>) -> Result<Self> {
        Self::new(n, a, layers, DensityMatrix::basis_state(a + 1, 0)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ancillas(&self) -> usize {
        self.a
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.a + 1
    }

    pub fn output_qubit(&self) -> usize {
        self.n + self.a
    }

    pub fn layers(&self) -> &[Vec<Gate<T>>] {
        &self.layers
    }

    pub fn sigma(&self) -> &DensityMatrix<T> {
        &self.sigma
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Number of multi-qubit (Toffoli) gates.
    pub fn size(&self) -> usize {
        self.layers.iter().flatten().filter(|g| g.is_toffoli()).count()
    }

    pub fn max_toffoli_arity(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|g| g.is_toffoli())
            .map(|g| g.arity())
            .max()
            .unwrap_or(0)
    }
}

/// Applies `gate` to the rows of a `2^N`-row matrix (`M ← G M`).
fn apply_gate_rows<T: Scalar>(m: &mut ComplexMatrix<T>, total: usize, gate: &Gate<T>) {
    let dim = m.dim();
    match gate {
        Gate::SingleQubit { qubit, matrix: u } => {
            let bit = 1usize << (total - 1 - qubit);
            for i0 in (0..dim).filter(|i| i & bit == 0) {
                let i1 = i0 | bit;
                for j in 0..dim {
                    let (a, b) = (m[(i0, j)], m[(i1, j)]);
                    m[(i0, j)] = u[0] * a + u[1] * b;
                    m[(i1, j)] = u[2] * a + u[3] * b;
                }
            }
        }
        Gate::Toffoli { controls, target } => {
            let cmask = controls.iter().fold(0usize, |acc, &c| acc | 1 << (total - 1 - c));
            let tbit = 1usize << (total - 1 - target);
            for i in (0..dim).filter(|i| i & cmask == cmask && i & tbit == 0) {
                let k = i | tbit;
                for j in 0..dim {
                    let t = m[(i, j)];
                    m[(i, j)] = m[(k, j)];
                    m[(k, j)] = t;
                }
            }
        }
    }
}

/// The unitary of the whole circuit, layers applied first to last.
pub fn circuit_unitary<T: Scalar>(c: &Qac0Circuit<T>) -> ComplexMatrix<T> {
    let total = c.total_qubits();
    let mut u = ComplexMatrix::identity(1 << total);
    for layer in &c.layers {
        for g in layer {
            apply_gate_rows(&mut u, total, g);
        }
    }
    u
}

/// Which channel a Choi state belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiKind {
    /// The channel from the whole register to the output qubit.
    Full,
    /// The channel from the inputs, with ancillas and output prepared in `σ`.
    Ancilla,
    /// The classical channel `x ↦ |f(x)⟩` followed by dephasing.
    Boolean,
}

/// A Choi state and its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiState<T> {
    pub state: DensityMatrix<T>,
    pub kind: ChoiKind,
}

/// Choi state of `Φ(X) = Tr_{all but output}[U X U†]` on `N + 1` qubits.
pub fn choi_state_full<T: Scalar>(c: &Qac0Circuit<T>) -> Result<ChoiState<T>> {
    let total = c.total_qubits();
    if total > MAX_FULL_CHOI_QUBITS {
        return Err(Error::SizeCap {
            what: "full Choi register",
            value: total,
            max: MAX_FULL_CHOI_QUBITS,
        });
    }
    let u = circuit_unitary(c);
    let dim = 1usize << total;
    let scale = pow2::<T>(-(total as i32));
    let mut m = ComplexMatrix::zeros(2 * dim);
    // the output is the least significant bit of a register index
    for j in 0..dim {
        for jp in 0..dim {
            for o in 0..2 {
                for op in 0..2 {
                    let mut acc = czero::<T>();
                    for r in 0..dim / 2 {
                        acc += u[(2 * r + o, j)] * u[(2 * r + op, jp)].conj();
                    }
                    m[(o * dim + j, op * dim + jp)] = acc * scale;
                }
            }
        }
    }
    Ok(ChoiState {
        state: DensityMatrix::trusted(m.hermitian_part()),
        kind: ChoiKind::Full,
    })
}

/// Choi state of `Φ_σ(ρ) = Tr_{all but output}[U (ρ ⊗ σ) U†]` on `n + 1` qubits.
pub fn choi_state_with_ancilla<T: Scalar>(c: &Qac0Circuit<T>) -> Result<ChoiState<T>> {
    let n = c.n();
    if n > MAX_CHOI_INPUTS {
        return Err(Error::SizeCap {
            what: "Choi inputs",
            value: n,
            max: MAX_CHOI_INPUTS,
        });
    }
    let u = circuit_unitary(c);
    let total = c.total_qubits();
    let dim = 1usize << total;
    let block = 1usize << (c.a + 1);
    let sigma = c.sigma.matrix();
    // L_x = U[:, x-block] σ
    let l: Vec<Vec<Complex<T>>> = (0..1usize << n)
        .map(|x| {
            let mut out = vec![czero::<T>(); dim * block];
            for row in 0..dim {
                for bp in 0..block {
                    let mut acc = czero::<T>();
                    for b in 0..block {
                        acc += u[(row, x * block + b)] * sigma[(b, bp)];
                    }
                    out[row * block + bp] = acc;
                }
            }
            out
        })
        .collect();
    let inputs = 1usize << n;
    let scale = pow2::<T>(-(n as i32));
    let mut m = ComplexMatrix::zeros(2 * inputs);
    for x in 0..inputs {
        for xp in 0..inputs {
            for o in 0..2 {
                for op in 0..2 {
                    let mut acc = czero::<T>();
                    for r in 0..dim / 2 {
                        for bp in 0..block {
                            acc += l[x][(2 * r + o) * block + bp] * u[(2 * r + op, xp * block + bp)].conj();
                        }
                    }
                    m[(o * inputs + x, op * inputs + xp)] = acc * scale;
                }
            }
        }
    }
    Ok(ChoiState {
        state: DensityMatrix::trusted(m.hermitian_part()),
        kind: ChoiKind::Ancilla,
    })
}

/// Largest deviation, over all Pauli strings `P` on the output and inputs, of
/// `ρ̂_{Φ_σ}(P) = 2^{a+1} Σ_Q ρ̂_Φ(P ⊗ Q) Tr[Q σ^T]` (sum over strings `Q` on
/// the ancilla and output references).
pub fn ancilla_relation_residual<T: Scalar>(c: &Qac0Circuit<T>) -> Result<f64> {
    let full = choi_state_full(c)?;
    let small = choi_state_with_ancilla(c)?;
    let n = c.n();
    let w = c.a + 1;
    let big = pauli_expand_dense(full.state.matrix())?;
    let lhs = pauli_expand_dense(small.state.matrix())?;
    let sigma = c.sigma.matrix();
    // Tr[Q σ^T] = Σ_{ij} Q_ij σ_ij, for every Q in basis-mask order
    let wdim = 1usize << w;
    let tr_q: Vec<Complex<T>> = (0..wdim * wdim)
        .map(|idx| {
            let q = PauliString::from_basis_masks(w, (idx / wdim) as u32, (idx % wdim) as u32);
            let qm = crate::qstate::pauli_matrix::<T>(&q).expect("small");
            let mut acc = czero::<T>();
            for i in 0..wdim {
                for j in 0..wdim {
                    acc += qm[(i, j)] * sigma[(i, j)];
                }
            }
            acc
        })
        .collect();
    let pn = n + 1;
    let pdim = 1usize << pn;
    let bdim = 1usize << (pn + w);
    let factor = pow2::<T>(w as i32);
    let mut worst = 0.0f64;
    for px in 0..pdim {
        for pz in 0..pdim {
            let mut acc = czero::<T>();
            for qx in 0..wdim {
                for qz in 0..wdim {
                    // P occupies the leading (more significant) qubits
                    let bx = (px << w) | qx;
                    let bz = (pz << w) | qz;
                    acc += big[bx * bdim + bz] * tr_q[qx * wdim + qz];
                }
            }
            let rhs = acc * factor;
            let diff = (lhs[px * pdim + pz] - rhs).norm();
            worst = worst.max(to_f64(diff));
        }
    }
    Ok(worst)
}

/// `ρ_f = 2^{-n} Σ_x |f(x)⟩⟨f(x)| ⊗ |x⟩⟨x|` with `+1 ↦ |0⟩`, `−1 ↦ |1⟩`.
pub fn choi_of_boolean_function<T: Scalar>(f: &CubeFunction<T>) -> Result<ChoiState<T>> {
    let n = f.n();
    if n > MAX_CHOI_INPUTS {
        return Err(Error::SizeCap {
            what: "Choi inputs",
            value: n,
            max: MAX_CHOI_INPUTS,
        });
    }
    if !f.is_boolean() {
        return Err(Error::InvalidFunction("Choi states need a ±1-valued function".into()));
    }
    let inputs = 1usize << n;
    let mut diag = vec![T::zero(); 2 * inputs];
    let w = pow2::<T>(-(n as i32));
    for (x, &v) in f.values().iter().enumerate() {
        let o = usize::from(v < T::zero());
        diag[o * inputs + reverse_low_bits(x as u32, n) as usize] = w;
    }
    Ok(ChoiState {
        state: DensityMatrix::trusted(ComplexMatrix::from_real_diagonal(&diag)),
        kind: ChoiKind::Boolean,
    })
}

/// `Pr_x[f(x) ≠ g(x)]`.
pub fn disagreement<T: Scalar>(f: &CubeFunction<T>, g: &CubeFunction<T>) -> Result<f64> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: f.n(),
            actual: g.n(),
        });
    }
    let diff = f.values().iter().zip(g.values()).filter(|(a, b)| a != b).count();
    Ok(diff as f64 / f.values().len() as f64)
}

/// A single constant `κ` fitted to `κ ‖ρ_f − ρ_g‖_F² = Pr[f ≠ g]` over pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementFit {
    /// Absent when every pair has `f = g`.
    pub kappa: Option<f64>,
    pub max_residual: f64,
    pub pairs: usize,
}

/// Least-squares `κ` over all pairs and the largest residual
/// `|κ d² − Pr[f ≠ g]|`.
pub fn fnorm_agreement_fit<T: Scalar>(pairs: &[(CubeFunction<T>, CubeFunction<T>)]) -> Result<AgreementFit> {
    let mut obs = Vec::with_capacity(pairs.len());
    for (f, g) in pairs {
        let rf = choi_of_boolean_function(f)?;
        let rg = choi_of_boolean_function(g)?;
        let d = to_f64(crate::qstate::frobenius_distance(&rf.state, &rg.state)?);
        obs.push((d * d, disagreement(f, g)?));
    }
    let sxx: f64 = obs.iter().map(|(d, _)| d * d).sum();
    let sxy: f64 = obs.iter().map(|(d, p)| d * p).sum();
    let kappa = if sxx > 0.0 { Some(sxy / sxx) } else { None };
    let k = kappa.unwrap_or(0.0);
    let max_residual = obs.iter().map(|(d, p)| (k * d - p).abs()).fold(0.0, f64::max);
    Ok(AgreementFit {
        kappa,
        max_residual,
        pairs: pairs.len(),
    })
}

/// The agreement relation for one pair: `κ = Pr[f ≠ g] / ‖ρ_f − ρ_g‖_F²`.
pub fn fnorm_agreement_identity<T: Scalar>(f: &CubeFunction<T>, g: &CubeFunction<T>) -> Result<AgreementFit> {
    fnorm_agreement_fit(&[(f.clone(), g.clone())])
}

/// Drops every Toffoli touching at least `l` qubits; returns the new circuit
/// and the number of gates removed. Layers (possibly emptied) are kept.
pub fn remove_long_toffolis<T: Scalar>(c: &Qac0Circuit<T>, l: usize) -> Result<(Qac0Circuit<T>, usize)> {
    if l == 0 {
        return Err(Error::InvalidConfig("l must be at least 1".into()));
    }
    let mut removed = 0;
    let layers = c
        .layers
        .iter()
        .map(|layer| {
            layer
                .iter()
                .filter(|g| {
                    let drop = g.is_toffoli() && g.arity() >= l;
                    removed += usize::from(drop);
                    !drop
                })
                .cloned()
                .collect()
        })
        .collect();
    Ok((Qac0Circuit::new(c.n, c.a, layers, c.sigma.clone())?, removed))
}

/// Effect of removing long Toffolis on the full Choi state.
#[derive(Clone, Debug, PartialEq)]
pub struct RemovalReport {
    pub l: usize,
    pub removed: usize,
    /// `Σ_P |ρ̂_Φ(P) − ρ̂_{Φ′}(P)|²`.
    pub spectral_distance_sq: f64,
    /// `spectral_distance_sq · 2^l · 4^{N+1} / m²`, when `m > 0`.
    pub constant: Option<f64>,
}

pub fn removal_perturbation<T: Scalar>(c: &Qac0Circuit<T>, l: usize) -> Result<RemovalReport> {
    let (short, removed) = remove_long_toffolis(c, l)?;
    let a = choi_state_full(c)?;
    let b = choi_state_full(&short)?;
    // Σ_P |Δ̂(P)|² = ‖Δ‖_F² / 2^{N+1}
    let fro = to_f64(crate::qstate::frobenius_distance(&a.state, &b.state)?);
    let qubits = c.total_qubits() + 1;
    let dist = fro * fro / 2f64.powi(qubits as i32);
    let constant = (removed > 0)
        .then(|| dist * 2f64.powi(l as i32) * 4f64.powi(qubits as i32) / (removed * removed) as f64);
    Ok(RemovalReport {
        l,
        removed,
        spectral_distance_sq: dist,
        constant,
    })
}

/// Qubits that can influence `qubit` at the end of the circuit: start from
/// `{qubit}` and, sweeping layers last to first, absorb every gate that
/// touches the current set.
pub fn light_cone<T: Scalar>(c: &Qac0Circuit<T>, qubit: usize) -> Result<Vec<usize>> {
    if qubit >= c.total_qubits() {
        return Err(Error::InvalidConfig(format!("qubit {qubit} out of range")));
    }
    let mut set = 1u64 << qubit;
    for layer in c.layers.iter().rev() {
        for g in layer {
            let q = g.qubits();
            if q.iter().any(|&x| set >> x & 1 == 1) {
                for x in q {
                    set |= 1 << x;
                }
            }
        }
    }
    Ok((0..c.total_qubits()).filter(|&q| set >> q & 1 == 1).collect())
}

/// Over all `|K| = k`, the smallest off-`K` Pauli mass
/// `Σ_{supp P ⊄ K} ρ̂(P)²` and its minimizer (lexicographically first on ties).
pub fn concentration_search<T: Scalar>(rho: &DensityMatrix<T>, k: usize) -> Result<(Vec<usize>, f64)> {
    let n = rho.n();
    if n > MAX_CONCENTRATION_QUBITS {
        return Err(Error::SizeCap {
            what: "concentration search qubits",
            value: n,
            max: MAX_CONCENTRATION_QUBITS,
        });
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let dense = pauli_expand_dense(rho.matrix())?;
    let dim = 1usize << n;
    // mass per qubit-indexed support
    let mut mass = vec![0.0f64; dim];
    for bx in 0..dim {
        for bz in 0..dim {
            let c = to_f64(dense[bx * dim + bz].re);
            if c != 0.0 {
                let supp = reverse_low_bits((bx | bz) as u32, n) as usize;
                mass[supp] += c * c;
            }
        }
    }
    let subsets = combinations(n, k);
    let residuals: Vec<f64> = subsets
        .par_iter()
        .map(|subset| {
            let kmask = subset.iter().fold(0usize, |acc, &q| acc | 1 << q);
            mass.iter()
                .enumerate()
                .filter(|(s, _)| s & !kmask != 0)
                .map(|(_, m)| m)
                .sum()
        })
        .collect();
    let mut best = 0;
    for (i, &r) in residuals.iter().enumerate() {
        if r < residuals[best] {
            best = i;
        }
    }
    Ok((subsets[best].clone(), residuals[best]))
}

/// The address function on `D + 2^D` variables: `x` are coordinates `0..D`,
/// `y` are coordinates `D..D+2^D`, and `f(x, y) = y_{add(x)}` with `add(x)`
/// the binary number whose bit `i` is 1 iff `x_i = −1`.
pub fn address_function<T: Scalar>(d: usize) -> Result<CubeFunction<T>> {
    if d > 3 {
        return Err(Error::SizeCap {
            what: "address bits",
            value: d,
            max: 3,
        });
    }
    let vars = d + (1 << d);
    CubeFunction::from_fn(vars, |p| {
        let addr = p.bits() & ((1 << d) - 1);
        lit::<T>(f64::from(p.coord(d + addr as usize)))
    })
}

/// Exact distance `min_{|K| = k} Pr[f ≠ g_K]` from a ±1 function to the
/// `k`-juntas, where `g_K(z)` is the sign of `E[f | x_K = z]` (ties to `+1`),
/// the best junta on `K`. Returns the minimizing `K` as well.
pub fn boolean_distance_to_junta<T: Scalar>(f: &CubeFunction<T>, k: usize) -> Result<(Vec<usize>, f64)> {
    let m = f.n();
    if m > MAX_BOOLEAN_VARS {
        return Err(Error::SizeCap {
            what: "Boolean function variables",
            value: m,
            max: MAX_BOOLEAN_VARS,
        });
    }
    if k > m {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds {m} variables")));
    }
    if !f.is_boolean() {
        return Err(Error::InvalidFunction("junta distance needs a ±1-valued function".into()));
    }
    let signs: Vec<i64> = f.values().iter().map(|&v| if v > T::zero() { 1 } else { -1 }).collect();
    let mut best: Option<(Vec<usize>, u64)> = None;
    for subset in combinations(m, k) {
        let mut sums = vec![0i64; 1 << k];
        let mut counts = vec![0i64; 1 << k];
        for (x, &s) in signs.iter().enumerate() {
            let z = project_bits(x as u32, &subset) as usize;
            sums[z] += s;
            counts[z] += 1;
        }
        // g = +1 errs on the −1 points, g = −1 on the +1 points
        let errors: i64 = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if s >= 0 { (c - s) / 2 } else { (c + s) / 2 })
            .sum();
        let errors = errors as u64;
        if best.as_ref().is_none_or(|(_, e)| errors < *e) {
            best = Some((subset, errors));
        }
    }
    let (subset, errors) = best.expect("at least one subset");
    Ok((subset, errors as f64 / signs.len() as f64))
}

/// A Haar-ish random single-qubit unitary `e^{iα} R_z(β) R_y(γ) R_z(δ)`.
pub fn random_unitary_2x2<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> [Complex<T>; 4] {
    let tau = std::f64::consts::TAU;
    let alpha = rng.gen_range(0.0..tau);
    let beta = rng.gen_range(0.0..tau);
    let delta = rng.gen_range(0.0..tau);
    let gamma = (1.0 - 2.0 * rng.gen::<f64>()).clamp(-1.0, 1.0).acos();
    let (c, s) = ((gamma / 2.0).cos(), (gamma / 2.0).sin());
    let e = |t: f64| Complex::new(t.cos(), t.sin());
    let m = [
        e(alpha - beta / 2.0 - delta / 2.0) * c,
        -e(alpha - beta / 2.0 + delta / 2.0) * s,
        e(alpha + beta / 2.0 - delta / 2.0) * s,
        e(alpha + beta / 2.0 + delta / 2.0) * c,
    ];
    m.map(|z| cplx(lit(z.re), lit(z.im)))
}

/// Shape of a random circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomCircuitSpec {
    pub n: usize,
    pub a: usize,
    pub depth: usize,
    /// Largest Toffoli arity (controls plus target), at least 2.
    pub max_arity: usize,
    /// Probability that a free qubit starts a Toffoli.
    pub toffoli_rate: f64,
}

/// A random layered circuit: each layer visits qubits in random order and
/// places a Toffoli (random arity, controls drawn from free qubits), a random
/// single-qubit gate, or nothing. `σ` is `|0…0⟩`.
pub fn random_circuit<T: Scalar, R: Rng + ?Sized>(spec: &RandomCircuitSpec, rng: &mut R) -> Result<Qac0Circuit<T>> {
    let total = spec.n + spec.a + 1;
    let mut layers = Vec::with_capacity(spec.depth);
    for _ in 0..spec.depth {
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(rng);
        let mut free = vec![true; total];
        let mut layer = Vec::new();
        for &q in &order {
            if !free[q] {
                continue;
            }
            let others: Vec<usize> = (0..total).filter(|&x| free[x] && x != q).collect();
            if spec.max_arity >= 2 && !others.is_empty() && rng.gen::<f64>() < spec.toffoli_rate {
                let arity = rng.gen_range(2..=spec.max_arity.min(others.len() + 1));
                let controls: Vec<usize> = others.choose_multiple(rng, arity - 1).copied().collect();
                free[q] = false;
                for &c in &controls {
                    free[c] = false;
                }
                layer.push(Gate::Toffoli { controls, target: q });
            } else if rng.gen::<f64>() < 0.7 {
                free[q] = false;
                layer.push(Gate::SingleQubit {
                    qubit: q,
                    matrix: random_unitary_2x2(rng),
                });
            }
        }
        layers.push(layer);
    }
    Qac0Circuit::with_zero_ancillas(spec.n, spec.a, layers)
}

/// A random state as the ancilla/output preparation.
pub fn with_random_sigma<T: Scalar, R: Rng + ?Sized>(c: Qac0Circuit<T>, rng: &mut R) -> Result<Qac0Circuit<T>> {
    let sigma = crate::qstate::random_state(c.a + 1, 1 << (c.a + 1), rng)?;
    Qac0Circuit::new(c.n, c.a, c.layers, sigma)
}

/// Hadamard matrix entries.
pub fn hadamard<T: Scalar>() -> [Complex<T>; 4] {
    let h = lit::<T>(0.5).sqrt();
    let z = T::zero();
    [cplx(h, z), cplx(h, z), cplx(h, z), cplx(-h, z)]
}
