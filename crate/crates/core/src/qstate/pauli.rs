//! Pauli strings, Pauli spectra and the Pauli expansion of dense matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::{cplx, czero, pow2, Scalar};

/// Largest qubit count for which dense Pauli matrices are built.
pub const MAX_PAULI_MATRIX_QUBITS: usize = 12;
/// Largest qubit count for a full `4^n` Pauli expansion.
pub const MAX_EXPANSION_QUBITS: usize = 10;

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// The 2×2 matrix of the operator.
    pub fn matrix<T: Scalar>(self) -> ComplexMatrix<T> {
        let o = T::one();
        let z = T::zero();
        let data = match self {
            Pauli::I => vec![cplx(o, z), cplx(z, z), cplx(z, z), cplx(o, z)],
            Pauli::X => vec![cplx(z, z), cplx(o, z), cplx(o, z), cplx(z, z)],
            Pauli::Y => vec![cplx(z, z), cplx(z, -o), cplx(z, o), cplx(z, z)],
            Pauli::Z => vec![cplx(o, z), cplx(z, z), cplx(z, z), cplx(-o, z)],
        };
        ComplexMatrix::from_vec(2, data).expect("2x2")
    }
}

/// Reverses the low `n` bits of `mask`: converts between qubit-indexed masks
/// (bit `q` = qubit `q`) and basis-index masks (qubit 0 is the most
/// significant bit of a computational basis index).
#[inline]
pub fn reverse_low_bits(mask: u32, n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (32 - n)
    }
}

/// An `n`-qubit Pauli string, packed as two qubit-indexed bit masks
/// (`x` set for X/Y, `z` set for Y/Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u32,
    z: u32,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 32, "Pauli strings support at most 32 qubits");
        Self {
            n: n as u8,
            x: 0,
            z: 0,
        }
    }

    pub fn new(codes: &[Pauli]) -> Result<Self> {
        if codes.len() > 32 {
            return Err(Error::SizeCap {
                what: "Pauli string length",
                value: codes.len(),
                max: 32,
            });
        }
        let mut s = Self::identity(codes.len());
        for (q, c) in codes.iter().enumerate() {
            let (x, z) = c.bits();
            s.x |= (x as u32) << q;
            s.z |= (z as u32) << q;
        }
        Ok(s)
    }

    /// Builds a string from qubit-indexed X and Z masks.
    pub fn from_masks(n: usize, x: u32, z: u32) -> Result<Self> {
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        if n > 32 || (x | z) & !full != 0 {
            return Err(Error::InvalidConfig(format!(
                "Pauli masks exceed {n} qubits"
            )));
        }
        Ok(Self { n: n as u8, x, z })
    }

    /// Builds a string from basis-index-ordered X and Z masks.
    pub fn from_basis_masks(n: usize, bx: u32, bz: u32) -> Self {
        Self {
            n: n as u8,
            x: reverse_low_bits(bx, n),
            z: reverse_low_bits(bz, n),
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    /// Qubit-indexed support mask `{q : P_q ≠ I}`.
    pub fn support_mask(&self) -> u32 {
        self.x | self.z
    }

    pub fn support(&self) -> Vec<usize> {
        crate::hypercube::mask_indices(self.support_mask())
    }

    /// `|supp(P)|`.
    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn code(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn codes(&self) -> Vec<Pauli> {
        (0..self.n()).map(|q| self.code(q)).collect()
    }

    /// `(x, z)` masks in basis-index bit order.
    pub fn basis_masks(&self) -> (u32, u32) {
        (
            reverse_low_bits(self.x, self.n()),
            reverse_low_bits(self.z, self.n()),
        )
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Keeps only the factors on qubits in `mask`.
    pub fn restrict(&self, mask: u32) -> Self {
        Self {
            n: self.n,
            x: self.x & mask,
            z: self.z & mask,
        }
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n() + other.n();
        Self::from_masks(n, self.x | other.x << self.n, self.z | other.z << self.n)
    }

    /// Picks out the factors on `qubits` (in that order) as a new string.
    pub fn select(&self, qubits: &[usize]) -> Self {
        let mut codes = Vec::with_capacity(qubits.len());
        for &q in qubits {
            codes.push(self.code(q));
        }
        Self::new(&codes).expect("selection is shorter than source")
    }

    /// All strings on `n` qubits whose support lies inside `mask`, enumerated
    /// in base-4 order over the qubits of `mask` (ascending).
    pub fn all_supported_on(n: usize, mask: u32) -> Vec<Self> {
        let qubits = crate::hypercube::mask_indices(mask);
        let mut out = Vec::with_capacity(1 << (2 * qubits.len()));
        for code in 0..1usize << (2 * qubits.len()) {
            let mut s = Self::identity(n);
            for (j, &q) in qubits.iter().enumerate() {
                let (x, z) = Pauli::ALL[(code >> (2 * j)) & 3].bits();
                s.x |= (x as u32) << q;
                s.z |= (z as u32) << q;
            }
            out.push(s);
        }
        out
    }

    /// All strings with `|supp| ≤ k`, grouped by support subset.
    pub fn all_up_to_weight(n: usize, k: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for support in crate::hypercube::subsets_up_to(n, k) {
            out.extend(
                Self::all_supported_on(n, support)
                    .into_iter()
                    .filter(|p| p.support_mask() == support),
            );
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            write!(f, "{}", self.code(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let codes = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("unknown Pauli symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&codes)
    }
}

/// Sparse real Pauli spectrum `P ↦ M̂(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum<T> {
    n: usize,
    coeffs: BTreeMap<PauliString, T>,
}

impl<T: Scalar> PauliSpectrum<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (PauliString, T)>) -> Result<Self> {
        let mut s = Self::new(n);
        for (p, c) in pairs {
            s.insert(p, c)?;
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, p: PauliString, c: T) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: p.n(),
            });
        }
        self.coeffs.insert(p, c);
        Ok(())
    }

    pub fn get(&self, p: &PauliString) -> T {
        self.coeffs.get(p).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, T)> + '_ {
        self.coeffs.iter().map(|(p, &c)| (p, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sum_squares(&self) -> T {
        self.coeffs.values().map(|&c| c * c).sum()
    }

    /// Strings with coefficient magnitude above `tol`.
    pub fn support_above(&self, tol: T) -> Vec<PauliString> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(p, _)| *p)
            .collect()
    }

    /// `Σ_P |a(P) − b(P)|²` over the union of both supports.
    pub fn distance_sq(&self, other: &Self) -> T {
        let mut total = T::zero();
        for (p, &c) in &self.coeffs {
            let d = c - other.get(p);
            total += d * d;
        }
        for (p, &c) in &other.coeffs {
            if !self.coeffs.contains_key(p) {
                total += c * c;
            }
        }
        total
    }

    /// Largest support size among nonzero coefficients.
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .filter(|(_, c)| **c != T::zero())
            .map(|(p, _)| p.weight())
            .max()
            .unwrap_or(0)
    }
}

fn check_matrix_qubits(n: usize, max: usize, what: &'static str) -> Result<()> {
    if n > max {
        return Err(Error::SizeCap {
            what,
            value: n,
            max,
        });
    }
    Ok(())
}

/// Qubit count of a `2^n`-dimensional matrix.
pub fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    Ok(dim.trailing_zeros() as usize)
}

#[inline]
fn i_pow<T: Scalar>(k: u32) -> Complex<T> {
    let o = T::one();
    let z = T::zero();
    match k % 4 {
        0 => cplx(o, z),
        1 => cplx(z, o),
        2 => cplx(-o, z),
        _ => cplx(z, -o),
    }
}

/// Dense matrix of `P = ⊗_q P_q` with qubit 0 as the most significant factor.
pub fn pauli_matrix<T: Scalar>(p: &PauliString) -> Result<ComplexMatrix<T>> {
    let n = p.n();
    check_matrix_qubits(n, MAX_PAULI_MATRIX_QUBITS, "Pauli matrix qubits")?;
    let dim = 1usize << n;
    let (bx, bz) = p.basis_masks();
    let phase = i_pow::<T>(p.y_count());
    let mut m = ComplexMatrix::zeros(dim);
    // P|j⟩ = i^{#Y} (-1)^{|j ∧ z|} |j ⊕ x⟩
    for j in 0..dim as u32 {
        let sign = if (j & bz).count_ones() % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        m[((j ^ bx) as usize, j as usize)] = phase * sign;
    }
    Ok(m)
}

/// `M̂(P) = Tr[P M] / 2^n` for a single string, in `O(2^n)`.
pub fn pauli_coefficient<T: Scalar>(m: &ComplexMatrix<T>, p: &PauliString) -> Result<Complex<T>> {
    let n = qubits_of_dim(m.dim())?;
    if n != p.n() {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: p.n(),
        });
    }
    let (bx, bz) = p.basis_masks();
    // Tr[P M] = Σ_k ⟨k⊕x|P|k⟩ M[k][k⊕x]
    let mut acc = czero::<T>();
    for k in 0..m.dim() as u32 {
        let entry = m[(k as usize, (k ^ bx) as usize)];
        if (k & bz).count_ones() % 2 == 0 {
            acc += entry;
        } else {
            acc -= entry;
        }
    }
    Ok(acc * i_pow::<T>(p.y_count()) * pow2::<T>(-(n as i32)))
}

/// All `4^n` complex coefficients, indexed by `bx · 2^n + bz` with basis-order
/// masks. Runs one Walsh–Hadamard transform per X pattern: `O(n 4^n)`.
pub fn pauli_expand_dense<T: Scalar>(m: &ComplexMatrix<T>) -> Result<Vec<Complex<T>>> {
    let n = qubits_of_dim(m.dim())?;
    check_matrix_qubits(n, MAX_EXPANSION_QUBITS, "Pauli expansion qubits")?;
    let dim = 1usize << n;
    let scale = pow2::<T>(-(n as i32));
    let mut out = vec![czero::<T>(); dim * dim];
    let mut re = vec![T::zero(); dim];
    let mut im = vec![T::zero(); dim];
    for bx in 0..dim {
        for k in 0..dim {
            let e = m[(k, k ^ bx)];
            re[k] = e.re;
            im[k] = e.im;
        }
        crate::hypercube::walsh_hadamard_in_place(&mut re);
        crate::hypercube::walsh_hadamard_in_place(&mut im);
        for bz in 0..dim {
            let ny = ((bx & bz) as u32).count_ones();
            out[bx * dim + bz] = cplx(re[bz], im[bz]) * i_pow::<T>(ny) * scale;
        }
    }
    Ok(out)
}

/// Pauli expansion of a Hermitian matrix. Exactly-zero coefficients are not
/// stored.
pub fn pauli_expand<T: Scalar>(m: &ComplexMatrix<T>) -> Result<PauliSpectrum<T>> {
    let n = qubits_of_dim(m.dim())?;
    let tol = T::state_tol() * m.frobenius_norm().max(T::one());
    if m.hermiticity_defect() > tol {
        return Err(Error::InvalidState(
            "Pauli expansion into real coefficients needs a Hermitian matrix".into(),
        ));
    }
    let dense = pauli_expand_dense(m)?;
    let dim = 1usize << n;
    let mut spec = PauliSpectrum::new(n);
    for (idx, c) in dense.into_iter().enumerate() {
        if c.re != T::zero() {
            let p = PauliString::from_basis_masks(n, (idx / dim) as u32, (idx % dim) as u32);
            spec.coeffs.insert(p, c.re);
        }
    }
    Ok(spec)
}

/// `Σ_P ĉ(P) P` as a dense matrix.
pub fn pauli_reconstruct<T: Scalar>(spec: &PauliSpectrum<T>) -> Result<ComplexMatrix<T>> {
    let n = spec.n();
    check_matrix_qubits(n, MAX_PAULI_MATRIX_QUBITS, "Pauli reconstruction qubits")?;
    let dim = 1usize << n;
    let mut m = ComplexMatrix::zeros(dim);
    for (p, c) in spec.iter() {
        if c == T::zero() {
            continue;
        }
        let (bx, bz) = p.basis_masks();
        let phase = i_pow::<T>(p.y_count()) * c;
        for j in 0..dim as u32 {
            let v = if (j & bz).count_ones() % 2 == 0 {
                phase
            } else {
                -phase
            };
            m[((j ^ bx) as usize, j as usize)] += v;
        }
    }
    Ok(m)
}
