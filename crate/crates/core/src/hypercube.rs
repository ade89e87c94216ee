//! Functions on the Boolean hypercube `{-1,1}^n`, their Fourier spectra and
//! distances between distributions.
//!
//! Points and subsets are bit masks: bit `i` of a [`CubePoint`] is set when
//! `x_i = -1`, and bit `i` of a [`SubsetMask`] is set when `i ∈ S`. With this
//! encoding the character `χ_S(x) = ∏_{i∈S} x_i` is `(-1)^{popcount(S & x)}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{count, pow2, Scalar};

/// Largest supported number of coordinates for dense cube functions.
pub const MAX_BITS: usize = 24;

fn check_bits(n: usize) -> Result<()> {
    if n > MAX_BITS {
        return Err(Error::SizeCap {
            what: "cube dimension",
            value: n,
            max: MAX_BITS,
        });
    }
    Ok(())
}

#[inline]
fn full_mask(n: usize) -> u32 {
    if n == 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// A point of `{-1,1}^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CubePoint {
    n: u8,
    bits: u32,
}

impl CubePoint {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        check_bits(n)?;
        if bits & !full_mask(n) != 0 {
            return Err(Error::InvalidConfig(format!(
                "point mask {bits:#x} has bits beyond n={n}"
            )));
        }
        Ok(Self { n: n as u8, bits })
    }

    /// Builds a point from explicit `±1` coordinates.
    pub fn from_signs(signs: &[i32]) -> Result<Self> {
        let mut bits = 0u32;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => bits |= 1 << i,
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "coordinate {i} is {s}, expected ±1"
                    )))
                }
            }
        }
        Self::new(signs.len(), bits)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The `i`-th coordinate as `±1`.
    pub fn coord(&self, i: usize) -> i32 {
        if self.bits >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

/// A subset `S ⊆ [n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    n: u8,
    mask: u32,
}

impl SubsetMask {
    pub fn new(n: usize, mask: u32) -> Result<Self> {
        check_bits(n)?;
        if mask & !full_mask(n) != 0 {
            return Err(Error::InvalidConfig(format!(
                "subset mask {mask:#x} has bits beyond n={n}"
            )));
        }
        Ok(Self { n: n as u8, mask })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in indices {
            if i >= n {
                return Err(Error::InvalidConfig(format!("index {i} outside [0,{n})")));
            }
            mask |= 1 << i;
        }
        Self::new(n, mask)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    /// `|S|`.
    pub fn size(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    pub fn indices(&self) -> Vec<usize> {
        mask_indices(self.mask)
    }
}

/// Indices of the set bits of `mask`, ascending.
pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// `χ_S(x)` on raw masks.
#[inline]
pub fn character_sign(subset: u32, point: u32) -> i32 {
    if (subset & point).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Evaluates the character `χ_S(x) = ∏_{i∈S} x_i`.
pub fn eval_character(subset: SubsetMask, point: CubePoint) -> Result<i32> {
    if subset.n != point.n {
        return Err(Error::DimensionMismatch {
            expected: subset.n(),
            actual: point.n(),
        });
    }
    Ok(character_sign(subset.mask, point.bits))
}

/// All `k`-element subsets of `[n]` as ascending index lists, in
/// lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let mut i = k;
        while i > 0 && current[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// Masks of all subsets of `[n]` with at most `k` elements, ordered by size
/// and then lexicographically.
pub fn subsets_up_to(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for size in 0..=k.min(n) {
        for combo in combinations(n, size) {
            out.push(combo.iter().fold(0u32, |m, &i| m | 1 << i));
        }
    }
    out
}

/// A real function on `{-1,1}^n`, stored densely in [`CubePoint`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct CubeFunction<T> {
    n: usize,
    values: Vec<T>,
}

impl<T: Scalar> CubeFunction<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        check_bits(n)?;
        if values.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("value at point {i} is not finite")));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(CubePoint) -> T) -> Result<Self> {
        check_bits(n)?;
        let values = (0..1u32 << n)
            .map(|bits| f(CubePoint { n: n as u8, bits }))
            .collect();
        Self::new(n, values)
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        check_bits(n)?;
        Self::new(n, vec![c; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, x: CubePoint) -> T {
        self.values[x.bits as usize]
    }

    /// `E_x[f(x)^2]`.
    pub fn mean_square(&self) -> T {
        let s: T = self.values.iter().map(|&v| v * v).sum();
        s / count::<T>(self.values.len())
    }

    /// Whether every value is exactly `±1`.
    pub fn is_boolean(&self) -> bool {
        self.values
            .iter()
            .all(|&v| v == T::one() || v == -T::one())
    }
}

/// A sparse Fourier spectrum `S ↦ ĉ(S)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpectrum<T> {
    n: usize,
    coeffs: BTreeMap<u32, T>,
}

impl<T: Scalar> FourierSpectrum<T> {
    pub fn new(n: usize) -> Result<Self> {
        check_bits(n)?;
        Ok(Self {
            n,
            coeffs: BTreeMap::new(),
        })
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (u32, T)>) -> Result<Self> {
        let mut spec = Self::new(n)?;
        for (mask, c) in pairs {
            spec.insert(mask, c)?;
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, mask: u32, c: T) -> Result<()> {
        if mask & !full_mask(self.n) != 0 {
            return Err(Error::InvalidConfig(format!(
                "subset mask {mask:#x} has bits beyond n={}",
                self.n
            )));
        }
        self.coeffs.insert(mask, c);
        Ok(())
    }

    /// Coefficient of `S`; absent entries are zero.
    pub fn get(&self, mask: u32) -> T {
        self.coeffs.get(&mask).copied().unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, T)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ_S ĉ(S)^2`.
    pub fn sum_squares(&self) -> T {
        self.coeffs.values().map(|&c| c * c).sum()
    }

    /// Drops stored entries that are exactly zero.
    pub fn pruned(mut self) -> Self {
        self.coeffs.retain(|_, c| *c != T::zero());
        self
    }

    /// Dense coefficient vector indexed by subset mask.
    pub fn to_dense(&self) -> Vec<T> {
        let mut dense = vec![T::zero(); 1 << self.n];
        for (&m, &c) in &self.coeffs {
            dense[m as usize] = c;
        }
        dense
    }
}

/// In-place unnormalized Walsh–Hadamard butterfly:
/// `out[S] = Σ_x v[x] (-1)^{popcount(S & x)}`.
pub fn walsh_hadamard_in_place<T: Scalar>(data: &mut [T]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Dense Fourier coefficients `ĉ(S) = 2^{-n} Σ_x f(x) χ_S(x)`.
pub fn fourier_dense<T: Scalar>(f: &CubeFunction<T>) -> Vec<T> {
    let mut data = f.values.clone();
    walsh_hadamard_in_place(&mut data);
    let scale = pow2::<T>(-(f.n as i32));
    for v in &mut data {
        *v *= scale;
    }
    data
}

/// Fourier transform by the fast butterfly, `O(n 2^n)`. Exactly-zero
/// coefficients are not stored.
pub fn fourier_transform<T: Scalar>(f: &CubeFunction<T>) -> FourierSpectrum<T> {
    let dense = fourier_dense(f);
    let coeffs = dense
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != T::zero())
        .map(|(m, c)| (m as u32, c))
        .collect();
    FourierSpectrum { n: f.n, coeffs }
}

/// Evaluates `Σ_S ĉ(S) χ_S` at every point.
pub fn inverse_transform<T: Scalar>(spec: &FourierSpectrum<T>) -> CubeFunction<T> {
    let mut data = spec.to_dense();
    walsh_hadamard_in_place(&mut data);
    CubeFunction {
        n: spec.n,
        values: data,
    }
}

/// Largest `|S|` with a nonzero coefficient; 0 for an empty spectrum.
pub fn degree<T: Scalar>(spec: &FourierSpectrum<T>) -> usize {
    spec.iter()
        .filter(|(_, c)| *c != T::zero())
        .map(|(m, _)| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Number of nonzero coefficients.
pub fn support_size<T: Scalar>(spec: &FourierSpectrum<T>) -> usize {
    spec.iter().filter(|(_, c)| *c != T::zero()).count()
}

/// A probability distribution on `{-1,1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T>(CubeFunction<T>);

impl<T: Scalar> Distribution<T> {
    /// Validates nonnegativity and unit mass (within [`Scalar::mass_tol`]) and
    /// renormalizes the values by their sum.
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        let f = CubeFunction::new(n, values)?;
        if let Some(i) = f.values.iter().position(|&v| v < T::zero()) {
            return Err(Error::InvalidDistribution(format!(
                "negative probability {} at point {i}",
                f.values[i]
            )));
        }
        let total: T = f.values.iter().copied().sum();
        if (total - T::one()).abs() > T::mass_tol() {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} differs from 1"
            )));
        }
        let values = f.values.into_iter().map(|v| v / total).collect();
        Ok(Self(CubeFunction { n, values }))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_bits(n)?;
        let p = pow2::<T>(-(n as i32));
        Ok(Self(CubeFunction::new(n, vec![p; 1 << n])?))
    }

    pub fn point_mass(x: CubePoint) -> Self {
        let mut values = vec![T::zero(); 1 << x.n()];
        values[x.bits as usize] = T::one();
        Self(CubeFunction { n: x.n(), values })
    }

    /// Builds the distribution `p(x) = p_K(x_K) / 2^{n-|K|}` that depends only
    /// on the coordinates in `vars`, from probabilities of the restriction.
    pub fn junta(n: usize, vars: &[usize], restricted: &[T]) -> Result<Self> {
        let k = vars.len();
        if restricted.len() != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                actual: restricted.len(),
            });
        }
        if vars.iter().any(|&v| v >= n) {
            return Err(Error::InvalidConfig("junta variable outside [n]".into()));
        }
        check_bits(n)?;
        let scale = pow2::<T>(-((n - k) as i32));
        let values = (0..1u32 << n)
            .map(|x| restricted[project_bits(x, vars) as usize] * scale)
            .collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn prob(&self, x: CubePoint) -> T {
        self.0.value(x)
    }

    pub fn values(&self) -> &[T] {
        &self.0.values
    }

    pub fn as_function(&self) -> &CubeFunction<T> {
        &self.0
    }
}

/// Gathers the bits of `x` at positions `vars` into a compact `|vars|`-bit index.
#[inline]
pub fn project_bits(x: u32, vars: &[usize]) -> u32 {
    vars.iter()
        .enumerate()
        .fold(0u32, |acc, (j, &v)| acc | ((x >> v) & 1) << j)
}

/// `d_TV(p, q) = ½ Σ_x |p(x) − q(x)|`.
pub fn tv_distance<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            actual: q.n(),
        });
    }
    let l1: T = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(&a, &b)| (a - b).abs())
        .sum();
    Ok(l1 / crate::scalar::lit(2.0))
}
