//! JSON file formats for distributions, states, Pauli spectra and circuits.
//!
//! Values go through `f64` on disk; `serde_json` prints the shortest
//! round-tripping decimal, so `f64` data survives a write/read cycle exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypercube::Distribution;
use crate::linalg::ComplexMatrix;
use crate::qac0::{Gate, Qac0Circuit};
use crate::qstate::{DensityMatrix, PauliSpectrum, PauliString};
use crate::scalar::{cplx, lit, to_f64, Scalar};

/// `{"n": int, "values": [2ⁿ reals]}` in cube-point index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    pub n: usize,
    pub values: Vec<f64>,
}

impl DistributionFile {
    pub fn from_distribution<T: Scalar>(p: &Distribution<T>) -> Self {
        Self {
            n: p.n(),
            values: p.values().iter().map(|&v| to_f64(v)).collect(),
        }
    }

    pub fn to_distribution<T: Scalar>(&self) -> Result<Distribution<T>> {
        Distribution::new(self.n, self.values.iter().map(|&v| lit(v)).collect())
    }
}

/// `{"n": int, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl StateFile {
    pub fn from_state<T: Scalar>(rho: &DensityMatrix<T>) -> Self {
        let (re, im) = split_matrix(rho.matrix());
        Self { n: rho.n(), re, im }
    }

    /// Validates the matrix as a density matrix.
    pub fn to_state<T: Scalar>(&self) -> Result<DensityMatrix<T>> {
        let m = join_matrix(&self.re, &self.im)?;
        if m.dim() != 1 << self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                actual: m.dim(),
            });
        }
        DensityMatrix::new(m)
    }
}

fn split_matrix<T: Scalar>(m: &ComplexMatrix<T>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = m.dim();
    let re = (0..d).map(|i| (0..d).map(|j| to_f64(m[(i, j)].re)).collect()).collect();
    let im = (0..d).map(|i| (0..d).map(|j| to_f64(m[(i, j)].im)).collect()).collect();
    (re, im)
}

fn join_matrix<T: Scalar>(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<ComplexMatrix<T>> {
    let d = re.len();
    if im.len() != d || re.iter().chain(im).any(|row| row.len() != d) {
        return Err(Error::Parse("re and im must be square matrices of equal size".into()));
    }
    let data = (0..d * d)
        .map(|idx| cplx(lit(re[idx / d][idx % d]), lit(im[idx / d][idx % d])))
        .collect();
    ComplexMatrix::from_vec(d, data)
}

/// One entry of a spectrum file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliEntry {
    pub string: String,
    pub coeff: f64,
}

/// `{"paulis": [{"string": "IZX…", "coeff": real}]}`; the qubit count is the
/// string length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub paulis: Vec<PauliEntry>,
}

impl SpectrumFile {
    pub fn from_spectrum<T: Scalar>(spec: &PauliSpectrum<T>) -> Self {
        Self {
            paulis: spec
                .iter()
                .map(|(p, c)| PauliEntry {
                    string: p.to_string(),
                    coeff: to_f64(c),
                })
                .collect(),
        }
    }

    pub fn to_spectrum<T: Scalar>(&self) -> Result<PauliSpectrum<T>> {
        let first = self
            .paulis
            .first()
            .ok_or_else(|| Error::Parse("empty spectrum has no qubit count".into()))?;
        let n = first.string.len();
        let pairs = self
            .paulis
            .iter()
            .map(|e| Ok((e.string.parse::<PauliString>()?, lit(e.coeff))))
            .collect::<Result<Vec<_>>>()?;
        PauliSpectrum::from_pairs(n, pairs)
    }
}

/// A gate in a circuit file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GateFile {
    U1 {
        q: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
    Toffoli {
        controls: Vec<usize>,
        target: usize,
    },
}

/// `{"n", "a", "layers": [[gate…]…], "sigma": <state file>}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub n: usize,
    pub a: usize,
    pub layers: Vec<Vec<GateFile>>,
    pub sigma: StateFile,
}

impl CircuitFile {
    pub fn from_circuit<T: Scalar>(c: &Qac0Circuit<T>) -> Self {
        let layers = c
            .layers()
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|g| match g {
                        Gate::SingleQubit { qubit, matrix } => {
                            let m = ComplexMatrix::from_vec(2, matrix.to_vec()).expect("2x2");
                            let (re, im) = split_matrix(&m);
                            GateFile::U1 { q: *qubit, re, im }
                        }
                        Gate::Toffoli { controls, target } => GateFile::Toffoli {
                            controls: controls.clone(),
                            target: *target,
                        },
                    })
                    .collect()
            })
            .collect();
        Self {
            n: c.n(),
            a: c.ancillas(),
            layers,
            sigma: StateFile::from_state(c.sigma()),
        }
    }

    pub fn to_circuit<T: Scalar>(&self) -> Result<Qac0Circuit<T>> {
        let layers = self
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|g| match g {
                        GateFile::U1 { q, re, im } => {
                            let m = join_matrix::<T>(re, im)?;
                            if m.dim() != 2 {
                                return Err(Error::Parse("u1 gates need 2x2 matrices".into()));
                            }
                            Ok(Gate::SingleQubit {
                                qubit: *q,
                                matrix: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
                            })
                        }
                        GateFile::Toffoli { controls, target } => Ok(Gate::Toffoli {
                            controls: controls.clone(),
                            target: *target,
                        }),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Qac0Circuit::new(self.n, self.a, layers, self.sigma.to_state()?)
    }
}

pub fn read_json<D: DeserializeOwned>(path: impl AsRef<Path>) -> Result<D> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<S: Serialize>(path: impl AsRef<Path>, value: &S) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
