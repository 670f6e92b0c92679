//! Pauli matrices and Pauli strings on `n` qubits.
//!
//! Site 1 is the most significant tensor factor: for a basis index `c`,
//! the bit of site `i` is `(c >> (n - i)) & 1`. The partial trace in
//! [`crate::state`] uses the same ordering.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// The 2×2 Pauli matrix for `axis`.
pub fn sigma(axis: Axis) -> ComplexMatrix {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let data = match axis {
        Axis::X => vec![o, one, one, o],
        Axis::Y => vec![o, -i, i, o],
        Axis::Z => vec![one, o, o, -one],
    };
    ComplexMatrix::from_row_major(2, 2, data)
}

/// A product of single-site Pauli operators, identity elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    n_qubits: usize,
    factors: Vec<(usize, Axis)>,
    x_mask: usize,
    z_mask: usize,
    n_y: u32,
}

impl PauliString {
    /// `factors` are `(site, axis)` with 1-based, distinct sites.
    pub fn new(n_qubits: usize, factors: &[(usize, Axis)]) -> Result<Self> {
        let mut x_mask = 0usize;
        let mut z_mask = 0usize;
        let mut n_y = 0u32;
        let mut seen = 0usize;
        for &(site, axis) in factors {
            if site == 0 || site > n_qubits {
                return Err(QrcError::SiteOutOfRange { site, n_qubits });
            }
            let bit = 1usize << (n_qubits - site);
            if seen & bit != 0 {
                return Err(QrcError::DuplicateSite { site });
            }
            seen |= bit;
            match axis {
                Axis::X => x_mask |= bit,
                Axis::Z => z_mask |= bit,
                Axis::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(Self {
            n_qubits,
            factors: factors.to_vec(),
            x_mask,
            z_mask,
            n_y,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Nonzero entry in column `c`: row `c ^ x_mask`, with this value.
    #[inline]
    pub fn column_entry(&self, c: usize) -> (usize, Complex64) {
        let sign = if (c & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let phase = match self.n_y % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (c ^ self.x_mask, phase)
    }

    /// Dense matrix built as a Kronecker product over all sites.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut axes = vec![None; self.n_qubits];
        for &(site, axis) in &self.factors {
            axes[site - 1] = Some(axis);
        }
        axes.into_iter()
            .map(|a| a.map_or_else(|| ComplexMatrix::identity(2), sigma))
            .reduce(|acc, m| kron(&acc, &m))
            .unwrap_or_else(|| ComplexMatrix::identity(1))
    }

    /// Tr(ρ P) using the one-entry-per-column structure of P.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        let m = rho.matrix();
        if m.rows() != self.dim() {
            return Err(QrcError::DimensionMismatch {
                expected: self.dim(),
                found: m.rows(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..self.dim() {
            let (r, phase) = self.column_entry(c);
            acc += m[(c, r)] * phase;
        }
        real_part(acc)
    }

    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(|(site, axis)| format!("{}{}", axis.label(), site))
            .collect::<Vec<_>>()
            .join("·")
    }
}

/// Dense 2^n matrix of a Pauli string.
pub fn pauli_string(n_qubits: usize, factors: &[(usize, Axis)]) -> Result<ComplexMatrix> {
    Ok(PauliString::new(n_qubits, factors)?.to_matrix())
}

pub(crate) const IMAG_TOL: f64 = 1e-10;

fn real_part(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(QrcError::NonRealExpectation { imag: z.im });
    }
    Ok(z.re)
}

/// Tr(ρ · obs) for a dense Hermitian observable.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<f64> {
    let m = rho.matrix();
    if obs.rows() != m.rows() || obs.cols() != m.cols() {
        return Err(QrcError::DimensionMismatch {
            expected: m.rows(),
            found: obs.rows(),
        });
    }
    let deviation = obs.hermitian_deviation();
    if deviation > crate::linalg::HERMITIAN_TOL {
        return Err(QrcError::NotHermitian { deviation });
    }
    let d = m.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += m[(i, k)] * obs[(k, i)];
        }
    }
    real_part(acc)
}
