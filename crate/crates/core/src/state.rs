//! Density matrices and unitary propagators.

use num_complex::Complex64;

use crate::error::{QrcError, Result};
use crate::linalg::{hermitian_eig, kron, min_eigenvalue, ComplexMatrix, HERMITIAN_TOL};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-12;

/// A Hermitian, unit-trace, positive-semidefinite 2^N × 2^N matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

fn qubit_count(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QrcError::NotPowerOfTwo { dim });
    }
    Ok(dim.trailing_zeros() as usize)
}

impl DensityMatrix {
    /// Checks Hermiticity and trace. Positivity is only checked by
    /// [`DensityMatrix::validate`], which needs a full eigensolve.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QrcError::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let n_qubits = qubit_count(matrix.rows())?;
        let rho = Self { n_qubits, matrix };
        rho.check_cheap()?;
        Ok(rho)
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let n_qubits = matrix.rows().trailing_zeros() as usize;
        Self { n_qubits, matrix }
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(QrcError::InvalidDensityMatrix(format!(
                "state vector has squared norm {norm}"
            )));
        }
        let d = amplitudes.len();
        let m = ComplexMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj());
        Self::new(m)
    }

    /// |b⟩⟨b| for a computational basis state.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim);
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Self { n_qubits, matrix: m }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    fn check_cheap(&self) -> Result<()> {
        if !self.matrix.is_finite() {
            return Err(QrcError::InvalidDensityMatrix("non-finite entry".into()));
        }
        let deviation = self.matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(QrcError::NotHermitian { deviation });
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QrcError::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        Ok(())
    }

    /// Full check: Hermitian, unit trace, smallest eigenvalue ≥ −1e-9.
    pub fn validate(&self) -> Result<()> {
        self.check_cheap()?;
        let lowest = min_eigenvalue(&self.matrix)?;
        if lowest < -PSD_TOL {
            return Err(QrcError::InvalidDensityMatrix(format!(
                "smallest eigenvalue {lowest:.3e} is negative"
            )));
        }
        Ok(())
    }

    /// ρ ← (ρ + ρ†)/2, then ρ ← ρ / Tr ρ.
    pub fn rehermitize(&mut self) {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let avg = (self.matrix[(i, j)] + self.matrix[(j, i)].conj()) * 0.5;
                self.matrix[(i, j)] = avg;
                self.matrix[(j, i)] = avg.conj();
            }
        }
        let tr = self.trace();
        if tr != 0.0 {
            let inv = Complex64::new(1.0 / tr, 0.0);
            for z in self.matrix.as_mut_slice() {
                *z *= inv;
            }
        }
    }

    /// Tr₁ ρ: traces out site 1, the most significant tensor factor.
    pub fn partial_trace_first_qubit(&self) -> Result<DensityMatrix> {
        if self.n_qubits < 2 {
            return Err(QrcError::DimensionTooSmall {
                n_qubits: self.n_qubits,
            });
        }
        let half = self.dim() / 2;
        let m = &self.matrix;
        let reduced = ComplexMatrix::from_fn(half, half, |a, b| m[(a, b)] + m[(half + a, half + b)]);
        Ok(DensityMatrix {
            n_qubits: self.n_qubits - 1,
            matrix: reduced,
        })
    }

    /// `self ⊗ other`, with `self` on the leading sites.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: kron(&self.matrix, &other.matrix),
        }
    }
}

/// Free function form of [`DensityMatrix::partial_trace_first_qubit`].
pub fn partial_trace_first_qubit(rho: &DensityMatrix) -> Result<DensityMatrix> {
    rho.partial_trace_first_qubit()
}

/// e^{−iHΔt} for a time-independent Hermitian H.
#[derive(Clone, Debug)]
pub struct UnitaryPropagator {
    matrix: ComplexMatrix,
    dt: f64,
}

impl UnitaryPropagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// ‖U U† − I‖_max.
    pub fn unitarity_error(&self) -> f64 {
        self.matrix
            .matmul(&self.matrix.dagger())
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// U ρ U†.
    pub fn evolve(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim() {
            return Err(QrcError::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let out = self.matrix.matmul(rho.matrix()).matmul(&self.matrix.dagger());
        Ok(DensityMatrix::from_trusted(out))
    }
}

/// U = V e^{−iλ dt} V† from the eigendecomposition of `h`.
pub fn propagator(h: &ComplexMatrix, dt: f64) -> Result<UnitaryPropagator> {
    let eig = hermitian_eig(h)?;
    let matrix = eig.reconstruct_with(|l| Complex64::from_polar(1.0, -l * dt));
    let u = UnitaryPropagator { matrix, dt };
    let err = u.unitarity_error();
    if err > UNITARY_TOL {
        return Err(QrcError::Numerical(format!(
            "propagator unitarity error {err:.3e}"
        )));
    }
    Ok(u)
}
