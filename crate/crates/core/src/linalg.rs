//! Dense complex matrices and the few factorizations the reservoir needs.
//!
//! Storage is row-major. Sizes stay small (2^N with N ≤ 10), so everything
//! here is plain loops over a `Vec<Complex64>`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QrcError, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "row-major data has wrong length");
        Self { rows, cols, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖A − A†‖_max, or infinity for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`; `a` is the more significant factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    out
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    /// V diag(f(λ)) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut scaled = v.clone();
        for i in 0..n {
            for k in 0..n {
                scaled[(i, k)] *= weights[k];
            }
        }
        scaled.matmul(&v.dagger())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| Complex64::new(l, 0.0))
    }
}

/// Eigendecomposition `h = V diag(λ) V†` with ascending eigenvalues.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(QrcError::NotHermitian { deviation });
    }
    if !h.is_finite() {
        return Err(QrcError::Numerical("non-finite matrix entry".into()));
    }
    let n = h.rows();
    let (values, vectors) = if h.data.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(n, n, |i, j| h[(i, j)].re);
        let eig = nalgebra::SymmetricEigen::new(real);
        let vectors = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(eig.eigenvectors[(i, j)], 0.0));
        (eig.eigenvalues.as_slice().to_vec(), vectors)
    } else {
        jacobi_eig(h)?
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Cyclic Jacobi for complex Hermitian matrices. Each rotation first turns
/// `a_pq` real with a phase on column `q`, then applies the real symmetric
/// rotation that zeroes it.
fn jacobi_eig(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.rows();
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = 1e-3 * f64::EPSILON * norm;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            let values = (0..n).map(|k| a[(k, k)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let r = b.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = (b / r).conj();
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s·phase, c·phase]]
                let (gpp, gpq) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0));
                let (gqp, gqq) = (-phase * s, phase * c);
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * gpp + y * gqp;
                    a[(k, q)] = x * gpq + y * gqq;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * gpp + y * gqp;
                    v[(k, q)] = x * gpq + y * gqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = gpp.conj() * x + gqp.conj() * y;
                    a[(q, k)] = gpq.conj() * x + gqq.conj() * y;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
            }
        }
    }
    Err(QrcError::Numerical("Jacobi eigensolver did not converge".into()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(h)?.eigenvalues[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{sigma, Axis};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_sigma_z_identity_is_diagonal() {
        let zi = kron(&sigma(Axis::Z), &ComplexMatrix::identity(2));
        assert_eq!(zi, ComplexMatrix::from_real_diagonal(&[1.0, 1.0, -1.0, -1.0]));
    }

    #[test]
    fn kron_xx_maps_00_to_11() {
        let xx = kron(&sigma(Axis::X), &sigma(Axis::X));
        // |00> is basis vector 0, |11> is basis vector 3; brute-force the column.
        let ket00 = ComplexMatrix::from_fn(4, 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }));
        let out = xx.matmul(&ket00);
        for i in 0..4 {
            let expected = if i == 3 { 1.0 } else { 0.0 };
            assert_eq!(out[(i, 0)], c(expected));
        }
    }

    #[test]
    fn eig_of_pauli_z_and_x() {
        let ez = hermitian_eig(&sigma(Axis::Z)).unwrap();
        assert_eq!(ez.eigenvalues, vec![-1.0, 1.0]);

        let ex = hermitian_eig(&sigma(Axis::X)).unwrap();
        assert!((ex.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((ex.eigenvalues[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (|0> - |1>)/√2 up to a global phase
        let v0 = (ex.eigenvectors[(0, 0)], ex.eigenvectors[(1, 0)]);
        let phase = v0.0 / s;
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((v0.1 + phase * s).norm() < 1e-12);
        let v1 = (ex.eigenvectors[(0, 1)], ex.eigenvectors[(1, 1)]);
        let phase = v1.0 / s;
        assert!((v1.1 - phase * s).norm() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_eig(&m), Err(QrcError::NotHermitian { .. })));
    }

    #[test]
    fn dagger_and_trace() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| Complex64::new(i as f64, j as f64));
        let d = m.dagger();
        assert_eq!((d.rows(), d.cols()), (3, 2));
        assert_eq!(d[(2, 1)], Complex64::new(1.0, -2.0));
        assert_eq!(ComplexMatrix::identity(5).trace(), c(5.0));
    }
}
