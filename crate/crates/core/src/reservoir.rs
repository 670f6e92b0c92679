//! Transverse-field Ising spin reservoir driven through its first qubit.
//!
//! Each potential point is written into qubit 1 as
//! `√(1−s)|0⟩ + √s|1⟩` with `s = V/V_max`, replacing whatever qubit 1 held,
//! and the whole register then evolves for `dt` under
//! `H = (h/2) Σ σᶻᵢ + Σ_{i<j} J_ij σˣᵢ σˣⱼ`. Expectations of the
//! single- and two-qubit Pauli observables are averaged over all steps.

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QrcError, Result};
use crate::linalg::ComplexMatrix;
use crate::pauli::{Axis, PauliString};
use crate::state::{propagator, DensityMatrix, UnitaryPropagator};

/// Slack allowed on the encoded value before it is rejected.
pub const INPUT_SLACK: f64 = 1e-12;

/// Largest register simulated with dense matrices.
pub const MAX_QUBITS: usize = 10;

/// Ordered pairs for the mixed two-qubit observables, σ^α_i σ^β_j.
pub const MIXED_AXES: [(Axis, Axis); 3] = [(Axis::X, Axis::Y), (Axis::Y, Axis::Z), (Axis::Z, Axis::X)];

fn default_n_qubits() -> usize {
    6
}
fn default_h() -> f64 {
    10.0
}
fn default_j_scale() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    10.0
}
fn default_coupling_seed() -> u64 {
    2021
}

/// Physical parameters of the reservoir, in units ħ = J_s = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    /// Transverse field.
    #[serde(default = "default_h")]
    pub h: f64,
    /// Couplings are drawn from [−j_scale/2, j_scale/2].
    #[serde(default = "default_j_scale")]
    pub j_scale: f64,
    /// Evolution time between injections.
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_coupling_seed")]
    pub coupling_seed: u64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            n_qubits: default_n_qubits(),
            h: default_h(),
            j_scale: default_j_scale(),
            dt: default_dt(),
            coupling_seed: default_coupling_seed(),
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 2 {
            return Err(QrcError::InvalidConfig(format!(
                "n_qubits = {} (need the input qubit plus at least one more)",
                self.n_qubits
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(QrcError::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !self.h.is_finite() || !self.j_scale.is_finite() {
            return Err(QrcError::InvalidConfig("h and j_scale must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }
}

/// Couplings J_ij for i < j, stored in lexicographic pair order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    n_qubits: usize,
    values: Vec<f64>,
}

/// Lexicographic list of 1-based pairs (i, j) with i < j.
pub fn unordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).collect()
}

/// 1-based pairs (i, j) with i ≠ j, ordered by i then j.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

impl CouplingMatrix {
    pub fn from_values(n_qubits: usize, values: Vec<f64>) -> Result<Self> {
        let expected = n_qubits * (n_qubits.saturating_sub(1)) / 2;
        if values.len() != expected {
            return Err(QrcError::WrongArity {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { n_qubits, values })
    }

    /// All couplings zero.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            values: vec![0.0; n_qubits * n_qubits.saturating_sub(1) / 2],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// J_ij for 1 ≤ i < j ≤ N.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(1 <= i && i < j && j <= self.n_qubits);
        let n = self.n_qubits;
        // pairs before row i: Σ_{r<i} (n - r)
        let offset = (i - 1) * n - (i - 1) * i / 2;
        self.values[offset + (j - i - 1)]
    }
}

/// Draws the couplings once, uniformly from [−j_scale/2, j_scale/2].
pub fn sample_couplings(config: &ReservoirConfig) -> CouplingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(config.coupling_seed);
    let half = config.j_scale.abs() / 2.0;
    let n_pairs = config.n_qubits * config.n_qubits.saturating_sub(1) / 2;
    let values = if half == 0.0 {
        vec![0.0; n_pairs]
    } else {
        let law = Uniform::new_inclusive(-half, half);
        (0..n_pairs).map(|_| law.sample(&mut rng)).collect()
    };
    CouplingMatrix {
        n_qubits: config.n_qubits,
        values,
    }
}

/// Dense `(h/2) Σ σᶻᵢ + Σ_{i<j} J_ij σˣᵢ σˣⱼ`.
pub fn build_hamiltonian(config: &ReservoirConfig, couplings: &CouplingMatrix) -> Result<ComplexMatrix> {
    config.validate()?;
    let n = config.n_qubits;
    if n > MAX_QUBITS {
        return Err(QrcError::InvalidConfig(format!(
            "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    if couplings.n_qubits() != n {
        return Err(QrcError::DimensionMismatch {
            expected: n,
            found: couplings.n_qubits(),
        });
    }
    let dim = config.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    let mut add_term = |p: PauliString, weight: f64| {
        for c in 0..dim {
            let (r, v) = p.column_entry(c);
            h[(r, c)] += v * weight;
        }
    };
    for i in 1..=n {
        add_term(PauliString::new(n, &[(i, Axis::Z)])?, 0.5 * config.h);
    }
    for (i, j) in unordered_pairs(n) {
        let jij = couplings.get(i, j);
        if jij != 0.0 {
            add_term(PauliString::new(n, &[(i, Axis::X), (j, Axis::X)])?, jij);
        }
    }
    Ok(h)
}

fn checked_input(s: f64) -> Result<f64> {
    if !s.is_finite() || !(-INPUT_SLACK..=1.0 + INPUT_SLACK).contains(&s) {
        return Err(QrcError::InputOutOfRange { value: s });
    }
    Ok(s.clamp(0.0, 1.0))
}

/// |ψ⟩⟨ψ| with |ψ⟩ = √(1−s)|0⟩ + √s|1⟩.
pub fn encode_input(s: f64) -> Result<DensityMatrix> {
    let s = checked_input(s)?;
    let amp = [Complex64::new((1.0 - s).sqrt(), 0.0), Complex64::new(s.sqrt(), 0.0)];
    let m = ComplexMatrix::from_fn(2, 2, |i, j| amp[i] * amp[j]);
    Ok(DensityMatrix::from_trusted(m))
}

/// |0,…,0⟩⟨0,…,0|.
pub fn reset_state(config: &ReservoirConfig) -> DensityMatrix {
    DensityMatrix::basis_state(config.n_qubits, 0)
}

/// One injection + evolution step: `U (|ψ(s)⟩⟨ψ(s)| ⊗ Tr₁ρ) U†`, followed
/// by re-Hermitization and trace renormalization.
pub fn step(rho: &DensityMatrix, s: f64, propagator: &UnitaryPropagator) -> Result<DensityMatrix> {
    let input = encode_input(s)?;
    let rest = rho.partial_trace_first_qubit()?;
    let mut out = propagator.evolve(&input.tensor(&rest))?;
    out.rehermitize();
    Ok(out)
}

/// Time-averaged single- and two-qubit expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawObservables {
    pub n_qubits: usize,
    /// ⟨σ^α_i⟩, index `3(i−1) + α`.
    pub single: Vec<f64>,
    /// ⟨σ^α_i σ^α_j⟩ for i < j, three axes per pair.
    pub two_same: Vec<f64>,
    /// ⟨σ^α_i σ^β_j⟩ for ordered i ≠ j and (α,β) in [`MIXED_AXES`].
    pub two_mixed: Vec<f64>,
}

impl RawObservables {
    pub fn counts(n_qubits: usize) -> (usize, usize, usize) {
        let pairs = n_qubits * n_qubits.saturating_sub(1) / 2;
        (3 * n_qubits, 3 * pairs, 6 * pairs)
    }

    pub fn total_count(n_qubits: usize) -> usize {
        let (a, b, c) = Self::counts(n_qubits);
        a + b + c
    }

    /// Splits a flat vector in `single ++ two_same ++ two_mixed` order.
    pub fn from_flat(n_qubits: usize, flat: &[f64]) -> Result<Self> {
        let (a, b, c) = Self::counts(n_qubits);
        if flat.len() != a + b + c {
            return Err(QrcError::WrongArity {
                expected: a + b + c,
                found: flat.len(),
            });
        }
        Ok(Self {
            n_qubits,
            single: flat[..a].to_vec(),
            two_same: flat[a..a + b].to_vec(),
            two_mixed: flat[a + b..].to_vec(),
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.single.len() + self.two_same.len() + self.two_mixed.len());
        v.extend_from_slice(&self.single);
        v.extend_from_slice(&self.two_same);
        v.extend_from_slice(&self.two_mixed);
        v
    }

    pub fn single_at(&self, site: usize, axis: Axis) -> f64 {
        self.single[3 * (site - 1) + axis as usize]
    }
}

/// The Pauli strings measured at every step, in [`RawObservables`] order.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    n_qubits: usize,
    strings: Vec<PauliString>,
}

impl ObservableSet {
    pub fn new(n_qubits: usize) -> Result<Self> {
        let mut strings = Vec::with_capacity(RawObservables::total_count(n_qubits));
        for i in 1..=n_qubits {
            for axis in Axis::ALL {
                strings.push(PauliString::new(n_qubits, &[(i, axis)])?);
            }
        }
        for (i, j) in unordered_pairs(n_qubits) {
            for axis in Axis::ALL {
                strings.push(PauliString::new(n_qubits, &[(i, axis), (j, axis)])?);
            }
        }
        for (i, j) in ordered_pairs(n_qubits) {
            for (a, b) in MIXED_AXES {
                strings.push(PauliString::new(n_qubits, &[(i, a), (j, b)])?);
            }
        }
        Ok(Self { n_qubits, strings })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn strings(&self) -> &[PauliString] {
        &self.strings
    }

    /// Evaluates every observable on `rho` through the dense-state path.
    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.strings.iter().map(|p| p.expectation(rho)).collect()
    }
}

/// Planar (split real/imaginary) row-major buffer.
#[derive(Clone, Debug)]
struct Planar {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Planar {
    fn zeros(len: usize) -> Self {
        Self {
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }
}

/// C = A·B for row-major planar matrices; A is m×k, B is k×n.
/// With `lower_only`, row i only fills columns 0..=i.
fn planar_matmul(m: usize, k: usize, n: usize, a: &Planar, b: &Planar, c: &mut Planar, lower_only: bool) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            unsafe { planar_matmul_avx2(m, k, n, a, b, c, lower_only) };
            return;
        }
    }
    planar_matmul_portable(m, k, n, a, b, c, lower_only);
}

// Wider vectors only; no FMA contraction, so results match the portable path bit for bit.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn planar_matmul_avx2(m: usize, k: usize, n: usize, a: &Planar, b: &Planar, c: &mut Planar, lower_only: bool) {
    planar_matmul_portable(m, k, n, a, b, c, lower_only);
}

const BLOCK: usize = 8;

#[inline(always)]
fn planar_matmul_portable(m: usize, k: usize, n: usize, a: &Planar, b: &Planar, c: &mut Planar, lower_only: bool) {
    if n % BLOCK != 0 {
        return planar_matmul_rows(m, k, n, a, b, c, lower_only);
    }
    for i in 0..m {
        let width = if lower_only { ((i + BLOCK) / BLOCK * BLOCK).min(n) } else { n };
        let a_re = &a.re[i * k..(i + 1) * k];
        let a_im = &a.im[i * k..(i + 1) * k];
        for jb in (0..width).step_by(BLOCK) {
            let mut acc_re = [0.0f64; BLOCK];
            let mut acc_im = [0.0f64; BLOCK];
            for kk in 0..k {
                let ar = a_re[kk];
                let ai = a_im[kk];
                let b_re: &[f64; BLOCK] = b.re[kk * n + jb..kk * n + jb + BLOCK].try_into().unwrap();
                let b_im: &[f64; BLOCK] = b.im[kk * n + jb..kk * n + jb + BLOCK].try_into().unwrap();
                for t in 0..BLOCK {
                    acc_re[t] += ar * b_re[t] - ai * b_im[t];
                    acc_im[t] += ar * b_im[t] + ai * b_re[t];
                }
            }
            c.re[i * n + jb..i * n + jb + BLOCK].copy_from_slice(&acc_re);
            c.im[i * n + jb..i * n + jb + BLOCK].copy_from_slice(&acc_im);
        }
    }
}

fn planar_matmul_rows(m: usize, k: usize, n: usize, a: &Planar, b: &Planar, c: &mut Planar, lower_only: bool) {
    for i in 0..m {
        let width = if lower_only { i + 1 } else { n };
        let c_re = &mut c.re[i * n..i * n + width];
        let c_im = &mut c.im[i * n..i * n + width];
        c_re.fill(0.0);
        c_im.fill(0.0);
        for kk in 0..k {
            let ar = a.re[i * k + kk];
            let ai = a.im[i * k + kk];
            let b_re = &b.re[kk * n..kk * n + width];
            let b_im = &b.im[kk * n..kk * n + width];
            for (((cr, ci), &br), &bi) in c_re.iter_mut().zip(c_im.iter_mut()).zip(b_re).zip(b_im) {
                *cr += ar * br - ai * bi;
                *ci += ar * bi + ai * br;
            }
        }
    }
}

/// One observable compiled to `Σ coeff · ρ[flat]` over the nonzero pattern.
#[derive(Clone, Debug)]
struct CompiledObservable {
    index: Vec<u32>,
    coeff_re: Vec<f64>,
    coeff_im: Vec<f64>,
}

impl CompiledObservable {
    fn new(p: &PauliString) -> Self {
        let dim = p.dim();
        let mut index = Vec::with_capacity(dim);
        let mut coeff_re = Vec::with_capacity(dim);
        let mut coeff_im = Vec::with_capacity(dim);
        for c in 0..dim {
            // Tr(ρP) = Σ_c ρ[c, r(c)] · P[r(c), c]
            let (r, v) = p.column_entry(c);
            index.push((c * dim + r) as u32);
            // Re(ρ·v) = ρ_re v_re − ρ_im v_im
            coeff_re.push(v.re);
            coeff_im.push(-v.im);
        }
        Self {
            index,
            coeff_re,
            coeff_im,
        }
    }

    #[inline]
    fn eval(&self, rho: &Planar) -> f64 {
        let mut acc = 0.0;
        for ((&idx, &cr), &ci) in self.index.iter().zip(&self.coeff_re).zip(&self.coeff_im) {
            let idx = idx as usize;
            acc += rho.re[idx] * cr + rho.im[idx] * ci;
        }
        acc
    }
}

/// Precomputed propagator blocks and observables for the block form of one step.
///
/// With `U = [U₀ | U₁]` split by the value of qubit 1 in the column index,
/// `U (|ψ⟩⟨ψ| ⊗ σ) U† = W σ W†` where `W = ψ₀U₀ + ψ₁U₁` is d × d/2.
#[derive(Clone, Debug)]
pub struct StepKernel {
    dim: usize,
    u0: Planar,
    u1: Planar,
    observables: Vec<CompiledObservable>,
}

struct Workspace {
    rho: Planar,
    sigma: Planar,
    w: Planar,
    w_dag: Planar,
    x: Planar,
}

impl StepKernel {
    pub fn new(propagator: &UnitaryPropagator, observables: &ObservableSet) -> Result<Self> {
        let dim = propagator.dim();
        if dim != 1 << observables.n_qubits() {
            return Err(QrcError::DimensionMismatch {
                expected: dim,
                found: 1 << observables.n_qubits(),
            });
        }
        if dim < 4 {
            return Err(QrcError::DimensionTooSmall {
                n_qubits: observables.n_qubits(),
            });
        }
        let half = dim / 2;
        let u = propagator.matrix();
        let mut u0 = Planar::zeros(dim * half);
        let mut u1 = Planar::zeros(dim * half);
        for r in 0..dim {
            for c in 0..half {
                let a = u[(r, c)];
                let b = u[(r, half + c)];
                u0.re[r * half + c] = a.re;
                u0.im[r * half + c] = a.im;
                u1.re[r * half + c] = b.re;
                u1.im[r * half + c] = b.im;
            }
        }
        Ok(Self {
            dim,
            u0,
            u1,
            observables: observables.strings().iter().map(CompiledObservable::new).collect(),
        })
    }

    pub fn n_observables(&self) -> usize {
        self.observables.len()
    }

    fn workspace(&self) -> Workspace {
        let d = self.dim;
        let h = d / 2;
        let mut rho = Planar::zeros(d * d);
        rho.re[0] = 1.0;
        Workspace {
            rho,
            sigma: Planar::zeros(h * h),
            w: Planar::zeros(d * h),
            w_dag: Planar::zeros(h * d),
            x: Planar::zeros(d * h),
        }
    }

    fn advance(&self, ws: &mut Workspace, s: f64) {
        let d = self.dim;
        let h = d / 2;
        let psi0 = (1.0 - s).sqrt();
        let psi1 = s.sqrt();

        // σ = Tr₁ ρ
        for a in 0..h {
            for b in 0..h {
                let top = a * d + b;
                let bottom = (h + a) * d + h + b;
                ws.sigma.re[a * h + b] = ws.rho.re[top] + ws.rho.re[bottom];
                ws.sigma.im[a * h + b] = ws.rho.im[top] + ws.rho.im[bottom];
            }
        }
        for idx in 0..d * h {
            ws.w.re[idx] = psi0 * self.u0.re[idx] + psi1 * self.u1.re[idx];
            ws.w.im[idx] = psi0 * self.u0.im[idx] + psi1 * self.u1.im[idx];
        }
        for r in 0..d {
            for k in 0..h {
                ws.w_dag.re[k * d + r] = ws.w.re[r * h + k];
                ws.w_dag.im[k * d + r] = -ws.w.im[r * h + k];
            }
        }
        planar_matmul(d, h, h, &ws.w, &ws.sigma, &mut ws.x, false);
        planar_matmul(d, h, d, &ws.x, &ws.w_dag, &mut ws.rho, true);

        // mirror the lower triangle, then renormalize the trace
        let mut trace = 0.0;
        for i in 0..d {
            ws.rho.im[i * d + i] = 0.0;
            trace += ws.rho.re[i * d + i];
            for j in 0..i {
                ws.rho.re[j * d + i] = ws.rho.re[i * d + j];
                ws.rho.im[j * d + i] = -ws.rho.im[i * d + j];
            }
        }
        let inv = 1.0 / trace;
        for v in ws.rho.re.iter_mut().chain(ws.rho.im.iter_mut()) {
            *v *= inv;
        }
    }

    /// Runs the injection loop, handing each step's expectations to `sink`.
    fn drive(&self, inputs: &[f64], mut sink: impl FnMut(usize, &[f64])) {
        let mut ws = self.workspace();
        let mut values = vec![0.0; self.observables.len()];
        for (k, &s) in inputs.iter().enumerate() {
            self.advance(&mut ws, s);
            for (v, obs) in values.iter_mut().zip(&self.observables) {
                *v = obs.eval(&ws.rho);
            }
            sink(k, &values);
        }
    }

    /// State after feeding `inputs`, starting from the reset state.
    pub fn final_state(&self, inputs: &[f64]) -> Result<DensityMatrix> {
        let mut ws = self.workspace();
        for &s in inputs {
            self.advance(&mut ws, checked_input(s)?);
        }
        let d = self.dim;
        let data = (0..d * d).map(|i| Complex64::new(ws.rho.re[i], ws.rho.im[i])).collect();
        Ok(DensityMatrix::from_trusted(ComplexMatrix::from_row_major(d, d, data)))
    }
}

/// Maps potential values to encoded inputs s_k = V_k / v_max.
pub fn rescale_potential(potential: &[f64], v_max: f64) -> Result<Vec<f64>> {
    if potential.is_empty() {
        return Err(QrcError::EmptyPotential);
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(QrcError::InvalidConfig(format!("v_max = {v_max} must be positive")));
    }
    potential
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if !v.is_finite() {
                return Err(QrcError::NonFinitePotential { index });
            }
            if v > v_max {
                return Err(QrcError::VMaxViolated { index, value: v, v_max });
            }
            checked_input(v / v_max)
        })
        .collect()
}

/// Feeds `potential` into a freshly reset reservoir and averages every
/// observable over all K steps.
pub fn run_instance(
    potential: &[f64],
    v_max: f64,
    propagator: &UnitaryPropagator,
    observables: &ObservableSet,
) -> Result<RawObservables> {
    let kernel = StepKernel::new(propagator, observables)?;
    run_with_kernel(&kernel, observables.n_qubits(), potential, v_max)
}

fn run_with_kernel(kernel: &StepKernel, n_qubits: usize, potential: &[f64], v_max: f64) -> Result<RawObservables> {
    let inputs = rescale_potential(potential, v_max)?;
    let mut sums = vec![0.0; kernel.n_observables()];
    kernel.drive(&inputs, |_, values| {
        for (s, v) in sums.iter_mut().zip(values) {
            *s += v;
        }
    });
    let k = inputs.len() as f64;
    for s in &mut sums {
        *s /= k;
    }
    RawObservables::from_flat(n_qubits, &sums)
}

/// A fully built reservoir: couplings, Hamiltonian, propagator and the
/// observable cache. Immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct Reservoir {
    config: ReservoirConfig,
    couplings: CouplingMatrix,
    hamiltonian: ComplexMatrix,
    propagator: UnitaryPropagator,
    observables: ObservableSet,
    kernel: StepKernel,
}

impl Reservoir {
    pub fn new(config: ReservoirConfig) -> Result<Self> {
        config.validate()?;
        let couplings = sample_couplings(&config);
        Self::with_couplings(config, couplings)
    }

    pub fn with_couplings(config: ReservoirConfig, couplings: CouplingMatrix) -> Result<Self> {
        let hamiltonian = build_hamiltonian(&config, &couplings)?;
        let propagator = propagator(&hamiltonian, config.dt)?;
        let observables = ObservableSet::new(config.n_qubits)?;
        let kernel = StepKernel::new(&propagator, &observables)?;
        Ok(Self {
            config,
            couplings,
            hamiltonian,
            propagator,
            observables,
            kernel,
        })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.config
    }

    pub fn couplings(&self) -> &CouplingMatrix {
        &self.couplings
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn propagator(&self) -> &UnitaryPropagator {
        &self.propagator
    }

    pub fn observables(&self) -> &ObservableSet {
        &self.observables
    }

    pub fn kernel(&self) -> &StepKernel {
        &self.kernel
    }

    pub fn run_instance(&self, potential: &[f64], v_max: f64) -> Result<RawObservables> {
        run_with_kernel(&self.kernel, self.config.n_qubits, potential, v_max)
    }

    /// Per-step expectations (row k holds the values on ρ_k), no averaging.
    pub fn trace_instance(&self, potential: &[f64], v_max: f64) -> Result<Vec<Vec<f64>>> {
        let inputs = rescale_potential(potential, v_max)?;
        let mut rows = Vec::with_capacity(inputs.len());
        self.kernel.drive(&inputs, |_, values| rows.push(values.to_vec()));
        Ok(rows)
    }

    /// SHA-256 over the configuration and the exact coupling bits.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"qrc-reservoir-v1");
        hasher.update((self.config.n_qubits as u64).to_le_bytes());
        for x in [self.config.h, self.config.j_scale, self.config.dt] {
            hasher.update(x.to_bits().to_le_bytes());
        }
        hasher.update(self.config.coupling_seed.to_le_bytes());
        for j in self.couplings.values() {
            hasher.update(j.to_bits().to_le_bytes());
        }
        hex_digest(hasher)
    }
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// ⟨σᶻ⟩ of the encoded input qubit: 1 − 2s.
pub fn encoded_z(s: f64) -> f64 {
    1.0 - 2.0 * s
}
