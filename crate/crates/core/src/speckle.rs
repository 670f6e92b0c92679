//! Speckle-disorder potentials and the exact ground-state energy of a
//! particle in them.
//!
//! Units: ħ = m = 1. The grid holds `k_points` interior points of a box of
//! length `box_length`; with hard walls the spacing is `L / (K + 1)`, with
//! periodic boundaries `L / K`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::tridiag;

/// Aperture of the momentum-space filter applied to the complex field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeckleFilter {
    /// Sharp cutoff |q| ≤ π/σ. The intensity autocorrelation is then
    /// `1 + sinc²(πx/σ)`, first zero at lag σ.
    #[default]
    TopHat,
    /// Gaussian aperture, intensity covariance ∝ exp(−2x²/σ²).
    Gaussian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Hard walls; the ground state vanishes outside the grid.
    Dirichlet,
    /// A ring. Every site carries the same weight in the ground state.
    #[default]
    Periodic,
}

fn default_k_points() -> usize {
    1024
}
fn default_box_length() -> f64 {
    1024.0
}
fn default_correlation_length() -> f64 {
    8.0
}
fn default_v0() -> f64 {
    5e-5
}
fn default_dataset_seed() -> u64 {
    1
}
fn default_n_instances() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeckleParams {
    #[serde(default = "default_k_points")]
    pub k_points: usize,
    #[serde(default = "default_box_length")]
    pub box_length: f64,
    /// In grid spacings.
    #[serde(default = "default_correlation_length")]
    pub correlation_length: f64,
    /// Mean intensity.
    #[serde(default = "default_v0")]
    pub v0: f64,
    #[serde(default = "default_dataset_seed")]
    pub dataset_seed: u64,
    #[serde(default = "default_n_instances")]
    pub n_instances: usize,
    #[serde(default)]
    pub filter: SpeckleFilter,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Default for SpeckleParams {
    fn default() -> Self {
        Self {
            k_points: default_k_points(),
            box_length: default_box_length(),
            correlation_length: default_correlation_length(),
            v0: default_v0(),
            dataset_seed: default_dataset_seed(),
            n_instances: default_n_instances(),
            filter: SpeckleFilter::default(),
            boundary: Boundary::default(),
        }
    }
}

impl SpeckleParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_points < 2 {
            return Err(QrcError::InvalidConfig(format!("k_points = {} < 2", self.k_points)));
        }
        if self.boundary == Boundary::Periodic && self.k_points < 3 {
            return Err(QrcError::InvalidConfig("periodic boundaries need k_points ≥ 3".into()));
        }
        if !(self.correlation_length >= 2.0 && self.correlation_length.is_finite()) {
            return Err(QrcError::InvalidConfig(format!(
                "correlation_length = {} must be at least 2 grid spacings",
                self.correlation_length
            )));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(QrcError::InvalidConfig(format!("v0 = {} must be positive", self.v0)));
        }
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(QrcError::InvalidConfig(format!(
                "box_length = {} must be positive",
                self.box_length
            )));
        }
        Ok(())
    }

    /// Grid spacing implied by the boundary condition.
    pub fn grid_spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.box_length / (self.k_points as f64 + 1.0),
            Boundary::Periodic => self.box_length / self.k_points as f64,
        }
    }

    /// Position of grid point `k` (0-based).
    pub fn position(&self, k: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => (k as f64 + 1.0) * self.grid_spacing(),
            Boundary::Periodic => k as f64 * self.grid_spacing(),
        }
    }

    /// Amplitude of the filter for signed Fourier index `n`.
    fn filter_amplitude(&self, n: i64) -> f64 {
        let k = self.k_points as f64;
        let sigma = self.correlation_length;
        match self.filter {
            SpeckleFilter::TopHat => {
                if 2.0 * (n.unsigned_abs() as f64) * sigma <= k {
                    1.0
                } else {
                    0.0
                }
            }
            SpeckleFilter::Gaussian => {
                let arg = std::f64::consts::PI * n as f64 * sigma / k;
                (-0.5 * arg * arg).exp()
            }
        }
    }
}

/// One potential and its ground-state energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeckleInstance {
    pub potential: Vec<f64>,
    pub energy: f64,
}

/// Generates speckle potentials `V = v0 |η|² / ⟨|η|²⟩` where η is a
/// filtered circular complex Gaussian field.
///
/// Instance `i` draws from a ChaCha stream selected by `i` under
/// `dataset_seed`, so instances can be generated in any order.
#[derive(Clone)]
pub struct SpeckleGenerator {
    params: SpeckleParams,
    fft: Arc<dyn Fft<f64>>,
    filter: Vec<f64>,
    /// Ensemble mean of |η|².
    mean_intensity: f64,
}

impl std::fmt::Debug for SpeckleGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpeckleGenerator")
            .field("params", &self.params)
            .field("mean_intensity", &self.mean_intensity)
            .finish()
    }
}

impl SpeckleGenerator {
    pub fn new(params: SpeckleParams) -> Result<Self> {
        params.validate()?;
        let k = params.k_points;
        let fft = FftPlanner::new().plan_fft_inverse(k);
        let filter: Vec<f64> = (0..k)
            .map(|n| {
                let signed = if n <= k / 2 { n as i64 } else { n as i64 - k as i64 };
                params.filter_amplitude(signed)
            })
            .collect();
        let mean_intensity = 2.0 * filter.iter().map(|f| f * f).sum::<f64>();
        Ok(Self {
            params,
            fft,
            filter,
            mean_intensity,
        })
    }

    pub fn params(&self) -> &SpeckleParams {
        &self.params
    }

    pub fn generate(&self, index: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.dataset_seed);
        rng.set_stream(index);
        let mut field: Vec<Complex64> = self
            .filter
            .iter()
            .map(|&f| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * f
            })
            .collect();
        self.fft.process(&mut field);
        let scale = self.params.v0 / self.mean_intensity;
        field.iter().map(|z| z.norm_sqr() * scale).collect()
    }

    pub fn instance(&self, index: u64) -> Result<SpeckleInstance> {
        let potential = self.generate(index);
        let energy = ground_state_energy(&potential, &self.params)?;
        Ok(SpeckleInstance { potential, energy })
    }
}

/// One-off form of [`SpeckleGenerator::generate`].
pub fn generate_speckle(params: &SpeckleParams, instance_index: u64) -> Result<Vec<f64>> {
    Ok(SpeckleGenerator::new(params.clone())?.generate(instance_index))
}

/// Lowest eigenvalue of `−½ d²/dx² + V(x)` discretized with the
/// three-point Laplacian on the grid described by `params`.
pub fn ground_state_energy(potential: &[f64], params: &SpeckleParams) -> Result<f64> {
    if potential.len() < 2 {
        return Err(QrcError::InvalidConfig(format!(
            "ground state needs at least 2 grid points, got {}",
            potential.len()
        )));
    }
    if let Some(index) = potential.iter().position(|v| !v.is_finite()) {
        return Err(QrcError::NonFinitePotential { index });
    }
    let grid = SpeckleParams {
        k_points: potential.len(),
        ..params.clone()
    };
    let dx = grid.grid_spacing();
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(QrcError::InvalidConfig(format!("grid spacing {dx} is not positive")));
    }
    let kinetic = 1.0 / (dx * dx);
    let hop = -0.5 * kinetic;
    match grid.boundary {
        Boundary::Dirichlet => {
            let diag: Vec<f64> = potential.iter().map(|v| kinetic + v).collect();
            let off = vec![hop; potential.len() - 1];
            Ok(tridiag::smallest_eigenvalue(&diag, &off))
        }
        Boundary::Periodic => {
            if potential.len() < 3 {
                return Err(QrcError::InvalidConfig("periodic boundaries need k_points ≥ 3".into()));
            }
            let diag: Vec<f64> = potential.iter().map(|v| kinetic + v).collect();
            let off = vec![hop; potential.len() - 1];
            Ok(tridiag::eigenvalue_cyclic(&diag, &off, hop, 0))
        }
    }
}
