//! Linear readouts on time-averaged reservoir observables.
//!
//! Two polynomial feature maps are provided. Both start with a constant 1
//! and then expand triples `(a, b, c)` of observables into the ten terms
//! `a, b, c, a², b², c², ab, bc, ca, abc`:
//!
//! - [`FeatureKind::Single`]: one triple `(⟨σˣᵢ⟩, ⟨σʸᵢ⟩, ⟨σᶻᵢ⟩)` per spin,
//!   1 + 10N features (61 for six spins);
//! - [`FeatureKind::Two`]: one triple `(⟨σˣᵢσˣⱼ⟩, ⟨σʸᵢσʸⱼ⟩, ⟨σᶻᵢσᶻⱼ⟩)` per
//!   pair i < j, followed by one triple `(⟨σˣᵢσʸⱼ⟩, ⟨σʸᵢσᶻⱼ⟩, ⟨σᶻᵢσˣⱼ⟩)` per
//!   ordered pair i ≠ j, 1 + 15N(N−1) features (451 for six spins).

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::reservoir::RawObservables;

/// Version tag of the feature ordering stored in model files.
pub const FEATURE_ORDER: &str = "qrc-features-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Single,
    Two,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 2] = [FeatureKind::Single, FeatureKind::Two];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Single => "single",
            FeatureKind::Two => "two",
        }
    }

    /// Feature count, bias included.
    pub fn feature_count(self, n_qubits: usize) -> usize {
        let pairs = n_qubits * n_qubits.saturating_sub(1) / 2;
        match self {
            FeatureKind::Single => 1 + 10 * n_qubits,
            FeatureKind::Two => 1 + 10 * pairs + 10 * 2 * pairs,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = QrcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(FeatureKind::Single),
            "two" => Ok(FeatureKind::Two),
            other => Err(QrcError::InvalidConfig(format!("unknown feature kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub kind: FeatureKind,
    pub values: Vec<f64>,
}

#[inline]
fn expand_triple(out: &mut Vec<f64>, a: f64, b: f64, c: f64) {
    out.extend_from_slice(&[a, b, c, a * a, b * b, c * c, a * b, b * c, c * a, a * b * c]);
}

pub fn features_single(raw: &RawObservables) -> Result<FeatureVector> {
    let n = raw.n_qubits;
    if raw.single.len() != 3 * n {
        return Err(QrcError::WrongArity {
            expected: 3 * n,
            found: raw.single.len(),
        });
    }
    let mut values = Vec::with_capacity(FeatureKind::Single.feature_count(n));
    values.push(1.0);
    for xyz in raw.single.chunks_exact(3) {
        expand_triple(&mut values, xyz[0], xyz[1], xyz[2]);
    }
    Ok(FeatureVector {
        kind: FeatureKind::Single,
        values,
    })
}

pub fn features_two(raw: &RawObservables) -> Result<FeatureVector> {
    let (_, same, mixed) = RawObservables::counts(raw.n_qubits);
    if raw.two_same.len() != same {
        return Err(QrcError::WrongArity {
            expected: same,
            found: raw.two_same.len(),
        });
    }
    if raw.two_mixed.len() != mixed {
        return Err(QrcError::WrongArity {
            expected: mixed,
            found: raw.two_mixed.len(),
        });
    }
    let mut values = Vec::with_capacity(FeatureKind::Two.feature_count(raw.n_qubits));
    values.push(1.0);
    for t in raw.two_same.chunks_exact(3).chain(raw.two_mixed.chunks_exact(3)) {
        expand_triple(&mut values, t[0], t[1], t[2]);
    }
    Ok(FeatureVector {
        kind: FeatureKind::Two,
        values,
    })
}

pub fn features(raw: &RawObservables, kind: FeatureKind) -> Result<FeatureVector> {
    match kind {
        FeatureKind::Single => features_single(raw),
        FeatureKind::Two => features_two(raw),
    }
}

/// Least-squares weights minimizing `Σ(y − Fw)² + ridge·Σ_{j≥1} w_j²`.
///
/// Column 0 is the bias and is never penalized. The system is reduced by a
/// Householder QR and then solved through the SVD of R, dropping singular
/// values below `max(M, P)·ε·σ_max`, so rank-deficient problems get the
/// minimum-norm solution.
pub fn fit(features: &[Vec<f64>], targets: &[f64], ridge: f64) -> Result<Vec<f64>> {
    let m = features.len();
    if m == 0 {
        return Err(QrcError::EmptyDataset);
    }
    if targets.len() != m {
        return Err(QrcError::WrongArity {
            expected: m,
            found: targets.len(),
        });
    }
    let p = features[0].len();
    if p == 0 {
        return Err(QrcError::WrongArity { expected: 1, found: 0 });
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(QrcError::InvalidConfig(format!("ridge = {ridge} must be ≥ 0")));
    }
    if let Some(row) = features.iter().find(|r| r.len() != p) {
        return Err(QrcError::WrongArity {
            expected: p,
            found: row.len(),
        });
    }
    let all_finite = features.iter().flatten().chain(targets).all(|v| v.is_finite());
    if !all_finite {
        return Err(QrcError::NonFiniteInput);
    }

    let penalty_rows = if ridge > 0.0 { p - 1 } else { 0 };
    let rows = m + penalty_rows;
    let mut a = DMatrix::<f64>::zeros(rows, p);
    for (i, row) in features.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    let root = ridge.sqrt();
    for j in 1..=penalty_rows {
        a[(m + j - 1, j)] = root;
    }
    let mut b = DVector::<f64>::zeros(rows);
    b.rows_mut(0, m).copy_from_slice(targets);

    let (reduced, rhs) = if rows > p {
        let qr = a.qr();
        let r = qr.r();
        qr.q_tr_mul(&mut b);
        (r, b.rows(0, p).into_owned())
    } else {
        (a, b)
    };
    let svd = reduced.svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = rows.max(p) as f64 * f64::EPSILON * sigma_max;
    let w = svd
        .solve(&rhs, tol)
        .map_err(|e| QrcError::Numerical(format!("least-squares solve failed: {e}")))?;
    let w: Vec<f64> = w.iter().copied().collect();
    if w.iter().any(|v| !v.is_finite()) {
        return Err(QrcError::Numerical("least-squares weights are not finite".into()));
    }
    Ok(w)
}

/// Trained readout plus what is needed to reuse it safely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub kind: FeatureKind,
    pub feature_order: String,
    pub n_qubits: usize,
    pub weights: Vec<f64>,
    pub v_max: f64,
    pub config_fingerprint: String,
    pub ridge: f64,
}

impl LinearModel {
    pub fn new(
        kind: FeatureKind,
        n_qubits: usize,
        weights: Vec<f64>,
        v_max: f64,
        config_fingerprint: String,
        ridge: f64,
    ) -> Result<Self> {
        let expected = kind.feature_count(n_qubits);
        if weights.len() != expected {
            return Err(QrcError::WrongArity {
                expected,
                found: weights.len(),
            });
        }
        if !(v_max > 0.0) {
            return Err(QrcError::InvalidConfig(format!("v_max = {v_max} must be positive")));
        }
        Ok(Self {
            kind,
            feature_order: FEATURE_ORDER.to_string(),
            n_qubits,
            weights,
            v_max,
            config_fingerprint,
            ridge,
        })
    }
}

/// Ẽ = w · f.
pub fn predict(model: &LinearModel, features: &FeatureVector) -> Result<f64> {
    if model.kind != features.kind {
        return Err(QrcError::KindMismatch {
            expected: model.kind.to_string(),
            found: features.kind.to_string(),
        });
    }
    if model.weights.len() != features.values.len() {
        return Err(QrcError::WrongArity {
            expected: model.weights.len(),
            found: features.values.len(),
        });
    }
    Ok(dot(&model.weights, &features.values))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae: f64,
    pub r2: f64,
    /// E − Ẽ per instance.
    pub residuals: Vec<f64>,
    pub predictions: Vec<f64>,
}

impl EvalReport {
    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.predictions.iter().zip(&self.residuals).map(|(p, r)| p + r).collect()
    }

    pub fn abs_errors(&self) -> Vec<f64> {
        self.residuals.iter().map(|r| r.abs()).collect()
    }
}

/// MAE and R², with Ē taken over the evaluated targets.
pub fn evaluate(predictions: &[f64], targets: &[f64]) -> Result<EvalReport> {
    if predictions.len() != targets.len() {
        return Err(QrcError::WrongArity {
            expected: targets.len(),
            found: predictions.len(),
        });
    }
    if predictions.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(QrcError::NonFiniteInput);
    }
    let m = targets.len();
    if m < 2 {
        return Err(QrcError::DegenerateTargets);
    }
    let mean = targets.iter().sum::<f64>() / m as f64;
    let total: f64 = targets.iter().map(|e| (mean - e) * (mean - e)).sum();
    if total == 0.0 {
        return Err(QrcError::DegenerateTargets);
    }
    let residuals: Vec<f64> = targets.iter().zip(predictions).map(|(e, p)| e - p).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let mae = residuals.iter().map(|r| r.abs()).sum::<f64>() / m as f64;
    Ok(EvalReport {
        mae,
        r2: 1.0 - sse / total,
        residuals,
        predictions: predictions.to_vec(),
    })
}

/// Contiguous train prefix and test suffix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Range<usize>,
    pub test: Range<usize>,
}

impl Split {
    pub fn has_empty_test(&self) -> bool {
        self.test.is_empty()
    }
}

/// Splits `len` ordered instances into the first `round(fraction·len)` for
/// training and the rest for testing. No shuffling.
pub fn split(len: usize, train_fraction: f64) -> Result<Split> {
    if len == 0 {
        return Err(QrcError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(QrcError::InvalidConfig(format!(
            "train_fraction = {train_fraction} must lie in (0, 1]"
        )));
    }
    let n_train = ((train_fraction * len as f64).round() as usize).clamp(1, len);
    let s = Split {
        train: 0..n_train,
        test: n_train..len,
    };
    if s.has_empty_test() {
        log::warn!("train fraction {train_fraction} leaves no test instances");
    }
    Ok(s)
}
