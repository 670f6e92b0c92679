//! End-to-end orchestration: dataset generation or ingestion, batch
//! reservoir runs, training, evaluation and report files.
//!
//! Every command is a pure function of the [`RunConfig`] and the files it
//! reads. All artifacts live in `output_dir` under fixed names (see
//! [`ArtifactPaths`]) and carry the config fingerprint, which each consumer
//! checks before use.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    format_f64, load_external_dataset, params_fingerprint, read_json, sha256_hex, write_file,
    write_json, Dataset, DatasetManifest, DatasetSource, LayoutDescriptor,
};
use crate::error::{QrcError, Result};
use crate::readout::{
    evaluate, features, fit, predict, split, EvalReport, FeatureKind, FeatureVector, LinearModel,
    FEATURE_ORDER,
};
use crate::reservoir::{hex_digest, Reservoir, ReservoirConfig};
use crate::speckle::{SpeckleGenerator, SpeckleParams};

pub const HISTOGRAM_BINS: usize = 50;
pub const HISTOGRAM_QUANTILE: f64 = 0.99;

fn default_kinds() -> Vec<FeatureKind> {
    FeatureKind::ALL.to_vec()
}
fn default_train_fraction() -> f64 {
    0.75
}
fn default_workers() -> usize {
    1
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Where to read an externally produced dataset from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalDataset {
    pub path: PathBuf,
    pub layout: LayoutDescriptor,
}

/// Contents of a run config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub reservoir: ReservoirConfig,
    #[serde(default)]
    pub speckle: SpeckleParams,
    /// When set, `generate` ingests this file instead of sampling speckle.
    #[serde(default)]
    pub external_dataset: Option<ExternalDataset>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<FeatureKind>,
    #[serde(default)]
    pub ridge: f64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// 0 means one worker per available core.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Relative paths are resolved against the config file's directory.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            reservoir: ReservoirConfig::default(),
            speckle: SpeckleParams::default(),
            external_dataset: None,
            kinds: default_kinds(),
            ridge: 0.0,
            train_fraction: default_train_fraction(),
            workers: default_workers(),
            output_dir: default_output_dir(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| QrcError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| QrcError::io(path, e))?;
        let mut config = Self::from_json(&text)
            .map_err(|e| QrcError::InvalidConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        if let Some(ext) = config.external_dataset.as_mut() {
            if ext.path.is_relative() {
                ext.path = base.join(&ext.path);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.reservoir.validate()?;
        self.speckle.validate()?;
        if self.kinds.is_empty() {
            return Err(QrcError::InvalidConfig("kinds must not be empty".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(QrcError::InvalidConfig(format!("ridge = {} must be ≥ 0", self.ridge)));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(QrcError::InvalidConfig(format!(
                "train_fraction = {} must lie in (0, 1]",
                self.train_fraction
            )));
        }
        if self.speckle.n_instances == 0 && self.external_dataset.is_none() {
            return Err(QrcError::InvalidConfig("n_instances must be positive".into()));
        }
        Ok(())
    }

    /// Hash over every field that can change a numeric result. Paths, the
    /// worker count and the list of kinds to run are left out.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            reservoir: &'a ReservoirConfig,
            speckle: Option<&'a SpeckleParams>,
            external_layout: Option<&'a LayoutDescriptor>,
            ridge: f64,
            train_fraction: f64,
        }
        let view = View {
            reservoir: &self.reservoir,
            speckle: self.external_dataset.is_none().then_some(&self.speckle),
            external_layout: self.external_dataset.as_ref().map(|e| &e.layout),
            ridge: self.ridge,
            train_fraction: self.train_fraction,
        };
        let mut hasher = Sha256::new();
        hasher.update(b"qrc-config-v1");
        hasher.update(serde_json::to_vec(&view).expect("config serializes"));
        hex_digest(hasher)
    }

    pub fn paths(&self) -> ArtifactPaths {
        ArtifactPaths::new(&self.output_dir)
    }
}

/// Fixed artifact names under the output directory.
#[derive(Clone, Debug)]
pub struct ArtifactPaths {
    pub dir: PathBuf,
}

impl ArtifactPaths {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }
    pub fn dataset_csv(&self) -> PathBuf {
        self.dir.join("dataset.csv")
    }
    pub fn dataset_manifest(&self) -> PathBuf {
        self.dir.join("dataset.manifest.json")
    }
    pub fn features_csv(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("features_{kind}.csv"))
    }
    pub fn features_sidecar(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("features_{kind}.json"))
    }
    pub fn model(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("model_{kind}.json"))
    }
    pub fn report(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("report_{kind}.json"))
    }
    pub fn histogram(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("histogram_{kind}.csv"))
    }
    pub fn scatter(&self, kind: FeatureKind) -> PathBuf {
        self.dir.join(format!("scatter_{kind}.csv"))
    }
    pub fn summary(&self) -> PathBuf {
        self.dir.join("summary.json")
    }
}

/// Command-line overrides shared by all commands.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Restrict to the first M instances (or feature rows).
    pub limit: Option<usize>,
    pub workers: Option<usize>,
    /// Overrides `RunConfig::kinds`.
    pub kind: Option<FeatureKind>,
}

impl RunOptions {
    fn kinds(&self, config: &RunConfig) -> Vec<FeatureKind> {
        match self.kind {
            Some(kind) => vec![kind],
            None => config.kinds.clone(),
        }
    }

    fn pool(&self, config: &RunConfig) -> Result<rayon::ThreadPool> {
        let workers = self.workers.unwrap_or(config.workers);
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| QrcError::InvalidConfig(format!("cannot start {workers} workers: {e}")))
    }
}

/// Maps `f` over `0..n` on the pool; results come back in index order.
fn ordered_map<T: Send>(
    pool: &rayon::ThreadPool,
    n: usize,
    what: &str,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let done = AtomicUsize::new(0);
    let step = (n / 20).max(1);
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let out = f(i);
                let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                if d % step == 0 || d == n {
                    log::info!("{what}: {d}/{n}");
                }
                out
            })
            .collect()
    })
}

/// `generate`: writes the dataset CSV and manifest.
pub fn cmd_generate(config: &RunConfig, opts: &RunOptions) -> Result<DatasetManifest> {
    let paths = config.paths();
    let dataset = match &config.external_dataset {
        Some(ext) => {
            log::info!("reading external dataset {}", ext.path.display());
            let full = load_external_dataset(&ext.path, &ext.layout)?;
            match opts.limit {
                Some(m) => full.prefix(m)?,
                None => full,
            }
        }
        None => {
            let n = opts.limit.map_or(config.speckle.n_instances, |m| m.min(config.speckle.n_instances));
            let params = SpeckleParams {
                n_instances: n,
                ..config.speckle.clone()
            };
            let generator = SpeckleGenerator::new(params.clone())?;
            let pool = opts.pool(config)?;
            let instances = ordered_map(&pool, n, "speckle", |i| generator.instance(i as u64))?;
            Dataset::from_instances(Some(params), instances)?
        }
    };
    let manifest = dataset.save(&paths.dataset_csv(), &paths.dataset_manifest())?;
    log::info!(
        "wrote {} instances to {} (v_max {:.6e})",
        manifest.n_instances,
        paths.dataset_csv().display(),
        manifest.v_max
    );
    Ok(manifest)
}

/// Loads the dataset and checks it belongs to this config.
pub fn load_dataset(config: &RunConfig, opts: &RunOptions) -> Result<(Dataset, DatasetManifest)> {
    let paths = config.paths();
    let (dataset, manifest) = Dataset::load(&paths.dataset_csv(), &paths.dataset_manifest())?;
    let artifact = paths.dataset_manifest().display().to_string();
    match (&config.external_dataset, manifest.source) {
        (None, DatasetSource::Generated) => {
            let expected = params_fingerprint(&config.speckle);
            let found = manifest.fingerprint.clone().unwrap_or_default();
            if expected != found {
                return Err(QrcError::FingerprintMismatch {
                    artifact,
                    expected,
                    found,
                });
            }
        }
        (Some(_), DatasetSource::External) => {}
        (ext, source) => {
            return Err(QrcError::FingerprintMismatch {
                artifact,
                expected: if ext.is_some() { "external" } else { "generated" }.into(),
                found: format!("{source:?}").to_lowercase(),
            })
        }
    }
    let dataset = match opts.limit {
        Some(m) if m < dataset.len() => dataset.prefix(m)?,
        _ => dataset,
    };
    Ok((dataset, manifest))
}

/// JSON sidecar of a features CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSidecar {
    pub kind: FeatureKind,
    pub feature_order: String,
    pub n_qubits: usize,
    pub n_features: usize,
    pub n_rows: usize,
    pub v_max: f64,
    pub config_fingerprint: String,
    pub reservoir_fingerprint: String,
    pub dataset_sha256: String,
    pub csv_sha256: String,
}

/// Feature rows with their targets.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub sidecar: FeatureSidecar,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl FeatureTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (row, target) in self.rows.iter().zip(&self.targets) {
            for v in row {
                out.push_str(&format_f64(*v));
                out.push(',');
            }
            out.push_str(&format_f64(*target));
            out.push('\n');
        }
        out
    }

    pub fn save(&mut self, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
        let csv = self.to_csv_string();
        self.sidecar.csv_sha256 = sha256_hex(csv.as_bytes());
        write_file(csv_path, csv.as_bytes())?;
        write_json(sidecar_path, &self.sidecar)
    }

    pub fn load(csv_path: &Path, sidecar_path: &Path) -> Result<Self> {
        let sidecar: FeatureSidecar = read_json(sidecar_path)?;
        let bytes = fs::read(csv_path).map_err(|e| QrcError::io(csv_path, e))?;
        let hash = sha256_hex(&bytes);
        if hash != sidecar.csv_sha256 {
            return Err(QrcError::FingerprintMismatch {
                artifact: csv_path.display().to_string(),
                expected: sidecar.csv_sha256,
                found: hash,
            });
        }
        let layout = LayoutDescriptor::canonical(sidecar.n_features);
        let parsed = crate::dataset::parse_rows(&bytes, &layout)?;
        if parsed.is_empty() {
            return Err(QrcError::EmptyDataset);
        }
        let (rows, targets) = parsed.into_iter().unzip();
        Ok(Self {
            sidecar,
            rows,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.rows.truncate(n);
        self.targets.truncate(n);
        self.sidecar.n_rows = self.rows.len();
    }
}

fn check_fingerprint(artifact: &Path, expected: &str, found: &str) -> Result<()> {
    if expected != found {
        return Err(QrcError::FingerprintMismatch {
            artifact: artifact.display().to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// `features`: runs the reservoir over every instance and writes one
/// features file per requested kind.
pub fn cmd_features(config: &RunConfig, opts: &RunOptions) -> Result<Vec<FeatureSidecar>> {
    let paths = config.paths();
    let (dataset, manifest) = load_dataset(config, opts)?;
    let reservoir = Reservoir::new(config.reservoir.clone())?;
    let pool = opts.pool(config)?;
    log::info!(
        "running {} instances through a {}-qubit reservoir on {} workers",
        dataset.len(),
        config.reservoir.n_qubits,
        pool.current_num_threads()
    );
    let v_max = dataset.v_max;
    let raws = ordered_map(&pool, dataset.len(), "reservoir", |i| {
        reservoir.run_instance(&dataset.instances[i].potential, v_max)
    })?;
    let targets = dataset.energies();
    let mut sidecars = Vec::new();
    for kind in opts.kinds(config) {
        let rows = raws
            .iter()
            .map(|raw| features(raw, kind).map(|f| f.values))
            .collect::<Result<Vec<_>>>()?;
        let mut table = FeatureTable {
            sidecar: FeatureSidecar {
                kind,
                feature_order: FEATURE_ORDER.to_string(),
                n_qubits: config.reservoir.n_qubits,
                n_features: kind.feature_count(config.reservoir.n_qubits),
                n_rows: rows.len(),
                v_max,
                config_fingerprint: config.fingerprint(),
                reservoir_fingerprint: reservoir.fingerprint(),
                dataset_sha256: manifest.csv_sha256.clone(),
                csv_sha256: String::new(),
            },
            rows,
            targets: targets.clone(),
        };
        table.save(&paths.features_csv(kind), &paths.features_sidecar(kind))?;
        log::info!("wrote {}", paths.features_csv(kind).display());
        sidecars.push(table.sidecar);
    }
    Ok(sidecars)
}

/// Loads a features file and checks it against the config and kind.
pub fn load_features(config: &RunConfig, opts: &RunOptions, kind: FeatureKind) -> Result<FeatureTable> {
    let paths = config.paths();
    let mut table = FeatureTable::load(&paths.features_csv(kind), &paths.features_sidecar(kind))?;
    let sidecar_path = paths.features_sidecar(kind);
    check_fingerprint(&sidecar_path, &config.fingerprint(), &table.sidecar.config_fingerprint)?;
    if table.sidecar.kind != kind {
        return Err(QrcError::KindMismatch {
            expected: kind.to_string(),
            found: table.sidecar.kind.to_string(),
        });
    }
    if let Some(m) = opts.limit {
        table.truncate(m);
    }
    Ok(table)
}

/// Metrics of one model on the train and test parts of the split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub r2: f64,
}

impl From<&EvalReport> for Metrics {
    fn from(r: &EvalReport) -> Self {
        Self { mae: r.mae, r2: r.r2 }
    }
}

/// `train`: fits one model per kind on the training prefix.
pub fn cmd_train(config: &RunConfig, opts: &RunOptions) -> Result<Vec<(LinearModel, Metrics)>> {
    let paths = config.paths();
    let mut out = Vec::new();
    for kind in opts.kinds(config) {
        let table = load_features(config, opts, kind)?;
        let s = split(table.len(), config.train_fraction)?;
        let weights = fit(&table.rows[s.train.clone()], &table.targets[s.train.clone()], config.ridge)?;
        let model = LinearModel::new(
            kind,
            table.sidecar.n_qubits,
            weights,
            table.sidecar.v_max,
            config.fingerprint(),
            config.ridge,
        )?;
        let predictions = predict_rows(&model, &table.rows[s.train.clone()])?;
        let metrics = Metrics::from(&evaluate(&predictions, &table.targets[s.train.clone()])?);
        log::info!(
            "{kind}: trained on {} rows, train MAE {:.6e}, R² {:.6}",
            s.train.len(),
            metrics.mae,
            metrics.r2
        );
        write_json(&paths.model(kind), &model)?;
        out.push((model, metrics));
    }
    Ok(out)
}

fn predict_rows(model: &LinearModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|values| {
            predict(
                model,
                &FeatureVector {
                    kind: model.kind,
                    values: values.clone(),
                },
            )
        })
        .collect()
}

/// Absolute-error histogram: `bins` uniform bins on `[0, upper]` plus an
/// overflow count for errors above `upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub overflow: usize,
}

impl Histogram {
    /// Upper edge at the nearest-rank `quantile` of `values`.
    pub fn of_abs_errors(values: &[f64], bins: usize, quantile: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let upper = if sorted.is_empty() {
            0.0
        } else {
            let rank = ((quantile * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[rank - 1]
        };
        let edges: Vec<f64> = (0..=bins).map(|b| upper * b as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        let mut overflow = 0;
        for &v in values {
            if v > upper {
                overflow += 1;
            } else if upper == 0.0 {
                counts[0] += 1;
            } else {
                let b = ((v / upper) * bins as f64).floor() as usize;
                counts[b.min(bins - 1)] += 1;
            }
        }
        Self {
            edges,
            counts,
            overflow,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.overflow
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("lower,upper,count\n");
        for (b, count) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{count}", format_f64(self.edges[b]), format_f64(self.edges[b + 1]));
        }
        let _ = writeln!(out, "{},inf,{}", format_f64(*self.edges.last().unwrap_or(&0.0)), self.overflow);
        out
    }
}

/// Everything `evaluate` produces for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: FeatureKind,
    pub config_fingerprint: String,
    pub model_sha256: String,
    pub features_sha256: String,
    pub n_train: usize,
    pub n_test: usize,
    pub train: Metrics,
    pub test: Metrics,
    /// Test MAE, drawn as a marker on the error histogram.
    pub mae_marker: f64,
    pub histogram: Histogram,
    pub test_eval: EvalReport,
}

/// Scatter file: one `(E, Ẽ)` row per test instance.
pub fn scatter_csv(report: &EvalReport) -> String {
    let mut out = String::from("target,prediction\n");
    for (e, p) in report.targets().iter().zip(&report.predictions) {
        let _ = writeln!(out, "{},{}", format_f64(*e), format_f64(*p));
    }
    out
}

/// `evaluate`: applies each trained model and writes the report, the
/// error histogram and the scatter data.
pub fn cmd_evaluate(config: &RunConfig, opts: &RunOptions) -> Result<Vec<Report>> {
    let paths = config.paths();
    let mut out = Vec::new();
    for kind in opts.kinds(config) {
        let model_path = paths.model(kind);
        let model_bytes = fs::read(&model_path).map_err(|e| QrcError::io(&model_path, e))?;
        let model: LinearModel =
            serde_json::from_slice(&model_bytes).map_err(|e| QrcError::json(&model_path, e))?;
        check_fingerprint(&model_path, &config.fingerprint(), &model.config_fingerprint)?;
        if model.kind != kind {
            return Err(QrcError::KindMismatch {
                expected: kind.to_string(),
                found: model.kind.to_string(),
            });
        }
        let table = load_features(config, opts, kind)?;
        if model.v_max.to_bits() != table.sidecar.v_max.to_bits() {
            return Err(QrcError::FingerprintMismatch {
                artifact: model_path.display().to_string(),
                expected: format!("v_max {}", table.sidecar.v_max),
                found: format!("v_max {}", model.v_max),
            });
        }
        let s = split(table.len(), config.train_fraction)?;
        let predictions = predict_rows(&model, &table.rows)?;
        let train = evaluate(&predictions[s.train.clone()], &table.targets[s.train.clone()])?;
        let test = evaluate(&predictions[s.test.clone()], &table.targets[s.test.clone()])?;
        let histogram = Histogram::of_abs_errors(&test.abs_errors(), HISTOGRAM_BINS, HISTOGRAM_QUANTILE);
        let report = Report {
            kind,
            config_fingerprint: config.fingerprint(),
            model_sha256: sha256_hex(&model_bytes),
            features_sha256: table.sidecar.csv_sha256.clone(),
            n_train: s.train.len(),
            n_test: s.test.len(),
            train: Metrics::from(&train),
            test: Metrics::from(&test),
            mae_marker: test.mae,
            histogram,
            test_eval: test,
        };
        write_file(&paths.histogram(kind), report.histogram.to_csv_string().as_bytes())?;
        write_file(&paths.scatter(kind), scatter_csv(&report.test_eval).as_bytes())?;
        write_json(&paths.report(kind), &report)?;
        log::info!(
            "{kind}: test MAE {:.6e}, R² {:.6} on {} instances",
            report.test.mae,
            report.test.r2,
            report.n_test
        );
        out.push(report);
    }
    Ok(out)
}

/// Train and test metrics per kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_fingerprint: String,
    pub rows: Vec<SummaryRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub kind: FeatureKind,
    pub train: Metrics,
    pub test: Metrics,
}

impl Summary {
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<8} {:>15} {:>12} {:>15} {:>12}\n",
            "model", "train MAE", "train R²", "test MAE", "test R²"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>15.6e} {:>12.6} {:>15.6e} {:>12.6}",
                row.kind.as_str(),
                row.train.mae,
                row.train.r2,
                row.test.mae,
                row.test.r2
            );
        }
        out
    }

    pub fn row(&self, kind: FeatureKind) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.kind == kind)
    }
}

/// `run-all`: generate, features, train and evaluate in sequence.
pub fn cmd_run_all(config: &RunConfig, opts: &RunOptions) -> Result<Summary> {
    cmd_generate(config, opts)?;
    // the dataset on disk already honours the limit
    let downstream = RunOptions {
        limit: None,
        ..opts.clone()
    };
    cmd_features(config, &downstream)?;
    cmd_train(config, &downstream)?;
    let reports = cmd_evaluate(config, &downstream)?;
    let summary = Summary {
        config_fingerprint: config.fingerprint(),
        rows: reports
            .iter()
            .map(|r| SummaryRow {
                kind: r.kind,
                train: r.train,
                test: r.test,
            })
            .collect(),
    };
    write_json(&config.paths().summary(), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let config = RunConfig::from_json("{}").unwrap();
        assert_eq!(config, RunConfig::default());
        assert_eq!(RunConfig::from_json(&config.to_json()).unwrap(), config);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_json(r#"{"ridge": 0, "bogus": 1}"#),
            Err(QrcError::InvalidConfig(_))
        ));
        assert!(RunConfig::from_json(r#"{"speckle": {"sigma": 3}}"#).is_err());
    }

    #[test]
    fn fingerprint_ignores_paths_and_workers() {
        let a = RunConfig::default();
        let b = RunConfig {
            workers: 8,
            output_dir: "elsewhere".into(),
            kinds: vec![FeatureKind::Two],
            ..a.clone()
        };
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = RunConfig {
            ridge: 1e-6,
            ..a.clone()
        };
        assert_ne!(a.fingerprint(), c.fingerprint());
        let mut d = a.clone();
        d.reservoir.dt = 3.0;
        assert_ne!(a.fingerprint(), d.fingerprint());
    }

    #[test]
    fn histogram_of_perfect_model_is_one_spike() {
        let h = Histogram::of_abs_errors(&[0.0; 7], 50, 0.99);
        assert_eq!(h.counts[0], 7);
        assert_eq!(h.total(), 7);
        assert_eq!(h.overflow, 0);
    }

    #[test]
    fn histogram_counts_every_value() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let h = Histogram::of_abs_errors(&values, 50, 0.99);
        assert_eq!(h.total(), 1000);
        // nearest rank: the 990th smallest value is the upper edge
        assert_eq!(*h.edges.last().unwrap(), 989f64.sqrt());
        assert_eq!(h.overflow, 10);
        assert_eq!(h.edges.len(), 51);
    }

    #[test]
    fn floats_survive_json_exactly() {
        // the default serde_json parser reads this one ulp low
        let x = 9.475075991624969e-7_f64;
        let values: Vec<f64> = (1..2000).map(|i| x * i as f64 / 7.0).chain([x, f64::MIN_POSITIVE, 1.0 / 3.0]).collect();
        let back: Vec<f64> = serde_json::from_str(&serde_json::to_string(&values).unwrap()).unwrap();
        for (a, b) in values.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
