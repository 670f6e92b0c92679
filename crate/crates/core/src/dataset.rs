//! Datasets of (potential, energy) rows and their on-disk formats.
//!
//! The CSV has no header: K potential columns followed by the energy, every
//! value written with 17 significant digits. A JSON manifest sits next to
//! it with the generation parameters, `v_max` and the SHA-256 of the CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QrcError, Result};
use crate::reservoir::hex_digest;
use crate::speckle::{SpeckleGenerator, SpeckleInstance, SpeckleParams};

pub const DATASET_FORMAT: &str = "qrc-dataset-v1";

pub const UNITS: &str = "hbar = m = 1; energies and potentials share one unit; \
positions in units of the grid spacing implied by params.boundary";

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// `None` for data loaded from an external file.
    pub params: Option<SpeckleParams>,
    pub instances: Vec<SpeckleInstance>,
    pub v_max: f64,
}

impl Dataset {
    pub fn from_instances(params: Option<SpeckleParams>, instances: Vec<SpeckleInstance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(QrcError::EmptyDataset);
        }
        let k = instances[0].potential.len();
        for (row, inst) in instances.iter().enumerate() {
            if inst.potential.len() != k {
                return Err(QrcError::ShapeMismatch {
                    row: row + 1,
                    expected: k + 1,
                    found: inst.potential.len() + 1,
                });
            }
        }
        let v_max = instances
            .iter()
            .flat_map(|inst| inst.potential.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(QrcError::Numerical(format!("dataset v_max = {v_max} is not positive")));
        }
        Ok(Self {
            params,
            instances,
            v_max,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn k_points(&self) -> usize {
        self.instances.first().map_or(0, |i| i.potential.len())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.instances.iter().map(|i| i.energy).collect()
    }

    /// First `n` instances, with `v_max` recomputed.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        Self::from_instances(self.params.clone(), self.instances[..n.min(self.len())].to_vec())
    }

    /// CSV text in the canonical layout.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.k_points() + 1) * 24);
        for inst in &self.instances {
            for v in &inst.potential {
                out.push_str(&format_f64(*v));
                out.push(',');
            }
            out.push_str(&format_f64(inst.energy));
            out.push('\n');
        }
        out
    }

    pub fn manifest(&self, csv_sha256: &str) -> DatasetManifest {
        DatasetManifest {
            format: DATASET_FORMAT.to_string(),
            source: if self.params.is_some() {
                DatasetSource::Generated
            } else {
                DatasetSource::External
            },
            dataset_seed: self.params.as_ref().map(|p| p.dataset_seed),
            params: self.params.clone(),
            fingerprint: self.params.as_ref().map(params_fingerprint),
            n_instances: self.len(),
            k_points: self.k_points(),
            v_max: self.v_max,
            units: UNITS.to_string(),
            csv_sha256: csv_sha256.to_string(),
        }
    }

    /// Writes the CSV and its manifest; returns the manifest.
    pub fn save(&self, csv_path: &Path, manifest_path: &Path) -> Result<DatasetManifest> {
        let csv = self.to_csv_string();
        let hash = sha256_hex(csv.as_bytes());
        write_file(csv_path, csv.as_bytes())?;
        let manifest = self.manifest(&hash);
        write_json(manifest_path, &manifest)?;
        Ok(manifest)
    }

    /// Loads a dataset written by [`Dataset::save`], checking the content hash.
    pub fn load(csv_path: &Path, manifest_path: &Path) -> Result<(Self, DatasetManifest)> {
        let manifest: DatasetManifest = read_json(manifest_path)?;
        let bytes = fs::read(csv_path).map_err(|e| QrcError::io(csv_path, e))?;
        let hash = sha256_hex(&bytes);
        if hash != manifest.csv_sha256 {
            return Err(QrcError::FingerprintMismatch {
                artifact: csv_path.display().to_string(),
                expected: manifest.csv_sha256.clone(),
                found: hash,
            });
        }
        let layout = LayoutDescriptor::canonical(manifest.k_points);
        let mut dataset = parse_dataset(&bytes, &layout)?;
        dataset.params = manifest.params.clone();
        Ok((dataset, manifest))
    }
}

/// Generates `params.n_instances` instances in order.
pub fn build_dataset(params: &SpeckleParams) -> Result<Dataset> {
    let generator = SpeckleGenerator::new(params.clone())?;
    let instances = (0..params.n_instances as u64)
        .map(|i| generator.instance(i))
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_instances(Some(params.clone()), instances)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Generated,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format: String,
    pub source: DatasetSource,
    pub params: Option<SpeckleParams>,
    pub dataset_seed: Option<u64>,
    /// Hash of the generation parameters, excluding the instance count.
    pub fingerprint: Option<String>,
    pub n_instances: usize,
    pub k_points: usize,
    pub v_max: f64,
    pub units: String,
    pub csv_sha256: String,
}

/// Hash of everything that determines instance `i`, i.e. all parameters
/// except `n_instances`.
pub fn params_fingerprint(params: &SpeckleParams) -> String {
    let canonical = SpeckleParams {
        n_instances: 0,
        ..params.clone()
    };
    let mut hasher = Sha256::new();
    hasher.update(b"qrc-speckle-v1");
    hasher.update(serde_json::to_vec(&canonical).expect("params serialize"));
    hex_digest(hasher)
}

/// Column layout of an external dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDescriptor {
    pub delimiter: char,
    pub k_points: usize,
    /// 0-based column holding the energy; all other columns are potential
    /// values in file order.
    pub energy_column: usize,
    #[serde(default)]
    pub has_header: bool,
}

impl LayoutDescriptor {
    pub fn canonical(k_points: usize) -> Self {
        Self {
            delimiter: ',',
            k_points,
            energy_column: k_points,
            has_header: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// Reads a delimited text file laid out as described by `layout`.
pub fn load_external_dataset(path: &Path, layout: &LayoutDescriptor) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| QrcError::io(path, e))?;
    parse_dataset(&bytes, layout)
}

fn parse_dataset(bytes: &[u8], layout: &LayoutDescriptor) -> Result<Dataset> {
    let instances = parse_rows(bytes, layout)?
        .into_iter()
        .map(|(potential, energy)| SpeckleInstance { potential, energy })
        .collect();
    Dataset::from_instances(None, instances)
}

/// Splits each row of a delimited file into its `k_points` values and the
/// value in `energy_column`. Errors carry 1-based line and column numbers.
pub(crate) fn parse_rows(bytes: &[u8], layout: &LayoutDescriptor) -> Result<Vec<(Vec<f64>, f64)>> {
    let width = layout.k_points + 1;
    if layout.energy_column >= width {
        return Err(QrcError::InvalidConfig(format!(
            "energy_column {} outside a row of {width} columns",
            layout.energy_column
        )));
    }
    if !layout.delimiter.is_ascii() {
        return Err(QrcError::InvalidConfig("delimiter must be a single ASCII character".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(layout.delimiter as u8)
        .has_headers(layout.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| QrcError::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let row = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() != width {
            return Err(QrcError::ShapeMismatch {
                row,
                expected: width,
                found: record.len(),
            });
        }
        let mut values = Vec::with_capacity(layout.k_points);
        let mut target = f64::NAN;
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| QrcError::Parse {
                row,
                column: col + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(QrcError::Parse {
                    row,
                    column: col + 1,
                    message: format!("non-finite value {field:?}"),
                });
            }
            if col == layout.energy_column {
                target = value;
            } else {
                values.push(value);
            }
        }
        rows.push((values, target));
    }
    Ok(rows)
}

/// 17 significant digits, exact round trip.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_digest(hasher)
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| QrcError::io(parent, e))?;
        }
    }
    let mut f = fs::File::create(path).map_err(|e| QrcError::io(path, e))?;
    f.write_all(bytes).map_err(|e| QrcError::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| QrcError::json(path, e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| QrcError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| QrcError::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> SpeckleParams {
        SpeckleParams {
            k_points: 32,
            box_length: 32.0,
            correlation_length: 4.0,
            n_instances: 5,
            ..Default::default()
        }
    }

    #[test]
    fn csv_round_trip_through_external_loader() {
        let ds = build_dataset(&small_params()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        let manifest = dir.path().join("d.json");
        ds.save(&csv, &manifest).unwrap();

        let loaded = load_external_dataset(&csv, &LayoutDescriptor::canonical(32)).unwrap();
        assert_eq!(loaded.instances, ds.instances);
        assert_eq!(loaded.v_max, ds.v_max);

        let (again, m) = Dataset::load(&csv, &manifest).unwrap();
        assert_eq!(again, ds);
        assert_eq!(m.n_instances, 5);
    }

    #[test]
    fn malformed_field_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "0.1,0.2,1.0\n0.3,abc,2.0\n").unwrap();
        let err = load_external_dataset(&path, &LayoutDescriptor::canonical(2)).unwrap_err();
        match err {
            QrcError::Parse { row, column, .. } => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_shape_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        fs::write(&path, "0.1,0.2,1.0\n0.3,2.0\n").unwrap();
        let err = load_external_dataset(&path, &LayoutDescriptor::canonical(2)).unwrap_err();
        assert!(matches!(err, QrcError::ShapeMismatch { row: 2, expected: 3, found: 2 }));
    }

    #[test]
    fn energy_column_first_with_semicolons() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("semi.csv");
        fs::write(&path, "E;V1;V2\n-1.5;0.25;0.5\n-2.0;1.0;0.0\n").unwrap();
        let layout = LayoutDescriptor {
            delimiter: ';',
            k_points: 2,
            energy_column: 0,
            has_header: true,
        };
        let ds = load_external_dataset(&path, &layout).unwrap();
        assert_eq!(ds.energies(), vec![-1.5, -2.0]);
        assert_eq!(ds.instances[0].potential, vec![0.25, 0.5]);
        assert_eq!(ds.v_max, 1.0);
    }

    #[test]
    fn tampered_csv_fails_hash_check() {
        let ds = build_dataset(&small_params()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        let manifest = dir.path().join("d.json");
        ds.save(&csv, &manifest).unwrap();
        let mut text = fs::read_to_string(&csv).unwrap();
        text.replace_range(0..1, "9");
        fs::write(&csv, text).unwrap();
        assert!(matches!(
            Dataset::load(&csv, &manifest),
            Err(QrcError::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn format_has_17_significant_digits() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        let x = 0.123456789012345678f64;
        assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }
}
