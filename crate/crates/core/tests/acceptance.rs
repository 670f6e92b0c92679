//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! The end-to-end criterion runs the default 10 000-instance configuration,
//! which takes roughly an hour on one core. `QRC_ACCEPTANCE_WORKERS`
//! sets the worker count (default: all cores).

mod common;

use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use qrc_core::linalg::ComplexMatrix;
use qrc_core::pauli::{Axis, PauliString};
use qrc_core::pipeline::{cmd_run_all, ArtifactPaths, Report, RunConfig, RunOptions, Summary};
use qrc_core::readout::{features, FeatureKind};
use qrc_core::reservoir::{rescale_potential, sample_couplings, RawObservables, Reservoir, ReservoirConfig};
use qrc_core::speckle::{ground_state_energy, Boundary, SpeckleGenerator, SpeckleParams};
use qrc_core::state::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn arities() -> Outcome {
    let n = 6;
    let raw = RawObservables::from_flat(n, &vec![0.5; RawObservables::total_count(n)]).map_err(err)?;
    let single = features(&raw, FeatureKind::Single).map_err(err)?.values.len();
    let two = features(&raw, FeatureKind::Two).map_err(err)?.values.len();
    ensure(single == 61 && two == 451, format!("single {single}, two {two}"))?;
    Ok(format!("single {single}, two {two}"))
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> (DensityMatrix, common::Mat) {
    let d = 1 << n;
    let a = ComplexMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let p = a.matmul(&a.dagger());
    let tr = p.trace().re;
    let m = p.scale(Complex64::new(1.0 / tr, 0.0));
    let naive = (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect();
    (DensityMatrix::new(m).unwrap(), naive)
}

fn quantum_core() -> Outcome {
    let reservoir = Reservoir::new(ReservoirConfig::default()).map_err(err)?;
    let unitarity = reservoir.propagator().unitarity_error();
    ensure(unitarity <= 1e-12, format!("unitarity error {unitarity:e}"))?;

    let params = SpeckleParams::default();
    let gen = SpeckleGenerator::new(params.clone()).map_err(err)?;
    let potential = gen.generate(0);
    let v_max = potential.iter().copied().fold(0.0, f64::max);
    let inputs = rescale_potential(&potential, v_max).map_err(err)?;
    ensure(inputs.len() == 1024, format!("K = {}", inputs.len()))?;
    let mut checkpoints = 0;
    for k in (64..=inputs.len()).step_by(64) {
        let rho = reservoir.kernel().final_state(&inputs[..k]).map_err(err)?;
        rho.validate().map_err(|e| format!("step {k}: {e}"))?;
        checkpoints += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for _ in 0..10 {
            let (rho, naive) = random_density(&mut rng, n);
            if n > 1 {
                let fast = rho.partial_trace_first_qubit().map_err(err)?;
                let slow = common::partial_trace_first(&naive);
                for (i, row) in slow.iter().enumerate() {
                    for (j, z) in row.iter().enumerate() {
                        worst = worst.max((fast.matrix()[(i, j)] - z).norm());
                    }
                }
            }
            for site in 1..=n {
                for (a, axis) in Axis::ALL.iter().enumerate() {
                    let mut factors = vec![(site, *axis)];
                    let mut naive_factors = vec![(site, a)];
                    if site < n {
                        factors.push((n, Axis::ALL[(a + 1) % 3]));
                        naive_factors.push((n, (a + 1) % 3));
                    }
                    let fast = PauliString::new(n, &factors).map_err(err)?.expectation(&rho).map_err(err)?;
                    worst = worst.max((fast - common::expect(&naive, n, &naive_factors)).abs());
                }
            }
        }
    }
    ensure(worst < 1e-9, format!("oracle deviation {worst:e}"))?;
    Ok(format!(
        "unitarity {unitarity:.1e}, {checkpoints} validated checkpoints over K=1024, oracle deviation {worst:.1e}"
    ))
}

fn reservoir_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for (n, k, seed) in [(2, 24, 7u64), (3, 16, 2021)] {
        let config = ReservoirConfig {
            n_qubits: n,
            coupling_seed: seed,
            ..Default::default()
        };
        let couplings = sample_couplings(&config);
        let reservoir = Reservoir::new(config.clone()).map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..20 {
            let potential: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..3.0)).collect();
            let v_max = potential.iter().copied().fold(0.0, f64::max);
            let inputs: Vec<f64> = potential.iter().map(|v| v / v_max).collect();
            let fast = reservoir.run_instance(&potential, v_max).map_err(err)?.to_flat();
            let slow = common::naive_run(n, config.h, config.dt, &|p, q| couplings.get(p, q), &inputs);
            ensure(fast.len() == slow.len(), "observable count")?;
            for (f, s) in fast.iter().zip(&slow) {
                worst = worst.max((f - s).abs());
            }
        }
    }
    ensure(worst < 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("N=2 and N=3, 20 potentials each, max deviation {worst:.1e}"))
}

fn hard_wall(k: usize, length: f64) -> SpeckleParams {
    SpeckleParams {
        k_points: k,
        box_length: length,
        boundary: Boundary::Dirichlet,
        ..Default::default()
    }
}

fn exact_diagonalization() -> Outcome {
    let p = hard_wall(1024, 1024.0);
    let empty = ground_state_energy(&vec![0.0; 1024], &p).map_err(err)?;
    let exact = PI * PI / (2.0 * 1024.0 * 1024.0);
    let empty_rel = ((empty - exact) / exact).abs();
    ensure(empty_rel < 1e-4, format!("empty box relative error {empty_rel:e}"))?;

    let mut shift_err: f64 = 0.0;
    for boundary in [Boundary::Dirichlet, Boundary::Periodic] {
        let params = SpeckleParams {
            boundary,
            ..Default::default()
        };
        let v = SpeckleGenerator::new(params.clone()).map_err(err)?.generate(3);
        let base = ground_state_energy(&v, &params).map_err(err)?;
        for c in [1e-3, 0.25, 2.0] {
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let e = ground_state_energy(&shifted, &params).map_err(err)?;
            shift_err = shift_err.max((e - base - c).abs());
        }
    }
    ensure(shift_err < 1e-10, format!("constant shift error {shift_err:e}"))?;

    let omega = 1e-3;
    let v: Vec<f64> = (0..1024).map(|k| 0.5 * omega * omega * (p.position(k) - 512.0).powi(2)).collect();
    let e = ground_state_energy(&v, &p).map_err(err)?;
    let harmonic_rel = ((e - omega / 2.0) / (omega / 2.0)).abs();
    ensure(harmonic_rel < 1e-4, format!("harmonic relative error {harmonic_rel:e}"))?;
    Ok(format!(
        "empty box {empty_rel:.1e}, shift {shift_err:.1e}, harmonic {harmonic_rel:.1e}"
    ))
}

fn speckle_statistics() -> Outcome {
    let params = SpeckleParams::default();
    let gen = SpeckleGenerator::new(params.clone()).map_err(err)?;
    let n = 2000u64;
    let mut total = 0.0;
    let mut samples = Vec::with_capacity(n as usize);
    for i in 0..n {
        let v = gen.generate(i);
        total += v.iter().sum::<f64>();
        samples.push(v[(i as usize * 131) % params.k_points]);
    }
    let mean = total / (n as f64 * params.k_points as f64);
    let mean_rel = ((mean - params.v0) / params.v0).abs();
    ensure(mean_rel < 0.02, format!("mean intensity off by {:.2}%", 100.0 * mean_rel))?;

    samples.sort_by(f64::total_cmp);
    let m = samples.len() as f64;
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-x / params.v0).exp();
            (cdf - i as f64 / m).abs().max((i as f64 + 1.0) / m - cdf)
        })
        .fold(0.0, f64::max);
    let critical = 1.628 / m.sqrt();
    ensure(d < critical, format!("KS D = {d:.4} ≥ {critical:.4}"))?;
    Ok(format!(
        "{n} instances, mean off by {:.2}%, KS D = {d:.4} < {critical:.4}",
        100.0 * mean_rel
    ))
}

fn end_to_end(summary: &Summary) -> Outcome {
    let row = |kind| summary.row(kind).ok_or(format!("no {kind:?} row"));
    let single = row(FeatureKind::Single)?;
    let two = row(FeatureKind::Two)?;
    let detail = format!(
        "single train/test R² {:.4}/{:.4}, two {:.4}/{:.4}",
        single.train.r2, single.test.r2, two.train.r2, two.test.r2
    );
    let mut failures = Vec::new();
    if single.test.r2 < 0.75 {
        failures.push("single test R² < 0.75");
    }
    if two.test.r2 <= single.test.r2 {
        failures.push("two-qubit test R² does not exceed single");
    }
    if two.test.r2 < 0.85 {
        failures.push("two test R² < 0.85");
    }
    if (single.train.r2 - single.test.r2).abs() > 0.05 || (two.train.r2 - two.test.r2).abs() > 0.05 {
        failures.push("train/test R² gap above 0.05");
    }
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}: {}", failures.join(", ")))
    }
}

fn figure_products(paths: &ArtifactPaths, kinds: &[FeatureKind]) -> Outcome {
    let mut parts = Vec::new();
    for &kind in kinds {
        let report: Report =
            serde_json::from_slice(&fs::read(paths.report(kind)).map_err(err)?).map_err(err)?;
        ensure(
            report.histogram.total() == report.n_test,
            format!("{kind:?}: histogram holds {} of {}", report.histogram.total(), report.n_test),
        )?;
        let recomputed = report.test_eval.residuals.iter().map(|r| r.abs()).sum::<f64>() / report.n_test as f64;
        ensure(
            report.mae_marker.to_bits() == recomputed.to_bits() && report.mae_marker == report.test.mae,
            format!("{kind:?}: marker {} vs MAE {recomputed}", report.mae_marker),
        )?;
        let scatter = fs::read_to_string(paths.scatter(kind)).map_err(err)?;
        let pairs = scatter.lines().skip(1).filter(|l| l.split(',').count() == 2).count();
        ensure(
            pairs == report.n_test && scatter.lines().count() == pairs + 1,
            format!("{kind:?}: {pairs} scatter pairs for {} test rows", report.n_test),
        )?;
        let histogram_rows = fs::read_to_string(paths.histogram(kind)).map_err(err)?.lines().count();
        ensure(histogram_rows == report.histogram.counts.len() + 2, "histogram csv rows")?;
        parts.push(format!("{}: {} test rows", kind.as_str(), report.n_test));
    }
    Ok(parts.join(", "))
}

fn artifact_files(paths: &ArtifactPaths, kinds: &[FeatureKind]) -> Vec<std::path::PathBuf> {
    let mut files = vec![paths.dataset_csv(), paths.dataset_manifest(), paths.summary()];
    for &kind in kinds {
        files.extend([
            paths.features_csv(kind),
            paths.features_sidecar(kind),
            paths.model(kind),
            paths.report(kind),
            paths.histogram(kind),
            paths.scatter(kind),
        ]);
    }
    files
}

fn determinism(root: &Path) -> Outcome {
    let smoke = |dir: &str, workers: usize| {
        let mut config = RunConfig::default();
        config.reservoir.n_qubits = 4;
        config.speckle.k_points = 128;
        config.speckle.box_length = 128.0;
        config.speckle.n_instances = 200;
        config.workers = workers;
        config.output_dir = root.join(dir);
        config
    };
    let a = smoke("w1", 1);
    let b = smoke("w2", 2);
    cmd_run_all(&a, &RunOptions::default()).map_err(err)?;
    cmd_run_all(&b, &RunOptions::default()).map_err(err)?;
    let files_a = artifact_files(&a.paths(), &a.kinds);
    let files_b = artifact_files(&b.paths(), &b.kinds);
    for (fa, fb) in files_a.iter().zip(&files_b) {
        let (x, y) = (fs::read(fa).map_err(err)?, fs::read(fb).map_err(err)?);
        ensure(x == y, format!("{} differs between 1 and 2 workers", fa.display()))?;
    }
    Ok(format!("{} artifacts byte-identical for 1 and 2 workers", files_a.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |label: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label} ({secs:.1} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {label} ({secs:.1} s): {detail}");
            }
        }
    };

    report("1 feature arities", &mut arities);
    report("2 quantum-core invariants", &mut quantum_core);
    report("3 reservoir oracle equivalence", &mut reservoir_oracle);
    report("4 exact-diagonalization oracle", &mut exact_diagonalization);
    report("5 speckle statistics", &mut speckle_statistics);

    let dir = tempfile::tempdir().expect("temporary directory");
    let workers = std::env::var("QRC_ACCEPTANCE_WORKERS")
        .ok()
        .and_then(|w| w.parse().ok())
        .unwrap_or(0);
    let config = RunConfig {
        workers,
        output_dir: dir.path().join("default"),
        ..Default::default()
    };
    let mut summary = None;
    report("6 end-to-end default run", &mut || {
        let s = cmd_run_all(&config, &RunOptions::default()).map_err(err)?;
        let outcome = end_to_end(&s);
        summary = Some(s);
        outcome
    });
    report("7 figure data products", &mut || {
        ensure(summary.is_some(), "no default run to inspect")?;
        figure_products(&config.paths(), &config.kinds)
    });
    report("8 determinism across worker counts", &mut || determinism(dir.path()));

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
