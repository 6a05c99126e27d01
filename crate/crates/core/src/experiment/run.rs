//! Executes configurations over their n_th lists and emits CSV and metadata.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::{FigurePreset, PresetKind, RunConfig, Setup};
use crate::dynamics::{
    entanglement_series, integrate_covariance, EntanglementSeries, DIVERGENCE_FACTOR,
    STIFFNESS_FRACTION,
};
use crate::error::{Error, Result};
use crate::gaussian::{thermal_vacuum_initial, tol};
use crate::model::{build_drift_diffusion, stability_margin};
use crate::output::{
    output_modes_vs_duration, DEFAULT_STEP_FRACTION, MAX_COUPLING_RATIO, WARN_COUPLING_RATIO,
};

pub const SERIES_HEADER: &str = "t_inv_gamma,t_paper_units,e_n,n_th,scheme,regime";
pub const SWEEP_HEADER: &str = "n_th,max_e_n,argmax_t_or_tau,scheme_or_config";

/// Figure time unit `2π/(10³γ)`.
const DISPLAY_TIME_UNIT: f64 = TAU / 1e3;

/// One thermal occupation of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub n_th: f64,
    pub series: EntanglementSeries,
    /// Smallest symplectic eigenvalue over every recorded covariance.
    pub min_symplectic_eigenvalue: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub label: String,
    pub config: RunConfig,
    /// Ascending in n_th.
    pub points: Vec<PointResult>,
}

fn run_point(cfg: &RunConfig, n_th: f64) -> Result<PointResult> {
    match cfg.with_n_th(n_th) {
        Setup::Intracavity { params, grid } => {
            let dd = build_drift_diffusion(&params, cfg.scheme)?;
            let margin = stability_margin(&dd)?;
            if margin > 0.0 && grid.t_max > 1.0 / margin {
                return Err(Error::Unstable(format!(
                    "drift eigenvalue with real part {margin:e} > 0 and t_max = {} exceeds its growth time",
                    grid.t_max
                )));
            }
            let samples = integrate_covariance(&dd, &thermal_vacuum_initial(n_th)?, &grid)?;
            let mut min_nu = f64::INFINITY;
            for (_, v) in &samples {
                min_nu = min_nu.min(v.min_symplectic_eigenvalue()?);
            }
            Ok(PointResult {
                n_th,
                series: entanglement_series(&samples)?,
                min_symplectic_eigenvalue: min_nu,
                warnings: Vec::new(),
            })
        }
        Setup::BadCavity { params, grid } => {
            let results = output_modes_vs_duration(&params, &grid.points())?;
            let mut min_nu = f64::INFINITY;
            for r in &results {
                min_nu = min_nu.min(r.covariance.min_symplectic_eigenvalue()?);
            }
            let warnings = results[0].warnings.clone();
            let series = EntanglementSeries::new(
                results.iter().map(|r| r.tau).collect(),
                results.iter().map(|r| r.e_n).collect(),
            )?;
            Ok(PointResult {
                n_th,
                series,
                min_symplectic_eigenvalue: min_nu,
                warnings,
            })
        }
    }
}

/// Runs every (configuration, n_th) pair on a pool of at most `threads`
/// workers. Results come back in input order whatever the completion order,
/// and the reported error is the first one in that order.
pub fn run_labeled(runs: &[(&str, &RunConfig)], threads: usize) -> Result<Vec<RunOutput>> {
    for (_, cfg) in runs {
        cfg.validate()?;
    }
    let tasks: Vec<(usize, f64)> = runs
        .iter()
        .enumerate()
        .flat_map(|(i, (_, cfg))| cfg.n_th.iter().map(move |&n| (i, n)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let results: Vec<Result<PointResult>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, n)| run_point(runs[i].1, n))
            .collect()
    });

    let mut outputs: Vec<RunOutput> = runs
        .iter()
        .map(|(label, cfg)| RunOutput {
            label: label.to_string(),
            config: (*cfg).clone(),
            points: Vec::with_capacity(cfg.n_th.len()),
        })
        .collect();
    for (&(i, _), result) in tasks.iter().zip(results) {
        outputs[i].points.push(result?);
    }
    Ok(outputs)
}

pub fn run_experiment(cfg: &RunConfig, threads: usize) -> Result<RunOutput> {
    Ok(run_labeled(&[(cfg.scheme.label(), cfg)], threads)?.remove(0))
}

pub fn run_preset(preset: &FigurePreset, threads: usize) -> Result<Vec<RunOutput>> {
    let runs: Vec<(&str, &RunConfig)> = preset.runs.iter().map(|(l, c)| (*l, c)).collect();
    run_labeled(&runs, threads)
}

fn num(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn format_series_csv(outputs: &[RunOutput]) -> String {
    let mut s = String::new();
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for out in outputs {
        let scheme = out.config.scheme.label();
        let regime = out.config.regime().label();
        for p in &out.points {
            for (&t, &e) in p.series.times().iter().zip(p.series.values()) {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{scheme},{regime}",
                    num(t),
                    num(t / DISPLAY_TIME_UNIT),
                    num(e),
                    num(p.n_th)
                );
            }
        }
    }
    s
}

pub fn format_sweep_csv(outputs: &[RunOutput]) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for out in outputs {
        for p in &out.points {
            let (t, e) = p.series.max();
            let _ = writeln!(s, "{},{},{},{}", num(p.n_th), num(e), num(t), out.label);
        }
    }
    s
}

fn setup_json(cfg: &RunConfig) -> Value {
    match &cfg.setup {
        Setup::Intracavity { params, grid } => json!({
            "g1": params.g1,
            "g2": params.g2,
            "kappa1": params.kappa1,
            "kappa2": params.kappa2,
            "delta": params.delta,
            "gamma": params.gamma,
            "t_max": grid.t_max,
            "dt": grid.dt,
            "sample_stride": grid.sample_stride,
        }),
        Setup::BadCavity { params, grid } => json!({
            "G1": params.eff_g1,
            "G2": params.eff_g2,
            "kappa1": params.kappa1,
            "kappa2": params.kappa2,
            "delta": params.delta,
            "gamma": params.gamma,
            "damping": params.damping(),
            "coupling_ratio": params.coupling_ratio(),
            "tau_max": grid.tau_max,
            "tau_points": grid.tau_points,
            "step_fraction": DEFAULT_STEP_FRACTION,
        }),
    }
}

fn metadata(
    name: &str,
    kind: Option<PresetKind>,
    outputs: &[RunOutput],
    files: &[String],
) -> String {
    let runs: Vec<Value> = outputs
        .iter()
        .map(|out| {
            let points: Vec<Value> = out
                .points
                .iter()
                .map(|p| {
                    let (t, e) = p.series.max();
                    json!({
                        "n_th": p.n_th,
                        "max_e_n": e,
                        "argmax_t_or_tau": t,
                        "samples": p.series.len(),
                        "peaks": p.series.peaks(),
                        "min_symplectic_eigenvalue": p.min_symplectic_eigenvalue,
                        "warnings": p.warnings,
                    })
                })
                .collect();
            json!({
                "label": out.label,
                "scheme": out.config.scheme.label(),
                "regime": out.config.regime().label(),
                "parameters": setup_json(&out.config),
                "n_th": out.config.n_th,
                "points": points,
            })
        })
        .collect();
    let doc = json!({
        "name": name,
        "kind": kind.map(|k| match k {
            PresetKind::Series => "series",
            PresetKind::Sweep => "sweep",
        }),
        "version": env!("CARGO_PKG_VERSION"),
        "files": files,
        "time_units": {
            "t_inv_gamma": "1/gamma",
            "t_paper_units": "2*pi/(1000*gamma)",
        },
        "tolerances": {
            "symmetry": tol::SYMMETRY,
            "physicality": tol::PHYSICALITY,
            "integration_physicality": tol::INTEGRATION_PHYSICALITY,
            "discriminant": tol::DISCRIMINANT,
            "stiffness_fraction": STIFFNESS_FRACTION,
            "divergence_factor": DIVERGENCE_FACTOR,
            "max_coupling_ratio": MAX_COUPLING_RATIO,
            "warn_coupling_ratio": WARN_COUPLING_RATIO,
        },
        "runs": runs,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("metadata is plain JSON");
    s.push('\n');
    s
}

/// Writes all files or none: anything already written is removed when a
/// later write fails.
fn write_all(files: &[(PathBuf, String)]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(files.len());
    for (path, contents) in files {
        if let Err(e) = fs::write(path, contents) {
            let _ = fs::remove_file(path);
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e.into());
        }
        written.push(path.clone());
    }
    Ok(written)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `<prefix>.csv` (series), `<prefix>_sweep.csv` and `<prefix>.meta.json`.
pub fn write_run(output: &RunOutput, prefix: &Path) -> Result<Vec<PathBuf>> {
    if let Some(parent) = prefix.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let series = with_suffix(prefix, ".csv");
    let sweep = with_suffix(prefix, "_sweep.csv");
    let meta = with_suffix(prefix, ".meta.json");
    let outputs = std::slice::from_ref(output);
    let names = [file_name(&series), file_name(&sweep)];
    write_all(&[
        (series, format_series_csv(outputs)),
        (sweep, format_sweep_csv(outputs)),
        (meta, metadata(&file_name(prefix), None, outputs, &names)),
    ])
}

/// `<dir>/<name>.csv` in the preset's schema and `<dir>/<name>.meta.json`.
pub fn write_preset(
    preset: &FigurePreset,
    outputs: &[RunOutput],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", preset.name));
    let meta_path = dir.join(format!("{}.meta.json", preset.name));
    let csv = match preset.kind {
        PresetKind::Series => format_series_csv(outputs),
        PresetKind::Sweep => format_sweep_csv(outputs),
    };
    let meta = metadata(
        preset.name,
        Some(preset.kind),
        outputs,
        &[file_name(&csv_path)],
    );
    write_all(&[(csv_path, csv), (meta_path, meta)])
}
