//! Run configuration, the figure presets, and the runner that turns either
//! into CSV files.

mod config;
mod presets;
mod run;

use std::path::PathBuf;

use crate::dynamics::IntegrationConfig;
use crate::error::{Error, Result};
use crate::model::{Scheme, SystemParams};
use crate::output::BadCavityParams;

pub use config::parse_config;
pub use presets::{find_preset, list_presets, FigurePreset, PresetKind};
pub use run::{
    format_series_csv, format_sweep_csv, run_experiment, run_labeled, run_preset, write_preset,
    write_run, PointResult, RunOutput, SERIES_HEADER, SWEEP_HEADER,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Intracavity,
    BadCavity,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Intracavity => "intracavity",
            Regime::BadCavity => "badcavity",
        }
    }
}

/// Pulse durations `τ_k = k·tau_max/tau_points`, k = 1..=tau_points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DurationGrid {
    pub tau_max: f64,
    pub tau_points: usize,
}

impl DurationGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.tau_points as f64;
        (1..=self.tau_points)
            .map(|k| self.tau_max * (k as f64 / n))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_max > 0.0) || !self.tau_max.is_finite() {
            return Err(Error::param(
                "tau_max",
                format!("must be positive, got {}", self.tau_max),
            ));
        }
        if self.tau_points == 0 {
            return Err(Error::param("tau_points", "must be at least 1"));
        }
        Ok(())
    }
}

/// Physical model and sampling grid. The `n_th` fields of the parameter
/// structs are placeholders; each run takes its occupation from
/// [`RunConfig::n_th`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Setup {
    Intracavity {
        params: SystemParams,
        grid: IntegrationConfig,
    },
    BadCavity {
        params: BadCavityParams,
        grid: DurationGrid,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub setup: Setup,
    /// Thermal occupations, strictly ascending.
    pub n_th: Vec<f64>,
    /// Output path prefix; `simulate` falls back to the config file stem.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn regime(&self) -> Regime {
        match self.setup {
            Setup::Intracavity { .. } => Regime::Intracavity,
            Setup::BadCavity { .. } => Regime::BadCavity,
        }
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        if self.n_th.is_empty() {
            return Err(Error::param("n_th", "at least one value is required"));
        }
        if self.n_th.iter().any(|n| !n.is_finite() || *n < 0.0) {
            return Err(Error::param("n_th", "values must be finite and ≥ 0"));
        }
        if self.n_th.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("n_th", "values must be strictly ascending"));
        }
        match &self.setup {
            Setup::Intracavity { params, grid } => {
                params.validate()?;
                self.scheme.check(params)?;
                grid.validate(params.max_rate())
            }
            Setup::BadCavity { params, grid } => {
                params.validate()?;
                let as_system = SystemParams {
                    delta: params.delta,
                    ..SystemParams::default()
                };
                self.scheme.check(&as_system)?;
                grid.validate()
            }
        }
    }

    /// Model parameters at one thermal occupation.
    pub(crate) fn with_n_th(&self, n_th: f64) -> Setup {
        match self.setup {
            Setup::Intracavity { params, grid } => Setup::Intracavity {
                params: SystemParams { n_th, ..params },
                grid,
            },
            Setup::BadCavity { params, grid } => Setup::BadCavity {
                params: BadCavityParams { n_th, ..params },
                grid,
            },
        }
    }
}
