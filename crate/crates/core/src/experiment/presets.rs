//! The five frozen figure experiments.

use std::f64::consts::TAU;

use super::{DurationGrid, RunConfig, Setup};
use crate::dynamics::IntegrationConfig;
use crate::model::{Scheme, SystemParams};
use crate::output::BadCavityParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetKind {
    /// One row per sample: E_N against time or pulse duration.
    Series,
    /// One row per (configuration, n_th): the maximum over the window.
    Sweep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub kind: PresetKind,
    /// Labeled configurations; sweep CSVs use the label as `scheme_or_config`.
    pub runs: Vec<(&'static str, RunConfig)>,
}

const FIG2_N_TH: [f64; 4] = [10.0, 1e2, 1e3, 1e4];
const FIG4A_N_TH: [f64; 3] = [10.0, 1e2, 1e3];
const DELTA: f64 = 1e3;

fn log_grid(lo_exp: f64, hi_exp: f64, points: usize) -> Vec<f64> {
    let span = hi_exp - lo_exp;
    (0..points)
        .map(|k| 10f64.powf(lo_exp + span * k as f64 / (points - 1) as f64))
        .collect()
}

fn sm_intracavity(n_th: Vec<f64>) -> RunConfig {
    RunConfig {
        scheme: Scheme::SorensenMolmer,
        setup: Setup::Intracavity {
            params: SystemParams {
                g1: 4e3,
                g2: 4e3,
                kappa1: 10.0,
                kappa2: 10.0,
                delta: DELTA,
                gamma: 1.0,
                n_th: 0.0,
            },
            // Just over four detuning periods 2π/Δ, so the fourth peak is
            // interior to the window.
            grid: IntegrationConfig {
                t_max: 0.0285,
                dt: 2.5e-6,
                sample_stride: 10,
            },
        },
        n_th,
        output: None,
    }
}

fn bogoliubov_intracavity(n_th: Vec<f64>) -> RunConfig {
    RunConfig {
        scheme: Scheme::Bogoliubov,
        setup: Setup::Intracavity {
            params: SystemParams {
                g1: 4e3,
                g2: 3.5e3,
                kappa1: 10.0,
                kappa2: 10.0,
                delta: 0.0,
                gamma: 1.0,
                n_th: 0.0,
            },
            // Two oscillation periods 2π/√(g₁² − g₂²) ≈ 3.2e-3.
            grid: IntegrationConfig {
                t_max: 0.0065,
                dt: 2.5e-6,
                sample_stride: 5,
            },
        },
        n_th,
        output: None,
    }
}

fn badcavity(eff_g2: f64, n_th: Vec<f64>) -> RunConfig {
    RunConfig {
        scheme: Scheme::SorensenMolmer,
        setup: Setup::BadCavity {
            params: BadCavityParams {
                eff_g1: 667.0,
                eff_g2,
                kappa1: 6e3,
                kappa2: 6e3,
                delta: DELTA,
                gamma: 1.0,
                n_th: 0.0,
            },
            // Six periods, twenty durations per period.
            grid: DurationGrid {
                tau_max: 6.0 * TAU / DELTA,
                tau_points: 120,
            },
        },
        n_th,
        output: None,
    }
}

/// All presets, in stable order.
pub fn list_presets() -> Vec<FigurePreset> {
    let fig3_n_th = log_grid(1.0, 4.0, 20);
    let fig4b_n_th = log_grid(1.0, 4.0, 19);
    vec![
        FigurePreset {
            name: "fig2a",
            kind: PresetKind::Series,
            runs: vec![("sm", sm_intracavity(FIG2_N_TH.to_vec()))],
        },
        FigurePreset {
            name: "fig2b",
            kind: PresetKind::Series,
            runs: vec![("bogoliubov", bogoliubov_intracavity(FIG2_N_TH.to_vec()))],
        },
        FigurePreset {
            name: "fig3",
            kind: PresetKind::Sweep,
            runs: vec![
                ("sm", sm_intracavity(fig3_n_th.clone())),
                ("bogoliubov", bogoliubov_intracavity(fig3_n_th)),
            ],
        },
        FigurePreset {
            name: "fig4a",
            kind: PresetKind::Series,
            runs: vec![("sm", badcavity(667.0, FIG4A_N_TH.to_vec()))],
        },
        FigurePreset {
            name: "fig4b",
            kind: PresetKind::Sweep,
            runs: vec![
                ("solid", badcavity(667.0, fig4b_n_th.clone())),
                ("dashed", badcavity(540.0, fig4b_n_th)),
            ],
        },
    ]
}

pub fn find_preset(name: &str) -> Option<FigurePreset> {
    list_presets().into_iter().find(|p| p.name == name)
}
