//! Built-in experiment sweeps.
//!
//! Each sweep fixes a set of reference values: detuning, couplings,
//! `|alpha_up|^2 = 0.4`, `epsilon = 1e-3` and the swept endpoints. Anything
//! else is a preset default. That covers grids, sample counts, seeds, some
//! environment sizes and sweep values between endpoints. Each record lists
//! which of its keys are such defaults.

use std::str::FromStr;

use collapse_core::{Method, TimeGrid};

use crate::config::{CouplingSpec, ExperimentConfig, OutputFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2Top,
    Fig2Bottom,
    Fig3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig1, Preset::Fig2Top, Preset::Fig2Bottom, Preset::Fig3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2Top => "fig2_top",
            Preset::Fig2Bottom => "fig2_bottom",
            Preset::Fig3 => "fig3",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig1, fig2_top, fig2_bottom or fig3)"))
    }
}

/// One member of a preset sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetMember {
    pub config: ExperimentConfig,
    /// Keys whose values are preset choices rather than reference values.
    pub preset_defaults: Vec<String>,
}

const GRID_DEFAULTS: [&str; 5] = ["t_start", "t_end", "steps", "samples", "seed"];

fn member(preset: Preset, couplings: CouplingSpec, delta: f64, grid: TimeGrid, extra: &[&str]) -> PresetMember {
    let mut config = ExperimentConfig {
        couplings,
        delta,
        beta: 0.0,
        t0: 0.0,
        alpha_up_sq: 0.4,
        alpha_phase: 0.0,
        epsilon: 1e-3,
        grid,
        method: Method::Exact,
        samples: 100_000,
        seed: 0,
        workers: 1,
        output: None,
        format: OutputFormat::Csv,
        preset: Some(preset.name().to_string()),
        histogram_times: Vec::new(),
    };
    let params = config.params().expect("preset parameters are valid");
    config.method = Method::auto(&params);
    let mut preset_defaults: Vec<String> = GRID_DEFAULTS.iter().map(|s| s.to_string()).collect();
    preset_defaults.extend(extra.iter().map(|s| s.to_string()));
    PresetMember {
        config,
        preset_defaults,
    }
}

fn linear(env_size: usize, h: f64, delta_h: f64) -> CouplingSpec {
    CouplingSpec::Linear {
        env_size,
        h,
        delta_h,
    }
}

fn default_grid() -> TimeGrid {
    TimeGrid::new(0.0, 400.0, 600).expect("valid grid")
}

/// Sweep members of a preset.
pub fn preset_members(preset: Preset) -> Vec<PresetMember> {
    match preset {
        Preset::Fig1 => [2, 10, 80]
            .into_iter()
            .map(|n| member(preset, linear(n, 0.01, 0.0), 0.0, default_grid(), &[]))
            .collect(),
        // Long enough to show the fifth-period revival of the dispersed case.
        Preset::Fig2Top => {
            let grid = TimeGrid::new(0.0, 2000.0, 3000).expect("valid grid");
            vec![
                member(preset, linear(10, 0.01, 0.0), 0.0, grid, &[]),
                member(preset, linear(10, 0.01, 0.02), 0.0, grid, &[]),
            ]
        }
        Preset::Fig2Bottom => [0.01, 0.5, 10.0]
            .into_iter()
            .map(|h| member(preset, linear(10, h, 0.02), 0.0, default_grid(), &[]))
            .collect(),
        Preset::Fig3 => [0.002, 0.01, 0.02, 0.05, 0.1]
            .into_iter()
            .map(|delta| {
                let mut extra = vec!["N"];
                if delta != 0.002 && delta != 0.1 {
                    extra.push("delta");
                }
                member(preset, linear(10, 0.01, 0.02), delta, default_grid(), &extra)
            })
            .collect(),
    }
}
