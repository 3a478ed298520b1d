//! Runs a validated config through the engines.

use std::time::Instant;

use collapse_core::observables::{distribution_at, ProjectionHistogram};
use collapse_core::{
    engine, probabilities, Budget, Error, Method, ModelParams, ObservableSeries, ProjectionDistribution,
    SystemAmplitudes,
};
use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{HistogramRecord, ResultRecord};

/// Retries allowed when a grid time lands on a degenerate node.
const MAX_PERTURBATIONS: usize = 16;

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.samples = samples;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub requested: f64,
    pub used: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EngineDiagnostics {
    pub dropped_atoms: usize,
    pub degenerate_perturbations: Vec<Perturbation>,
}

struct Point {
    t: f64,
    dist: ProjectionDistribution,
}

/// Evaluates one time, nudging it up by one ulp at a time while the engine
/// reports a degenerate node.
fn evaluate(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    method: Method,
    budget: &Budget,
    index: usize,
) -> Result<Point, Error> {
    let mut used = t;
    for _ in 0..MAX_PERTURBATIONS {
        match distribution_at(params, alphas, used, method, budget, index) {
            Err(Error::DegenerateOutcome { .. }) => {
                let next = used.next_up();
                warn!("degenerate outcome at t = {used}, retrying at t = {next}");
                used = next;
            }
            Ok(dist) => return Ok(Point { t: used, dist }),
            Err(e) => return Err(Error::AtTime { t, source: Box::new(e) }),
        }
    }
    Err(Error::AtTime {
        t,
        source: Box::new(Error::DegenerateOutcome { t: used }),
    })
}

pub fn run_experiment(
    cfg: &ExperimentConfig,
    preset_defaults: Vec<String>,
    timings: bool,
) -> Result<ResultRecord, Error> {
    let started = Instant::now();
    let params = cfg.params()?;
    let alphas = cfg.alphas()?;
    let eps = cfg.epsilon();
    let budget = Budget {
        samples: cfg.samples,
        seed: cfg.seed,
        workers: 0,
    };
    let grid = cfg.grid.points();
    let steps = grid.len();

    let (points, hist_points) = engine::with_workers(cfg.workers, || {
        let points = grid
            .par_iter()
            .enumerate()
            .map(|(i, &t)| evaluate(&params, &alphas, t, cfg.method, &budget, i))
            .collect::<Result<Vec<_>, _>>()?;
        // Histogram points get their own seed indices past the grid.
        let hist_points = cfg
            .histogram_times
            .par_iter()
            .enumerate()
            .map(|(k, &t)| evaluate(&params, &alphas, t, cfg.method, &budget, steps + k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok::<_, Error>((points, hist_points))
    })??;

    let mut diagnostics = EngineDiagnostics::default();
    let mut series = ObservableSeries {
        times: Vec::with_capacity(steps),
        p_up: Vec::with_capacity(steps),
        p_down: Vec::with_capacity(steps),
        p_q: Vec::with_capacity(steps),
        epsilon: eps,
        method: cfg.method,
        params: params.clone(),
    };
    for (&requested, point) in grid.iter().zip(&points) {
        if point.t != requested {
            diagnostics.degenerate_perturbations.push(Perturbation {
                requested,
                used: point.t,
            });
        }
        diagnostics.dropped_atoms += point.dist.dropped_atoms;
        let p = probabilities(&point.dist, eps).map_err(|e| Error::AtTime {
            t: point.t,
            source: Box::new(e),
        })?;
        series.times.push(point.t);
        series.p_up.push(p.p_up);
        series.p_down.push(p.p_down);
        series.p_q.push(p.p_q);
    }
    let histograms = hist_points
        .iter()
        .map(|p| HistogramRecord {
            t: p.t,
            histogram: ProjectionHistogram::from_distribution(&p.dist),
        })
        .collect();

    Ok(ResultRecord {
        config: cfg.clone(),
        preset_defaults,
        collapse_time: series.collapse_time(),
        series,
        histograms,
        diagnostics,
        wall_clock_seconds: timings.then(|| started.elapsed().as_secs_f64()),
    })
}
