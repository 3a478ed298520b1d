//! Classical/quantum classification of trajectories and the time series
//! built from it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{self, ProjectionDistribution, SamplingPlan};
use crate::error::{Error, Result};
use crate::model::{ModelParams, SystemAmplitudes};

/// Default classicality error.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Threshold on `p_q` used for the operational collapse time.
pub const COLLAPSE_THRESHOLD: f64 = 0.01;
/// Uniform bins in a projection histogram, besides the two point masses.
pub const HISTOGRAM_BINS: usize = 200;

/// How close to `|up>` or `|down>` a state must be to count as classical.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ClassicalityError(f64);

impl ClassicalityError {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::param("epsilon", format!("must lie in (0, 0.5), got {epsilon}")));
        }
        Ok(Self(epsilon))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for ClassicalityError {
    fn default() -> Self {
        Self(DEFAULT_EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Down,
    Up,
    Quantum,
}

/// `u <= eps` is down, `u >= 1 - eps` is up; both intervals are closed.
pub fn classify(u: f64, eps: ClassicalityError) -> Class {
    if u <= eps.0 {
        Class::Down
    } else if u >= 1.0 - eps.0 {
        Class::Up
    } else {
        Class::Quantum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassProbabilities {
    pub p_up: f64,
    pub p_down: f64,
    pub p_q: f64,
}

/// Mass of the distribution in each class. Each class is summed directly, so
/// the three add up to the distribution's total weight.
pub fn probabilities(dist: &ProjectionDistribution, eps: ClassicalityError) -> Result<ClassProbabilities> {
    if dist.atoms.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let mut out = ClassProbabilities {
        p_up: 0.0,
        p_down: 0.0,
        p_q: 0.0,
    };
    for atom in &dist.atoms {
        match classify(atom.u, eps) {
            Class::Up => out.p_up += atom.weight,
            Class::Down => out.p_down += atom.weight,
            Class::Quantum => out.p_q += atom.weight,
        }
    }
    Ok(out)
}

/// Engine used for a time series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Binomial,
    Sampled,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Binomial => "binomial",
            Method::Sampled => "sampled",
        }
    }

    /// Exact enumeration up to 16 spins, then the binomial path for uniform
    /// couplings, otherwise sampling.
    pub fn auto(params: &ModelParams) -> Self {
        if params.env_size() <= 16 {
            Method::Exact
        } else if params.uniform_coupling().is_ok() {
            Method::Binomial
        } else {
            Method::Sampled
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "binomial" => Ok(Method::Binomial),
            "sampled" => Ok(Method::Sampled),
            other => Err(Error::param("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Sampling budget for [`Method::Sampled`]; ignored by the exact engines
/// except for `workers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            workers: 0,
        }
    }
}

/// SplitMix64 finalizer: the seed used for grid point `index` is
/// `splitmix64(seed ^ splitmix64(index))`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index as u64))
}

/// Distribution at one grid point with the selected engine.
pub fn distribution_at(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    method: Method,
    budget: &Budget,
    index: usize,
) -> Result<ProjectionDistribution> {
    match method {
        Method::Exact => engine::enumerate_outcomes(params, alphas, t),
        Method::Binomial => engine::binomial_exact(params, alphas, t),
        Method::Sampled => engine::sample_outcomes(
            params,
            alphas,
            t,
            // already inside the caller's pool
            &SamplingPlan::new(budget.samples, point_seed(budget.seed, index)),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub p_up: Vec<f64>,
    pub p_down: Vec<f64>,
    pub p_q: Vec<f64>,
    pub epsilon: ClassicalityError,
    pub method: Method,
    pub params: ModelParams,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn point(&self, i: usize) -> ClassProbabilities {
        ClassProbabilities {
            p_up: self.p_up[i],
            p_down: self.p_down[i],
            p_q: self.p_q[i],
        }
    }

    /// First grid time with `p_q` below [`COLLAPSE_THRESHOLD`]. This is an
    /// operational definition, not a derived timescale.
    pub fn collapse_time(&self) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.p_q)
            .find(|(_, &q)| q < COLLAPSE_THRESHOLD)
            .map(|(&t, _)| t)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("grid", "times must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Class probabilities at every grid time. Points are evaluated in
/// parallel on `budget.workers` threads; sampled points use
/// [`point_seed`], so the series is fixed by the seed alone.
pub fn time_series(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    grid: &[f64],
    eps: ClassicalityError,
    method: Method,
    budget: &Budget,
) -> Result<ObservableSeries> {
    check_grid(grid)?;
    let points: Vec<ClassProbabilities> = engine::with_workers(budget.workers, || {
        grid.par_iter()
            .enumerate()
            .map(|(i, &t)| {
                distribution_at(params, alphas, t, method, budget, i)
                    .and_then(|d| probabilities(&d, eps))
                    .map_err(|e| Error::AtTime { t, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ObservableSeries {
        times: grid.to_vec(),
        p_up: points.iter().map(|p| p.p_up).collect(),
        p_down: points.iter().map(|p| p.p_down).collect(),
        p_q: points.iter().map(|p| p.p_q).collect(),
        epsilon: eps,
        method,
        params: params.clone(),
    })
}

/// `steps` points on `[start, end]`, each offset by half a step so that the
/// grid avoids `t = start` and the evenly spaced node times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("steps", "must be at least 1"));
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::param("t_end", format!("need finite t_start < t_end, got [{start}, {end}]")));
        }
        Ok(Self { start, end, steps })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.steps as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.steps)
            .map(|i| self.start + (i as f64 + 0.5) * dt)
            .collect()
    }
}

/// Times at which a superposition can revive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ResurrectionTimes {
    /// Uniform couplings: `t0 + m pi / omega_down`, `m = 1..=m_max`.
    Uniform(Vec<f64>),
    /// Dispersed couplings: node times of each spin separately. Diagnostic
    /// only; a full revival needs all of them at once.
    PerSpin(Vec<Vec<f64>>),
}

pub fn resurrection_times(params: &ModelParams, m_max: usize) -> ResurrectionTimes {
    let t0 = params.base_time();
    let nodes = |omega: f64| -> Vec<f64> {
        if omega == 0.0 {
            return Vec::new();
        }
        (1..=m_max).map(|m| t0 + m as f64 * PI / omega).collect()
    };
    let omega_down = |j| {
        params
            .spin_spectral(crate::model::Branch::Down, j)
            .expect("index in range")
            .omega
    };
    if params.uniform_coupling().is_ok() {
        ResurrectionTimes::Uniform(nodes(omega_down(0)))
    } else {
        ResurrectionTimes::PerSpin((0..params.env_size()).map(|j| nodes(omega_down(j))).collect())
    }
}

/// `P(u)` on [`HISTOGRAM_BINS`] uniform bins over `[0, 1]`, with `u = 0` and
/// `u = 1` exactly kept as separate point masses. Presentation only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionHistogram {
    pub at_zero: f64,
    pub at_one: f64,
    pub bins: Vec<f64>,
}

impl ProjectionHistogram {
    pub fn from_distribution(dist: &ProjectionDistribution) -> Self {
        let mut h = Self {
            at_zero: 0.0,
            at_one: 0.0,
            bins: vec![0.0; HISTOGRAM_BINS],
        };
        for atom in &dist.atoms {
            if atom.u == 0.0 {
                h.at_zero += atom.weight;
            } else if atom.u == 1.0 {
                h.at_one += atom.weight;
            } else {
                let b = ((atom.u * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
                h.bins[b] += atom.weight;
            }
        }
        h
    }

    pub fn total(&self) -> f64 {
        self.at_zero + self.at_one + self.bins.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{DistributionKind, OutcomeAtom};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn eps() -> ClassicalityError {
        ClassicalityError::new(1e-3).unwrap()
    }

    fn dist(pairs: &[(f64, f64)]) -> ProjectionDistribution {
        ProjectionDistribution {
            atoms: pairs
                .iter()
                .map(|&(u, weight)| OutcomeAtom {
                    u,
                    weight,
                    pattern: None,
                })
                .collect(),
            kind: DistributionKind::Exact,
            sample_count: None,
            seed: None,
            dropped_atoms: 0,
        }
    }

    #[test]
    fn classify_boundaries() {
        assert_eq!(classify(0.0, eps()), Class::Down);
        assert_eq!(classify(1e-3, eps()), Class::Down);
        assert_eq!(classify(0.4, eps()), Class::Quantum);
        assert_eq!(classify(1.0 - 1e-3, eps()), Class::Up);
        assert_eq!(classify(1.0, eps()), Class::Up);
    }

    #[test]
    fn epsilon_validation() {
        assert!(ClassicalityError::new(0.0).is_err());
        assert!(ClassicalityError::new(0.5).is_err());
        assert!(ClassicalityError::new(f64::NAN).is_err());
        assert_eq!(ClassicalityError::default().value(), 1e-3);
    }

    #[test]
    fn probabilities_single_atom() {
        let p = probabilities(&dist(&[(0.4, 1.0)]), eps()).unwrap();
        assert_eq!((p.p_up, p.p_down, p.p_q), (0.0, 0.0, 1.0));
        assert_eq!(probabilities(&dist(&[]), eps()), Err(Error::EmptyDistribution));
    }

    #[test]
    fn series_on_base_time() {
        let params = ModelParams::uniform(6, 0.01, 0.0).unwrap();
        let a = SystemAmplitudes::from_population(0.4, 0.0).unwrap();
        for method in [Method::Exact, Method::Binomial, Method::Sampled] {
            let s = time_series(&params, &a, &[0.0], eps(), method, &Budget { samples: 1000, ..Budget::default() }).unwrap();
            let pt = s.point(0);
            assert_eq!((pt.p_up, pt.p_down), (0.0, 0.0));
            assert_abs_diff_eq!(pt.p_q, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_attaches_failing_time() {
        let params = ModelParams::dispersed(4, 0.01, 0.02, 0.0).unwrap();
        let a = SystemAmplitudes::from_population(0.4, 0.0).unwrap();
        let err = time_series(&params, &a, &[1.0, 2.0], eps(), Method::Binomial, &Budget::default()).unwrap_err();
        assert!(matches!(err, Error::AtTime { t, .. } if t == 1.0));
        assert!(matches!(err.root(), Error::NonUniformCouplings { .. }));
        assert!(time_series(&params, &a, &[2.0, 1.0], eps(), Method::Exact, &Budget::default()).is_err());
    }

    #[test]
    fn grid_is_offset_half_step() {
        let g = TimeGrid::new(0.0, 400.0, 600).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 600);
        assert_abs_diff_eq!(pts[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[599], 400.0 - 1.0 / 3.0, epsilon = 1e-12);
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn resurrection_uniform() {
        let p = ModelParams::uniform(10, 0.01, 0.0).unwrap();
        match resurrection_times(&p, 3) {
            ResurrectionTimes::Uniform(ts) => {
                assert_eq!(ts.len(), 3);
                assert_abs_diff_eq!(ts[0], 314.159_265_358_979, epsilon = 1e-9);
                assert_abs_diff_eq!(ts[2], 3.0 * PI / 0.01, epsilon = 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(resurrection_times(&p, 0), ResurrectionTimes::Uniform(vec![]));
    }

    #[test]
    fn resurrection_without_longitudinal_coupling() {
        // nu = 0 means mu = 1, so the node spacing is pi / sqrt(mu^2 + h^2).
        let h = 0.3;
        let p = ModelParams::uniform(4, h, 1.0).unwrap();
        let ResurrectionTimes::Uniform(ts) = resurrection_times(&p, 4) else { panic!() };
        for (m, t) in ts.iter().enumerate() {
            assert_abs_diff_eq!(*t, (m + 1) as f64 * PI / (1.0f64 + h * h).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn resurrection_dispersed_lists_per_spin() {
        let p = ModelParams::dispersed(3, 0.01, 0.03, 0.0).unwrap();
        let ResurrectionTimes::PerSpin(lists) = resurrection_times(&p, 2) else { panic!() };
        assert_eq!(lists.len(), 3);
        assert_abs_diff_eq!(lists[1][0], PI / 0.02, epsilon = 1e-9);
    }

    #[test]
    fn histogram_sums_to_total_weight() {
        let d = dist(&[(0.0, 0.2), (1.0, 0.3), (0.4, 0.1), (0.999_999, 0.15), (1e-9, 0.25)]);
        let h = ProjectionHistogram::from_distribution(&d);
        assert_abs_diff_eq!(h.total(), 1.0, epsilon = 1e-15);
        assert_eq!(h.at_zero, 0.2);
        assert_eq!(h.at_one, 0.3);
        assert_eq!(h.bins[80], 0.1);
        assert_eq!(h.bins[199], 0.15);
        assert_eq!(h.bins[0], 0.25);
    }

    #[test]
    fn point_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| point_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    proptest! {
        #[test]
        fn p_q_non_increasing_in_epsilon(
            us in proptest::collection::vec((0.0f64..=1.0, 0.0f64..1.0), 1..50),
            e1 in 1e-6f64..0.49,
            e2 in 1e-6f64..0.49,
        ) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let d = dist(&us);
            let a = probabilities(&d, ClassicalityError::new(lo).unwrap()).unwrap();
            let b = probabilities(&d, ClassicalityError::new(hi).unwrap()).unwrap();
            prop_assert!(b.p_q <= a.p_q);
            let total: f64 = us.iter().map(|p| p.1).sum();
            prop_assert!((a.p_up + a.p_down + a.p_q - total).abs() < 1e-12);
        }
    }
}
