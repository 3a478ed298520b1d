//! Measured disagreement between the engines and their oracles.
//!
//! Every function returns a deviation rather than a verdict; callers pick
//! the tolerance.

use std::collections::HashMap;

use crate::engine::{binomial_exact, enumerate_outcomes, sample_outcomes, SamplingPlan};
use crate::error::Result;
use crate::exact::{EnvBasisState, ExactUniverse, ThermalEnsemble};
use crate::model::{Branch, FlipPattern, ModelParams, SystemAmplitudes};
use crate::observables::{probabilities, ClassicalityError};
use crate::ProjectionDistribution;

/// Exact-universe outcomes below this weight have numerically meaningless
/// normalized states and are left out of the projection comparison.
pub const STATE_WEIGHT_FLOOR: f64 = 1e-12;

/// Max deviation of the reduced density matrix from the trajectory mixture,
/// both built by brute force at inverse temperature `params`.
pub fn density_identity(params: &ModelParams, alphas: &SystemAmplitudes, t: f64) -> Result<f64> {
    let universe = ExactUniverse::new(params)?;
    let ensemble = ThermalEnsemble::thermal(params)?;
    let outcomes = universe.trajectory_ensemble(alphas, &ensemble, t)?;
    universe.reduced_density_check(&outcomes, alphas, &ensemble, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternDeviation {
    /// Max `|u_engine - u_universe|` over patterns with weight above
    /// [`STATE_WEIGHT_FLOOR`].
    pub projection: f64,
    /// Max `|w_engine - sum_n f_n g|` over all patterns.
    pub weight: f64,
}

/// Compares enumeration with the brute-force universe pattern by pattern.
/// The universe weights of all `(n', n)` pairs sharing a flip pattern are
/// summed before comparing.
pub fn enumeration_vs_universe(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
) -> Result<PatternDeviation> {
    let n = params.env_size();
    let universe = ExactUniverse::new(params)?;
    let ensemble = ThermalEnsemble::thermal(params)?;
    let outcomes = universe.trajectory_ensemble(alphas, &ensemble, t)?;
    let engine = enumerate_outcomes(params, alphas, t)?;
    let by_pattern: HashMap<FlipPattern, (f64, f64)> = engine
        .atoms
        .iter()
        .filter_map(|a| a.pattern.clone().map(|p| (p, (a.u, a.weight))))
        .collect();

    let mut projection = 0.0f64;
    let mut summed: HashMap<FlipPattern, f64> = HashMap::new();
    for o in &outcomes {
        let initial = EnvBasisState::from_index(o.initial_env, n, params.mu());
        let final_ = EnvBasisState::from_index(o.final_env, n, params.mu());
        let pattern = FlipPattern::between(&initial.spins, &final_.spins)?;
        if o.weight > STATE_WEIGHT_FLOOR {
            let u = by_pattern.get(&pattern).map_or(f64::NAN, |e| e.0);
            projection = projection.max((u - o.projection_up()).abs());
        }
        *summed.entry(pattern).or_default() += o.weight;
    }
    let mut weight = 0.0f64;
    for (pattern, w) in &summed {
        let w_engine = by_pattern.get(pattern).map_or(0.0, |e| e.1);
        weight = weight.max((w_engine - w).abs());
    }
    Ok(PatternDeviation { projection, weight })
}

/// Max pairwise difference of two merged distributions, or infinity when
/// they merge into different numbers of atoms.
pub fn merged_distance(a: &ProjectionDistribution, b: &ProjectionDistribution, tol: f64) -> f64 {
    let (ma, mb) = (a.merged(tol), b.merged(tol));
    if ma.len() != mb.len() {
        return f64::INFINITY;
    }
    ma.iter()
        .zip(&mb)
        .map(|(x, y)| (x.0 - y.0).abs().max((x.1 - y.1).abs()))
        .fold(0.0, f64::max)
}

/// Binomial reduction against full enumeration.
pub fn binomial_vs_enumeration(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let enumerated = enumerate_outcomes(params, alphas, t)?;
    let binomial = binomial_exact(params, alphas, t)?;
    Ok(merged_distance(&enumerated, &binomial, tol))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledDeviation {
    /// Largest class-probability error in units of the binomial standard
    /// error `sqrt(p (1 - p) / count)` of the reference. Infinite when a
    /// class with reference probability 0 or 1 is missed.
    pub class_sigmas: f64,
    /// Kolmogorov-Smirnov distance between the sampled and reference `u`.
    pub ks: f64,
}

/// Kolmogorov-Smirnov distance between two discrete distributions of `u`.
pub fn ks_distance(a: &ProjectionDistribution, b: &ProjectionDistribution) -> f64 {
    let mut points: Vec<(f64, f64)> = a
        .atoms
        .iter()
        .map(|x| (x.u, x.weight))
        .chain(b.atoms.iter().map(|x| (x.u, -x.weight)))
        .collect();
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut diff = 0.0f64;
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < points.len() {
        let u = points[i].0;
        while i < points.len() && points[i].0 == u {
            diff += points[i].1;
            i += 1;
        }
        sup = sup.max(diff.abs());
    }
    sup
}

pub fn sampled_vs_reference(
    reference: &ProjectionDistribution,
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    plan: &SamplingPlan,
    eps: ClassicalityError,
) -> Result<SampledDeviation> {
    let sampled = sample_outcomes(params, alphas, t, plan)?;
    let p_ref = probabilities(reference, eps)?;
    let p_smp = probabilities(&sampled, eps)?;
    let count = plan.count as f64;
    let class_sigmas = [
        (p_ref.p_up, p_smp.p_up),
        (p_ref.p_down, p_smp.p_down),
        (p_ref.p_q, p_smp.p_q),
    ]
    .into_iter()
    .map(|(p, q)| {
        let sigma = (p * (1.0 - p) / count).sqrt();
        let err = (p - q).abs();
        if sigma > 0.0 {
            err / sigma
        } else if err <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    })
    .fold(0.0, f64::max);
    Ok(SampledDeviation {
        class_sigmas,
        ks: ks_distance(reference, &sampled),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleDeviation {
    /// Max over branches of `|sum_d prod_j |G_j|^2 - 1|`, by enumeration.
    pub branch: f64,
    /// `|sum of atom weights - 1|` of the enumerated distribution.
    pub distribution: f64,
    /// Max over spins and branches of `|no_flip + flip - 1|`.
    pub per_spin: f64,
}

pub fn sum_rules(params: &ModelParams, alphas: &SystemAmplitudes, t: f64) -> Result<SumRuleDeviation> {
    let n = params.env_size();
    let table = params.significance_table(t)?;
    let tau = params.elapsed(t)?;
    let mut branch = 0.0f64;
    for b in Branch::ALL {
        let total: f64 = (0..1u64 << n)
            .map(|mask| table.log_significance(b, &FlipPattern::from_mask(n, mask)).exp())
            .sum();
        branch = branch.max((total - 1.0).abs());
    }
    let distribution = (enumerate_outcomes(params, alphas, t)?.total_weight() - 1.0).abs();
    let mut per_spin = 0.0f64;
    for b in Branch::ALL {
        for j in 0..n {
            let s = params.spin_spectral(b, j)?;
            per_spin = per_spin.max((s.no_flip_probability(tau) + s.flip_probability(tau) - 1.0).abs());
        }
    }
    Ok(SumRuleDeviation {
        branch,
        distribution,
        per_spin,
    })
}
