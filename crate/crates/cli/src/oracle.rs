//! The `oracle-check` suite: every engine against its brute-force oracle on
//! a fixed set of small problems.

use collapse_core::analytic::AnalyticCase;
use collapse_core::exact::{phase_distance, ExactUniverse, ThermalEnsemble};
use collapse_core::validation::{
    binomial_vs_enumeration, density_identity, enumeration_vs_universe, sampled_vs_reference, sum_rules,
};
use collapse_core::{enumerate_outcomes, ClassicalityError, ModelParams, SamplingPlan, SystemAmplitudes};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: deviation {:.3e} (tolerance {:.0e})",
            if self.passed() { "ok  " } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance
        )
    }
}

fn check(name: String, deviation: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        deviation,
        tolerance,
    }
}

fn small_cases() -> collapse_core::Result<Vec<(ModelParams, SystemAmplitudes, f64)>> {
    Ok(vec![
        (
            ModelParams::new(0.0, vec![0.7])?,
            SystemAmplitudes::from_population(0.4, 0.0)?,
            5.0,
        ),
        (
            ModelParams::new(0.3, vec![0.4, 0.9])?.with_inv_temperature(0.5)?,
            SystemAmplitudes::from_population(0.3, 0.7)?,
            50.0,
        ),
        (
            ModelParams::new(-0.4, vec![0.2, 1.1, 0.6])?,
            SystemAmplitudes::from_population(0.6, 1.9)?,
            0.5,
        ),
        (
            ModelParams::dispersed(3, 0.5, 0.3, 0.1)?.with_inv_temperature(0.5)?,
            SystemAmplitudes::from_population(0.5, 0.0)?,
            5.0,
        ),
    ])
}

/// Runs every check. Errors from the engines themselves are returned.
pub fn run_checks() -> collapse_core::Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (params, alphas, t) in small_cases()? {
        let label = format!("N={} delta={} t={}", params.env_size(), params.delta(), t);
        out.push(check(
            format!("density identity {label}"),
            density_identity(&params, &alphas, t)?,
            1e-9,
        ));
        let dev = enumeration_vs_universe(&params, &alphas, t)?;
        out.push(check(
            format!("enumeration vs universe {label}"),
            dev.projection.max(dev.weight),
            1e-9,
        ));
    }

    let alphas = SystemAmplitudes::from_population(0.4, 0.0)?;
    for (n, h, t) in [(4, 0.01, 150.0), (12, 0.3, 37.3), (20, 0.01, 150.0)] {
        let params = ModelParams::uniform(n, h, 0.0)?;
        out.push(check(
            format!("binomial vs enumeration N={n} h={h} t={t}"),
            binomial_vs_enumeration(&params, &alphas, t, 1e-12)?,
            1e-12,
        ));
    }

    let params = ModelParams::dispersed(10, 0.01, 0.02, 0.0)?;
    let reference = enumerate_outcomes(&params, &alphas, 60.0)?;
    let eps = ClassicalityError::new(1e-3)?;
    let dev = sampled_vs_reference(&reference, &params, &alphas, 60.0, &SamplingPlan::new(100_000, 7), eps)?;
    out.push(check("sampled class probabilities N=10 (sigmas)".into(), dev.class_sigmas, 3.0));
    out.push(check("sampled KS distance N=10".into(), dev.ks, 0.01));

    for (n, t) in [(6, 80.0), (12, 150.0)] {
        let params = ModelParams::dispersed(n, 0.3, 0.2, 0.05)?;
        let dev = sum_rules(&params, &alphas, t)?;
        out.push(check(format!("branch sum rule N={n}"), dev.branch, 1e-9));
        out.push(check(format!("distribution sum rule N={n}"), dev.distribution, 1e-9));
        out.push(check(format!("per-spin sum rule N={n}"), dev.per_spin, 1e-12));
    }

    // Zero couplings: the universe must reproduce the closed form with a
    // single trajectory.
    let params = ModelParams::uniform(3, 0.0, 0.2)?;
    let case = AnalyticCase::zero_h_zero_t(&params)?;
    let t = 7.5;
    let predicted = case.states(&alphas, t)?;
    let universe = ExactUniverse::new(&params)?;
    let outcomes = universe.trajectory_ensemble(&alphas, &ThermalEnsemble::ground_state(&params), t)?;
    let live: Vec<_> = outcomes.iter().filter(|o| o.weight > 0.0).collect();
    let dev = if live.len() == 1 && predicted.len() == 1 {
        phase_distance(&live[0].phi, &predicted[0].phi).max((live[0].weight - predicted[0].probability).abs())
    } else {
        f64::INFINITY
    };
    out.push(check("zero coupling closed form N=3".into(), dev, 1e-12));
    Ok(out)
}
