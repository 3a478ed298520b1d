//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use collapse_core::analytic::AnalyticCase;
use collapse_core::engine::with_workers;
use collapse_core::exact::{phase_distance, ExactUniverse, ThermalEnsemble};
use collapse_core::validation::{
    binomial_vs_enumeration, density_identity, enumeration_vs_universe, sampled_vs_reference, sum_rules,
};
use collapse_core::{
    binomial_exact, enumerate_outcomes, probabilities, sample_outcomes, time_series, Budget, ClassicalityError,
    Method, ModelParams, ObservableSeries, ProjectionDistribution, SamplingPlan, SystemAmplitudes, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Engine = fn(&ModelParams, &SystemAmplitudes) -> ProjectionDistribution;
type Criterion = (&'static str, fn() -> Outcome);

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eps() -> ClassicalityError {
    ClassicalityError::new(1e-3).unwrap()
}

fn born_alphas() -> SystemAmplitudes {
    SystemAmplitudes::from_population(0.4, 0.0).unwrap()
}

fn default_grid() -> Vec<f64> {
    TimeGrid::new(0.0, 400.0, 600).unwrap().points()
}

fn series(params: &ModelParams, grid: &[f64], method: Method) -> ObservableSeries {
    time_series(params, &born_alphas(), grid, eps(), method, &Budget::default()).unwrap()
}

fn random_case(rng: &mut ChaCha8Rng) -> (ModelParams, SystemAmplitudes, f64) {
    let n = rng.gen_range(1..=3);
    let couplings = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let beta = [0.0, 0.5][rng.gen_range(0..2)];
    let t = [0.5, 5.0, 50.0][rng.gen_range(0..3)];
    let params = ModelParams::new(rng.gen_range(-1.0..1.0), couplings)
        .unwrap()
        .with_inv_temperature(beta)
        .unwrap();
    let alphas = SystemAmplitudes::from_population(rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)).unwrap();
    (params, alphas, t)
}

fn c1_density_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (params, alphas, t) = random_case(&mut rng);
        worst = worst.max(density_identity(&params, &alphas, t).map_err(|e| e.to_string())?);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-9 && secs < 10.0,
        format!("20 sets, max deviation {worst:.2e} (<= 1e-9), {secs:.2} s (< 10 s)"),
    )
}

fn c2_schrodinger_limit() -> Outcome {
    let alphas = SystemAmplitudes::from_population(0.4, 0.9).unwrap();
    let mut worst = 0.0f64;
    let mut max_states = 0;
    for n in 1..=4 {
        for delta in [0.0, 0.3, -0.5] {
            let params = ModelParams::uniform(n, 0.0, delta).unwrap();
            let universe = ExactUniverse::new(&params).unwrap();
            let ground = ThermalEnsemble::ground_state(&params);
            let case = AnalyticCase::zero_h_zero_t(&params).unwrap();
            for t in [0.5, 5.0, 50.0, 314.0] {
                let predicted = case.states(&alphas, t).unwrap()[0];
                let outcomes = universe.trajectory_ensemble(&alphas, &ground, t).unwrap();
                let live: Vec<_> = outcomes.iter().filter(|o| o.weight > 0.0).collect();
                max_states = max_states.max(live.len());
                let total: f64 = live.iter().map(|o| o.weight).sum();
                worst = worst.max((total - 1.0).abs());
                for o in &live {
                    worst = worst.max(phase_distance(&o.phi, &predicted.phi));
                }
                let dist = enumerate_outcomes(&params, &alphas, t).unwrap();
                max_states = max_states.max(dist.atoms.len());
                worst = worst.max((dist.atoms[0].u - 0.4).abs());
            }
        }
    }
    verdict(
        worst <= 1e-12 && max_states == 1,
        format!("max trajectories {max_states}, max deviation {worst:.2e} (<= 1e-12)"),
    )
}

fn c3_oracle_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut universe_dev = 0.0f64;
    for _ in 0..12 {
        let (params, alphas, t) = random_case(&mut rng);
        let d = enumeration_vs_universe(&params, &alphas, t).map_err(|e| e.to_string())?;
        universe_dev = universe_dev.max(d.projection).max(d.weight);
    }

    let mut binomial_dev = 0.0f64;
    for n in [1, 2, 5, 10, 15, 20] {
        for (h, t) in [(0.01, 150.0), (0.5, 37.3)] {
            let params = ModelParams::uniform(n, h, 0.0).unwrap();
            binomial_dev = binomial_dev.max(binomial_vs_enumeration(&params, &born_alphas(), t, 1e-12).unwrap());
        }
    }

    let params = ModelParams::dispersed(10, 0.01, 0.02, 0.0).unwrap();
    let (mut sigmas, mut ks) = (0.0f64, 0.0f64);
    for (i, t) in [20.0, 45.0, 150.0].into_iter().enumerate() {
        let reference = enumerate_outcomes(&params, &born_alphas(), t).unwrap();
        let plan = SamplingPlan::new(100_000, 100 + i as u64);
        let d = sampled_vs_reference(&reference, &params, &born_alphas(), t, &plan, eps()).unwrap();
        sigmas = sigmas.max(d.class_sigmas);
        ks = ks.max(d.ks);
    }

    verdict(
        universe_dev <= 1e-9 && binomial_dev <= 1e-12 && sigmas <= 3.0 && ks <= 0.01,
        format!(
            "universe {universe_dev:.2e} (<= 1e-9), binomial {binomial_dev:.2e} (<= 1e-12), \
             sampled classes {sigmas:.2} sigma (<= 3), KS {ks:.4} (<= 0.01)"
        ),
    )
}

fn c4_sum_rules() -> Outcome {
    let alphas = born_alphas();
    let (mut branch, mut per_spin, mut weights) = (0.0f64, 0.0f64, 0.0f64);
    for n in 1..=12 {
        for t in [3.0, 150.0] {
            let params = ModelParams::dispersed(n, 0.4, 0.3, 0.05).unwrap();
            let d = sum_rules(&params, &alphas, t).unwrap();
            branch = branch.max(d.branch);
            per_spin = per_spin.max(d.per_spin);
            weights = weights.max(d.distribution);
        }
    }
    for n in [10, 80, 500] {
        let params = ModelParams::uniform(n, 0.01, 0.0).unwrap();
        let d = binomial_exact(&params, &alphas, 150.0).unwrap();
        weights = weights.max((d.total_weight() - 1.0).abs());
    }
    let params = ModelParams::dispersed(40, 0.01, 0.02, 0.0).unwrap();
    let d = sample_outcomes(&params, &alphas, 150.0, &SamplingPlan::new(20_000, 4)).unwrap();
    weights = weights.max((d.total_weight() - 1.0).abs());
    verdict(
        branch <= 1e-9 && weights <= 1e-9 && per_spin <= 1e-12,
        format!("branch {branch:.2e} (<= 1e-9), weights {weights:.2e} (<= 1e-9), per spin {per_spin:.2e} (<= 1e-12)"),
    )
}

fn born_deviation(n: usize) -> f64 {
    let params = ModelParams::uniform(n, 0.01, 0.0).unwrap();
    let d = binomial_exact(&params, &born_alphas(), 150.0).unwrap();
    let p = probabilities(&d, eps()).unwrap();
    (p.p_up - 0.4).abs().max((p.p_down - 0.6).abs()).max(p.p_q)
}

fn c5_born_rule() -> Outcome {
    let start = Instant::now();
    let params = ModelParams::uniform(80, 0.01, 0.0).unwrap();
    let d = binomial_exact(&params, &born_alphas(), 150.0).unwrap();
    let p = probabilities(&d, eps()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let devs: Vec<f64> = [10, 20, 40, 80].into_iter().map(born_deviation).collect();
    // Rounding noise of a few ulps is not a regression.
    let monotone = devs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    verdict(
        (p.p_up - 0.4).abs() <= 0.01 && (p.p_down - 0.6).abs() <= 0.01 && p.p_q <= 0.01 && secs < 1.0 && monotone,
        format!(
            "N=80 t=150: P_up {:.6}, P_down {:.6}, P_q {:.2e}, {secs:.3} s; deviation over N=10,20,40,80: {:.1e} {:.1e} {:.1e} {:.1e}",
            p.p_up, p.p_down, p.p_q, devs[0], devs[1], devs[2], devs[3]
        ),
    )
}

/// Max of `p_q` over grid points within `radius` steps of `t`.
fn max_near(s: &ObservableSeries, t: f64, step: f64, radius: f64) -> f64 {
    s.times
        .iter()
        .zip(&s.p_q)
        .filter(|(&x, _)| (x - t).abs() <= radius * step)
        .map(|(_, &q)| q)
        .fold(0.0, f64::max)
}

fn c6_resurrection() -> Outcome {
    let grid = TimeGrid::new(0.0, 400.0, 600).unwrap();
    let params = ModelParams::uniform(80, 0.01, 0.0).unwrap();
    let s = series(&params, &grid.points(), Method::Binomial);
    let revival = max_near(&s, PI / 0.01, grid.step(), 2.0);
    let half = max_near(&s, PI / 0.02, grid.step(), 2.0);
    verdict(
        revival >= 0.9 && half <= 0.01,
        format!("max P_q near pi/h {revival:.4} (>= 0.9), near pi/(2h) {half:.2e} (<= 0.01)"),
    )
}

/// First grid time after the collapse time with `p_q >= level`.
fn first_revival(s: &ObservableSeries, level: f64) -> Option<f64> {
    let collapse = s.collapse_time()?;
    s.times
        .iter()
        .zip(&s.p_q)
        .find(|(&t, &q)| t > collapse && q >= level)
        .map(|(&t, _)| t)
}

fn c7_dispersed_suppression() -> Outcome {
    let grid = TimeGrid::new(0.0, 2000.0, 3000).unwrap().points();
    let constant = series(&ModelParams::uniform(10, 0.01, 0.0).unwrap(), &grid, Method::Exact);
    let dispersed = series(&ModelParams::dispersed(10, 0.01, 0.02, 0.0).unwrap(), &grid, Method::Exact);
    let resurrection = PI / 0.01;
    let first = first_revival(&dispersed, 0.9);
    let ok = first.is_some_and(|t| t >= 4.0 * resurrection);
    verdict(
        ok,
        format!(
            "constant-h first revival {:?}, dispersed first revival {:?} (>= {:.1})",
            first_revival(&constant, 0.9),
            first,
            4.0 * resurrection
        ),
    )
}

fn c8_strong_coupling() -> Outcome {
    let s = series(&ModelParams::dispersed(10, 10.0, 0.02, 0.0).unwrap(), &default_grid(), Method::Exact);
    let min = s.p_q.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = s.p_q.iter().sum::<f64>() / s.len() as f64;
    verdict(min >= 0.9, format!("min P_q {min:.3e} (>= 0.9), mean {mean:.3}"))
}

fn c9_detuning() -> Outcome {
    let grid = default_grid();
    let small = series(&ModelParams::dispersed(10, 0.01, 0.02, 0.002).unwrap(), &grid, Method::Exact);
    let collapse = small.collapse_time();
    let after = collapse.map(|c| {
        small
            .times
            .iter()
            .zip(&small.p_q)
            .filter(|(&t, _)| t >= c)
            .map(|(_, &q)| q)
            .fold(0.0, f64::max)
    });
    let large = series(&ModelParams::dispersed(10, 0.01, 0.02, 0.1).unwrap(), &grid, Method::Exact);
    let min_large = large.p_q.iter().copied().fold(f64::INFINITY, f64::min);
    let below = large.p_q.iter().filter(|&&q| q < 0.95).count();
    verdict(
        after.is_some_and(|q| q <= 0.05) && min_large >= 0.95,
        format!(
            "delta=0.002: collapse {collapse:?}, max P_q after {after:?} (<= 0.05); \
             delta=0.1: min P_q {min_large:.4} (>= 0.95), {below}/{} points below",
            large.len()
        ),
    )
}

fn c10_temperature_independence() -> Outcome {
    let alphas = born_alphas();
    let mut all = true;
    let mut checked = 0;
    for beta in [1.0, 0.5, 7.0] {
        let pairs: [(ModelParams, Engine); 3] = [
            (ModelParams::dispersed(8, 0.3, 0.1, 0.2).unwrap(), |p, a| {
                enumerate_outcomes(p, a, 42.0).unwrap()
            }),
            (ModelParams::uniform(60, 0.05, 0.1).unwrap(), |p, a| {
                binomial_exact(p, a, 42.0).unwrap()
            }),
            (ModelParams::dispersed(30, 0.05, 0.1, 0.0).unwrap(), |p, a| {
                sample_outcomes(p, a, 42.0, &SamplingPlan::new(10_000, 5)).unwrap()
            }),
        ];
        for (params, engine) in pairs {
            let hot = engine(&params, &alphas);
            let cold = engine(&params.clone().with_inv_temperature(beta).unwrap(), &alphas);
            all &= hot.bitwise_eq(&cold);
            checked += 1;
        }
    }
    verdict(all, format!("{checked} engine/temperature pairs bitwise identical to beta=0: {all}"))
}

fn c11_parallel_determinism() -> Outcome {
    let alphas = born_alphas();
    let params = ModelParams::dispersed(40, 0.01, 0.02, 0.0).unwrap();
    let grid = TimeGrid::new(0.0, 400.0, 40).unwrap().points();
    let budget = |workers| Budget {
        samples: 20_000,
        seed: 11,
        workers,
    };
    let reference_series = time_series(&params, &alphas, &grid, eps(), Method::Sampled, &budget(1)).unwrap();
    let reference_dist = sample_outcomes(&params, &alphas, 77.0, &SamplingPlan::new(50_000, 3).with_workers(1)).unwrap();
    let small = ModelParams::dispersed(14, 0.3, 0.1, 0.0).unwrap();
    let reference_enum = with_workers(1, || enumerate_outcomes(&small, &alphas, 30.0).unwrap()).unwrap();
    let mut all = true;
    for workers in [4, 16] {
        let s = time_series(&params, &alphas, &grid, eps(), Method::Sampled, &budget(workers)).unwrap();
        all &= s.p_q.iter().zip(&reference_series.p_q).all(|(a, b)| a.to_bits() == b.to_bits());
        all &= s.p_up.iter().zip(&reference_series.p_up).all(|(a, b)| a.to_bits() == b.to_bits());
        let d = sample_outcomes(&params, &alphas, 77.0, &SamplingPlan::new(50_000, 3).with_workers(workers)).unwrap();
        all &= d.bitwise_eq(&reference_dist);
        let e = with_workers(workers, || enumerate_outcomes(&small, &alphas, 30.0).unwrap()).unwrap();
        all &= e.bitwise_eq(&reference_enum);
    }
    verdict(all, format!("series, sampler and enumeration identical for workers 1, 4, 16: {all}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("C1 density-matrix identity", c1_density_identity),
        ("C2 zero-coupling limit", c2_schrodinger_limit),
        ("C3 oracle chain", c3_oracle_chain),
        ("C4 sum rules", c4_sum_rules),
        ("C5 Born rule", c5_born_rule),
        ("C6 resurrection", c6_resurrection),
        ("C7 dispersed-coupling suppression", c7_dispersed_suppression),
        ("C8 strong-coupling classicality loss", c8_strong_coupling),
        ("C9 detuning threshold", c9_detuning),
        ("C10 temperature independence", c10_temperature_independence),
        ("C11 parallel determinism", c11_parallel_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
