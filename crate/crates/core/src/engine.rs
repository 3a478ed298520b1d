//! Outcome distribution of the projection `u = |<up|phi>|^2` over all
//! trajectories of the central spin.
//!
//! Marginalized over the initial environment state, the probability of a
//! flip pattern `d` is
//!
//! ```text
//! P(d) = |a_up|^2 prod_j |G^up_j(d_j)|^2 + |a_down|^2 prod_j |G^down_j(d_j)|^2
//! ```
//!
//! because `|G_j|^2` depends only on `d_j` and the thermal weights sum to
//! one. Each branch product is a probability law over patterns (the two
//! entries of every factor sum to one), so `P` is a two-component mixture of
//! independent Bernoulli products. That gives three exact routes:
//!
//! * [`enumerate_outcomes`]: one atom per pattern, `N <= 20`.
//! * [`binomial_exact`]: all `h_j` equal, so only the flip count matters and
//!   atoms are indexed by `k` with multiplicity `C(N, k)`.
//! * [`sample_outcomes`]: draw the branch with probability `|a_S|^2`, then
//!   flip every spin independently with probability `|G^S_j(flip)|^2`. The
//!   drawn pattern has exactly the law `P(d)` above, so the sampler is exact
//!   and costs `O(N)` per draw.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{ln_binomial_row, log_add_exp, logistic_complement};
use crate::model::{Branch, FlipPattern, ModelParams, SignificanceTable, Spin, SystemAmplitudes};

/// Largest environment for full pattern enumeration.
pub const ENUMERATION_CAP: usize = 20;
/// Atoms lighter than this are dropped from exact distributions.
pub const MIN_ATOM_WEIGHT: f64 = 1e-300;
/// Atoms whose projections differ by at most this are merged.
pub const U_MERGE_TOLERANCE: f64 = 1e-12;
/// Samples drawn from one RNG stream. Stream `b` covers samples
/// `[b * SAMPLE_BLOCK, (b + 1) * SAMPLE_BLOCK)`.
pub const SAMPLE_BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeAtom {
    pub u: f64,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern: Option<FlipPattern>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Exact,
    Binomial,
    Sampled,
}

/// Distribution of `u` at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionDistribution {
    pub atoms: Vec<OutcomeAtom>,
    pub kind: DistributionKind,
    pub sample_count: Option<usize>,
    pub seed: Option<u64>,
    /// Atoms removed for falling below [`MIN_ATOM_WEIGHT`].
    pub dropped_atoms: usize,
}

impl ProjectionDistribution {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `(u, weight)` pairs sorted by `u`, with atoms closer than `tol` in `u`
    /// combined. A group keeps the projection of its smallest member.
    pub fn merged(&self, tol: f64) -> Vec<(f64, f64)> {
        merge_by_u(self.atoms.iter().map(|a| (a.u, a.weight)).collect(), tol)
    }

    /// Bitwise equality of every atom and of the metadata.
    pub fn bitwise_eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.sample_count == other.sample_count
            && self.seed == other.seed
            && self.dropped_atoms == other.dropped_atoms
            && self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| {
                a.u.to_bits() == b.u.to_bits()
                    && a.weight.to_bits() == b.weight.to_bits()
                    && a.pattern == b.pattern
            })
    }
}

fn merge_by_u(mut pairs: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Groups can hold ~1e5 atoms of similar size, so sums are compensated
    // (Neumaier).
    let mut groups: Vec<(f64, f64, f64)> = Vec::with_capacity(pairs.len());
    for (u, w) in pairs {
        match groups.last_mut() {
            Some((u0, sum, comp)) if u - *u0 <= tol => {
                let next = *sum + w;
                *comp += if sum.abs() >= w.abs() {
                    (*sum - next) + w
                } else {
                    (w - next) + *sum
                };
                *sum = next;
            }
            _ => groups.push((u, w, 0.0)),
        }
    }
    groups.into_iter().map(|(u, sum, comp)| (u, sum + comp)).collect()
}

/// Log weights of the two branch components for one pattern.
#[derive(Debug, Clone, Copy)]
struct BranchLogs {
    up: f64,
    down: f64,
}

impl BranchLogs {
    fn new(alphas: &SystemAmplitudes, log_sig_up: f64, log_sig_down: f64) -> Self {
        Self {
            up: alphas.p_up().ln() + log_sig_up,
            down: alphas.p_down().ln() + log_sig_down,
        }
    }

    fn is_degenerate(&self) -> bool {
        self.up == f64::NEG_INFINITY && self.down == f64::NEG_INFINITY
    }

    /// `u = 1 / (1 + exp(logit))`, `logit = ln(|a_d|^2 W_d) - ln(|a_u|^2 W_u)`.
    fn projection(&self, t: f64) -> Result<f64> {
        if self.is_degenerate() {
            return Err(Error::DegenerateOutcome { t });
        }
        Ok(logistic_complement(self.down - self.up))
    }

    fn log_weight(&self) -> f64 {
        log_add_exp(self.up, self.down)
    }
}

/// Projection onto `|up>` of the wave-function reached through `pattern`.
pub fn u_of_pattern(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    pattern: &FlipPattern,
) -> Result<f64> {
    pattern.check_len(params.env_size())?;
    let table = params.significance_table(t)?;
    BranchLogs::new(
        alphas,
        table.log_significance(Branch::Up, pattern),
        table.log_significance(Branch::Down, pattern),
    )
    .projection(t)
}

/// One atom per flip pattern.
pub fn enumerate_outcomes(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
) -> Result<ProjectionDistribution> {
    let n = params.env_size();
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            what: "pattern enumeration",
            size: n,
            cap: ENUMERATION_CAP,
        });
    }
    let table = params.significance_table(t)?;
    let candidates: Vec<Option<OutcomeAtom>> = (0..1u64 << n)
        .into_par_iter()
        .map(|mask| {
            let pattern = FlipPattern::from_mask(n, mask);
            let logs = BranchLogs::new(
                alphas,
                table.log_significance(Branch::Up, &pattern),
                table.log_significance(Branch::Down, &pattern),
            );
            let weight = logs.log_weight().exp();
            if weight < MIN_ATOM_WEIGHT {
                return None;
            }
            Some(OutcomeAtom {
                u: logs.projection(t).expect("nonzero weight is never degenerate"),
                weight,
                pattern: Some(pattern),
            })
        })
        .collect();
    let dropped_atoms = candidates.iter().filter(|c| c.is_none()).count();
    Ok(ProjectionDistribution {
        atoms: candidates.into_iter().flatten().collect(),
        kind: DistributionKind::Exact,
        sample_count: None,
        seed: None,
        dropped_atoms,
    })
}

/// Flip-count reduction for uniform couplings, merged by `u`.
pub fn binomial_exact(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
) -> Result<ProjectionDistribution> {
    params.uniform_coupling()?;
    let n = params.env_size();
    let table = params.significance_table(t)?;
    let ln_choose = ln_binomial_row(n);
    // k * ln(x) with 0 * -inf read as 0.
    let times = |k: usize, x: f64| if k == 0 { 0.0 } else { k as f64 * x };
    let log_sig = |branch: Branch, k: usize| {
        let f = table.branch(branch)[0];
        times(n - k, f.no_flip) + times(k, f.flip)
    };
    let mut pairs = Vec::with_capacity(n + 1);
    let mut dropped_atoms = 0;
    for (k, ln_c) in ln_choose.iter().enumerate() {
        let logs = BranchLogs::new(alphas, log_sig(Branch::Up, k), log_sig(Branch::Down, k));
        let weight = (ln_c + logs.log_weight()).exp();
        if weight < MIN_ATOM_WEIGHT {
            dropped_atoms += 1;
            continue;
        }
        pairs.push((logs.projection(t)?, weight));
    }
    let atoms = merge_by_u(pairs, U_MERGE_TOLERANCE)
        .into_iter()
        .map(|(u, weight)| OutcomeAtom {
            u,
            weight,
            pattern: None,
        })
        .collect();
    Ok(ProjectionDistribution {
        atoms,
        kind: DistributionKind::Binomial,
        sample_count: None,
        seed: None,
        dropped_atoms,
    })
}

/// Sample count, base seed and worker threads for the mixture sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplingPlan {
    pub count: usize,
    pub seed: u64,
    /// Worker threads; `0` runs on the ambient rayon pool.
    pub workers: usize,
}

impl SamplingPlan {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or inline for `0`.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    Ok(pool.install(f))
}

/// Draws `plan.count` trajectories from the exact outcome law.
///
/// Samples are split into blocks of [`SAMPLE_BLOCK`]; block `b` uses
/// `ChaCha8Rng::seed_from_u64(seed)` switched to stream `b`. Each block
/// reads its stream in order, so the atoms depend only on `(seed, count)`
/// and never on the worker count.
pub fn sample_outcomes(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    plan: &SamplingPlan,
) -> Result<ProjectionDistribution> {
    if plan.count == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let table = params.significance_table(t)?;
    with_workers(plan.workers, || sample_with_table(&table, alphas, t, plan))?
}

fn sample_with_table(
    table: &SignificanceTable,
    alphas: &SystemAmplitudes,
    t: f64,
    plan: &SamplingPlan,
) -> Result<ProjectionDistribution> {
    let flip_up: Vec<f64> = table.up.iter().map(|f| f.flip.exp()).collect();
    let flip_down: Vec<f64> = table.down.iter().map(|f| f.flip.exp()).collect();
    let p_up = alphas.p_up();
    let n_blocks = plan.count.div_ceil(SAMPLE_BLOCK);
    let weight = 1.0 / plan.count as f64;

    let blocks: Vec<Vec<OutcomeAtom>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(b as u64);
            let len = SAMPLE_BLOCK.min(plan.count - b * SAMPLE_BLOCK);
            let mut atoms = Vec::with_capacity(len);
            for _ in 0..len {
                let flips = if rng.gen::<f64>() < p_up { &flip_up } else { &flip_down };
                let (mut up, mut down) = (0.0, 0.0);
                for (j, &p) in flips.iter().enumerate() {
                    let flipped = rng.gen::<f64>() < p;
                    up += table.up[j].get(flipped);
                    down += table.down[j].get(flipped);
                }
                let u = BranchLogs::new(alphas, up, down).projection(t)?;
                atoms.push(OutcomeAtom {
                    u,
                    weight,
                    pattern: None,
                });
            }
            Ok(atoms)
        })
        .collect::<Result<_>>()?;

    Ok(ProjectionDistribution {
        atoms: blocks.into_iter().flatten().collect(),
        kind: DistributionKind::Sampled,
        sample_count: Some(plan.count),
        seed: Some(plan.seed),
        dropped_atoms: 0,
    })
}

/// Normalized system state `(a_up G^up, a_down G^down) / sqrt(g)` for the
/// trajectory that starts from environment spins `initial` and flips
/// according to `pattern`.
///
/// Moduli come from the log-domain significances; phases are accumulated
/// separately, so large environments do not underflow.
pub fn wavefunction_of_pattern(
    params: &ModelParams,
    alphas: &SystemAmplitudes,
    t: f64,
    initial: &[Spin],
    pattern: &FlipPattern,
) -> Result<[Complex64; 2]> {
    let n = params.env_size();
    pattern.check_len(n)?;
    if initial.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: initial.len(),
        });
    }
    let tau = params.elapsed(t)?;
    let mut log_mod = [0.0f64; 2];
    let mut phase = [0.0f64; 2];
    for (i, branch) in Branch::ALL.into_iter().enumerate() {
        let a = alphas.get(branch);
        log_mod[i] = a.norm().ln();
        phase[i] = a.arg();
        for (j, (&s, flipped)) in initial.iter().zip(pattern.iter()).enumerate() {
            let spectral = params.spin_spectral(branch, j)?;
            log_mod[i] += 0.5 * spectral.log_factors(tau).get(flipped);
            phase[i] += spectral.amplitude(tau, s, flipped).arg();
        }
    }
    let log_norm = log_add_exp(2.0 * log_mod[0], 2.0 * log_mod[1]);
    if log_norm == f64::NEG_INFINITY {
        return Err(Error::DegenerateOutcome { t });
    }
    let component = |i: usize| Complex64::from_polar((log_mod[i] - 0.5 * log_norm).exp(), phase[i]);
    Ok([component(0), component(1)])
}
