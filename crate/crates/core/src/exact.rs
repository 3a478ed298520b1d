//! Brute-force universe: dense Hamiltonian of system plus environment, exact
//! propagation by eigendecomposition, and the trajectory ensemble built
//! directly from projections of the evolved universe state.
//!
//! Basis ordering is `system (x) environment`: the system bit is the most
//! significant bit of the index, environment spin `j` (0-based) sits at bit
//! `N - 1 - j`, and a zero bit means spin up (`+1`). For `N = 1` the order is
//! `|up,+>, |up,->, |down,+>, |down,->`.
//!
//! Memory: the Hamiltonian, its eigenvectors (both real) and the complex
//! propagator take `32 * 4^(N+1)` bytes together. At the default cap
//! `N = 12` that is about 2 GiB, so anything past `N ~ 8` is slow.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::model::{ModelParams, Spin, SystemAmplitudes};

pub const DEFAULT_EXACT_CAP: usize = 12;

/// A product eigenstate `|s_1 ... s_N>` of the environment Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvBasisState {
    pub spins: Vec<Spin>,
    pub energy: f64,
}

impl EnvBasisState {
    pub fn from_index(index: usize, env_size: usize, mu: f64) -> Self {
        let spins: Vec<Spin> = (0..env_size)
            .map(|j| {
                if index >> (env_size - 1 - j) & 1 == 0 {
                    Spin::Up
                } else {
                    Spin::Down
                }
            })
            .collect();
        let energy = mu * spins.iter().map(|s| s.sign()).sum::<f64>();
        Self { spins, energy }
    }

    pub fn index(&self) -> usize {
        let n = self.spins.len();
        self.spins
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Spin::Down)
            .fold(0, |acc, (j, _)| acc | 1 << (n - 1 - j))
    }
}

/// Initial weights `f_n` of the environment's product eigenstates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalEnsemble {
    weights: Vec<f64>,
    log_partition: f64,
}

impl ThermalEnsemble {
    /// Gibbs weights `exp(-beta E_n) / Z` at the model's inverse temperature.
    pub fn thermal(params: &ModelParams) -> Result<Self> {
        let n = params.env_size();
        if n > usize::BITS as usize - 2 {
            return Err(Error::CapExceeded {
                what: "thermal ensemble",
                size: n,
                cap: usize::BITS as usize - 2,
            });
        }
        let beta = params.inv_temperature();
        let log_boltzmann: Vec<f64> = (0..1usize << n)
            .map(|i| -beta * EnvBasisState::from_index(i, n, params.mu()).energy)
            .collect();
        let log_partition = log_sum_exp(&log_boltzmann);
        let weights = log_boltzmann
            .iter()
            .map(|l| (l - log_partition).exp())
            .collect();
        Ok(Self {
            weights,
            log_partition,
        })
    }

    /// The `beta -> infinity` limit: uniform over the lowest-energy states.
    pub fn ground_state(params: &ModelParams) -> Self {
        let n = params.env_size();
        let energies: Vec<f64> = (0..1usize << n)
            .map(|i| EnvBasisState::from_index(i, n, params.mu()).energy)
            .collect();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let count = energies.iter().filter(|&&e| e == e_min).count();
        let weights = energies
            .iter()
            .map(|&e| if e == e_min { 1.0 / count as f64 } else { 0.0 })
            .collect();
        Self {
            weights,
            log_partition: (count as f64).ln(),
        }
    }

    /// The environment prepared in a single eigenstate.
    pub fn pure(env_size: usize, index: usize) -> Result<Self> {
        let dim = 1usize << env_size;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, size: dim });
        }
        let mut weights = vec![0.0; dim];
        weights[index] = 1.0;
        Ok(Self {
            weights,
            log_partition: 0.0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln Z` relative to the chosen energy origin.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn partition(&self) -> f64 {
        self.log_partition.exp()
    }
}

/// One possible system wave-function at time `t`, together with its
/// probability and the environment labels that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryOutcome {
    /// Normalized `(up, down)` components; zero when `weight` is zero.
    pub phi: [Complex64; 2],
    pub weight: f64,
    pub final_env: usize,
    pub initial_env: usize,
}

impl TrajectoryOutcome {
    pub fn projection_up(&self) -> f64 {
        self.phi[0].norm_sqr()
    }
}

/// Phase-invariant distance `1 - |<a|b>|` between normalized 2-vectors.
pub fn phase_distance(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    let overlap = a[0].conj() * b[0] + a[1].conj() * b[1];
    1.0 - overlap.norm()
}

/// Dense universe Hamiltonian. It is real symmetric in the product basis.
pub fn build_hamiltonian(params: &ModelParams, cap: usize) -> Result<DMatrix<f64>> {
    let n = params.env_size();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "exact universe",
            size: n,
            cap,
        });
    }
    let dim = 2usize << n;
    let (mu, nu) = (params.mu(), params.nu());
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for index in 0..dim {
        let sys = if index >> n & 1 == 0 { 1.0 } else { -1.0 };
        for (j, &hj) in params.couplings().iter().enumerate() {
            let bit = 1usize << (n - 1 - j);
            let s = if index & bit == 0 { 1.0 } else { -1.0 };
            h[(index, index)] += mu * s + sys * nu * s;
            h[(index ^ bit, index)] += sys * hj;
        }
    }
    Ok(h)
}

/// A diagonalized universe, ready to propagate to any time.
#[derive(Debug, Clone)]
pub struct ExactUniverse {
    params: ModelParams,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl ExactUniverse {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_EXACT_CAP)
    }

    pub fn with_cap(params: &ModelParams, cap: usize) -> Result<Self> {
        let h = build_hamiltonian(params, cap)?;
        let eig = h.symmetric_eigen();
        Ok(Self {
            params: params.clone(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn env_dim(&self) -> usize {
        1 << self.params.env_size()
    }

    /// `exp(-i (t - t0) H)`.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<Complex64>> {
        let tau = self.params.elapsed(t)?;
        let v = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = self
            .eigenvalues
            .map(|e| Complex64::from_polar(1.0, -tau * e));
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * phases[c]);
        Ok(scaled * v.transpose())
    }

    fn check_ensemble(&self, ensemble: &ThermalEnsemble) -> Result<()> {
        if ensemble.weights().len() != self.env_dim() {
            return Err(Error::ShapeMismatch(format!(
                "ensemble has {} weights, environment has {} states",
                ensemble.weights().len(),
                self.env_dim()
            )));
        }
        Ok(())
    }

    /// Evolved universe states `exp(-i tau H) |n> (x) |phi>`, one per
    /// initial environment state with nonzero weight.
    fn evolved_states(
        &self,
        alphas: &SystemAmplitudes,
        ensemble: &ThermalEnsemble,
        t: f64,
    ) -> Result<Vec<(usize, f64, DVector<Complex64>)>> {
        self.check_ensemble(ensemble)?;
        let u = self.propagator(t)?;
        let env_dim = self.env_dim();
        Ok(ensemble
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &f)| f > 0.0)
            .map(|(n, &f)| {
                let psi = u.column(n) * alphas.a_up + u.column(env_dim + n) * alphas.a_down;
                (n, f, psi)
            })
            .collect())
    }

    /// All `(n', n)` outcomes: `phi = <n'| exp(-i tau H) |n> (x) |phi> / sqrt(g)`
    /// with weight `f_n g`.
    pub fn trajectory_ensemble(
        &self,
        alphas: &SystemAmplitudes,
        ensemble: &ThermalEnsemble,
        t: f64,
    ) -> Result<Vec<TrajectoryOutcome>> {
        let env_dim = self.env_dim();
        let mut outcomes = Vec::new();
        for (n, f, psi) in self.evolved_states(alphas, ensemble, t)? {
            for n_final in 0..env_dim {
                let up = psi[n_final];
                let down = psi[env_dim + n_final];
                let g = up.norm_sqr() + down.norm_sqr();
                let phi = if g > 0.0 {
                    let s = g.sqrt();
                    [up / s, down / s]
                } else {
                    [Complex64::new(0.0, 0.0); 2]
                };
                outcomes.push(TrajectoryOutcome {
                    phi,
                    weight: f * g,
                    final_env: n_final,
                    initial_env: n,
                });
            }
        }
        Ok(outcomes)
    }

    /// Max elementwise `|Tr_E rho(t) - sum_k P_k |phi_k><phi_k||`, with the
    /// left side from an explicit partial trace of the universe density
    /// matrix.
    pub fn reduced_density_check(
        &self,
        outcomes: &[TrajectoryOutcome],
        alphas: &SystemAmplitudes,
        ensemble: &ThermalEnsemble,
        t: f64,
    ) -> Result<f64> {
        let env_dim = self.env_dim();
        if let Some(bad) = outcomes
            .iter()
            .find(|o| o.final_env >= env_dim || o.initial_env >= env_dim)
        {
            return Err(Error::ShapeMismatch(format!(
                "outcome labels ({}, {}) outside an environment of {} states",
                bad.final_env, bad.initial_env, env_dim
            )));
        }
        let dim = 2 * env_dim;
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for (_, f, psi) in self.evolved_states(alphas, ensemble, t)? {
            rho += psi.map(|z| z * f) * psi.adjoint();
        }
        let mut reduced = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (a, row) in reduced.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                for e in 0..env_dim {
                    *cell += rho[(a * env_dim + e, b * env_dim + e)];
                }
            }
        }
        let mut mixture = [[Complex64::new(0.0, 0.0); 2]; 2];
        for o in outcomes {
            for (row, pa) in mixture.iter_mut().zip(o.phi) {
                for (cell, pb) in row.iter_mut().zip(o.phi) {
                    *cell += pa * pb.conj() * o.weight;
                }
            }
        }
        let mut dev = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                dev = dev.max((reduced[a][b] - mixture[a][b]).norm());
            }
        }
        Ok(dev)
    }
}
