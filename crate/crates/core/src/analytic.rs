//! Closed-form solutions for the two parameter choices without collapse.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, SystemAmplitudes};

/// Relative tolerance for deciding that `t` is a recovery time.
const RECOVERY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticKind {
    /// All `h_j = 0`, environment in its ground state.
    ZeroHZeroT,
    /// `nu = 0` and uniform `h_j = h`.
    NuZeroConstH,
}

/// A system state with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticState {
    pub phi: [Complex64; 2],
    pub probability: f64,
}

/// A parameter set checked against the preconditions of one closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCase {
    pub kind: AnalyticKind,
    pub params: ModelParams,
}

impl AnalyticCase {
    pub fn zero_h_zero_t(params: &ModelParams) -> Result<Self> {
        if params.couplings().iter().any(|&h| h != 0.0) {
            return Err(Error::Precondition("all vertical couplings must vanish".into()));
        }
        if params.mu() == 0.0 {
            return Err(Error::Precondition("mu = 0 leaves the ground state degenerate".into()));
        }
        Ok(Self {
            kind: AnalyticKind::ZeroHZeroT,
            params: params.clone(),
        })
    }

    pub fn nu_zero_const_h(params: &ModelParams) -> Result<Self> {
        if params.nu() != 0.0 {
            return Err(Error::Precondition(format!("nu must be 0, got {}", params.nu())));
        }
        params
            .uniform_coupling()
            .map_err(|e| Error::Precondition(e.to_string()))?;
        Ok(Self {
            kind: AnalyticKind::NuZeroConstH,
            params: params.clone(),
        })
    }

    /// The states predicted at time `t`.
    pub fn states(&self, alphas: &SystemAmplitudes, t: f64) -> Result<Vec<AnalyticState>> {
        let tau = self.params.elapsed(t)?;
        match self.kind {
            AnalyticKind::ZeroHZeroT => Ok(vec![zero_h_solution(
                alphas,
                ground_coupling_energy(&self.params),
                tau,
            )]),
            AnalyticKind::NuZeroConstH => nu_zero_solution(
                alphas,
                self.params.mu(),
                self.params.couplings()[0],
                tau,
            ),
        }
    }
}

/// Energy `E` such that the zero-coupling ground-state trajectory is
/// `a_up e^{-i t E}|up> + a_down e^{i t E}|down>` up to a global phase.
///
/// With `h = 0` the environment stays in its ground state `s_j = -sign(mu)`
/// and the branches pick up `exp(-i t (mu +/- nu) sum_j s_j)`. The common
/// `mu` part is a global phase, leaving `E = nu sum_j s_j = -N nu sign(mu)`.
/// This coincides with the environment's ground-state energy `-N |mu|`
/// only when `mu = nu`.
pub fn ground_coupling_energy(params: &ModelParams) -> f64 {
    -(params.env_size() as f64) * params.nu() * params.mu().signum()
}

/// `a_up e^{-i t E}|up> + a_down e^{i t E}|down>` with probability one.
pub fn zero_h_solution(alphas: &SystemAmplitudes, energy: f64, t: f64) -> AnalyticState {
    AnalyticState {
        phi: [
            alphas.a_up * Complex64::from_polar(1.0, -t * energy),
            alphas.a_down * Complex64::from_polar(1.0, t * energy),
        ],
        probability: 1.0,
    }
}

fn check_nu_zero_inputs(mu: f64, h: f64, t: f64) -> Result<f64> {
    if !(mu.is_finite() && h.is_finite() && t.is_finite()) {
        return Err(Error::Precondition("mu, h and t must be finite".into()));
    }
    if t < 0.0 {
        return Err(Error::Precondition("elapsed time must be non-negative".into()));
    }
    Ok(mu.hypot(h))
}

/// Whether `t` is one of the recovery times `m pi / sqrt(mu^2 + h^2)`.
pub fn is_recovery_time(mu: f64, h: f64, t: f64) -> bool {
    let omega = mu.hypot(h);
    if omega == 0.0 {
        return true;
    }
    let m = t * omega / PI;
    (m - m.round()).abs() <= RECOVERY_TOLERANCE * m.abs().max(1.0)
}

/// Large-environment limit for `nu = 0`, uniform `h`: the initial state at
/// recovery times, otherwise `a_up|up> +/- a_down|down>` with probability
/// one half each.
///
/// This is an `N -> infinity` statement; [`nu_zero_finite_split`] gives the
/// exact weights at finite `N`.
pub fn nu_zero_solution(alphas: &SystemAmplitudes, mu: f64, h: f64, t: f64) -> Result<Vec<AnalyticState>> {
    check_nu_zero_inputs(mu, h, t)?;
    let same = [alphas.a_up, alphas.a_down];
    if is_recovery_time(mu, h, t) {
        return Ok(vec![AnalyticState {
            phi: same,
            probability: 1.0,
        }]);
    }
    Ok(vec![
        AnalyticState {
            phi: same,
            probability: 0.5,
        },
        AnalyticState {
            phi: [alphas.a_up, -alphas.a_down],
            probability: 0.5,
        },
    ])
}

/// Exact finite-`N` weights of the two `nu = 0` states,
/// `(P(+), P(-)) = ((1 + q^N) / 2, (1 - q^N) / 2)` with
/// `q = 1 - 2 (h^2 / (mu^2 + h^2)) sin^2(w t)`.
///
/// The flip amplitudes of the two branches differ only in sign while the
/// no-flip amplitudes coincide, so the relative sign is the parity of the
/// number of flipped spins.
pub fn nu_zero_finite_split(mu: f64, h: f64, t: f64, env_size: usize) -> Result<(f64, f64)> {
    let omega = check_nu_zero_inputs(mu, h, t)?;
    if env_size == 0 {
        return Err(Error::Precondition("environment needs at least one spin".into()));
    }
    let p_flip = if omega == 0.0 {
        0.0
    } else {
        let b = h / omega;
        b * b * (omega * t).sin().powi(2)
    };
    let bias = (1.0 - 2.0 * p_flip).powi(env_size as i32);
    Ok((0.5 * (1.0 + bias), 0.5 * (1.0 - bias)))
}
