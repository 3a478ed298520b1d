//! Central spin model: parameters, system amplitudes and the per-spin
//! significance algebra.
//!
//! Energies are measured in units where `mu + nu = 1`, so the model is fixed
//! by the detuning `delta = mu - nu` and the vertical couplings `h_j`.
//! Conditioned on the system branch, every environment spin evolves under a
//! two-level Hamiltonian `a sigma_z + b sigma_x` with
//!
//! | branch | a (longitudinal) | b (transverse) |
//! |--------|------------------|----------------|
//! | up     | `mu + nu = 1`    | `+h_j`         |
//! | down   | `mu - nu = delta`| `-h_j`         |
//!
//! and `exp(-i tau (a sz + b sx)) = cos(w tau) I - i sin(w tau) (a sz + b sx) / w`
//! with `w = sqrt(a^2 + b^2)`. The squared matrix elements then only depend
//! on whether the spin flipped:
//!
//! * not flipped: `cos^2(w tau) + r sin^2(w tau)`, with `r = a^2 / w^2`
//! * flipped: `(1 - r) sin^2(w tau)`

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which eigenstate of the central spin's `sigma_z` a significance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Up,
    Down,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Up, Branch::Down];
}

/// An eigenvalue of `sigma_z` for a single environment spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn from_sign(s: i8) -> Result<Self> {
        match s {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            _ => Err(Error::param("spin", format!("expected +1 or -1, got {s}"))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Parameters of the central-spin universe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    delta: f64,
    couplings: Vec<f64>,
    inv_temperature: f64,
    base_time: f64,
}

impl ModelParams {
    /// Detuning `delta = mu - nu` and one vertical coupling per environment
    /// spin. Temperature defaults to infinite (`beta = 0`), base time to 0.
    pub fn new(delta: f64, couplings: Vec<f64>) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::param("delta", "must be finite"));
        }
        if couplings.is_empty() {
            return Err(Error::param("couplings", "environment needs at least one spin"));
        }
        if let Some(j) = couplings.iter().position(|h| !h.is_finite()) {
            return Err(Error::param("couplings", format!("h_{j} is not finite")));
        }
        Ok(Self {
            delta,
            couplings,
            inv_temperature: 0.0,
            base_time: 0.0,
        })
    }

    /// `N` spins all coupled with the same `h`.
    pub fn uniform(env_size: usize, h: f64, delta: f64) -> Result<Self> {
        Self::new(delta, vec![h; env_size])
    }

    /// `h_j = h + (j - 1) dh / N` for `j = 1..=N`.
    pub fn dispersed(env_size: usize, h: f64, dh: f64, delta: f64) -> Result<Self> {
        if !dh.is_finite() {
            return Err(Error::param("delta_h", "must be finite"));
        }
        let n = env_size as f64;
        let couplings = (0..env_size).map(|j| h + j as f64 * dh / n).collect();
        Self::new(delta, couplings)
    }

    pub fn with_inv_temperature(mut self, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::param("beta", format!("must be finite and >= 0, got {beta}")));
        }
        self.inv_temperature = beta;
        Ok(self)
    }

    pub fn with_base_time(mut self, t0: f64) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::param("t0", "must be finite"));
        }
        self.base_time = t0;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mu(&self) -> f64 {
        0.5 * (1.0 + self.delta)
    }

    pub fn nu(&self) -> f64 {
        0.5 * (1.0 - self.delta)
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn env_size(&self) -> usize {
        self.couplings.len()
    }

    pub fn inv_temperature(&self) -> f64 {
        self.inv_temperature
    }

    pub fn base_time(&self) -> f64 {
        self.base_time
    }

    /// The shared coupling when all `h_j` are bitwise equal.
    pub fn uniform_coupling(&self) -> Result<f64> {
        let first = self.couplings[0];
        match self.couplings.iter().position(|&h| h != first) {
            None => Ok(first),
            Some(index) => Err(Error::NonUniformCouplings {
                first,
                index,
                other: self.couplings[index],
            }),
        }
    }

    /// Elapsed time `t - t0`; rejects times before the base time.
    pub fn elapsed(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::param("t", "must be finite"));
        }
        if t < self.base_time {
            return Err(Error::TimeBeforeStart {
                t,
                t0: self.base_time,
            });
        }
        Ok(t - self.base_time)
    }

    /// Frequency and ratio of spin `j` (0-based) in the given branch.
    pub fn spin_spectral(&self, branch: Branch, j: usize) -> Result<SpinSpectral> {
        let h = *self.couplings.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            size: self.env_size(),
        })?;
        Ok(match branch {
            Branch::Up => SpinSpectral::new(branch, self.mu() + self.nu(), h),
            Branch::Down => SpinSpectral::new(branch, self.mu() - self.nu(), -h),
        })
    }

    /// `<s'_j| exp(-i (t - t0) H_branch_j) |s_j>`, with `s'_j = s_j` unless
    /// `flipped`.
    pub fn spin_amplitude(
        &self,
        branch: Branch,
        j: usize,
        t: f64,
        initial: Spin,
        flipped: bool,
    ) -> Result<Complex64> {
        let tau = self.elapsed(t)?;
        Ok(self.spin_spectral(branch, j)?.amplitude(tau, initial, flipped))
    }

    /// `ln |G^branch|^2` for the given flip pattern, i.e. the sum over spins of
    /// `ln |G_j|^2`. Exact zeros propagate as `-inf`.
    pub fn log_significance(&self, branch: Branch, t: f64, pattern: &FlipPattern) -> Result<f64> {
        pattern.check_len(self.env_size())?;
        let table = self.significance_table(t)?;
        Ok(table.log_significance(branch, pattern))
    }

    /// Per-spin log significances at time `t` for both branches.
    pub fn significance_table(&self, t: f64) -> Result<SignificanceTable> {
        let tau = self.elapsed(t)?;
        let factors = |branch| -> Vec<LogFactors> {
            (0..self.env_size())
                .map(|j| {
                    self.spin_spectral(branch, j)
                        .expect("index in range")
                        .log_factors(tau)
                })
                .collect()
        };
        Ok(SignificanceTable {
            up: factors(Branch::Up),
            down: factors(Branch::Down),
        })
    }
}

/// Frequency and ratio of one environment spin, conditioned on a branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSpectral {
    pub branch: Branch,
    /// `sqrt(a^2 + b^2)`.
    pub omega: f64,
    /// `a^2 / omega^2`; set to 1 when `omega = 0` (the spin never moves).
    pub ratio: f64,
    pub longitudinal: f64,
    pub transverse: f64,
}

impl SpinSpectral {
    fn new(branch: Branch, longitudinal: f64, transverse: f64) -> Self {
        let omega = longitudinal.hypot(transverse);
        let ratio = if omega == 0.0 {
            1.0
        } else {
            let a = longitudinal / omega;
            a * a
        };
        Self {
            branch,
            omega,
            ratio,
            longitudinal,
            transverse,
        }
    }

    /// `1 - ratio`, evaluated as `b^2 / omega^2` to avoid cancellation when
    /// the ratio is close to one.
    pub fn flip_fraction(&self) -> f64 {
        if self.omega == 0.0 {
            0.0
        } else {
            let b = self.transverse / self.omega;
            b * b
        }
    }

    /// `|G_j|^2` for an unflipped spin after elapsed time `tau`.
    pub fn no_flip_probability(&self, tau: f64) -> f64 {
        let (s, c) = (self.omega * tau).sin_cos();
        c * c + self.ratio * s * s
    }

    /// `|G_j|^2` for a flipped spin after elapsed time `tau`.
    pub fn flip_probability(&self, tau: f64) -> f64 {
        let s = (self.omega * tau).sin();
        self.flip_fraction() * s * s
    }

    /// Natural logs of the no-flip and flip probabilities.
    pub fn log_factors(&self, tau: f64) -> LogFactors {
        let (s, c) = (self.omega * tau).sin_cos();
        let q = self.flip_fraction();
        let flip = q * s * s;
        // Both forms are exact in real arithmetic; pick the one without
        // cancellation.
        let no_flip = if flip < 0.5 {
            (-flip).ln_1p()
        } else {
            (c * c + self.ratio * s * s).ln()
        };
        LogFactors {
            no_flip,
            flip: q.ln() + 2.0 * s.abs().ln(),
        }
    }

    /// Complex matrix element of the spin propagator between `initial` and
    /// either the same state or its flip.
    pub fn amplitude(&self, tau: f64, initial: Spin, flipped: bool) -> Complex64 {
        if self.omega == 0.0 {
            return if flipped { Complex64::new(0.0, 0.0) } else { Complex64::new(1.0, 0.0) };
        }
        let (s, c) = (self.omega * tau).sin_cos();
        let sw = s / self.omega;
        if flipped {
            // <-s| sigma_x |s> = 1
            Complex64::new(0.0, -sw * self.transverse)
        } else {
            Complex64::new(c, -sw * self.longitudinal * initial.sign())
        }
    }
}

/// `ln |G_j|^2` for the two flip states of one spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogFactors {
    pub no_flip: f64,
    pub flip: f64,
}

impl LogFactors {
    #[inline]
    pub fn get(&self, flipped: bool) -> f64 {
        if flipped {
            self.flip
        } else {
            self.no_flip
        }
    }
}

/// Log-domain per-spin factors for both branches at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceTable {
    pub up: Vec<LogFactors>,
    pub down: Vec<LogFactors>,
}

impl SignificanceTable {
    pub fn branch(&self, branch: Branch) -> &[LogFactors] {
        match branch {
            Branch::Up => &self.up,
            Branch::Down => &self.down,
        }
    }

    pub fn log_significance(&self, branch: Branch, pattern: &FlipPattern) -> f64 {
        self.branch(branch)
            .iter()
            .zip(pattern.iter())
            .map(|(f, flipped)| f.get(flipped))
            .sum()
    }
}

/// Amplitudes of the central spin's initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemAmplitudes {
    pub a_up: Complex64,
    pub a_down: Complex64,
}

impl SystemAmplitudes {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(a_up: Complex64, a_down: Complex64) -> Result<Self> {
        let norm = a_up.norm_sqr() + a_down.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { a_up, a_down })
    }

    /// `sqrt(p) |up> + sqrt(1 - p) e^{i phase} |down>`.
    pub fn from_population(p_up: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_up) {
            return Err(Error::param("alpha_up_sq", format!("must lie in [0, 1], got {p_up}")));
        }
        if !phase.is_finite() {
            return Err(Error::param("alpha_phase", "must be finite"));
        }
        Self::new(
            Complex64::new(p_up.sqrt(), 0.0),
            Complex64::from_polar((1.0 - p_up).sqrt(), phase),
        )
    }

    pub fn p_up(&self) -> f64 {
        self.a_up.norm_sqr()
    }

    pub fn p_down(&self) -> f64 {
        self.a_down.norm_sqr()
    }

    pub fn get(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Up => self.a_up,
            Branch::Down => self.a_down,
        }
    }
}

/// Which environment spins flipped between the initial and final eigenstate.
/// Entry `j` is `true` when `d_j = s_j s'_j = -1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FlipPattern(Vec<bool>);

impl FlipPattern {
    /// No spin flipped.
    pub fn identity(env_size: usize) -> Self {
        Self(vec![false; env_size])
    }

    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    /// From `d_j` values in `{+1, -1}`.
    pub fn from_signs(d: &[i8]) -> Result<Self> {
        d.iter()
            .map(|&s| match s {
                1 => Ok(false),
                -1 => Ok(true),
                _ => Err(Error::param("pattern", format!("d_j must be +1 or -1, got {s}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// Bit `j` of `mask` marks spin `j` as flipped.
    pub fn from_mask(env_size: usize, mask: u64) -> Self {
        Self((0..env_size).map(|j| mask >> j & 1 == 1).collect())
    }

    pub fn between(initial: &[Spin], final_: &[Spin]) -> Result<Self> {
        if initial.len() != final_.len() {
            return Err(Error::LengthMismatch {
                expected: initial.len(),
                got: final_.len(),
            });
        }
        Ok(Self(initial.iter().zip(final_).map(|(a, b)| a != b).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_flipped(&self, j: usize) -> bool {
        self.0[j]
    }

    /// `d_j` as `+1` (kept) or `-1` (flipped).
    pub fn sign(&self, j: usize) -> i8 {
        if self.0[j] {
            -1
        } else {
            1
        }
    }

    pub fn flip_count(&self) -> usize {
        self.0.iter().filter(|&&f| f).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }
}
