//! Environment-induced stochastic dynamics of a central spin.
//!
//! A spin-1/2 system couples to `N` environment spins. Each possible pair of
//! initial and final environment eigenstates yields one system wave-function
//! and one probability; the collection of these trajectories is what this
//! crate computes.
//!
//! * [`model`]: parameters and the per-spin significance algebra.
//! * [`exact`]: dense brute-force universe for small `N`, used as an oracle.
//! * [`engine`]: exact enumeration, the binomial reduction and the exact
//!   mixture sampler for the projection `u = |<up|phi>|^2`.
//! * [`observables`]: classification into up/down/quantum and time series.
//! * [`analytic`]: closed-form solutions without collapse.
//! * [`validation`]: engine-versus-oracle deviations.

pub mod analytic;
pub mod engine;
pub mod error;
pub mod exact;
pub mod logspace;
pub mod model;
pub mod observables;
pub mod validation;

pub use engine::{
    binomial_exact, enumerate_outcomes, sample_outcomes, u_of_pattern, wavefunction_of_pattern,
    DistributionKind, OutcomeAtom, ProjectionDistribution, SamplingPlan,
};
pub use error::{Error, Result};
pub use exact::{ExactUniverse, ThermalEnsemble, TrajectoryOutcome};
pub use model::{Branch, FlipPattern, ModelParams, Spin, SpinSpectral, SystemAmplitudes};
pub use observables::{
    classify, probabilities, time_series, Budget, Class, ClassProbabilities, ClassicalityError,
    Method, ObservableSeries, TimeGrid,
};
