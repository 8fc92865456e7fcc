//! Discrete-time simulation and analysis of information freshness in
//! crowd-learning systems where selfish users choose which point of
//! interest (PoI) to sample and report.
//!
//! Layers, bottom to top:
//!
//! - [`process`]: arrival/service count distributions with exact moments,
//!   plus the PoI price process.
//! - [`state`]: per-PoI state (price, record, queue, age) and the one-slot
//!   transition [`state::step`].
//! - [`policy`]: PoI-selection rules — the selfish linear-reward rule and
//!   the benchmark policies (price-greedy, round-robin, JSQ, max-age,
//!   stationary randomized).
//! - [`metrics`]: time averages, the joint age/congestion cost `J`, price
//!   of anarchy estimators, and Lyapunov drift diagnostics.
//! - [`bounds`]: closed-form performance bounds and the resource-pooled
//!   queue used as a queue-cost lower bound.
//! - [`harness`]: experiment configuration, figure presets, the seeded
//!   replication runner, and CSV/JSON emission.
//!
//! Everything is deterministic given a configuration and a base seed:
//! environment randomness (arrivals, services, prices) and policy
//! randomness (tie-breaks, randomized selection) are drawn from separate
//! streams so that runs of different policies on the same seed share the
//! exact same realization of the environment.

pub mod bounds;
pub mod harness;
pub mod metrics;
pub mod policy;
pub mod process;
pub mod state;

/// RNG used throughout the simulator. PCG is small, fast, and its output
/// sequence is stable across platforms, which the reproducibility
/// guarantees rely on.
pub type SimRng = rand_pcg::Pcg64Mcg;

pub use bounds::BoundsReport;
pub use harness::{run_experiment, ExperimentConfig, ResultRow};
pub use metrics::{RunMetrics, RunSummary};
pub use policy::Policy;
pub use process::{CountDist, PriceModel, ProcessSpec};
pub use state::{SlotOutcome, SystemState};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// No stability slack exists: requires `lambda < mu_sigma`.
    #[error("infeasible epsilon: requires lambda < mu_sigma (lambda = {lambda}, mu_sigma = {mu_sigma})")]
    InfeasibleEpsilon { lambda: f64, mu_sigma: f64 },

    /// Input outside the domain of a closed-form expression.
    #[error("domain error: {0}")]
    Domain(String),

    /// Preset name not recognized.
    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
