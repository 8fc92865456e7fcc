//! Time-average statistics, the joint age/congestion cost, price-of-anarchy
//! estimators, and Lyapunov drift diagnostics.
//!
//! The cost of a run under reward rate `beta` and congestion sensitivity
//! `gamma` is
//!
//! ```text
//! J(beta, gamma) = (gamma * eps / N) * sum_n mean_queue_n
//!                + beta * sum_n (mu_n / mu_sigma) * mean_age_n
//! ```
//!
//! where `eps` is the largest slack satisfying
//! `mu_n / lambda >= mu_n / mu_sigma + eps / N` for every PoI — it exists
//! exactly when `lambda < mu_sigma`, the system's stability condition.
//!
//! Price of anarchy is `1 - (optimal cost) / (cost under selfishness)`,
//! estimated with the appropriate proxy for the optimum:
//! the exact deterministic-case optimum `N - 1` for the mean maximum age,
//! or a simulated-JSQ queue term plus the analytical weighted-age lower
//! bound in the stochastic case.
//!
//! Drift diagnostics evaluate the Lyapunov functions used in the bound
//! derivations along a recorded trajectory:
//!
//! ```text
//! V[t]  = sum_n age_n[t]
//! L[t]  = (gamma / (2 lambda beta)) * sum_n queue_n[t]^2 + (1/q) * sum_n age_n[t]
//! V1[t] = sum_n mu_n * age_n[t]
//! V2[t] = sum_n mu_n * age_n[t]^2
//! ```
//!
//! and report the one-step differences so their empirical means can be
//! checked against the analytical drift inequalities.

use crate::process::ProcessSpec;
use crate::state::{SlotOutcome, SystemState};
use crate::{Error, Result};

/// Parameters needed to accumulate the cost `J` online.
#[derive(Debug, Clone)]
pub struct CostParams {
    pub beta: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

/// Running accumulators for one simulation run. Samples the state after
/// every executed slot; slots before the warmup are ignored.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    horizon: u64,
    warmup: u64,
    weights: Vec<f64>,
    cost: Option<CostParams>,
    samples: u64,
    queue_sum: Vec<u64>,
    age_sum: Vec<u64>,
    max_age_sum: u64,
    weighted_age_sum: f64,
    cost_sum: f64,
}

impl RunMetrics {
    /// `weights` are the age weights `mu_n / mu_sigma`. When `cost` is
    /// given, the per-slot cost is also accumulated directly, giving a
    /// second route to `J` that must agree with the recomputation from the
    /// stored per-PoI means.
    pub fn new(horizon: u64, warmup: u64, weights: Vec<f64>, cost: Option<CostParams>) -> Self {
        let n = weights.len();
        Self {
            horizon,
            warmup,
            weights,
            cost,
            samples: 0,
            queue_sum: vec![0; n],
            age_sum: vec![0; n],
            max_age_sum: 0,
            weighted_age_sum: 0.0,
            cost_sum: 0.0,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn warmup(&self) -> u64 {
        self.warmup
    }

    /// Records the state left behind by the step that executed slot
    /// `state.slot - 1`.
    pub fn accumulate(&mut self, state: &SystemState, _outcome: &SlotOutcome) {
        let executed = state.slot - 1;
        if executed < self.warmup {
            return;
        }
        self.samples += 1;
        let n = state.n();
        let mut max_age = 0u32;
        let mut weighted = 0.0;
        let mut queue_total = 0u64;
        for i in 0..n {
            let poi = &state.pois[i];
            self.queue_sum[i] += u64::from(poi.queue);
            self.age_sum[i] += u64::from(poi.age);
            queue_total += u64::from(poi.queue);
            weighted += self.weights[i] * f64::from(poi.age);
            max_age = max_age.max(poi.age);
        }
        self.max_age_sum += u64::from(max_age);
        self.weighted_age_sum += weighted;
        if let Some(cost) = &self.cost {
            let n_f = n as f64;
            self.cost_sum += cost.gamma * cost.epsilon / n_f * queue_total as f64
                + cost.beta * weighted;
        }
    }

    pub fn finalize(self) -> RunSummary {
        let count = self.samples.max(1) as f64;
        let mean_queue: Vec<f64> = self.queue_sum.iter().map(|&s| s as f64 / count).collect();
        let mean_age: Vec<f64> = self.age_sum.iter().map(|&s| s as f64 / count).collect();
        RunSummary {
            samples: self.samples,
            mean_queue_sum: mean_queue.iter().sum(),
            weighted_mean_age: self.weighted_age_sum / count,
            mean_max_age: self.max_age_sum as f64 / count,
            cost_j: self.cost.as_ref().map(|_| self.cost_sum / count),
            mean_queue,
            mean_age,
            weights: self.weights,
        }
    }
}

/// Finalized time averages of one run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub samples: u64,
    pub mean_queue: Vec<f64>,
    pub mean_age: Vec<f64>,
    pub mean_queue_sum: f64,
    pub weighted_mean_age: f64,
    pub mean_max_age: f64,
    /// Cost accumulated slot by slot, when cost parameters were attached.
    pub cost_j: Option<f64>,
    pub weights: Vec<f64>,
}

/// Recomputes `J` from the stored per-PoI means; must match the
/// accumulated route to floating-point accuracy.
pub fn cost_j(summary: &RunSummary, beta: f64, gamma: f64, epsilon: f64) -> f64 {
    let n = summary.mean_queue.len() as f64;
    let queue_term: f64 = summary.mean_queue.iter().sum();
    let age_term: f64 = summary
        .mean_age
        .iter()
        .zip(&summary.weights)
        .map(|(age, w)| w * age)
        .sum();
    gamma * epsilon / n * queue_term + beta * age_term
}

/// Largest `eps` with `mu_n / lambda >= mu_n / mu_sigma + eps / N` for all
/// `n`, namely `N * mu_min * (1/lambda - 1/mu_sigma)`. Requires
/// `lambda < mu_sigma`.
pub fn compute_epsilon(spec: &ProcessSpec) -> Result<f64> {
    let lambda = spec.lambda();
    let mu_sigma = spec.mu_sigma();
    if lambda >= mu_sigma {
        return Err(Error::InfeasibleEpsilon { lambda, mu_sigma });
    }
    Ok(spec.n() as f64 * spec.mu_min() * (1.0 / lambda - 1.0 / mu_sigma))
}

/// A PoA estimate, clamped into `[0, 1]`. Clamping is flagged, never
/// silent: finite-sample noise can push a lower-bound proxy above the
/// measured cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poa {
    pub value: f64,
    pub clamped: bool,
}

impl Poa {
    fn clamp(raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Poa {
            value,
            clamped: value != raw,
        }
    }
}

/// Deterministic-case PoA: `1 - (N - 1) / mean_max_age`, the optimum being
/// the round-robin value `N - 1`.
pub fn poa_deterministic(mean_max_age_selfish: f64, n: usize) -> Result<Poa> {
    if !mean_max_age_selfish.is_finite() || mean_max_age_selfish <= 0.0 {
        return Err(Error::Domain(format!(
            "deterministic PoA needs a positive mean max age, got {mean_max_age_selfish}"
        )));
    }
    Ok(Poa::clamp(1.0 - (n as f64 - 1.0) / mean_max_age_selfish))
}

/// Stochastic-case PoA: `1 - J_lower / J_selfish` where `J_lower` combines
/// the simulated JSQ queue cost with the analytical weighted-age lower
/// bound.
pub fn poa_stochastic(j_selfish: f64, j_lower: f64) -> Result<Poa> {
    if !(j_selfish.is_finite() && j_lower.is_finite()) || j_selfish <= 0.0 || j_lower <= 0.0 {
        return Err(Error::Domain(format!(
            "stochastic PoA needs positive costs, got selfish {j_selfish}, lower {j_lower}"
        )));
    }
    Ok(Poa::clamp(1.0 - j_lower / j_selfish))
}

/// Mean, standard error, and count of one metric across replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicated {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Standard error is the sample standard deviation over `sqrt(count)`;
/// zero for a single replication.
pub fn replicate(values: &[f64]) -> Replicated {
    let count = values.len();
    assert!(count > 0, "no replications to summarize");
    let mean = values.iter().sum::<f64>() / count as f64;
    let stderr = if count > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (count as f64 - 1.0);
        (var / count as f64).sqrt()
    } else {
        0.0
    };
    Replicated {
        mean,
        stderr,
        count,
    }
}

/// Ordinary least-squares slope of `values` against slot indices
/// `0, 1, ...`.
pub fn least_squares_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, y) in values.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (y - y_mean);
        den += dx * dx;
    }
    num / den
}

/// Per-slot record of a run, for drift diagnostics and trajectory-level
/// checks. Stores the state observed after each executed slot.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    n: usize,
    ages: Vec<u32>,
    queues: Vec<u32>,
    arrivals: Vec<u32>,
    selected: Vec<u32>,
}

impl Trajectory {
    pub fn with_capacity(n: usize, slots: usize) -> Self {
        Self {
            n,
            ages: Vec::with_capacity(n * slots),
            queues: Vec::with_capacity(n * slots),
            arrivals: Vec::with_capacity(slots),
            selected: Vec::with_capacity(slots),
        }
    }

    pub fn push(&mut self, state: &SystemState, outcome: &SlotOutcome) {
        debug_assert_eq!(state.n(), self.n);
        for poi in &state.pois {
            self.ages.push(poi.age);
            self.queues.push(poi.queue);
        }
        self.arrivals.push(outcome.arrivals);
        self.selected.push(outcome.selected as u32);
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ages_at(&self, t: usize) -> &[u32] {
        &self.ages[t * self.n..(t + 1) * self.n]
    }

    pub fn queues_at(&self, t: usize) -> &[u32] {
        &self.queues[t * self.n..(t + 1) * self.n]
    }

    pub fn max_age_at(&self, t: usize) -> u32 {
        self.ages_at(t).iter().copied().max().unwrap_or(0)
    }

    /// Age of one PoI across the whole record, as floats for regression.
    pub fn age_series(&self, poi: usize) -> Vec<f64> {
        (0..self.len())
            .map(|t| f64::from(self.ages_at(t)[poi]))
            .collect()
    }
}

/// Which Lyapunov function to evaluate along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovKind {
    /// `V[t] = sum_n age_n`.
    SumAge,
    /// `L[t] = (gamma/(2 lambda beta)) sum_n queue_n^2 + (1/q) sum_n age_n`.
    QueueAgeMix,
    /// `V1[t] = sum_n mu_n age_n`.
    WeightedAge,
    /// `V2[t] = sum_n mu_n age_n^2`.
    WeightedAgeSquared,
}

/// Parameters the Lyapunov functions draw on.
#[derive(Debug, Clone)]
pub struct DriftParams {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub q: f64,
    pub mu: Vec<f64>,
}

impl DriftParams {
    pub fn from_spec(spec: &ProcessSpec, beta: f64, gamma: f64) -> Self {
        Self {
            beta,
            gamma,
            lambda: spec.lambda(),
            q: spec.q(),
            mu: (0..spec.n()).map(|n| spec.mu(n)).collect(),
        }
    }
}

/// One-step drift samples of a Lyapunov function plus their empirical mean.
#[derive(Debug, Clone)]
pub struct DriftReport {
    pub samples: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// Values of the chosen Lyapunov function at every recorded slot.
pub fn lyapunov_series(
    traj: &Trajectory,
    kind: LyapunovKind,
    params: &DriftParams,
) -> Result<Vec<f64>> {
    if kind == LyapunovKind::QueueAgeMix && params.beta == 0.0 {
        return Err(Error::Domain(
            "queue/age Lyapunov function is undefined at beta = 0".into(),
        ));
    }
    let value = |t: usize| -> f64 {
        let ages = traj.ages_at(t);
        match kind {
            LyapunovKind::SumAge => ages.iter().map(|&a| f64::from(a)).sum(),
            LyapunovKind::QueueAgeMix => {
                let queue_sq: f64 = traj
                    .queues_at(t)
                    .iter()
                    .map(|&q| f64::from(q) * f64::from(q))
                    .sum();
                let age_sum: f64 = ages.iter().map(|&a| f64::from(a)).sum();
                params.gamma / (2.0 * params.lambda * params.beta) * queue_sq
                    + age_sum / params.q
            }
            LyapunovKind::WeightedAge => ages
                .iter()
                .zip(&params.mu)
                .map(|(&a, mu)| mu * f64::from(a))
                .sum(),
            LyapunovKind::WeightedAgeSquared => ages
                .iter()
                .zip(&params.mu)
                .map(|(&a, mu)| mu * f64::from(a) * f64::from(a))
                .sum(),
        }
    };
    Ok((0..traj.len()).map(value).collect())
}

/// One-step differences of the chosen Lyapunov function and their mean,
/// for empirical checks against the analytical drift inequalities.
pub fn drift_diagnostics(
    traj: &Trajectory,
    kind: LyapunovKind,
    params: &DriftParams,
) -> Result<DriftReport> {
    let series = lyapunov_series(traj, kind, params)?;
    if series.len() < 2 {
        return Err(Error::Domain(
            "drift diagnostics need at least two recorded slots".into(),
        ));
    }
    let samples: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let summary = replicate(&samples);
    Ok(DriftReport {
        samples,
        mean: summary.mean,
        stderr: summary.stderr,
    })
}
