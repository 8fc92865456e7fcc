//! PoI-selection rules.
//!
//! The central rule is the selfish one: each arriving user picks the PoI
//! maximizing the presumed benefit
//!
//! ```text
//! beta * age_n - gamma * queue_n - record_n
//! ```
//!
//! where `beta` is the reward per unit of age offered by the provider and
//! `gamma` the users' congestion sensitivity. The remaining rules are the
//! benchmarks used for comparison and for lower-bound proxies: price-greedy
//! (the `beta -> 0` limit), round-robin, join-the-shortest-queue, max-age,
//! and the stationary randomized policy that selects PoI `n` with
//! probability `mu_n / mu_sigma`.

use rand::Rng;

use crate::process::ProcessSpec;
use crate::state::Observation;
use crate::{Error, Result, SimRng};

/// How ties among equally-scored PoIs are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Uniformly random over the arg-max set (seeded). Avoids index bias in
    /// symmetric setups.
    UniformRandom,
    /// First index wins; makes selection a pure function of the observation.
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// `argmax_n (beta * age - gamma * queue - record)`.
    SelfishLinear { beta: f64, gamma: f64 },
    /// `argmax_n (-gamma * queue - record)`: the zero-reward limit of the
    /// selfish rule.
    PriceGreedy { gamma: f64 },
    /// Cycles through PoIs; the cursor advances only on slots with
    /// arrivals, so under unit-deterministic flow every PoI is visited
    /// exactly once per `N` slots.
    RoundRobin { cursor: usize },
    /// `argmin_n queue`.
    JoinShortestQueue,
    /// `argmax_n age`: the unselfish age comparator.
    MaxAge,
    /// Selects `n` with probability `weights[n] = mu_n / mu_sigma` on
    /// arrival slots.
    StationaryRandomized { weights: Vec<f64> },
}

/// A selection rule plus its tie-breaking mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    tie_break: TieBreak,
}

impl Policy {
    pub fn new(kind: PolicyKind, tie_break: TieBreak) -> Result<Self> {
        match &kind {
            PolicyKind::SelfishLinear { beta, gamma } => {
                if !beta.is_finite() || *beta < 0.0 || !gamma.is_finite() || *gamma < 0.0 {
                    return Err(Error::Config(format!(
                        "selfish policy requires beta >= 0 and gamma >= 0, got ({beta}, {gamma})"
                    )));
                }
            }
            PolicyKind::PriceGreedy { gamma } => {
                if !gamma.is_finite() || *gamma < 0.0 {
                    return Err(Error::Config(format!(
                        "greedy policy requires gamma >= 0, got {gamma}"
                    )));
                }
            }
            PolicyKind::StationaryRandomized { weights } => {
                let total: f64 = weights.iter().sum();
                if weights.is_empty()
                    || weights.iter().any(|w| !w.is_finite() || *w < 0.0)
                    || (total - 1.0).abs() > 1e-9
                {
                    return Err(Error::Config(
                        "stationary policy weights must form a probability vector".into(),
                    ));
                }
            }
            PolicyKind::RoundRobin { .. }
            | PolicyKind::JoinShortestQueue
            | PolicyKind::MaxAge => {}
        }
        Ok(Self { kind, tie_break })
    }

    pub fn selfish(beta: f64, gamma: f64, tie_break: TieBreak) -> Self {
        Self::new(PolicyKind::SelfishLinear { beta, gamma }, tie_break)
            .expect("non-negative parameters")
    }

    pub fn greedy(gamma: f64, tie_break: TieBreak) -> Self {
        Self::new(PolicyKind::PriceGreedy { gamma }, tie_break).expect("non-negative gamma")
    }

    pub fn round_robin() -> Self {
        Self {
            kind: PolicyKind::RoundRobin { cursor: 0 },
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn jsq(tie_break: TieBreak) -> Self {
        Self {
            kind: PolicyKind::JoinShortestQueue,
            tie_break,
        }
    }

    pub fn max_age(tie_break: TieBreak) -> Self {
        Self {
            kind: PolicyKind::MaxAge,
            tie_break,
        }
    }

    /// Stationary randomized policy with weights `mu_n / mu_sigma`.
    pub fn stationary(spec: &ProcessSpec) -> Self {
        Self {
            kind: PolicyKind::StationaryRandomized {
                weights: spec.selection_weights(),
            },
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PolicyKind::SelfishLinear { .. } => "selfish",
            PolicyKind::PriceGreedy { .. } => "greedy",
            PolicyKind::RoundRobin { .. } => "round-robin",
            PolicyKind::JoinShortestQueue => "jsq",
            PolicyKind::MaxAge => "max-age",
            PolicyKind::StationaryRandomized { .. } => "stationary",
        }
    }

    /// Picks the PoI for this slot given the observed `(age, queue,
    /// record)` triples. Selection is computed every slot; `has_arrival`
    /// only drives the stateful rules (round-robin advances its cursor and
    /// the stationary policy draws) on slots that actually deliver users.
    pub fn select(&mut self, obs: Observation<'_>, has_arrival: bool, rng: &mut SimRng) -> usize {
        let n = obs.n();
        debug_assert!(n >= 1);
        match &mut self.kind {
            PolicyKind::SelfishLinear { beta, gamma } => {
                let (b, g) = (*beta, *gamma);
                argmax_score(n, self.tie_break, rng, |i| {
                    b * obs.age(i) - g * obs.queue(i) - obs.record(i)
                })
            }
            PolicyKind::PriceGreedy { gamma } => {
                let g = *gamma;
                argmax_score(n, self.tie_break, rng, |i| -g * obs.queue(i) - obs.record(i))
            }
            PolicyKind::RoundRobin { cursor } => {
                let pick = *cursor;
                if has_arrival {
                    *cursor = (pick + 1) % n;
                }
                pick
            }
            PolicyKind::JoinShortestQueue => {
                argmax_score(n, self.tie_break, rng, |i| -obs.queue(i))
            }
            PolicyKind::MaxAge => argmax_score(n, self.tie_break, rng, |i| obs.age(i)),
            PolicyKind::StationaryRandomized { weights } => {
                if !has_arrival {
                    return 0;
                }
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        return i;
                    }
                }
                n - 1
            }
        }
    }
}

/// Arg-max with reservoir tie-breaking: every member of the tie set is
/// equally likely under [`TieBreak::UniformRandom`].
fn argmax_score(
    n: usize,
    tie_break: TieBreak,
    rng: &mut SimRng,
    score: impl Fn(usize) -> f64,
) -> usize {
    let mut best = score(0);
    let mut best_idx = 0;
    let mut ties = 1u32;
    for i in 1..n {
        let s = score(i);
        if s > best {
            best = s;
            best_idx = i;
            ties = 1;
        } else if s == best {
            if let TieBreak::UniformRandom = tie_break {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best_idx = i;
                }
            }
        }
    }
    best_idx
}
