//! Stochastic inputs of the simulation: the user arrival process `A[t]`,
//! the per-PoI service processes `R_n[t]`, and the PoI price process
//! `p_n[t]`.
//!
//! Arrivals and services are i.i.d. across slots (and services independent
//! across PoIs), drawn from bounded-support distributions over the
//! non-negative integers. Moments (`lambda`, `q = Pr{A > 0}`, `mu_n`,
//! second moments, variances, `R_max`) are computed exactly from the
//! declared distribution, never estimated.

use rand::Rng;

use crate::{Error, Result, SimRng};

/// Distribution over non-negative integer counts with bounded support.
#[derive(Debug, Clone, PartialEq)]
pub enum CountDist {
    /// Always `k`.
    Deterministic(u32),
    /// 1 with probability `p`, otherwise 0.
    Bernoulli(f64),
    /// Finite general distribution as `(value, probability)` pairs.
    Discrete(Vec<(u32, f64)>),
}

impl CountDist {
    pub fn validate(&self) -> Result<()> {
        match self {
            CountDist::Deterministic(_) => Ok(()),
            CountDist::Bernoulli(p) => {
                if !p.is_finite() || !(0.0..=1.0).contains(p) {
                    return Err(Error::Config(format!(
                        "bernoulli probability must lie in [0, 1], got {p}"
                    )));
                }
                Ok(())
            }
            CountDist::Discrete(pairs) => {
                if pairs.is_empty() {
                    return Err(Error::Config("discrete distribution has no atoms".into()));
                }
                let mut total = 0.0;
                for &(v, p) in pairs {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Config(format!(
                            "discrete atom ({v}, {p}) has an invalid probability"
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "discrete probabilities sum to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            CountDist::Deterministic(k) => f64::from(*k),
            CountDist::Bernoulli(p) => *p,
            CountDist::Discrete(pairs) => {
                pairs.iter().map(|&(v, p)| f64::from(v) * p).sum()
            }
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            CountDist::Deterministic(k) => f64::from(*k) * f64::from(*k),
            CountDist::Bernoulli(p) => *p,
            CountDist::Discrete(pairs) => pairs
                .iter()
                .map(|&(v, p)| f64::from(v) * f64::from(v) * p)
                .sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// `Pr{X > 0}`.
    pub fn prob_positive(&self) -> f64 {
        match self {
            CountDist::Deterministic(k) => {
                if *k > 0 {
                    1.0
                } else {
                    0.0
                }
            }
            CountDist::Bernoulli(p) => *p,
            CountDist::Discrete(pairs) => {
                pairs.iter().filter(|&&(v, _)| v > 0).map(|&(_, p)| p).sum()
            }
        }
    }

    /// Largest value the distribution can produce.
    pub fn max_value(&self) -> u32 {
        match self {
            CountDist::Deterministic(k) => *k,
            CountDist::Bernoulli(_) => 1,
            CountDist::Discrete(pairs) => {
                pairs.iter().map(|&(v, _)| v).max().unwrap_or(0)
            }
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> u32 {
        match self {
            CountDist::Deterministic(k) => *k,
            CountDist::Bernoulli(p) => u32::from(rng.gen::<f64>() < *p),
            CountDist::Discrete(pairs) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for &(v, p) in pairs {
                    acc += p;
                    if u < acc {
                        return v;
                    }
                }
                // Guard against cumulative rounding on the final atom.
                pairs.last().map(|&(v, _)| v).unwrap_or(0)
            }
        }
    }
}

/// Arrival and service processes of an `N`-PoI system, with exact moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    arrival: CountDist,
    services: Vec<CountDist>,
}

impl ProcessSpec {
    /// Requires `lambda > 0` and `mu_n > 0` for every PoI.
    pub fn new(arrival: CountDist, services: Vec<CountDist>) -> Result<Self> {
        arrival.validate()?;
        if arrival.mean() <= 0.0 {
            return Err(Error::Config(
                "arrival process must have positive mean".into(),
            ));
        }
        if services.is_empty() {
            return Err(Error::Config("at least one PoI is required".into()));
        }
        for (n, s) in services.iter().enumerate() {
            s.validate()?;
            if s.mean() <= 0.0 {
                return Err(Error::Config(format!(
                    "service process of PoI {n} must have positive mean"
                )));
            }
        }
        Ok(Self { arrival, services })
    }

    /// Same service distribution at every PoI.
    pub fn symmetric(arrival: CountDist, service: CountDist, n: usize) -> Result<Self> {
        Self::new(arrival, vec![service; n])
    }

    pub fn n(&self) -> usize {
        self.services.len()
    }

    pub fn arrival(&self) -> &CountDist {
        &self.arrival
    }

    pub fn services(&self) -> &[CountDist] {
        &self.services
    }

    /// `lambda = E[A]`.
    pub fn lambda(&self) -> f64 {
        self.arrival.mean()
    }

    /// `q = Pr{A > 0}`.
    pub fn q(&self) -> f64 {
        self.arrival.prob_positive()
    }

    pub fn arrival_second_moment(&self) -> f64 {
        self.arrival.second_moment()
    }

    pub fn arrival_variance(&self) -> f64 {
        self.arrival.variance()
    }

    /// `mu_n = E[R_n]`.
    pub fn mu(&self, n: usize) -> f64 {
        self.services[n].mean()
    }

    pub fn mu_sigma(&self) -> f64 {
        self.services.iter().map(CountDist::mean).sum()
    }

    pub fn mu_max(&self) -> f64 {
        self.services
            .iter()
            .map(CountDist::mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mu_min(&self) -> f64 {
        self.services
            .iter()
            .map(CountDist::mean)
            .fold(f64::INFINITY, f64::min)
    }

    /// `sum_n E[R_n^2]`.
    pub fn service_second_moment_sum(&self) -> f64 {
        self.services.iter().map(CountDist::second_moment).sum()
    }

    /// `sum_n Var(R_n)`.
    pub fn service_variance_sum(&self) -> f64 {
        self.services.iter().map(CountDist::variance).sum()
    }

    /// Hard cap on any single service draw.
    pub fn r_max(&self) -> u32 {
        self.services
            .iter()
            .map(CountDist::max_value)
            .max()
            .unwrap_or(0)
    }

    /// `mu_n / mu_sigma` per PoI; the age weights of the cost `J` and the
    /// selection probabilities of the stationary randomized policy.
    pub fn selection_weights(&self) -> Vec<f64> {
        let total = self.mu_sigma();
        self.services.iter().map(|s| s.mean() / total).collect()
    }

    /// True when every slot has exactly one arrival and every PoI serves
    /// exactly one user, so queues stay empty.
    pub fn is_deterministic_unit(&self) -> bool {
        self.arrival == CountDist::Deterministic(1)
            && self
                .services
                .iter()
                .all(|s| *s == CountDist::Deterministic(1))
    }

    pub fn sample_arrival(&self, rng: &mut SimRng) -> u32 {
        self.arrival.sample(rng)
    }

    /// Writes one service draw per PoI into `out`.
    pub fn sample_services_into(&self, rng: &mut SimRng, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.services.len());
        for (slot, dist) in out.iter_mut().zip(&self.services) {
            *slot = dist.sample(rng);
        }
    }

    /// One slot worth of inputs: `(A, R_1..R_N)`. Convenience wrapper; the
    /// hot path uses [`ProcessSpec::sample_services_into`] to avoid
    /// per-slot allocation.
    pub fn sample_slot_inputs(&self, rng: &mut SimRng) -> (u32, Vec<u32>) {
        let arrivals = self.sample_arrival(rng);
        let mut services = vec![0u32; self.n()];
        self.sample_services_into(rng, &mut services);
        (arrivals, services)
    }
}

/// Initial price assignment.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceInit {
    /// Drawn uniformly from the admissible range (the value set, or the
    /// continuous interval).
    UniformRandom,
    /// One price per PoI.
    Fixed(Vec<f64>),
}

/// Evolution of the true PoI prices `p_n[t]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PriceModel {
    /// Prices live on a finite value set and are constant within windows of
    /// `period` slots. At a window boundary each price jumps to a value
    /// drawn uniformly from the set minus its current value.
    Set {
        values: Vec<f64>,
        period: u64,
        initial: PriceInit,
    },
    /// Prices redrawn independently and uniformly from `[low, high)` every
    /// slot.
    UniformContinuous {
        low: f64,
        high: f64,
        initial: PriceInit,
    },
}

impl PriceModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            PriceModel::Set {
                values,
                period,
                initial,
            } => {
                if values.is_empty() {
                    return Err(Error::Config("price value set is empty".into()));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Config(
                        "price values must be finite and non-negative".into(),
                    ));
                }
                if *period == 0 {
                    return Err(Error::Config("price change period must be positive".into()));
                }
                self.validate_initial(initial, n)
            }
            PriceModel::UniformContinuous { low, high, initial } => {
                if !(low.is_finite() && high.is_finite()) || low >= high || *low < 0.0 {
                    return Err(Error::Config(format!(
                        "uniform price range [{low}, {high}) is invalid"
                    )));
                }
                self.validate_initial(initial, n)
            }
        }
    }

    fn validate_initial(&self, initial: &PriceInit, n: usize) -> Result<()> {
        if let PriceInit::Fixed(values) = initial {
            if values.len() != n {
                return Err(Error::Config(format!(
                    "{} initial prices given for {n} PoIs",
                    values.len()
                )));
            }
            let (lo, hi) = (self.p_min(), self.p_max());
            if values.iter().any(|v| *v < lo || *v > hi) {
                return Err(Error::Config(format!(
                    "initial prices must lie within [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn p_min(&self) -> f64 {
        match self {
            PriceModel::Set { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
            PriceModel::UniformContinuous { low, .. } => *low,
        }
    }

    pub fn p_max(&self) -> f64 {
        match self {
            PriceModel::Set { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            PriceModel::UniformContinuous { high, .. } => *high,
        }
    }

    pub fn initial_prices(&self, n: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
        self.validate(n)?;
        let initial = match self {
            PriceModel::Set { initial, .. } => initial,
            PriceModel::UniformContinuous { initial, .. } => initial,
        };
        match initial {
            PriceInit::Fixed(values) => Ok(values.clone()),
            PriceInit::UniformRandom => match self {
                PriceModel::Set { values, .. } => Ok((0..n)
                    .map(|_| values[rng.gen_range(0..values.len())])
                    .collect()),
                PriceModel::UniformContinuous { low, high, .. } => {
                    Ok((0..n).map(|_| rng.gen_range(*low..*high)).collect())
                }
            },
        }
    }

    /// Price update at the start of slot `slot`. Prices never change at
    /// slot 0; the set model changes only at window boundaries.
    pub fn advance(&self, prices: &mut [f64], slot: u64, rng: &mut SimRng) -> Result<()> {
        if slot == 0 {
            return Ok(());
        }
        match self {
            PriceModel::Set { values, period, .. } => {
                if !slot.is_multiple_of(*period) {
                    return Ok(());
                }
                if values.len() < 2 {
                    return Err(Error::Config(
                        "price value set needs at least two values for a change".into(),
                    ));
                }
                for p in prices.iter_mut() {
                    *p = draw_different(values, *p, rng);
                }
                Ok(())
            }
            PriceModel::UniformContinuous { low, high, .. } => {
                for p in prices.iter_mut() {
                    *p = rng.gen_range(*low..*high);
                }
                Ok(())
            }
        }
    }
}

/// Uniform draw from `values` excluding the current value. If `current` is
/// not a member (possible with an overridden initial price) every value is
/// a candidate.
fn draw_different(values: &[f64], current: f64, rng: &mut SimRng) -> f64 {
    match values.iter().position(|v| *v == current) {
        Some(cur) => {
            let j = rng.gen_range(0..values.len() - 1);
            if j >= cur {
                values[j + 1]
            } else {
                values[j]
            }
        }
        None => values[rng.gen_range(0..values.len())],
    }
}
