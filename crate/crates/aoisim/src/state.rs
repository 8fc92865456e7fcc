//! System state and the exact one-slot transition.
//!
//! A slot `t` executes in a fixed order:
//!
//! 1. the policy observes the pre-update `(age, queue, record)` of every
//!    PoI and picks a target; the selection is computed every slot but
//!    only has an effect when `A[t] > 0`;
//! 2. record refresh: arriving users report the selected PoI's current
//!    price, `r <- p`. The update is stamped `last_update = t + 1`, the
//!    first slot whose arrivals can observe the fresh record, so that
//!    `age == slot - last_update` holds identically;
//! 3. queue update: `Q_n <- max(Q_n + A * S_n - R_n, 0)`;
//! 4. age update: the refreshed PoI drops to zero, every other PoI ages by
//!    one slot;
//! 5. the slot counter advances.
//!
//! All `A[t]` users arriving within one slot observe the same records and
//! make a single joint choice.

use crate::policy::Policy;
use crate::SimRng;

/// Per-PoI state.
#[derive(Debug, Clone, PartialEq)]
pub struct PoiState {
    /// True current price `p_n[t]`.
    pub price: f64,
    /// Provider's stored (possibly stale) price copy `r_n[t]`.
    pub record: f64,
    /// Users waiting for service, `Q_n[t]`.
    pub queue: u32,
    /// Slots since the record was refreshed, `age = slot - last_update`.
    pub age: u32,
    /// Slot as of which the current record is fresh.
    pub last_update: u64,
}

/// Full simulation state: `N` PoIs plus the slot counter.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub pois: Vec<PoiState>,
    pub slot: u64,
}

impl SystemState {
    /// Cold start at slot 0: records equal the initial prices, queues and
    /// ages zero.
    pub fn new(prices: Vec<f64>) -> Self {
        let pois = prices
            .into_iter()
            .map(|price| PoiState {
                price,
                record: price,
                queue: 0,
                age: 0,
                last_update: 0,
            })
            .collect();
        Self { pois, slot: 0 }
    }

    pub fn n(&self) -> usize {
        self.pois.len()
    }

    pub fn total_queue(&self) -> u64 {
        self.pois.iter().map(|p| u64::from(p.queue)).sum()
    }

    pub fn max_age(&self) -> u32 {
        self.pois.iter().map(|p| p.age).max().unwrap_or(0)
    }
}

/// What a selecting user sees: ages, queues, and records — never the true
/// prices.
#[derive(Clone, Copy)]
pub struct Observation<'a> {
    pois: &'a [PoiState],
}

impl<'a> Observation<'a> {
    pub fn new(pois: &'a [PoiState]) -> Self {
        Self { pois }
    }

    pub fn n(&self) -> usize {
        self.pois.len()
    }

    pub fn age(&self, n: usize) -> f64 {
        f64::from(self.pois[n].age)
    }

    pub fn queue(&self, n: usize) -> f64 {
        f64::from(self.pois[n].queue)
    }

    pub fn record(&self, n: usize) -> f64 {
        self.pois[n].record
    }
}

/// Result of one slot: who arrived, where they went, whether the record
/// refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotOutcome {
    /// `A[t]`.
    pub arrivals: u32,
    /// `n*[t]`; meaningful as a destination only when `arrivals > 0`.
    pub selected: usize,
    /// True iff `arrivals > 0`, i.e. the selected PoI's record refreshed.
    pub record_updated: bool,
}

impl SlotOutcome {
    /// One-hot selection indicator `S*_n[t]`.
    pub fn selection_indicator(&self, n: usize) -> u32 {
        u32::from(n == self.selected)
    }

    /// Whether PoI `n`'s record refreshed this slot:
    /// `S*_n[t] * 1{A[t] > 0} = 1`.
    pub fn updated(&self, n: usize) -> bool {
        n == self.selected && self.record_updated
    }
}

/// Executes slot `state.slot` given this slot's sampled inputs.
///
/// `services` must hold one draw per PoI. Policy randomness (tie-breaks,
/// randomized selection) comes from `rng`; the environment stream is not
/// touched here.
pub fn step(
    state: &mut SystemState,
    policy: &mut Policy,
    arrivals: u32,
    services: &[u32],
    rng: &mut SimRng,
) -> SlotOutcome {
    debug_assert_eq!(services.len(), state.n());

    let selected = policy.select(Observation::new(&state.pois), arrivals > 0, rng);
    let slot = state.slot;
    let record_updated = arrivals > 0;

    if record_updated {
        let poi = &mut state.pois[selected];
        poi.record = poi.price;
        poi.last_update = slot + 1;
    }

    for (n, poi) in state.pois.iter_mut().enumerate() {
        let joined = if n == selected { arrivals } else { 0 };
        poi.queue = (poi.queue + joined).saturating_sub(services[n]);
        poi.age = if n == selected && record_updated {
            0
        } else {
            poi.age + 1
        };
    }
    state.slot = slot + 1;

    SlotOutcome {
        arrivals,
        selected,
        record_updated,
    }
}
