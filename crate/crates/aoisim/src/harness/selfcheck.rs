//! Built-in invariant suite behind the `selfcheck` CLI subcommand.
//!
//! Runs randomized short simulations and verifies the structural
//! guarantees slot by slot: the age identity `age == slot - last_update`,
//! record staleness (a record always equals the true price observed at its
//! last visit), selection one-hotness, coupled pooled-queue dominance, and
//! experiment-level determinism. Closed-form constants are cross-checked
//! against direct evaluations of their defining inequalities.

use rand::{Rng, SeedableRng};

use crate::bounds;
use crate::harness::config::ExperimentConfig;
use crate::harness::output::render_csv;
use crate::harness::preset::preset;
use crate::harness::runner::run_experiment;
use crate::harness::seed as seeding;
use crate::metrics::compute_epsilon;
use crate::policy::{Policy, TieBreak};
use crate::process::{CountDist, PriceInit, PriceModel, ProcessSpec};
use crate::state::{step, Observation, SystemState};
use crate::SimRng;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        Check {
            name,
            passed: false,
            detail: detail.into(),
        }
    }
}

/// Random bounded-support distribution with positive mean.
fn random_dist(rng: &mut SimRng) -> CountDist {
    match rng.gen_range(0..3) {
        0 => CountDist::Deterministic(rng.gen_range(1..=2)),
        1 => CountDist::Bernoulli(rng.gen_range(0.05..1.0)),
        _ => {
            let zero = rng.gen_range(0.0..0.6);
            let one = rng.gen_range(0.1..(1.0 - zero));
            let two = 1.0 - zero - one;
            CountDist::Discrete(vec![(0, zero), (1, one), (2, two)])
        }
    }
}

/// Random system: 2..=12 PoIs, random processes, random price model.
pub fn random_setup(rng: &mut SimRng) -> (ProcessSpec, PriceModel) {
    let n = rng.gen_range(2..=12);
    let arrival = random_dist(rng);
    let services = (0..n).map(|_| random_dist(rng)).collect();
    let spec = ProcessSpec::new(arrival, services).expect("generated spec is valid");
    let price = if rng.gen_bool(0.5) {
        PriceModel::Set {
            values: vec![0.25, 0.5, 0.75, 1.0],
            period: rng.gen_range(1..=50),
            initial: PriceInit::UniformRandom,
        }
    } else {
        PriceModel::UniformContinuous {
            low: 0.0,
            high: 1.0,
            initial: PriceInit::UniformRandom,
        }
    };
    (spec, price)
}

/// Random policy drawn over all six kinds.
pub fn random_policy(rng: &mut SimRng, spec: &ProcessSpec) -> Policy {
    let tie_break = if rng.gen_bool(0.5) {
        TieBreak::UniformRandom
    } else {
        TieBreak::LowestIndex
    };
    match rng.gen_range(0..6) {
        0 => Policy::selfish(rng.gen_range(0.0..5.0), rng.gen_range(0.0..3.0), tie_break),
        1 => Policy::greedy(rng.gen_range(0.0..3.0), tie_break),
        2 => Policy::round_robin(),
        3 => Policy::jsq(tie_break),
        4 => Policy::max_age(tie_break),
        _ => Policy::stationary(spec),
    }
}

/// Drives a run while asserting the per-slot invariants; returns the first
/// violation message, if any.
pub fn verify_trajectory_invariants(
    spec: &ProcessSpec,
    price: &PriceModel,
    mut policy: Policy,
    slots: u64,
    seed: u64,
) -> std::result::Result<(), String> {
    let n = spec.n();
    let mut env = SimRng::seed_from_u64(seeding::env_stream(seed));
    let mut pol = SimRng::seed_from_u64(seeding::policy_stream(seed));
    let mut state = SystemState::new(
        price
            .initial_prices(n, &mut env)
            .map_err(|e| e.to_string())?,
    );
    // Price observed at each PoI's last visit; the record must equal it.
    let mut visit_price: Vec<f64> = state.pois.iter().map(|p| p.price).collect();
    let mut price_buf = vec![0.0f64; n];
    let mut services = vec![0u32; n];
    let mut phi = 0u64;

    for _ in 0..slots {
        if state.slot > 0 {
            for (slot, poi) in price_buf.iter_mut().zip(&state.pois) {
                *slot = poi.price;
            }
            price
                .advance(&mut price_buf, state.slot, &mut env)
                .map_err(|e| e.to_string())?;
            for (poi, &p) in state.pois.iter_mut().zip(&price_buf) {
                poi.price = p;
            }
        }
        let arrivals = spec.sample_arrival(&mut env);
        spec.sample_services_into(&mut env, &mut services);
        let outcome = step(&mut state, &mut policy, arrivals, &services, &mut pol);

        let one_hot: u32 = (0..n).map(|i| outcome.selection_indicator(i)).sum();
        if one_hot != 1 {
            return Err(format!("selection vector sums to {one_hot} at slot {}", state.slot));
        }
        if outcome.updated(outcome.selected) {
            visit_price[outcome.selected] = state.pois[outcome.selected].price;
        }
        for (i, poi) in state.pois.iter().enumerate() {
            if u64::from(poi.age) != state.slot - poi.last_update {
                return Err(format!(
                    "age identity broken at slot {}: PoI {i} age {} vs slot - last_update {}",
                    state.slot,
                    poi.age,
                    state.slot - poi.last_update
                ));
            }
            if poi.record != visit_price[i] {
                return Err(format!(
                    "record staleness broken at slot {}: PoI {i} record {} vs visit price {}",
                    state.slot, poi.record, visit_price[i]
                ));
            }
        }
        phi = bounds::pooled_queue_step(phi, arrivals, services.iter().sum());
        if phi > state.total_queue() {
            return Err(format!(
                "pooled dominance broken at slot {}: phi {phi} > total queue {}",
                state.slot,
                state.total_queue()
            ));
        }
    }
    Ok(())
}

fn check_randomized_invariants(configs: u32, slots: u64) -> Check {
    let mut master = SimRng::seed_from_u64(0x5e1f_c0de);
    for i in 0..configs {
        let (spec, price) = random_setup(&mut master);
        let policy = random_policy(&mut master, &spec);
        let seed = master.gen();
        if let Err(detail) =
            verify_trajectory_invariants(&spec, &price, policy.clone(), slots, seed)
        {
            return Check::fail(
                "trajectory invariants",
                format!("config {i} ({}): {detail}", policy.name()),
            );
        }
    }
    Check::pass(
        "trajectory invariants",
        format!("age identity, record staleness, one-hot selection and pooled dominance held on {configs} random configs x {slots} slots"),
    )
}

fn check_argmax_shift_invariance() -> Check {
    let mut rng = SimRng::seed_from_u64(7);
    for _ in 0..200 {
        let n = rng.gen_range(2..=8);
        let pois: Vec<crate::state::PoiState> = (0..n)
            .map(|_| crate::state::PoiState {
                price: 0.5,
                record: rng.gen_range(0.0..1.0),
                queue: rng.gen_range(0..20),
                age: rng.gen_range(0..50),
                last_update: 0,
            })
            .collect();
        let mut policy = Policy::selfish(
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            TieBreak::LowestIndex,
        );
        let mut tie_rng = SimRng::seed_from_u64(0);
        let before = policy.select(Observation::new(&pois), true, &mut tie_rng);
        let shift = rng.gen_range(-1.0..1.0);
        let shifted: Vec<crate::state::PoiState> = pois
            .iter()
            .map(|p| crate::state::PoiState {
                record: p.record + shift,
                ..p.clone()
            })
            .collect();
        let after = policy.select(Observation::new(&shifted), true, &mut tie_rng);
        if before != after {
            return Check::fail(
                "argmax shift invariance",
                format!("selection moved from {before} to {after} under shift {shift}"),
            );
        }
    }
    Check::pass(
        "argmax shift invariance",
        "common benefit shifts never moved the selection on 200 random observations",
    )
}

fn check_constants() -> Check {
    let symmetric =
        ProcessSpec::symmetric(CountDist::Bernoulli(0.9), CountDist::Bernoulli(0.1), 10)
            .expect("valid spec");
    let eps = match compute_epsilon(&symmetric) {
        Ok(e) => e,
        Err(e) => return Check::fail("closed-form constants", e.to_string()),
    };
    let checks = [
        ("epsilon", eps, 1.0 / 9.0),
        ("B(1)", bounds::b_of_gamma(1.0, &symmetric), 1.9 / 1.8),
        (
            "M",
            bounds::m_constant(eps, &symmetric).expect("feasible"),
            0.0,
        ),
        (
            "weighted age lb",
            bounds::weighted_age_lower_bound(&symmetric),
            91.0 / 18.0,
        ),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > 1e-9 {
            return Check::fail(
                "closed-form constants",
                format!("{name}: got {got}, want {want}"),
            );
        }
    }
    // The slack must be the largest feasible one: tightening it by any
    // margin violates the defining inequality for some PoI.
    let n = symmetric.n() as f64;
    let feasible = |eps: f64| {
        (0..symmetric.n()).all(|i| {
            symmetric.mu(i) / symmetric.lambda()
                >= symmetric.mu(i) / symmetric.mu_sigma() + eps / n - 1e-12
        })
    };
    if !feasible(eps) || feasible(eps * 1.01) {
        return Check::fail(
            "closed-form constants",
            "epsilon is not the maximal feasible slack",
        );
    }
    Check::pass("closed-form constants", "epsilon, B(gamma), M and the age bound match their definitions")
}

fn check_determinism() -> Check {
    let mut config = match preset("fig5") {
        Ok(c) => c,
        Err(e) => return Check::fail("determinism", e.to_string()),
    };
    config.horizon = 5_000;
    config.warmup = Some(500);
    config.replications = 2;
    config.betas = vec![0.5];
    config.gammas = vec![1.0];
    let render = |config: &ExperimentConfig| -> std::result::Result<String, String> {
        let rows = run_experiment(config).map_err(|e| e.to_string())?;
        render_csv(&rows).map_err(|e| e.to_string())
    };
    match (render(&config), render(&config)) {
        (Ok(a), Ok(b)) if a == b => {
            Check::pass("determinism", "identical config and seed rendered identical CSV bytes")
        }
        (Ok(_), Ok(_)) => Check::fail("determinism", "CSV outputs differ between runs"),
        (Err(e), _) | (_, Err(e)) => Check::fail("determinism", e),
    }
}

fn check_bound_shapes() -> Check {
    let asymmetric = ProcessSpec::new(
        CountDist::Bernoulli(0.9),
        (0..10)
            .map(|n| CountDist::Bernoulli(if n < 5 { 0.11 } else { 0.09 }))
            .collect(),
    )
    .expect("valid spec");
    let eps = compute_epsilon(&asymmetric).expect("feasible");
    let limit = bounds::thm2_asymptotic(&asymmetric).expect("valid");
    // The gap closes at the O(1/beta) scale.
    let at_large = bounds::thm2_bound(1e6, 1.0, eps, &asymmetric, 1.0).expect("valid");
    if (limit - at_large).abs() > 1e-6 {
        return Check::fail(
            "bound shapes",
            format!("asymptote {limit} vs large-beta value {at_large}"),
        );
    }
    let mut last = f64::INFINITY;
    for beta in [0.05, 0.1, 0.5, 1.0, 5.0, 50.0] {
        let value = bounds::thm1_bound(beta, 10, 1.0).expect("valid");
        if value >= last {
            return Check::fail("bound shapes", "deterministic bound is not decreasing");
        }
        last = value;
    }
    Check::pass(
        "bound shapes",
        "deterministic bound decreases in beta; stochastic bound meets its asymptote",
    )
}

/// Runs every check; CLI prints one line per entry.
pub fn run_selfcheck() -> Vec<Check> {
    vec![
        check_randomized_invariants(20, 2_000),
        check_argmax_shift_invariance(),
        check_constants(),
        check_bound_shapes(),
        check_determinism(),
    ]
}
