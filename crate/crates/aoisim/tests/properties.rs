//! Property-based and drift-diagnostic checks: structural invariants on
//! random inputs, and the Lyapunov drift inequalities the performance
//! bounds rest on, verified empirically along simulated trajectories.

use proptest::prelude::*;
use rand::SeedableRng;

use aoisim::bounds;
use aoisim::harness::{
    preset, run_experiment_detailed, run_single, ExperimentConfig, OutputFormat, PolicyName,
    RunSetup,
};
use aoisim::metrics::{
    compute_epsilon, drift_diagnostics, replicate, DriftParams, LyapunovKind, Trajectory,
};
use aoisim::policy::{Policy, TieBreak};
use aoisim::process::{CountDist, PriceInit, PriceModel, ProcessSpec};
use aoisim::SimRng;

fn count_dist_strategy() -> impl Strategy<Value = CountDist> {
    prop_oneof![
        (1u32..3).prop_map(CountDist::Deterministic),
        (0.05f64..1.0).prop_map(CountDist::Bernoulli),
        (0.05f64..0.45, 0.05f64..0.45).prop_map(|(zero, two)| CountDist::Discrete(vec![
            (0, zero),
            (1, 1.0 - zero - two),
            (2, two),
        ])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Queue and age dynamics match their defining recursions, and the age
    /// identity holds, on arbitrary processes and policies.
    #[test]
    fn slot_dynamics_match_recursions(
        arrival in count_dist_strategy(),
        services in prop::collection::vec(count_dist_strategy(), 2..8),
        policy_pick in 0usize..6,
        seed in any::<u64>(),
    ) {
        let spec = ProcessSpec::new(arrival, services).unwrap();
        let n = spec.n();
        let price = PriceModel::Set {
            values: vec![0.25, 0.5, 0.75, 1.0],
            period: 10,
            initial: PriceInit::UniformRandom,
        };
        let mut env = SimRng::seed_from_u64(seed);
        let mut pol = SimRng::seed_from_u64(seed ^ 1);
        let mut policy = match policy_pick {
            0 => Policy::selfish(1.0, 1.0, TieBreak::UniformRandom),
            1 => Policy::greedy(1.0, TieBreak::LowestIndex),
            2 => Policy::round_robin(),
            3 => Policy::jsq(TieBreak::UniformRandom),
            4 => Policy::max_age(TieBreak::LowestIndex),
            _ => Policy::stationary(&spec),
        };
        let mut state = aoisim::SystemState::new(price.initial_prices(n, &mut env).unwrap());
        let mut services_buf = vec![0u32; n];
        let mut phi = 0u64;
        for _ in 0..300 {
            let arrivals = spec.sample_arrival(&mut env);
            spec.sample_services_into(&mut env, &mut services_buf);
            let before: Vec<(u32, u32)> =
                state.pois.iter().map(|p| (p.queue, p.age)).collect();
            let outcome = aoisim::state::step(&mut state, &mut policy, arrivals, &services_buf, &mut pol);

            let mut indicator_sum = 0;
            for i in 0..n {
                let joined = if i == outcome.selected { arrivals } else { 0 };
                let expected_queue =
                    (i64::from(before[i].0) + i64::from(joined) - i64::from(services_buf[i])).max(0);
                prop_assert_eq!(i64::from(state.pois[i].queue), expected_queue);
                let expected_age = if i == outcome.selected && arrivals > 0 {
                    0
                } else {
                    before[i].1 + 1
                };
                prop_assert_eq!(state.pois[i].age, expected_age);
                prop_assert_eq!(u64::from(state.pois[i].age), state.slot - state.pois[i].last_update);
                indicator_sum += outcome.selection_indicator(i);
            }
            prop_assert_eq!(indicator_sum, 1);

            phi = bounds::pooled_queue_step(phi, arrivals, services_buf.iter().sum());
            prop_assert!(phi <= state.total_queue());
        }
    }

    /// Adding a constant to every record leaves any selfish selection
    /// unchanged (benefits shift together).
    #[test]
    fn selection_is_shift_invariant(
        records in prop::collection::vec(0.0f64..1.0, 2..10),
        ages in prop::collection::vec(0u32..60, 10),
        queues in prop::collection::vec(0u32..30, 10),
        beta in 0.0f64..4.0,
        gamma in 0.0f64..4.0,
        shift in -3.0f64..3.0,
    ) {
        let n = records.len();
        let pois: Vec<aoisim::state::PoiState> = (0..n)
            .map(|i| aoisim::state::PoiState {
                price: 0.5,
                record: records[i],
                queue: queues[i],
                age: ages[i],
                last_update: 0,
            })
            .collect();
        let shifted: Vec<aoisim::state::PoiState> = pois
            .iter()
            .map(|p| aoisim::state::PoiState { record: p.record + shift, ..p.clone() })
            .collect();
        let mut policy = Policy::selfish(beta, gamma, TieBreak::LowestIndex);
        let mut rng = SimRng::seed_from_u64(0);
        prop_assert_eq!(
            policy.select(aoisim::state::Observation::new(&pois), true, &mut rng),
            policy.select(aoisim::state::Observation::new(&shifted), true, &mut rng)
        );
    }

    /// Configurations survive a serialize/parse round trip unchanged.
    #[test]
    fn config_round_trips(
        horizon in 100u64..1_000_000,
        warmup_tenths in prop::option::of(0u64..9),
        replications in 1u32..20,
        seed in any::<u64>(),
        policy_pick in 0usize..6,
        betas in prop::collection::vec(0.0f64..100.0, 1..5),
        gammas in prop::collection::vec(0.0f64..10.0, 1..4),
        service_p in 0.05f64..0.95,
        uniform_prices in any::<bool>(),
    ) {
        let n = 4;
        let policy = [
            PolicyName::Selfish,
            PolicyName::Greedy,
            PolicyName::RoundRobin,
            PolicyName::Jsq,
            PolicyName::MaxAge,
            PolicyName::Stationary,
        ][policy_pick];
        let config = ExperimentConfig {
            preset: None,
            n,
            horizon,
            warmup: warmup_tenths.map(|t| horizon / 10 * t / 10),
            replications,
            base_seed: seed,
            policy,
            tie_break: TieBreak::UniformRandom,
            betas,
            gammas,
            process: ProcessSpec::new(
                CountDist::Bernoulli(0.9),
                vec![CountDist::Bernoulli(service_p); n],
            )
            .unwrap(),
            price: if uniform_prices {
                PriceModel::UniformContinuous {
                    low: 0.0,
                    high: 1.0,
                    initial: PriceInit::UniformRandom,
                }
            } else {
                PriceModel::Set {
                    values: vec![0.25, 0.5, 0.75, 1.0],
                    period: 100,
                    initial: PriceInit::UniformRandom,
                }
            },
            output_path: None,
            format: OutputFormat::Csv,
        };
        prop_assume!(config.validate().is_ok());
        let parsed = ExperimentConfig::parse_str(&config.to_text()).unwrap();
        prop_assert_eq!(parsed, config);
    }
}

// ---------------------------------------------------------------------------
// Drift diagnostics against the analytical inequalities.

fn deterministic_setup() -> (ProcessSpec, PriceModel) {
    (
        ProcessSpec::symmetric(CountDist::Deterministic(1), CountDist::Deterministic(1), 10)
            .unwrap(),
        PriceModel::Set {
            values: vec![0.25, 0.5, 0.75, 1.0],
            period: 100,
            initial: PriceInit::UniformRandom,
        },
    )
}

fn record_trajectory(
    spec: &ProcessSpec,
    price: &PriceModel,
    policy: Policy,
    horizon: u64,
    seed: u64,
) -> Trajectory {
    let setup = RunSetup {
        process: spec,
        price,
        horizon,
        warmup: 0,
    };
    let mut traj = Trajectory::with_capacity(spec.n(), horizon as usize);
    run_single(&setup, policy, None, seed, Some(&mut traj)).expect("run succeeds");
    traj
}

/// Deterministic case, selfish policy: the sum-age drift obeys
/// `dV[t] <= N - 1 - max_age[t] + p_max / beta` slot by slot.
#[test]
fn deterministic_selfish_age_drift_bound_is_pointwise() {
    let (spec, price) = deterministic_setup();
    let n = spec.n() as f64;
    let p_max = price.p_max();
    for beta in [0.1, 0.5, 2.0] {
        let traj = record_trajectory(
            &spec,
            &price,
            Policy::selfish(beta, 1.0, TieBreak::UniformRandom),
            50_000,
            0xd51f7 + beta.to_bits(),
        );
        let params = DriftParams::from_spec(&spec, beta, 1.0);
        let report = drift_diagnostics(&traj, LyapunovKind::SumAge, &params).unwrap();
        for (i, &dv) in report.samples.iter().enumerate() {
            let max_age = f64::from(traj.max_age_at(i));
            assert!(
                dv <= n - 1.0 - max_age + p_max / beta + 1e-9,
                "slot {i}: dV {dv} above N-1-max_age+p_max/beta at beta {beta}"
            );
        }
        // Mean form used by the bound derivation.
        let mean_lhs: f64 = report
            .samples
            .iter()
            .enumerate()
            .map(|(i, &dv)| dv + f64::from(traj.max_age_at(i)))
            .sum::<f64>()
            / report.samples.len() as f64;
        assert!(mean_lhs <= n - 1.0 + p_max / beta + 1e-9);
    }
    println!("PASS: deterministic selfish age drift bounded pointwise for beta in {{0.1, 0.5, 2}}");
}

/// Round-robin in the deterministic case visits a steady cycle, so the
/// sum-age function is periodic and its mean drift is exactly zero.
#[test]
fn round_robin_age_drift_averages_to_zero() {
    let (spec, price) = deterministic_setup();
    let traj = record_trajectory(&spec, &price, Policy::round_robin(), 10_000, 99);
    let params = DriftParams::from_spec(&spec, 1.0, 1.0);
    let report = drift_diagnostics(&traj, LyapunovKind::SumAge, &params).unwrap();
    // Skip the first pass over the PoIs (transient from the cold start).
    let steady = &report.samples[20..];
    assert!(steady.iter().all(|&dv| dv == 0.0));
    println!("PASS: round-robin sum-age drift identically zero in steady state");
}

/// Stochastic case: the queue/age Lyapunov drift obeys the bound
/// `E[dL] <= B/beta + N/q - 1 + p_max/beta
///           - (gamma eps/(N beta)) sum_n Q_n - sum_n w_n age_n`
/// in expectation along the trajectory.
#[test]
fn stochastic_queue_age_drift_bound_holds_on_average() {
    let config = preset("fig5").expect("preset");
    let spec = config.process.clone();
    let price = config.price.clone();
    let eps = compute_epsilon(&spec).expect("feasible");
    let n = spec.n() as f64;
    let q = spec.q();
    let p_max = price.p_max();
    let weights = spec.selection_weights();

    for (beta, gamma) in [(0.5, 1.0), (2.0, 0.5), (10.0, 2.0)] {
        let traj = record_trajectory(
            &spec,
            &price,
            Policy::selfish(beta, gamma, TieBreak::UniformRandom),
            200_000,
            (0x10c0 + beta.to_bits()) ^ gamma.to_bits(),
        );
        let params = DriftParams::from_spec(&spec, beta, gamma);
        let report = drift_diagnostics(&traj, LyapunovKind::QueueAgeMix, &params).unwrap();
        let b = bounds::b_of_gamma(gamma, &spec);
        let fixed_rhs = b / beta + n / q - 1.0 + p_max / beta;

        // Fold the state-dependent RHS terms into the sample so the
        // comparison is a single mean.
        let gaps: Vec<f64> = report
            .samples
            .iter()
            .enumerate()
            .map(|(i, &dl)| {
                let queues = traj.queues_at(i);
                let ages = traj.ages_at(i);
                let queue_term: f64 =
                    queues.iter().map(|&qn| f64::from(qn)).sum::<f64>() * gamma * eps / (n * beta);
                let age_term: f64 = ages
                    .iter()
                    .zip(&weights)
                    .map(|(&a, w)| w * f64::from(a))
                    .sum();
                dl + queue_term + age_term - fixed_rhs
            })
            .collect();
        let summary = replicate(&gaps);
        assert!(
            summary.mean <= 3.0 * summary.stderr,
            "(beta {beta}, gamma {gamma}): mean drift gap {} +/- {} above zero",
            summary.mean,
            summary.stderr
        );
    }
    println!("PASS: stochastic queue/age drift inequality held on average for three (beta, gamma) pairs");
}

/// The weighted-age floor binds every policy, not just the selfish one.
#[test]
fn weighted_age_floor_for_benchmark_policies() {
    let mut config = preset("fig5").expect("preset");
    config.horizon = 300_000;
    config.warmup = Some(30_000);
    config.replications = 3;
    config.betas = vec![1.0];
    config.gammas = vec![1.0];
    let floor = bounds::weighted_age_lower_bound(&config.process);
    for policy in [
        PolicyName::Selfish,
        PolicyName::Greedy,
        PolicyName::Jsq,
        PolicyName::MaxAge,
        PolicyName::Stationary,
        PolicyName::RoundRobin,
    ] {
        config.policy = policy;
        let cells = run_experiment_detailed(&config).expect("runs");
        let measured = replicate(&cells[0].rep_weighted_age);
        assert!(
            measured.mean >= floor - 3.0 * measured.stderr,
            "{}: weighted age {} under floor {floor}",
            policy.as_str(),
            measured.mean
        );
    }
    println!("PASS: weighted-age floor {floor:.4} held for all six policies");
}

/// Standard errors shrink as replications grow on a fixed configuration.
#[test]
fn replication_standard_errors_shrink() {
    let mut config = preset("fig5").expect("preset");
    config.horizon = 20_000;
    config.warmup = Some(2_000);
    config.betas = vec![1.0];
    config.gammas = vec![1.0];

    config.replications = 8;
    let few = run_experiment_detailed(&config).expect("runs");
    let few_se = replicate(&few[0].rep_poa).stderr;

    config.replications = 32;
    let many = run_experiment_detailed(&config).expect("runs");
    let many_se = replicate(&many[0].rep_poa).stderr;

    assert!(many_se > 0.0 && few_se > 0.0);
    assert!(
        many_se < few_se,
        "standard error did not shrink: {few_se} -> {many_se}"
    );
    println!("PASS: PoA standard error shrank from {few_se:.5} (8 reps) to {many_se:.5} (32 reps)");
}
