//! Seeded simulation runner: single runs, replicated sweep cells, and the
//! matched JSQ companion runs backing the stochastic PoA lower bound.
//!
//! A sweep produces one [`ResultRow`] per `(beta, gamma)` cell, aggregated
//! over `replications` independent seeds. Replication `r` of a cell is
//! seeded by hashing the base seed with the cell's parameter values, and
//! its environment stream is shared between the configured policy and the
//! JSQ companion, so the two see identical arrival, service, and price
//! realizations.
//!
//! Cells and replications are embarrassingly parallel; with the `parallel`
//! feature they fan out over rayon and results are merged in deterministic
//! sweep order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::{self, BoundsReport};
use crate::harness::config::{ExperimentConfig, PolicyName};
use crate::harness::seed::{self, CellKey};
use crate::metrics::{
    self, compute_epsilon, CostParams, Poa, RunMetrics, RunSummary, Trajectory,
};
use crate::policy::Policy;
use crate::process::{PriceModel, ProcessSpec};
use crate::state::{step, SystemState};
use crate::{Result, SimRng};
use rand::SeedableRng;

/// Everything one simulation run needs besides the policy and the seed.
#[derive(Debug, Clone, Copy)]
pub struct RunSetup<'a> {
    pub process: &'a ProcessSpec,
    pub price: &'a PriceModel,
    pub horizon: u64,
    pub warmup: u64,
}

impl<'a> RunSetup<'a> {
    pub fn from_config(config: &'a ExperimentConfig) -> Self {
        Self {
            process: &config.process,
            price: &config.price,
            horizon: config.horizon,
            warmup: config.warmup_slots(),
        }
    }
}

/// Outcome of one seeded run, with the coupled pooled-queue diagnostics.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub summary: RunSummary,
    /// Mean of the hypothetical pooled single-server queue driven by the
    /// same arrival/service draws.
    pub pooled_mean: f64,
    /// Whether `phi[t] <= sum_n Q_n[t]` held on every slot of this run.
    pub pooled_dominated: bool,
}

fn changes_at(price: &PriceModel, slot: u64) -> bool {
    match price {
        PriceModel::Set { period, .. } => slot > 0 && slot.is_multiple_of(*period),
        PriceModel::UniformContinuous { .. } => slot > 0,
    }
}

/// Runs one policy for `horizon` slots from a cold start.
///
/// The replication seed is split into an environment stream and a policy
/// stream; see [`crate::harness::seed`]. Pass a [`Trajectory`] to record
/// the post-step state of every slot.
pub fn run_single(
    setup: &RunSetup<'_>,
    mut policy: Policy,
    cost: Option<CostParams>,
    run_seed: u64,
    mut trajectory: Option<&mut Trajectory>,
) -> Result<SingleRun> {
    let n = setup.process.n();
    let mut env = SimRng::seed_from_u64(seed::env_stream(run_seed));
    let mut pol = SimRng::seed_from_u64(seed::policy_stream(run_seed));

    let mut state = SystemState::new(setup.price.initial_prices(n, &mut env)?);
    let mut metrics = RunMetrics::new(
        setup.horizon,
        setup.warmup,
        setup.process.selection_weights(),
        cost,
    );
    let mut services = vec![0u32; n];
    let mut price_buf = vec![0.0f64; n];
    let mut phi = 0u64;
    let mut phi_total = 0u128;
    let mut dominated = true;

    for _ in 0..setup.horizon {
        if changes_at(setup.price, state.slot) {
            for (slot, poi) in price_buf.iter_mut().zip(&state.pois) {
                *slot = poi.price;
            }
            setup.price.advance(&mut price_buf, state.slot, &mut env)?;
            for (poi, &p) in state.pois.iter_mut().zip(&price_buf) {
                poi.price = p;
            }
        }
        let arrivals = setup.process.sample_arrival(&mut env);
        setup.process.sample_services_into(&mut env, &mut services);
        let outcome = step(&mut state, &mut policy, arrivals, &services, &mut pol);

        phi = bounds::pooled_queue_step(phi, arrivals, services.iter().sum());
        if phi > state.total_queue() {
            dominated = false;
        }
        phi_total += u128::from(phi);

        metrics.accumulate(&state, &outcome);
        if let Some(traj) = trajectory.as_deref_mut() {
            traj.push(&state, &outcome);
        }
    }

    Ok(SingleRun {
        summary: metrics.finalize(),
        pooled_mean: phi_total as f64 / setup.horizon.max(1) as f64,
        pooled_dominated: dominated,
    })
}

/// One `(beta, gamma)` cell with its per-replication raw values; the
/// acceptance and property suites consume these, the CLI emits the rows.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub row: ResultRow,
    pub bounds: BoundsReport,
    pub rep_poa: Vec<f64>,
    pub rep_cost: Vec<f64>,
    pub rep_max_age: Vec<f64>,
    pub rep_weighted_age: Vec<f64>,
    pub rep_queue_sum: Vec<f64>,
    /// JSQ companion total mean queue per replication (stochastic case).
    pub rep_jsq_queue_sum: Vec<f64>,
    pub clamped: u32,
    pub pooled_dominated: bool,
}

/// Flat result record; the CSV column set, in order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResultRow {
    pub preset: String,
    pub policy: String,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda: f64,
    pub mu_summary: String,
    pub mean_max_age: f64,
    pub weighted_mean_age: f64,
    pub mean_queue_sum: f64,
    #[serde(rename = "cost_J")]
    pub cost_j: f64,
    pub poa_measured: f64,
    pub thm1_bound: f64,
    pub thm2_bound: f64,
    pub age_lb: f64,
    pub queue_lb_analytic: f64,
    pub epsilon: f64,
    #[serde(rename = "B_gamma")]
    pub b_gamma: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub stderr_poa: f64,
    pub replications: u32,
    pub seed: u64,
}

/// Compact rendering of the service-rate vector, e.g. `0.11x5;0.09x5`.
fn mu_summary(spec: &ProcessSpec) -> String {
    let mut groups: Vec<(usize, f64)> = Vec::new();
    for i in 0..spec.n() {
        let mu = spec.mu(i);
        match groups.last_mut() {
            Some((count, value)) if *value == mu => *count += 1,
            _ => groups.push((1, mu)),
        }
    }
    groups
        .into_iter()
        .map(|(count, value)| {
            if count == 1 {
                value.to_string()
            } else {
                format!("{value}x{count}")
            }
        })
        .collect::<Vec<_>>()
        .join(";")
}

struct RepOutcome {
    run: SingleRun,
    jsq_queue_sum: Option<f64>,
    poa: Poa,
}

/// Seed of replication `rep` in the `(beta, gamma)` cell of this
/// experiment; the one the runner itself uses.
pub fn cell_replication_seed(
    config: &ExperimentConfig,
    beta: f64,
    gamma: f64,
    rep: u32,
) -> u64 {
    let key = CellKey {
        preset: config.preset_name(),
        policy: config.policy.as_str(),
        beta,
        gamma,
    };
    seed::replication_seed(config.base_seed, &key, rep)
}

fn run_replication(
    config: &ExperimentConfig,
    epsilon: f64,
    beta: f64,
    gamma: f64,
    rep: u32,
) -> Result<RepOutcome> {
    let setup = RunSetup::from_config(config);
    let rep_seed = cell_replication_seed(config, beta, gamma, rep);
    let policy = config
        .policy
        .build(beta, gamma, config.tie_break, &config.process);
    let cost = CostParams {
        beta,
        gamma,
        epsilon,
    };
    let run = run_single(&setup, policy, Some(cost), rep_seed, None)?;

    if config.is_deterministic_case() {
        let poa = metrics::poa_deterministic(run.summary.mean_max_age, config.n)?;
        return Ok(RepOutcome {
            run,
            jsq_queue_sum: None,
            poa,
        });
    }

    // Matched JSQ companion on the same replication seed: identical
    // environment realization, different policy stream consumption.
    let jsq = run_single(
        &setup,
        PolicyName::Jsq.build(beta, gamma, config.tie_break, &config.process),
        None,
        rep_seed,
        None,
    )?;
    let n = config.n as f64;
    let age_lb = bounds::weighted_age_lower_bound(&config.process);
    let j_lower = gamma * epsilon / n * jsq.summary.mean_queue_sum + beta * age_lb;
    let j_selfish = run.summary.cost_j.expect("cost accumulation enabled");
    let poa = metrics::poa_stochastic(j_selfish, j_lower)?;
    Ok(RepOutcome {
        run,
        jsq_queue_sum: Some(jsq.summary.mean_queue_sum),
        poa,
    })
}

fn aggregate_cell(
    config: &ExperimentConfig,
    epsilon: f64,
    beta: f64,
    gamma: f64,
    reps: Vec<RepOutcome>,
) -> Result<CellResult> {
    let spec = &config.process;
    let p_max = config.price.p_max();
    let report = BoundsReport::compute(spec, beta, gamma, p_max)?;

    let rep_poa: Vec<f64> = reps.iter().map(|r| r.poa.value).collect();
    let rep_cost: Vec<f64> = reps
        .iter()
        .map(|r| r.run.summary.cost_j.unwrap_or(f64::NAN))
        .collect();
    let rep_max_age: Vec<f64> = reps.iter().map(|r| r.run.summary.mean_max_age).collect();
    let rep_weighted_age: Vec<f64> = reps
        .iter()
        .map(|r| r.run.summary.weighted_mean_age)
        .collect();
    let rep_queue_sum: Vec<f64> = reps.iter().map(|r| r.run.summary.mean_queue_sum).collect();
    let rep_jsq_queue_sum: Vec<f64> = reps.iter().filter_map(|r| r.jsq_queue_sum).collect();
    let clamped = reps.iter().filter(|r| r.poa.clamped).count() as u32;
    let pooled_dominated = reps.iter().all(|r| r.run.pooled_dominated);

    let poa = metrics::replicate(&rep_poa);
    let age_lb = if config.is_deterministic_case() {
        report.det_age_lb
    } else {
        report.weighted_age_lb
    };

    if clamped > 0 {
        eprintln!(
            "warning: PoA clamped to [0, 1] in {clamped}/{} replications of cell \
             (preset={}, beta={beta}, gamma={gamma})",
            reps.len(),
            config.preset_name(),
        );
    }

    let row = ResultRow {
        preset: config.preset_name().to_string(),
        policy: config.policy.as_str().to_string(),
        beta,
        gamma,
        n: config.n,
        lambda: spec.lambda(),
        mu_summary: mu_summary(spec),
        mean_max_age: metrics::replicate(&rep_max_age).mean,
        weighted_mean_age: metrics::replicate(&rep_weighted_age).mean,
        mean_queue_sum: metrics::replicate(&rep_queue_sum).mean,
        cost_j: metrics::replicate(&rep_cost).mean,
        poa_measured: poa.mean,
        thm1_bound: report.thm1_poa_ub,
        thm2_bound: report.thm2_poa_ub,
        age_lb,
        queue_lb_analytic: report.queue_lb_analytic,
        epsilon,
        b_gamma: report.b_gamma,
        m: report.m,
        stderr_poa: poa.stderr,
        replications: config.replications,
        seed: config.base_seed,
    };

    Ok(CellResult {
        row,
        bounds: report,
        rep_poa,
        rep_cost,
        rep_max_age,
        rep_weighted_age,
        rep_queue_sum,
        rep_jsq_queue_sum,
        clamped,
        pooled_dominated,
    })
}

fn run_cells(config: &ExperimentConfig, parallel: bool) -> Result<Vec<CellResult>> {
    config.validate()?;
    // The stability slack gates every sweep; fail before simulating.
    let epsilon = compute_epsilon(&config.process)?;

    let cells: Vec<(f64, f64)> = config
        .betas
        .iter()
        .flat_map(|&beta| config.gammas.iter().map(move |&gamma| (beta, gamma)))
        .collect();
    let jobs: Vec<(f64, f64, u32)> = cells
        .iter()
        .flat_map(|&(beta, gamma)| (0..config.replications).map(move |rep| (beta, gamma, rep)))
        .collect();

    let outcomes: Vec<RepOutcome> = run_jobs(config, epsilon, &jobs, parallel)?;

    let mut outcomes = outcomes.into_iter();
    cells
        .into_iter()
        .map(|(beta, gamma)| {
            let reps: Vec<RepOutcome> = outcomes
                .by_ref()
                .take(config.replications as usize)
                .collect();
            aggregate_cell(config, epsilon, beta, gamma, reps)
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn run_jobs(
    config: &ExperimentConfig,
    epsilon: f64,
    jobs: &[(f64, f64, u32)],
    parallel: bool,
) -> Result<Vec<RepOutcome>> {
    if parallel {
        jobs.par_iter()
            .map(|&(beta, gamma, rep)| run_replication(config, epsilon, beta, gamma, rep))
            .collect()
    } else {
        jobs.iter()
            .map(|&(beta, gamma, rep)| run_replication(config, epsilon, beta, gamma, rep))
            .collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_jobs(
    config: &ExperimentConfig,
    epsilon: f64,
    jobs: &[(f64, f64, u32)],
    _parallel: bool,
) -> Result<Vec<RepOutcome>> {
    jobs.iter()
        .map(|&(beta, gamma, rep)| run_replication(config, epsilon, beta, gamma, rep))
        .collect()
}

/// Runs the full sweep, one detailed cell per `(beta, gamma)` pair, using
/// rayon when the `parallel` feature is enabled.
pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    run_cells(config, cfg!(feature = "parallel"))
}

/// Strictly sequential variant, independent of enabled features.
pub fn run_experiment_detailed_sequential(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    run_cells(config, false)
}

/// Runs the sweep and returns the flat result rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_detailed(config)?
        .into_iter()
        .map(|cell| cell.row)
        .collect())
}

/// Sequential twin of [`run_experiment`].
pub fn run_experiment_sequential(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    Ok(run_experiment_detailed_sequential(config)?
        .into_iter()
        .map(|cell| cell.row)
        .collect())
}
