//! Closed-form performance bounds for the linear age-reward mechanism,
//! plus the resource-pooled queue used as a sample-path queue lower bound.
//!
//! Deterministic case (one arrival per slot, unit services, no queueing):
//! the PoA of the selfish rule is bounded by
//!
//! ```text
//! rho(beta) <= p_max / ((N - 1) * beta + p_max)
//! ```
//!
//! which vanishes as `beta` grows and approaches 1 as `beta -> 0`. The
//! optimum mean maximum age is `N - 1`, attained by round-robin.
//!
//! Stochastic case: with stability slack `eps`, the joint age/congestion
//! cost PoA satisfies
//!
//! ```text
//!                B(gamma) - gamma*M + p_max + beta*(N/q - mu_sigma/(2 q mu_max) - 1/2)
//! rho(beta,gamma) <= ------------------------------------------------------------------
//!                          B(gamma) + beta*(N/q - 1) + p_max
//! ```
//!
//! with
//!
//! ```text
//! B(gamma) = gamma/(2 lambda) * (E[A^2] + sum_n E[R_n^2])
//! M        = eps/(2N(mu_sigma - lambda)) * (Var(A) + sum_n Var(R_n) + (mu_sigma - lambda)^2)
//!            - eps * R_max / 2
//! ```
//!
//! As `beta -> infinity` the bound tends to
//! `1 - (mu_sigma/(q mu_max) - 1) / (2 (N/q - 1))`, which equals `1/2`
//! under symmetric service rates.
//!
//! The building blocks are also exposed individually: the selfish-cost
//! upper bound `B(gamma) + beta (N/q - 1) + p_max`, the weighted-age lower
//! bound `(mu_sigma/(q mu_max) - 1) / 2`, and the total-queue lower bound
//! `M N / eps`. `M` can be non-positive for some parameter sets (it is
//! exactly zero for symmetric Bernoulli(0.1) services under Bernoulli(0.9)
//! arrivals), making the analytic queue bound vacuous there; the simulated
//! JSQ queue cost is the proxy of record in that regime.

use crate::process::ProcessSpec;
use crate::{Error, Result, SimRng};

/// Deterministic-case PoA upper bound `p_max / ((N-1) beta + p_max)`.
pub fn thm1_bound(beta: f64, n: usize, p_max: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "deterministic PoA bound needs at least two PoIs, got {n}"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Domain(format!("beta must be non-negative, got {beta}")));
    }
    if !p_max.is_finite() || p_max <= 0.0 {
        return Err(Error::Domain(format!("p_max must be positive, got {p_max}")));
    }
    Ok(p_max / ((n as f64 - 1.0) * beta + p_max))
}

/// `B(gamma) = gamma/(2 lambda) * (E[A^2] + sum_n E[R_n^2])`.
pub fn b_of_gamma(gamma: f64, spec: &ProcessSpec) -> f64 {
    gamma / (2.0 * spec.lambda())
        * (spec.arrival_second_moment() + spec.service_second_moment_sum())
}

/// The looser form `gamma/(2 lambda) * (E[A^2] + N * R_max^2)` that
/// appears in the drift derivation; exposed for comparison, the tighter
/// [`b_of_gamma`] is canonical.
pub fn b_of_gamma_conservative(gamma: f64, spec: &ProcessSpec) -> f64 {
    let r_max = f64::from(spec.r_max());
    gamma / (2.0 * spec.lambda())
        * (spec.arrival_second_moment() + spec.n() as f64 * r_max * r_max)
}

/// `M = eps/(2N(mu_sigma - lambda)) * (Var(A) + sum Var(R_n) + (mu_sigma - lambda)^2)
///      - eps * R_max / 2`.
pub fn m_constant(epsilon: f64, spec: &ProcessSpec) -> Result<f64> {
    let lambda = spec.lambda();
    let mu_sigma = spec.mu_sigma();
    if lambda >= mu_sigma {
        return Err(Error::InfeasibleEpsilon { lambda, mu_sigma });
    }
    let gap = mu_sigma - lambda;
    let dispersion = spec.arrival_variance() + spec.service_variance_sum() + gap * gap;
    Ok(epsilon / (2.0 * spec.n() as f64 * gap) * dispersion
        - 0.5 * epsilon * f64::from(spec.r_max()))
}

/// Stochastic-case PoA upper bound (see the module header).
pub fn thm2_bound(
    beta: f64,
    gamma: f64,
    epsilon: f64,
    spec: &ProcessSpec,
    p_max: f64,
) -> Result<f64> {
    let q = spec.q();
    if q <= 0.0 {
        return Err(Error::Domain("PoA bound needs q = Pr{A > 0} > 0".into()));
    }
    let n = spec.n() as f64;
    let b = b_of_gamma(gamma, spec);
    let m = m_constant(epsilon, spec)?;
    let numerator = b - gamma * m
        + p_max
        + beta * (n / q - spec.mu_sigma() / (2.0 * q * spec.mu_max()) - 0.5);
    let denominator = b + beta * (n / q - 1.0) + p_max;
    Ok(numerator / denominator)
}

/// Limit of [`thm2_bound`] as `beta -> infinity`:
/// `1 - (mu_sigma/(q mu_max) - 1) / (2 (N/q - 1))`. Equals `1/2` for
/// symmetric service rates.
pub fn thm2_asymptotic(spec: &ProcessSpec) -> Result<f64> {
    let q = spec.q();
    if q <= 0.0 {
        return Err(Error::Domain("PoA bound needs q = Pr{A > 0} > 0".into()));
    }
    let n = spec.n() as f64;
    Ok(1.0 - 0.5 * (spec.mu_sigma() / (q * spec.mu_max()) - 1.0) / (n / q - 1.0))
}

/// Upper bound on the selfish cost:
/// `J(beta, gamma) <= B(gamma) + beta (N/q - 1) + p_max`.
pub fn j_upper_bound(beta: f64, gamma: f64, spec: &ProcessSpec, p_max: f64) -> f64 {
    b_of_gamma(gamma, spec) + beta * (spec.n() as f64 / spec.q() - 1.0) + p_max
}

/// Deterministic-case optimum of the mean maximum age: `N - 1`.
pub fn det_age_lower_bound(n: usize) -> f64 {
    n as f64 - 1.0
}

/// Lower bound on the weighted mean age `sum_n (mu_n/mu_sigma) mean_age_n`
/// under any policy: `(mu_sigma / (q mu_max) - 1) / 2`.
pub fn weighted_age_lower_bound(spec: &ProcessSpec) -> f64 {
    0.5 * (spec.mu_sigma() / (spec.q() * spec.mu_max()) - 1.0)
}

/// Lower bound `M N / eps` on the total mean queue length under any
/// policy. `M` is linear in `eps`, so the value does not depend on the
/// slack chosen. Can be non-positive (vacuous) for benign parameter sets.
pub fn queue_lower_bound_analytic(epsilon: f64, spec: &ProcessSpec) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "queue lower bound needs epsilon > 0, got {epsilon}"
        )));
    }
    Ok(m_constant(epsilon, spec)? * spec.n() as f64 / epsilon)
}

/// One step of the hypothetical pooled single-server queue:
/// `phi <- max(phi + A - sum_n R_n, 0)`. Coupled to a policy run on the
/// same `(A, R)` draws, `phi` never exceeds the total queue length.
#[inline]
pub fn pooled_queue_step(phi: u64, arrivals: u32, service_sum: u32) -> u64 {
    (phi + u64::from(arrivals)).saturating_sub(u64::from(service_sum))
}

/// Standalone pooled-queue trajectory on freshly sampled inputs.
#[derive(Debug, Clone)]
pub struct PooledQueueRun {
    pub trajectory: Vec<u64>,
    pub mean: f64,
}

pub fn pooled_queue_run(spec: &ProcessSpec, horizon: u64, rng: &mut SimRng) -> PooledQueueRun {
    let mut services = vec![0u32; spec.n()];
    let mut phi = 0u64;
    let mut trajectory = Vec::with_capacity(horizon as usize);
    let mut total: u128 = 0;
    for _ in 0..horizon {
        let arrivals = spec.sample_arrival(rng);
        spec.sample_services_into(rng, &mut services);
        phi = pooled_queue_step(phi, arrivals, services.iter().sum());
        trajectory.push(phi);
        total += u128::from(phi);
    }
    PooledQueueRun {
        trajectory,
        mean: total as f64 / horizon.max(1) as f64,
    }
}

/// Every closed-form quantity evaluated for one `(beta, gamma)` cell.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundsReport {
    pub epsilon: f64,
    pub b_gamma: f64,
    pub b_gamma_conservative: f64,
    pub m: f64,
    pub thm1_poa_ub: f64,
    pub thm2_poa_ub: f64,
    pub thm2_asymptotic_ub: f64,
    pub det_age_lb: f64,
    pub weighted_age_lb: f64,
    pub queue_lb_analytic: f64,
    pub j_upper_thm2: f64,
}

impl BoundsReport {
    /// Uses the maximal feasible stability slack from
    /// [`crate::metrics::compute_epsilon`].
    pub fn compute(spec: &ProcessSpec, beta: f64, gamma: f64, p_max: f64) -> Result<Self> {
        let epsilon = crate::metrics::compute_epsilon(spec)?;
        Ok(Self {
            epsilon,
            b_gamma: b_of_gamma(gamma, spec),
            b_gamma_conservative: b_of_gamma_conservative(gamma, spec),
            m: m_constant(epsilon, spec)?,
            thm1_poa_ub: thm1_bound(beta, spec.n(), p_max)?,
            thm2_poa_ub: thm2_bound(beta, gamma, epsilon, spec, p_max)?,
            thm2_asymptotic_ub: thm2_asymptotic(spec)?,
            det_age_lb: det_age_lower_bound(spec.n()),
            weighted_age_lb: weighted_age_lower_bound(spec),
            queue_lb_analytic: queue_lower_bound_analytic(epsilon, spec)?,
            j_upper_thm2: j_upper_bound(beta, gamma, spec, p_max),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::compute_epsilon;
    use crate::process::CountDist;
    use rand::SeedableRng;

    fn symmetric_spec() -> ProcessSpec {
        ProcessSpec::symmetric(CountDist::Bernoulli(0.9), CountDist::Bernoulli(0.1), 10)
            .unwrap()
    }

    fn asymmetric_spec() -> ProcessSpec {
        ProcessSpec::new(
            CountDist::Bernoulli(0.9),
            (0..10)
                .map(|n| CountDist::Bernoulli(if n < 5 { 0.11 } else { 0.09 }))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn thm1_plug_in_and_limits() {
        let b = thm1_bound(0.5, 10, 1.0).unwrap();
        assert!((b - 1.0 / 5.5).abs() < 1e-12);
        assert!(thm1_bound(1e12, 10, 1.0).unwrap() < 1e-10);
        assert!((thm1_bound(0.0, 10, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(thm1_bound(1.0, 1, 1.0).is_err());
    }

    #[test]
    fn thm1_strictly_decreasing_in_beta() {
        let betas = [0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0];
        let values: Vec<f64> = betas
            .iter()
            .map(|&b| thm1_bound(b, 10, 1.0).unwrap())
            .collect();
        for pair in values.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn b_gamma_symmetric_value_and_homogeneity() {
        let spec = symmetric_spec();
        let b1 = b_of_gamma(1.0, &spec);
        assert!((b1 - 1.9 / 1.8).abs() < 1e-12, "B(1) = {b1}");
        assert_eq!(b_of_gamma(0.0, &spec), 0.0);
        assert!((b_of_gamma(2.0, &spec) - 2.0 * b1).abs() < 1e-12);
        // Conservative form uses N * R_max^2 in place of the exact second
        // moments, so it can only be larger.
        assert!(b_of_gamma_conservative(1.0, &spec) >= b1);
    }

    #[test]
    fn m_symmetric_cancellation() {
        let spec = symmetric_spec();
        let eps = compute_epsilon(&spec).unwrap();
        let m = m_constant(eps, &spec).unwrap();
        assert!(m.abs() < 1e-12, "M = {m}");
        assert_eq!(m_constant(0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn m_zero_variance_reduction() {
        // Deterministic flows: Var terms vanish, M = eps*d/(2N) - eps*R/2.
        let spec =
            ProcessSpec::symmetric(CountDist::Deterministic(1), CountDist::Deterministic(1), 10)
                .unwrap();
        let d: f64 = 9.0;
        let eps = 0.5;
        let m = m_constant(eps, &spec).unwrap();
        assert!((m - (eps * d / 20.0 - eps * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn thm2_asymptote_matches_large_beta_evaluation() {
        for spec in [symmetric_spec(), asymmetric_spec()] {
            let eps = compute_epsilon(&spec).unwrap();
            let limit = thm2_asymptotic(&spec).unwrap();

            // Independent route: the limit is the ratio of the bound's
            // beta coefficients.
            let n = spec.n() as f64;
            let q = spec.q();
            let coefficient_ratio = (n / q - spec.mu_sigma() / (2.0 * q * spec.mu_max()) - 0.5)
                / (n / q - 1.0);
            assert!((limit - coefficient_ratio).abs() < 1e-9);

            // Finite-beta evaluation approaches the limit at its O(1/beta)
            // scale.
            let at_large_beta = thm2_bound(1e6, 1.0, eps, &spec, 1.0).unwrap();
            assert!(
                (limit - at_large_beta).abs() < 1e-6,
                "limit {limit} vs beta=1e6 value {at_large_beta}"
            );
            let closer = thm2_bound(1e9, 1.0, eps, &spec, 1.0).unwrap();
            assert!((limit - closer).abs() < (limit - at_large_beta).abs());
        }
    }

    #[test]
    fn thm2_symmetric_asymptote_is_one_half() {
        let limit = thm2_asymptotic(&symmetric_spec()).unwrap();
        assert!((limit - 0.5).abs() < 1e-12, "limit = {limit}");
    }

    #[test]
    fn thm2_gamma_zero_reduction() {
        let spec = symmetric_spec();
        let eps = compute_epsilon(&spec).unwrap();
        let beta = 2.0;
        let n = 10.0;
        let q = 0.9;
        let expect = (1.0 + beta * (n / q - 1.0 / (2.0 * q * 0.1) - 0.5))
            / (beta * (n / q - 1.0) + 1.0);
        let got = thm2_bound(beta, 0.0, eps, &spec, 1.0).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn weighted_age_bound_examples() {
        let sym = weighted_age_lower_bound(&symmetric_spec());
        assert!((sym - 91.0 / 18.0).abs() < 1e-12, "symmetric {sym}");
        let asym = weighted_age_lower_bound(&asymmetric_spec());
        assert!((asym - 901.0 / 198.0).abs() < 1e-12, "asymmetric {asym}");
        // Single PoI with q = 1 has no age floor beyond zero.
        let single =
            ProcessSpec::symmetric(CountDist::Deterministic(1), CountDist::Bernoulli(0.5), 1)
                .unwrap();
        assert!(weighted_age_lower_bound(&single).abs() < 1e-12);
    }

    #[test]
    fn queue_bound_is_invariant_to_epsilon_scale() {
        let spec = asymmetric_spec();
        let a = queue_lower_bound_analytic(0.05, &spec).unwrap();
        let b = queue_lower_bound_analytic(0.1, &spec).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(queue_lower_bound_analytic(0.0, &spec).is_err());
    }

    #[test]
    fn queue_bound_symmetric_is_vacuous() {
        let spec = symmetric_spec();
        let eps = compute_epsilon(&spec).unwrap();
        let bound = queue_lower_bound_analytic(eps, &spec).unwrap();
        assert!(bound.abs() < 1e-10, "bound = {bound}");
    }

    #[test]
    fn queue_bound_zero_variance_reduction() {
        let spec =
            ProcessSpec::symmetric(CountDist::Deterministic(1), CountDist::Deterministic(1), 10)
                .unwrap();
        let bound = queue_lower_bound_analytic(1.0, &spec).unwrap();
        // d/2 - N R_max / 2 with d = 9, N = 10, R_max = 1.
        assert!((bound - (4.5 - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn pooled_queue_balanced_and_drifting() {
        let balanced = ProcessSpec::new(
            CountDist::Deterministic(1),
            vec![CountDist::Deterministic(1)],
        )
        .unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let run = pooled_queue_run(&balanced, 100, &mut rng);
        assert!(run.trajectory.iter().all(|&phi| phi == 0));
        assert_eq!(run.mean, 0.0);

        let drifting = ProcessSpec::new(
            CountDist::Deterministic(2),
            vec![CountDist::Deterministic(1)],
        )
        .unwrap();
        let run = pooled_queue_run(&drifting, 50, &mut rng);
        let expect: Vec<u64> = (1..=50).collect();
        assert_eq!(run.trajectory, expect);
    }

    #[test]
    fn report_assembles_all_quantities() {
        let spec = symmetric_spec();
        let report = BoundsReport::compute(&spec, 1.0, 1.0, 1.0).unwrap();
        assert!((report.epsilon - 1.0 / 9.0).abs() < 1e-12);
        assert!(report.thm1_poa_ub > 0.0 && report.thm1_poa_ub <= 1.0);
        assert!(report.thm2_poa_ub > 0.0);
        assert_eq!(report.det_age_lb, 9.0);
        assert!((report.j_upper_thm2
            - (report.b_gamma + (10.0 / 0.9 - 1.0) + 1.0))
            .abs()
            < 1e-12);
    }
}
