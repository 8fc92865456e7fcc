//! Command-line front end: `simulate` runs a sweep and emits CSV/JSON,
//! `bounds` prints the closed-form report without simulating, `selfcheck`
//! runs the built-in invariant suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aoisim::harness::{
    emit_results, preset, run_experiment, run_selfcheck, ExperimentConfig, OutputFormat,
    PolicyName,
};
use aoisim::metrics::compute_epsilon;
use aoisim::BoundsReport;

#[derive(Parser)]
#[command(name = "aoisim", version, about = "Information-freshness simulator for crowd-learning with selfish users")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (beta, gamma) sweep with seeded replications and emit results.
    Simulate(SimulateArgs),
    /// Print the closed-form bound report for each sweep cell, no simulation.
    Bounds(ConfigArgs),
    /// Run the built-in invariant suite; exits non-zero on any failure.
    Selfcheck,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset: fig2, fig3, fig4 or fig5.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ConfigArgs,
    /// Policy override: selfish, greedy, round-robin, jsq, max-age, stationary.
    #[arg(long)]
    policy: Option<String>,
    /// Reward-rate sweep override, comma separated.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Congestion-sensitivity sweep override, comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per sweep cell.
    #[arg(long)]
    replications: Option<u32>,
    /// Slots per run.
    #[arg(long)]
    horizon: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
}

fn load_config(source: &ConfigArgs) -> aoisim::Result<ExperimentConfig> {
    match (&source.config, &source.preset) {
        (Some(path), None) => ExperimentConfig::parse_str(&std::fs::read_to_string(path)?),
        (None, Some(name)) => preset(name),
        (Some(path), Some(name)) => {
            // Preset supplies the base, the file overrides it field by field
            // via re-parse of the merged text.
            let mut text = preset(name)?.to_text();
            text.push_str(&std::fs::read_to_string(path)?);
            ExperimentConfig::parse_str(&text)
        }
        (None, None) => Err(aoisim::Error::Config(
            "provide --config <file> and/or --preset <name>".into(),
        )),
    }
}

fn simulate(args: &SimulateArgs) -> aoisim::Result<()> {
    let mut config = load_config(&args.source)?;
    if let Some(policy) = &args.policy {
        config.policy = PolicyName::parse(policy)?;
    }
    if let Some(betas) = &args.beta {
        config.betas = betas.clone();
    }
    if let Some(gammas) = &args.gamma {
        config.gammas = gammas.clone();
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(replications) = args.replications {
        config.replications = replications;
    }
    if let Some(horizon) = args.horizon {
        config.horizon = horizon;
    }
    if let Some(format) = &args.format {
        config.format = OutputFormat::parse(format)?;
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.display().to_string());
    }
    config.validate()?;

    eprintln!(
        "running {} cells x {} replications, horizon {} (policy {}, seed {})",
        config.betas.len() * config.gammas.len(),
        config.replications,
        config.horizon,
        config.policy.as_str(),
        config.base_seed,
    );
    let rows = run_experiment(&config)?;
    let path = config.output_path.as_ref().map(PathBuf::from);
    emit_results(&rows, config.format, path.as_deref())?;
    if let Some(path) = path {
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    Ok(())
}

fn print_bounds(source: &ConfigArgs) -> aoisim::Result<()> {
    let config = load_config(source)?;
    config.validate()?;
    let epsilon = compute_epsilon(&config.process)?;
    println!(
        "preset={} N={} lambda={} mu_sigma={} q={} epsilon={epsilon}",
        config.preset_name(),
        config.n,
        config.process.lambda(),
        config.process.mu_sigma(),
        config.process.q(),
    );
    println!(
        "{:>10} {:>8} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "beta", "gamma", "thm1_ub", "thm2_ub", "thm2_limit", "B_gamma", "M", "age_lb", "queue_lb"
    );
    for &beta in &config.betas {
        for &gamma in &config.gammas {
            let report =
                BoundsReport::compute(&config.process, beta, gamma, config.price.p_max())?;
            let age_lb = if config.is_deterministic_case() {
                report.det_age_lb
            } else {
                report.weighted_age_lb
            };
            println!(
                "{beta:>10} {gamma:>8} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {age_lb:>12.6} {:>12.6}",
                report.thm1_poa_ub,
                report.thm2_poa_ub,
                report.thm2_asymptotic_ub,
                report.b_gamma,
                report.m,
                report.queue_lb_analytic,
            );
        }
    }
    Ok(())
}

fn selfcheck() -> aoisim::Result<()> {
    let checks = run_selfcheck();
    let mut failures = 0;
    for check in &checks {
        let verdict = if check.passed { "ok    " } else { "FAILED" };
        println!("{verdict} {} - {}", check.name, check.detail);
        if !check.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(aoisim::Error::Config(format!(
            "{failures}/{} selfchecks failed",
            checks.len()
        )));
    }
    println!("all {} selfchecks passed", checks.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Bounds(args) => print_bounds(args),
        Command::Selfcheck => selfcheck(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
