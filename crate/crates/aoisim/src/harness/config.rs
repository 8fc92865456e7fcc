//! Experiment configuration: a line-oriented `key = value` text format
//! with dotted keys, e.g.
//!
//! ```text
//! n = 10
//! horizon = 2000000
//! replications = 10
//! seed = 7431
//! policy = selfish
//! beta = 0.05, 0.1, 0.5
//! gamma = 0.1, 1
//! process.arrival = bernoulli(0.9)
//! process.service = bernoulli(0.11) x5; bernoulli(0.09) x5
//! price.kind = set
//! price.values = 0.25, 0.5, 0.75, 1
//! price.period = 100
//! price.initial = random
//! output.format = csv
//! ```
//!
//! `#` starts a comment. Configurations serialize back to the same format
//! losslessly. CLI flags override file values.

use std::fmt::Write as _;

use crate::policy::{Policy, TieBreak};
use crate::process::{CountDist, PriceInit, PriceModel, ProcessSpec};
use crate::{Error, Result};

/// Which selection rule the experiment runs; `beta`/`gamma` come from the
/// sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyName {
    Selfish,
    Greedy,
    RoundRobin,
    Jsq,
    MaxAge,
    Stationary,
}

impl PolicyName {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "selfish" => Ok(Self::Selfish),
            "greedy" => Ok(Self::Greedy),
            "round-robin" => Ok(Self::RoundRobin),
            "jsq" => Ok(Self::Jsq),
            "max-age" => Ok(Self::MaxAge),
            "stationary" => Ok(Self::Stationary),
            other => Err(Error::Config(format!(
                "unknown policy `{other}` (expected selfish, greedy, round-robin, jsq, max-age or stationary)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Selfish => "selfish",
            Self::Greedy => "greedy",
            Self::RoundRobin => "round-robin",
            Self::Jsq => "jsq",
            Self::MaxAge => "max-age",
            Self::Stationary => "stationary",
        }
    }

    /// Instantiates the policy for one sweep cell.
    pub fn build(self, beta: f64, gamma: f64, tie_break: TieBreak, spec: &ProcessSpec) -> Policy {
        match self {
            Self::Selfish => Policy::selfish(beta, gamma, tie_break),
            Self::Greedy => Policy::greedy(gamma, tie_break),
            Self::RoundRobin => Policy::round_robin(),
            Self::Jsq => Policy::jsq(tie_break),
            Self::MaxAge => Policy::max_age(tie_break),
            Self::Stationary => Policy::stationary(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (expected csv or json)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// Full description of one experiment: system size, horizon, sweep lists,
/// processes, price model, and output routing.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub n: usize,
    pub horizon: u64,
    /// Slots trimmed before averaging; defaults to 10% of the horizon.
    pub warmup: Option<u64>,
    pub replications: u32,
    pub base_seed: u64,
    pub policy: PolicyName,
    pub tie_break: TieBreak,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub process: ProcessSpec,
    pub price: PriceModel,
    pub output_path: Option<String>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn warmup_slots(&self) -> u64 {
        self.warmup.unwrap_or(self.horizon / 10)
    }

    pub fn preset_name(&self) -> &str {
        self.preset.as_deref().unwrap_or("custom")
    }

    /// Exactly one arrival and one unit of service per PoI per slot: the
    /// no-queueing regime where PoA is measured on the mean maximum age.
    pub fn is_deterministic_case(&self) -> bool {
        self.process.is_deterministic_unit()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.process.n() != self.n {
            return Err(Error::Config(format!(
                "n = {} but {} service processes configured",
                self.n,
                self.process.n()
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        // Ages and queues are 32-bit counters.
        if self.horizon > u64::from(u32::MAX / 2) {
            return Err(Error::Config(format!(
                "horizon {} exceeds the supported maximum {}",
                self.horizon,
                u32::MAX / 2
            )));
        }
        if self.warmup_slots() >= self.horizon {
            return Err(Error::Config(format!(
                "warmup {} must be smaller than horizon {}",
                self.warmup_slots(),
                self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.betas.is_empty() || self.gammas.is_empty() {
            return Err(Error::Config("beta and gamma sweeps must be non-empty".into()));
        }
        if self.betas.iter().chain(&self.gammas).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(
                "beta and gamma values must be finite and non-negative".into(),
            ));
        }
        self.price.validate(self.n)?;
        Ok(())
    }

    /// Parses the `key = value` format; unknown keys are errors.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut b = ConfigBuilder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{line}`", idx + 1))
            })?;
            b.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        b.finish()
    }

    /// Canonical serialization; parsing it back reproduces the config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(preset) = &self.preset {
            let _ = writeln!(out, "preset = {preset}");
        }
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "horizon = {}", self.horizon);
        if let Some(warmup) = self.warmup {
            let _ = writeln!(out, "warmup = {warmup}");
        }
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "seed = {}", self.base_seed);
        let _ = writeln!(out, "policy = {}", self.policy.as_str());
        let tie = match self.tie_break {
            TieBreak::UniformRandom => "random",
            TieBreak::LowestIndex => "lowest",
        };
        let _ = writeln!(out, "tie_break = {tie}");
        let _ = writeln!(out, "beta = {}", float_list(&self.betas));
        let _ = writeln!(out, "gamma = {}", float_list(&self.gammas));
        let _ = writeln!(out, "process.arrival = {}", dist_text(self.process.arrival()));
        let _ = writeln!(out, "process.service = {}", service_text(self.process.services()));
        match &self.price {
            PriceModel::Set {
                values,
                period,
                initial,
            } => {
                let _ = writeln!(out, "price.kind = set");
                let _ = writeln!(out, "price.values = {}", float_list(values));
                let _ = writeln!(out, "price.period = {period}");
                let _ = writeln!(out, "price.initial = {}", init_text(initial));
            }
            PriceModel::UniformContinuous { low, high, initial } => {
                let _ = writeln!(out, "price.kind = uniform");
                let _ = writeln!(out, "price.low = {low}");
                let _ = writeln!(out, "price.high = {high}");
                let _ = writeln!(out, "price.initial = {}", init_text(initial));
            }
        }
        if let Some(path) = &self.output_path {
            let _ = writeln!(out, "output.path = {path}");
        }
        let _ = writeln!(out, "output.format = {}", self.format.as_str());
        out
    }
}

fn float_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn dist_text(dist: &CountDist) -> String {
    match dist {
        CountDist::Deterministic(k) => format!("deterministic({k})"),
        CountDist::Bernoulli(p) => format!("bernoulli({p})"),
        CountDist::Discrete(pairs) => {
            let atoms = pairs
                .iter()
                .map(|(v, p)| format!("{v}:{p}"))
                .collect::<Vec<_>>()
                .join(", ");
            format!("discrete({atoms})")
        }
    }
}

/// Groups equal consecutive service distributions as `dist xCOUNT`.
fn service_text(services: &[CountDist]) -> String {
    let mut groups: Vec<(usize, &CountDist)> = Vec::new();
    for dist in services {
        match groups.last_mut() {
            Some((count, prev)) if *prev == dist => *count += 1,
            _ => groups.push((1, dist)),
        }
    }
    groups
        .into_iter()
        .map(|(count, dist)| {
            if count == 1 {
                dist_text(dist)
            } else {
                format!("{} x{count}", dist_text(dist))
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn init_text(initial: &PriceInit) -> String {
    match initial {
        PriceInit::UniformRandom => "random".to_string(),
        PriceInit::Fixed(values) => float_list(values),
    }
}

fn parse_f64(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("expected a number, got `{text}`")))
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(parse_f64).collect()
}

/// `deterministic(k)`, `bernoulli(p)` or `discrete(v:p, ...)`.
fn parse_dist(text: &str) -> Result<CountDist> {
    let text = text.trim();
    let (name, rest) = text
        .split_once('(')
        .ok_or_else(|| Error::Config(format!("expected dist(args), got `{text}`")))?;
    let args = rest
        .strip_suffix(')')
        .ok_or_else(|| Error::Config(format!("missing `)` in `{text}`")))?;
    let dist = match name.trim() {
        "deterministic" => CountDist::Deterministic(
            args.trim()
                .parse::<u32>()
                .map_err(|_| Error::Config(format!("expected an integer, got `{args}`")))?,
        ),
        "bernoulli" => CountDist::Bernoulli(parse_f64(args)?),
        "discrete" => {
            let mut pairs = Vec::new();
            for atom in args.split(',') {
                let (v, p) = atom.split_once(':').ok_or_else(|| {
                    Error::Config(format!("expected value:probability, got `{atom}`"))
                })?;
                pairs.push((
                    v.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Config(format!("expected an integer, got `{v}`")))?,
                    parse_f64(p)?,
                ));
            }
            CountDist::Discrete(pairs)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown distribution `{other}` (expected deterministic, bernoulli or discrete)"
            )))
        }
    };
    dist.validate()?;
    Ok(dist)
}

/// Semicolon-separated groups `dist [xCOUNT]`.
fn parse_services(text: &str) -> Result<Vec<(CountDist, usize)>> {
    text.split(';')
        .map(|group| {
            let group = group.trim();
            if let Some((dist_text, count_text)) = group.rsplit_once('x') {
                // `x` may also appear inside no distribution name, so only
                // treat the suffix as a count when it parses as one.
                if let Ok(count) = count_text.trim().parse::<usize>() {
                    if count == 0 {
                        return Err(Error::Config("service group count must be positive".into()));
                    }
                    return Ok((parse_dist(dist_text)?, count));
                }
            }
            Ok((parse_dist(group)?, 1))
        })
        .collect()
}

#[derive(Default)]
struct ConfigBuilder {
    preset: Option<String>,
    n: Option<usize>,
    horizon: Option<u64>,
    warmup: Option<u64>,
    replications: Option<u32>,
    seed: Option<u64>,
    policy: Option<PolicyName>,
    tie_break: Option<TieBreak>,
    betas: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    arrival: Option<CountDist>,
    services: Option<Vec<(CountDist, usize)>>,
    price_kind: Option<String>,
    price_values: Option<Vec<f64>>,
    price_period: Option<u64>,
    price_initial: Option<PriceInit>,
    price_low: Option<f64>,
    price_high: Option<f64>,
    output_path: Option<String>,
    format: Option<OutputFormat>,
}

impl ConfigBuilder {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => self.preset = Some(value.to_string()),
            "n" => self.n = Some(parse_int(value)? as usize),
            "horizon" => self.horizon = Some(parse_int(value)?),
            "warmup" => self.warmup = Some(parse_int(value)?),
            "replications" => self.replications = Some(parse_int(value)? as u32),
            "seed" => self.seed = Some(parse_int(value)?),
            "policy" => self.policy = Some(PolicyName::parse(value)?),
            "tie_break" => {
                self.tie_break = Some(match value {
                    "random" => TieBreak::UniformRandom,
                    "lowest" => TieBreak::LowestIndex,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown tie_break `{other}` (expected random or lowest)"
                        )))
                    }
                })
            }
            "beta" => self.betas = Some(parse_float_list(value)?),
            "gamma" => self.gammas = Some(parse_float_list(value)?),
            "process.arrival" => self.arrival = Some(parse_dist(value)?),
            "process.service" => self.services = Some(parse_services(value)?),
            "price.kind" => self.price_kind = Some(value.to_string()),
            "price.values" => self.price_values = Some(parse_float_list(value)?),
            "price.period" => self.price_period = Some(parse_int(value)?),
            "price.initial" => {
                self.price_initial = Some(if value == "random" {
                    PriceInit::UniformRandom
                } else {
                    PriceInit::Fixed(parse_float_list(value)?)
                })
            }
            "price.low" => self.price_low = Some(parse_f64(value)?),
            "price.high" => self.price_high = Some(parse_f64(value)?),
            "output.path" => self.output_path = Some(value.to_string()),
            "output.format" => self.format = Some(OutputFormat::parse(value)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentConfig> {
        let n = self.n.ok_or_else(|| Error::Config("missing key `n`".into()))?;
        let horizon = self
            .horizon
            .ok_or_else(|| Error::Config("missing key `horizon`".into()))?;
        let arrival = self
            .arrival
            .ok_or_else(|| Error::Config("missing key `process.arrival`".into()))?;
        let groups = self
            .services
            .ok_or_else(|| Error::Config("missing key `process.service`".into()))?;
        let mut services = Vec::with_capacity(n);
        for (dist, count) in groups {
            services.extend(std::iter::repeat_n(dist, count));
        }
        // One ungrouped distribution is shorthand for "every PoI".
        if services.len() == 1 && n > 1 {
            services = vec![services.pop().expect("one element"); n];
        }
        if services.len() != n {
            return Err(Error::Config(format!(
                "process.service configures {} PoIs but n = {n}",
                services.len()
            )));
        }
        let process = ProcessSpec::new(arrival, services)?;

        let initial = self.price_initial.unwrap_or(PriceInit::UniformRandom);
        let price = match self.price_kind.as_deref() {
            Some("set") | None => PriceModel::Set {
                values: self
                    .price_values
                    .ok_or_else(|| Error::Config("missing key `price.values`".into()))?,
                period: self
                    .price_period
                    .ok_or_else(|| Error::Config("missing key `price.period`".into()))?,
                initial,
            },
            Some("uniform") => PriceModel::UniformContinuous {
                low: self.price_low.unwrap_or(0.0),
                high: self.price_high.unwrap_or(1.0),
                initial,
            },
            Some(other) => {
                return Err(Error::Config(format!(
                    "unknown price.kind `{other}` (expected set or uniform)"
                )))
            }
        };

        let config = ExperimentConfig {
            preset: self.preset,
            n,
            horizon,
            warmup: self.warmup,
            replications: self.replications.unwrap_or(1),
            base_seed: self.seed.unwrap_or(0),
            policy: self.policy.unwrap_or(PolicyName::Selfish),
            tie_break: self.tie_break.unwrap_or(TieBreak::UniformRandom),
            betas: self.betas.unwrap_or_else(|| vec![1.0]),
            gammas: self.gammas.unwrap_or_else(|| vec![1.0]),
            process,
            price,
            output_path: self.output_path,
            format: self.format.unwrap_or(OutputFormat::Csv),
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_int(text: &str) -> Result<u64> {
    let cleaned: String = text.chars().filter(|c| *c != '_').collect();
    cleaned
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::Config(format!("expected an integer, got `{text}`")))
}
