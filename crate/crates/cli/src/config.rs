//! Layered settings: defaults < config file < environment < flags.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use r2po::analysis::{Metric, DEFAULT_SALIENCE_KEYWORDS};
use r2po::llm::BackendKind;
use r2po::{EnvId, Method, RunConfig};
use serde::{Deserialize, Serialize};

pub const ENV_ENDPOINT: &str = "R2PO_ENDPOINT";
pub const ENV_MODEL: &str = "R2PO_MODEL";

/// Everything a verb can be configured with. The file form is one JSON
/// object: the run fields at top level plus the CLI-only keys below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CliConfig {
    #[serde(flatten)]
    pub run: RunConfig,
    pub out: PathBuf,
    /// Number of consecutive seeds a batch runs, starting at `run.seed`.
    pub seeds: usize,
    /// Concurrent seeds in a batch; all cores when absent.
    pub jobs: Option<usize>,
    /// Directory of prompt-template overrides.
    pub templates: Option<PathBuf>,
    pub salience: bool,
    pub keywords: Vec<String>,
    pub target: Method,
    pub metric: Metric,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            run: RunConfig::default(),
            out: PathBuf::from("runs"),
            seeds: 10,
            jobs: None,
            templates: None,
            salience: false,
            keywords: DEFAULT_SALIENCE_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            target: Method::R2po,
            metric: Metric::MeanReward,
        }
    }
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s.replace('-', "_").as_str() {
        "mean" | "mean_reward" => Ok(Metric::MeanReward),
        "best" | "best_reward" => Ok(Metric::BestReward),
        other => Err(format!("unknown metric {other:?} (expected mean or best)")),
    }
}

/// Command-line flags shared by every verb. Unset flags leave lower layers
/// alone.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Overrides {
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// cartpole, mountaincar, mountaincar_continuous, frozenlake, maze, nim or pong
    #[arg(long, global = true)]
    pub env: Option<EnvId>,
    /// r2po or an ablation (rep_traj, three_traj, always_critic, critic_only,
    /// actor_second_pass, pure_search, scalar_search)
    #[arg(long, global = true)]
    pub method: Option<Method>,
    /// Base iteration count before the budget schedule
    #[arg(long, global = true)]
    pub iterations: Option<usize>,
    /// Rollouts per evaluation (K)
    #[arg(long, global = true)]
    pub rollouts: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of seeds in a batch
    #[arg(long, global = true)]
    pub seeds: Option<usize>,
    #[arg(long = "tau-c", global = true, allow_negative_numbers = true)]
    pub tau_c: Option<f64>,
    /// remote or scripted
    #[arg(long, global = true)]
    pub llm: Option<BackendKind>,
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub temperature: Option<f64>,
    /// Scripted responses (JSONL); `{seed}` is replaced by the run seed
    #[arg(long, global = true)]
    pub script: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,
    /// Add salience and agreement tables to a report
    #[arg(long, global = true)]
    pub salience: bool,
    /// Comma-separated salience keywords
    #[arg(long, global = true, value_delimiter = ',')]
    pub keywords: Option<Vec<String>>,
    /// Method compared against the others in a report
    #[arg(long, global = true)]
    pub target: Option<Method>,
    /// Report metric: mean or best
    #[arg(long, global = true, value_parser = parse_metric)]
    pub metric: Option<Metric>,
}

/// Values read from the process environment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnvOverrides {
    pub endpoint: Option<String>,
    pub model: Option<String>,
}

impl EnvOverrides {
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Self {
        Self {
            endpoint: lookup(ENV_ENDPOINT).filter(|s| !s.is_empty()),
            model: lookup(ENV_MODEL).filter(|s| !s.is_empty()),
        }
    }

    pub fn from_process() -> Self {
        Self::from_lookup(|k| std::env::var(k).ok())
    }
}

pub fn read_config_file(path: &Path) -> Result<CliConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Applies the layers above `base` in order.
pub fn layer(mut base: CliConfig, env: &EnvOverrides, flags: &Overrides) -> CliConfig {
    let remote = &mut base.run.llm.remote;
    if let Some(v) = &env.endpoint {
        remote.endpoint = v.clone();
    }
    if let Some(v) = &env.model {
        remote.model = v.clone();
    }

    let f = flags.clone();
    let run = &mut base.run;
    if let Some(v) = f.env {
        run.env = v;
    }
    if let Some(v) = f.method {
        run.method = v;
    }
    if let Some(v) = f.iterations {
        run.iterations = v;
    }
    if let Some(v) = f.rollouts {
        run.rollouts = v;
    }
    if let Some(v) = f.seed {
        run.seed = v;
    }
    if let Some(v) = f.tau_c {
        run.tau_c = Some(v);
    }
    if let Some(v) = f.llm {
        run.llm.backend = v;
    }
    if let Some(v) = f.endpoint {
        run.llm.remote.endpoint = v;
    }
    if let Some(v) = f.model {
        run.llm.remote.model = v;
    }
    if let Some(v) = f.temperature {
        run.llm.remote.temperature = v;
    }
    if let Some(v) = f.script {
        run.llm.script = Some(v);
    }
    if let Some(v) = f.seeds {
        base.seeds = v;
    }
    if let Some(v) = f.out {
        base.out = v;
    }
    if let Some(v) = f.jobs {
        base.jobs = Some(v);
    }
    if let Some(v) = f.templates {
        base.templates = Some(v);
    }
    if f.salience {
        base.salience = true;
    }
    if let Some(v) = f.keywords {
        base.keywords = v;
    }
    if let Some(v) = f.target {
        base.target = v;
    }
    if let Some(v) = f.metric {
        base.metric = v;
    }
    base
}

pub fn resolve(flags: &Overrides, env: &EnvOverrides) -> Result<CliConfig> {
    let base = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => CliConfig::default(),
    };
    let cfg = layer(base, env, flags);
    validate(&cfg)?;
    Ok(cfg)
}

pub fn validate(cfg: &CliConfig) -> Result<()> {
    anyhow::ensure!(cfg.run.iterations > 0, "iterations must be positive");
    anyhow::ensure!(cfg.run.rollouts > 0, "rollouts must be positive");
    anyhow::ensure!(cfg.seeds > 0, "seeds must be positive");
    anyhow::ensure!(cfg.jobs != Some(0), "jobs must be positive");
    anyhow::ensure!(
        cfg.run.llm.remote.temperature.is_finite() && cfg.run.llm.remote.temperature >= 0.0,
        "temperature must be a non-negative number"
    );
    if cfg.run.llm.backend == BackendKind::Scripted {
        anyhow::ensure!(
            cfg.run.llm.script.is_some(),
            "--llm scripted needs --script"
        );
    }
    Ok(())
}

/// The run config for one seed, with `{seed}` substituted in the script path.
pub fn for_seed(run: &RunConfig, seed: u64) -> RunConfig {
    let mut run = run.clone();
    run.seed = seed;
    if let Some(p) = &run.llm.script {
        let s = p.to_string_lossy();
        if s.contains("{seed}") {
            run.llm.script = Some(PathBuf::from(s.replace("{seed}", &seed.to_string())));
        }
    }
    run
}
