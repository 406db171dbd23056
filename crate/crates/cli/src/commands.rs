use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use r2po::analysis::{
    build_report, discover_runs, revision_summary, stability_gap, ReportOptions, CALLS_FILE,
    EPISODES_FILE, SUMMARY_FILE,
};
use r2po::env::{frozenlake_transition_dist, nim_oracle, NimMove, FROZEN_LAKE_MAP};
use r2po::llm::{env_description, Gateway, TemplateSet};
use r2po::optimizer::LiveEvaluator;
use r2po::{eval_policy, EnvId, Optimizer, ParamVector, RunConfig, RunLog};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{for_seed, CliConfig};

pub fn run_dir_name(run: &RunConfig) -> String {
    format!("{}_{}_seed{}", run.env, run.method, run.seed)
}

/// Runs one configuration and writes its artifacts under `out`.
pub fn execute_run(
    run: &RunConfig,
    out: &Path,
    templates: Option<&Path>,
    keywords: &[String],
) -> Result<(PathBuf, RunLog)> {
    let dir = out.join(run_dir_name(run));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let backend = run.llm.build_backend()?;
    let gateway = Gateway::new(backend, run.llm.retry)
        .with_log_file(&dir.join(CALLS_FILE))
        .with_context(|| format!("creating call log in {}", dir.display()))?;
    let template_set = match templates {
        Some(d) => TemplateSet::with_overrides(d)?,
        None => TemplateSet::builtin(),
    };
    let description = env_description(run.env, templates)?;

    let episodes_path = dir.join(EPISODES_FILE);
    let mut episodes = BufWriter::new(
        File::create(&episodes_path)
            .with_context(|| format!("creating {}", episodes_path.display()))?,
    );
    let mut write_err: Option<std::io::Error> = None;
    let log = Optimizer::new(run.clone(), &gateway, LiveEvaluator::new(run.env))
        .with_templates(template_set)
        .with_env_description(description)
        .with_salience_keywords(keywords.to_vec())
        .run_with(|rec| {
            if write_err.is_some() {
                return;
            }
            let line = serde_json::to_string(rec).expect("record serializes");
            if let Err(e) = writeln!(episodes, "{line}").and_then(|_| episodes.flush()) {
                write_err = Some(e);
            }
        });
    if let Some(e) = write_err {
        return Err(e).with_context(|| format!("writing {}", episodes_path.display()));
    }
    let summary_path = dir.join(SUMMARY_FILE);
    fs::write(
        &summary_path,
        serde_json::to_string_pretty(&log.summary)? + "\n",
    )
    .with_context(|| format!("writing {}", summary_path.display()))?;
    Ok((dir, log))
}

pub fn cmd_run(cfg: &CliConfig) -> Result<bool> {
    let (dir, log) = execute_run(&cfg.run, &cfg.out, cfg.templates.as_deref(), &cfg.keywords)?;
    let s = &log.summary;
    println!("{}", dir.display());
    println!(
        "iterations {}/{} completed, {} dropped; llm calls {}; episodes {}",
        s.iterations_completed, s.budget.iterations, s.failed_iterations, s.llm_calls, s.episodes
    );
    if let (Some(mean), Some(best)) = (s.mean_reward, s.best_reward) {
        println!("mean reward {mean:.4}, best {best:.4}");
    }
    if let Some(reason) = &s.aborted {
        eprintln!("run aborted: {reason}");
        return Ok(false);
    }
    Ok(true)
}

/// Hash of a run's artifacts. Call-log timestamps and latencies are left
/// out so identical scripted runs hash identically.
pub fn run_digest(dir: &Path) -> Result<String> {
    let mut h = Sha256::new();
    for name in [EPISODES_FILE, SUMMARY_FILE] {
        let bytes = fs::read(dir.join(name)).with_context(|| format!("reading {name}"))?;
        h.update(name.as_bytes());
        h.update(&bytes);
    }
    h.update(CALLS_FILE.as_bytes());
    let calls = fs::read_to_string(dir.join(CALLS_FILE)).context("reading call log")?;
    for line in calls.lines().filter(|l| !l.trim().is_empty()) {
        let mut v: serde_json::Value = serde_json::from_str(line).context("parsing call log")?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timestamp");
            obj.remove("latency_ms");
        }
        h.update(v.to_string().as_bytes());
        h.update(b"\n");
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub seed: u64,
    pub dir: String,
    pub status: SeedStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub env: EnvId,
    pub method: r2po::Method,
    pub first_seed: u64,
    pub seeds: usize,
    pub ok: usize,
    pub failed: usize,
    pub runs: Vec<ManifestEntry>,
    /// Hash over the run entries.
    pub digest: String,
}

pub fn manifest_name(run: &RunConfig) -> String {
    format!("{}_{}_manifest.json", run.env, run.method)
}

fn batch_entry(cfg: &CliConfig, seed: u64) -> ManifestEntry {
    let run = for_seed(&cfg.run, seed);
    let dir = run_dir_name(&run);
    let outcome = execute_run(&run, &cfg.out, cfg.templates.as_deref(), &cfg.keywords)
        .and_then(|(path, log)| Ok((log, run_digest(&path)?)));
    match outcome {
        Ok((log, digest)) => ManifestEntry {
            seed,
            dir,
            status: if log.is_aborted() {
                SeedStatus::Failed
            } else {
                SeedStatus::Ok
            },
            error: log.summary.aborted,
            digest: Some(digest),
        },
        Err(e) => ManifestEntry {
            seed,
            dir,
            status: SeedStatus::Failed,
            error: Some(format!("{e:#}")),
            digest: None,
        },
    }
}

pub fn execute_batch(cfg: &CliConfig) -> Result<(PathBuf, Manifest)> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.run.seed + i).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()?;
    let runs: Vec<ManifestEntry> =
        pool.install(|| seeds.par_iter().map(|&s| batch_entry(cfg, s)).collect());
    let digest = hex::encode(Sha256::digest(serde_json::to_vec(&runs)?));
    let ok = runs.iter().filter(|r| r.status == SeedStatus::Ok).count();
    let manifest = Manifest {
        env: cfg.run.env,
        method: cfg.run.method,
        first_seed: cfg.run.seed,
        seeds: cfg.seeds,
        ok,
        failed: runs.len() - ok,
        runs,
        digest,
    };
    let path = cfg.out.join(manifest_name(&cfg.run));
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok((path, manifest))
}

pub fn cmd_batch(cfg: &CliConfig) -> Result<bool> {
    let (path, m) = execute_batch(cfg)?;
    println!("{}", path.display());
    println!("{} ok, {} failed, digest {}", m.ok, m.failed, m.digest);
    for r in m.runs.iter().filter(|r| r.status == SeedStatus::Failed) {
        eprintln!(
            "seed {} failed: {}",
            r.seed,
            r.error.as_deref().unwrap_or("unknown")
        );
    }
    Ok(m.failed == 0)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Per-run overview printed to stdout; reads logs only.
pub fn cmd_analyze(dirs: &[PathBuf]) -> Result<bool> {
    if dirs.is_empty() {
        bail!("analyze needs at least one log directory");
    }
    println!("run\titerations\tdropped\tmean\tbest\tgap\taccepted_pct\tregression_pct\taborted");
    for root in dirs {
        for run in discover_runs(root)? {
            let s = &run.summary;
            let gap = s
                .best_reward
                .zip(s.mean_reward)
                .map(|(b, m)| stability_gap(b, m));
            let rev = revision_summary(&run.records).ok();
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                run.run_id(),
                s.iterations_completed,
                s.failed_iterations,
                opt(s.mean_reward),
                opt(s.best_reward),
                opt(gap),
                opt(rev.map(|r| r.accepted_pct)),
                opt(rev.map(|r| r.regression_pct)),
                s.aborted.as_deref().unwrap_or("-"),
            );
        }
    }
    Ok(true)
}

pub fn cmd_report(cfg: &CliConfig, logs: &Path, out: Option<&Path>) -> Result<bool> {
    let runs = discover_runs(logs)?;
    let opts = ReportOptions {
        target: cfg.target,
        metric: cfg.metric,
        salience: cfg.salience,
        keywords: cfg.keywords.clone(),
    };
    let tables = build_report(&runs, &opts)?;
    let out = out.map_or_else(|| logs.join("report"), Path::to_path_buf);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    for t in &tables {
        println!("{}", t.write_to(&out)?.display());
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvCheck {
    pub env: EnvId,
    pub param_rank: usize,
    pub max_steps: usize,
    pub zero_policy_mean: f64,
    pub failures: Vec<String>,
}

fn nim_oracle_table() -> Result<ParamVector> {
    let mut table = vec![0; r2po::env::NIM_START_STICKS + 1];
    for (s, slot) in table.iter_mut().enumerate().skip(1) {
        if let NimMove::Remove(n) = nim_oracle(s)? {
            *slot = n - 1;
        }
    }
    Ok(ParamVector::Discrete(table))
}

/// Determinism, episode-length and model-consistency checks for one env.
pub fn check_env(env: EnvId, rollouts: usize, seed: u64) -> Result<EnvCheck> {
    let spec = env.spec();
    let zero = ParamVector::zeros(&spec);
    let a = eval_policy(env, &zero, rollouts, seed)?;
    let b = eval_policy(env, &zero, rollouts, seed)?;
    let mut failures = Vec::new();
    if a.per_rollout_returns != b.per_rollout_returns {
        failures.push("equal seeds gave different returns".to_string());
    }
    if a.trajectories
        .iter()
        .any(|t| t.steps.len() > spec.max_steps)
    {
        failures.push(format!("episode longer than {} steps", spec.max_steps));
    }
    match env {
        EnvId::Nim => {
            let r = eval_policy(env, &nim_oracle_table()?, rollouts, seed)?;
            if r.mean_reward != 1.0 {
                failures.push(format!("oracle policy scored {}", r.mean_reward));
            }
        }
        EnvId::FrozenLake => {
            for s in 0..FROZEN_LAKE_MAP.len() * FROZEN_LAKE_MAP[0].len() {
                for action in 0..4 {
                    let total: f64 = frozenlake_transition_dist(s, action)?
                        .iter()
                        .map(|(_, p)| p)
                        .sum();
                    if (total - 1.0).abs() > 1e-12 {
                        failures.push(format!("transition mass {total} at ({s}, {action})"));
                    }
                }
            }
        }
        _ => {}
    }
    Ok(EnvCheck {
        env,
        param_rank: spec.param_rank(),
        max_steps: spec.max_steps,
        zero_policy_mean: a.mean_reward,
        failures,
    })
}

pub fn cmd_validate_env(envs: &[EnvId], rollouts: usize, seed: u64) -> Result<bool> {
    let mut ok = true;
    for &env in envs {
        let c = check_env(env, rollouts, seed)?;
        ok &= c.failures.is_empty();
        println!("{}", serde_json::to_string(&c)?);
    }
    Ok(ok)
}
