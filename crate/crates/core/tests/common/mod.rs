#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use r2po::llm::{Backend, BackendError, Gateway, RetryPolicy, ScriptedBackend};
use r2po::optimizer::ScriptedEval;
use r2po::EnvId;
use serde::Deserialize;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReplayEpisode {
    pub name: String,
    pub env: EnvId,
    pub theta_init: Vec<f64>,
    pub search_response: String,
    pub critic_response: String,
    pub init: ScriptedEval,
    pub rev: ScriptedEval,
    pub accepted: bool,
    pub edit_distance: Option<usize>,
    pub delta: f64,
}

pub fn replay_episodes() -> Vec<ReplayEpisode> {
    #[derive(Deserialize)]
    struct File {
        episodes: Vec<ReplayEpisode>,
    }
    let text = std::fs::read_to_string(fixture("replay_episodes.json")).unwrap();
    serde_json::from_str::<File>(&text).unwrap().episodes
}

#[derive(Debug, Clone, Deserialize)]
pub struct SalienceExample {
    pub name: String,
    pub env: EnvId,
    pub critic_response: String,
    pub returns: r2po::evidence::ReturnProfile,
    pub reward_init: f64,
    pub reward_rev: f64,
    pub expect_strict: bool,
    pub expect_permissive: bool,
}

pub fn salience_examples() -> Vec<SalienceExample> {
    #[derive(Deserialize)]
    struct File {
        examples: Vec<SalienceExample>,
    }
    let text = std::fs::read_to_string(fixture("salience_examples.json")).unwrap();
    serde_json::from_str::<File>(&text).unwrap().examples
}

/// Scripted playback that also keeps every prompt it was sent.
pub struct Recording {
    inner: ScriptedBackend,
    pub prompts: Arc<Mutex<Vec<String>>>,
}

impl Backend for Recording {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        self.inner.complete(prompt)
    }
}

pub fn recording_gateway<I, S>(responses: I) -> (Gateway, Arc<Mutex<Vec<String>>>)
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let prompts = Arc::new(Mutex::new(Vec::new()));
    let backend = Recording {
        inner: ScriptedBackend::new(responses),
        prompts: prompts.clone(),
    };
    (
        Gateway::new(Box::new(backend), RetryPolicy::default()),
        prompts,
    )
}

pub fn gateway<I, S>(responses: I) -> Gateway
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    Gateway::new(
        Box::new(ScriptedBackend::new(responses)),
        RetryPolicy::default(),
    )
}

/// A valid response for `env`: every parameter set to `v` (actions use
/// `v as usize % n`).
pub fn uniform_response(env: EnvId, v: f64) -> String {
    let spec = env.spec();
    let rank = spec.param_rank();
    let parts: Vec<String> = match spec.n_actions().filter(|_| spec.is_tabular()) {
        Some(n) => (0..rank)
            .map(|i| format!("params[{i}]: {}", (v.abs() as usize) % n))
            .collect(),
        None => (0..rank).map(|i| format!("params[{i}]: {v:.1}")).collect(),
    };
    parts.join(", ")
}

pub fn eval(returns: &[f64]) -> ScriptedEval {
    ScriptedEval {
        returns: returns.to_vec(),
        lengths: None,
    }
}
pub mod props;
