//! The two-stage loop, its ablation variants and budget accounting.

mod evaluator;
mod record;
mod run;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvId, EnvSpec};
use crate::evidence::EvidenceVariant;
use crate::llm::{LlmSettings, DEFAULT_STEP_SIZE};
use crate::rollout::DEFAULT_RENDER_LIMIT;

pub use evaluator::{Evaluator, LiveEvaluator, ScriptedEval, ScriptedEvaluator};
pub use record::{
    select_keep_best, ReplayBuffer, RevisionRecord, RunSummary, Selection, Status, SCHEMA_VERSION,
};
pub use run::{eval_seed, run_variant, Optimizer, RunError, RunLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    R2po,
    RepTraj,
    ThreeTraj,
    AlwaysCritic,
    CriticOnly,
    ActorSecondPass,
    PureSearch,
    ScalarSearch,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown method {0:?}")]
pub struct UnknownMethod(pub String);

impl Method {
    pub const ALL: [Method; 8] = [
        Method::R2po,
        Method::RepTraj,
        Method::ThreeTraj,
        Method::AlwaysCritic,
        Method::CriticOnly,
        Method::ActorSecondPass,
        Method::PureSearch,
        Method::ScalarSearch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::R2po => "r2po",
            Method::RepTraj => "rep_traj",
            Method::ThreeTraj => "three_traj",
            Method::AlwaysCritic => "always_critic",
            Method::CriticOnly => "critic_only",
            Method::ActorSecondPass => "actor_second_pass",
            Method::PureSearch => "pure_search",
            Method::ScalarSearch => "scalar_search",
        }
    }

    /// Two LLM calls and two evaluations per iteration.
    pub fn is_two_call(self) -> bool {
        !matches!(self, Method::CriticOnly | Method::ScalarSearch)
    }

    /// Evidence shown to the Critic, for methods that have one.
    pub fn evidence_variant(self) -> Option<EvidenceVariant> {
        match self {
            Method::R2po => Some(EvidenceVariant::R2po),
            Method::RepTraj | Method::AlwaysCritic => Some(EvidenceVariant::RepTraj),
            Method::ThreeTraj => Some(EvidenceVariant::ThreeTraj),
            _ => None,
        }
    }

    /// Commits the better of two evaluated candidates.
    pub fn has_selection(self) -> bool {
        matches!(
            self,
            Method::R2po | Method::RepTraj | Method::ThreeTraj | Method::PureSearch
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub iterations: usize,
    pub calls_per_iter: usize,
    pub rollouts_per_iter: usize,
}

impl Budget {
    pub fn total_calls(&self) -> usize {
        self.iterations * self.calls_per_iter
    }

    pub fn total_episodes(&self) -> usize {
        self.iterations * self.rollouts_per_iter
    }
}

/// Two-call methods run `base_t` iterations of two calls and `2k` episodes;
/// single-call methods run `2 * base_t` iterations of one call and `k`.
pub fn budget_schedule(method: Method, base_t: usize, k: usize) -> Budget {
    if method.is_two_call() {
        Budget {
            iterations: base_t,
            calls_per_iter: 2,
            rollouts_per_iter: 2 * k,
        }
    } else {
        Budget {
            iterations: 2 * base_t,
            calls_per_iter: 1,
            rollouts_per_iter: k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub env: EnvId,
    pub method: Method,
    /// Base iteration count before the budget schedule is applied.
    pub iterations: usize,
    pub rollouts: usize,
    pub seed: u64,
    pub tau_c: Option<f64>,
    pub success_threshold: Option<f64>,
    pub revision_rule: bool,
    pub step_size: f64,
    pub render_limit: usize,
    pub history_window: Option<usize>,
    pub llm: LlmSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvId::CartPole,
            method: Method::R2po,
            iterations: 100,
            rollouts: 20,
            seed: 0,
            tau_c: None,
            success_threshold: None,
            revision_rule: true,
            step_size: DEFAULT_STEP_SIZE,
            render_limit: DEFAULT_RENDER_LIMIT,
            history_window: None,
            llm: LlmSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn budget(&self) -> Budget {
        budget_schedule(self.method, self.iterations, self.rollouts)
    }

    /// Environment spec with the configured threshold overrides applied.
    pub fn effective_spec(&self) -> EnvSpec {
        let mut spec = self.env.spec();
        if let Some(t) = self.tau_c {
            spec.tau_c = t;
        }
        if let Some(s) = self.success_threshold {
            spec.success_threshold = s;
        }
        spec
    }
}
