use serde::{Deserialize, Serialize};

use crate::evidence::{EvidenceVariant, ReturnProfile};
use crate::llm::ReplayEntry;
use crate::optimizer::{Budget, Method, RunConfig};
use crate::policy::ParamVector;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    ParseFailure,
}

/// One iteration's audit trail. For two-candidate methods `theta_init` is
/// the first candidate and `theta_rev` the second; `accepted` means the
/// second was committed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub schema_version: u32,
    pub iteration: usize,
    pub method: Method,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub variant: Option<EvidenceVariant>,
    pub theta_init: Option<ParamVector>,
    pub reward_init: Option<f64>,
    pub critic_reasoning: String,
    pub theta_rev: Option<ParamVector>,
    pub reward_rev: Option<f64>,
    pub accepted: bool,
    pub edit_distance: Option<usize>,
    pub committed_reward: Option<f64>,
    pub worst_lt_median: Option<bool>,
    pub mentions_worst: bool,
    pub init_profile: Option<ReturnProfile>,
}

impl RevisionRecord {
    pub fn new(iteration: usize, method: Method) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            iteration,
            method,
            status: Status::Completed,
            failure: None,
            variant: method.evidence_variant(),
            theta_init: None,
            reward_init: None,
            critic_reasoning: String::new(),
            theta_rev: None,
            reward_rev: None,
            accepted: false,
            edit_distance: None,
            committed_reward: None,
            worst_lt_median: None,
            mentions_worst: false,
            init_profile: None,
        }
    }

    /// `reward_rev - reward_init` when both exist.
    pub fn delta(&self) -> Option<f64> {
        Some(self.reward_rev? - self.reward_init?)
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub params: ParamVector,
    pub reward: f64,
    pub accepted: bool,
}

/// Keeps the revision iff `reward_rev >= reward_init`.
pub fn select_keep_best(init: (&ParamVector, f64), revised: (&ParamVector, f64)) -> Selection {
    if revised.1 >= init.1 {
        Selection {
            params: revised.0.clone(),
            reward: revised.1,
            accepted: true,
        }
    } else {
        Selection {
            params: init.0.clone(),
            reward: init.1,
            accepted: false,
        }
    }
}

/// Append-only history of committed candidates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    entries: Vec<ReplayEntry>,
}

impl ReplayBuffer {
    pub fn push(&mut self, params: ParamVector, mean_reward: f64) {
        self.entries.push(ReplayEntry {
            params,
            mean_reward,
        });
    }

    pub fn entries(&self) -> &[ReplayEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean_reward).collect()
    }

    pub fn best(&self) -> Option<&ReplayEntry> {
        self.entries
            .iter()
            .fold(None, |best: Option<&ReplayEntry>, e| match best {
                Some(b) if b.mean_reward >= e.mean_reward => Some(b),
                _ => Some(e),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub config: RunConfig,
    pub budget: Budget,
    pub iterations_completed: usize,
    pub failed_iterations: usize,
    pub mean_reward: Option<f64>,
    pub best_reward: Option<f64>,
    pub per_iteration_rewards: Vec<f64>,
    pub llm_calls: usize,
    pub episodes: usize,
    pub aborted: Option<String>,
}
