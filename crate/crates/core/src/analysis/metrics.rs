use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisError;
use crate::env::EnvId;
use crate::optimizer::{Method, RevisionRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run_id: String,
    pub env: EnvId,
    pub method: Method,
    pub mean_reward: f64,
    pub best_reward: f64,
}

/// Mean and max of a committed-reward series.
pub fn series_metrics(rewards: &[f64]) -> Result<(f64, f64), AnalysisError> {
    if rewards.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((mean, best))
}

pub fn run_metrics(
    run_id: &str,
    env: EnvId,
    method: Method,
    rewards: &[f64],
) -> Result<RunMetrics, AnalysisError> {
    let (mean_reward, best_reward) = series_metrics(rewards)?;
    Ok(RunMetrics {
        run_id: run_id.to_string(),
        env,
        method,
        mean_reward,
        best_reward,
    })
}

pub fn stability_gap(mean_best: f64, mean_reward: f64) -> f64 {
    mean_best - mean_reward
}

/// Best-so-far curve of a reward series.
pub fn running_best(rewards: &[f64]) -> Vec<f64> {
    rewards
        .iter()
        .scan(f64::NEG_INFINITY, |best, &r| {
            *best = best.max(r);
            Some(*best)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevisionSummary {
    pub episodes: usize,
    pub mean_delta: f64,
    pub mean_edit_distance: f64,
    /// Percent of episodes whose revision was committed.
    pub accepted_pct: f64,
    /// Percent of episodes with `delta < 0`.
    pub regression_pct: f64,
}

/// Aggregates completed records that carry both rewards.
pub fn revision_summary(records: &[RevisionRecord]) -> Result<RevisionSummary, AnalysisError> {
    let usable: Vec<(&RevisionRecord, f64)> = records
        .iter()
        .filter(|r| r.is_completed())
        .filter_map(|r| r.delta().map(|d| (r, d)))
        .collect();
    if usable.is_empty() {
        return Err(AnalysisError::NoRevisions);
    }
    let n = usable.len() as f64;
    let distances: Vec<f64> = usable
        .iter()
        .filter_map(|(r, _)| r.edit_distance)
        .map(|d| d as f64)
        .collect();
    Ok(RevisionSummary {
        episodes: usable.len(),
        mean_delta: usable.iter().map(|(_, d)| d).sum::<f64>() / n,
        mean_edit_distance: if distances.is_empty() {
            0.0
        } else {
            distances.iter().sum::<f64>() / distances.len() as f64
        },
        accepted_pct: 100.0 * usable.iter().filter(|(r, _)| r.accepted).count() as f64 / n,
        regression_pct: 100.0 * usable.iter().filter(|(_, d)| *d < 0.0).count() as f64 / n,
    })
}
