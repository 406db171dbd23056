//! Trajectory evidence shown to the Critic: selected rollouts, aggregate
//! statistics and the revision threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvSpec;
use crate::rollout::{render_trajectory, EvalResult, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceVariant {
    R2po,
    RepTraj,
    ThreeTraj,
}

impl EvidenceVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceVariant::R2po => "r2po",
            EvidenceVariant::RepTraj => "rep_traj",
            EvidenceVariant::ThreeTraj => "three_traj",
        }
    }
}

impl std::str::FromStr for EvidenceVariant {
    type Err = EvidenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r2po" => Ok(EvidenceVariant::R2po),
            "rep_traj" => Ok(EvidenceVariant::RepTraj),
            "three_traj" => Ok(EvidenceVariant::ThreeTraj),
            other => Err(EvidenceError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvidenceError {
    #[error("no trajectories to select from")]
    Empty,
    #[error("unknown evidence variant {0:?}")]
    UnknownVariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Median,
    MeanClosest,
    Worst,
    Best,
}

impl Role {
    fn label(self) -> &'static str {
        match self {
            Role::Median => "Median rollout",
            Role::MeanClosest => "Representative rollout",
            Role::Worst => "Worst rollout",
            Role::Best => "Best rollout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutStats {
    pub reward_mean: f64,
    pub reward_min: f64,
    pub reward_max: f64,
    pub length_mean: f64,
    pub length_min: usize,
    pub length_max: usize,
    pub success_count: usize,
    pub failure_count: usize,
    pub success_threshold: f64,
}

impl RolloutStats {
    pub fn k(&self) -> usize {
        self.success_count + self.failure_count
    }

    pub fn render(&self) -> String {
        let k = self.k();
        format!(
            "Reward: mean={:.2}, min={:.2}, max={:.2}\n\
             Episode length: mean={:.1}, min={}, max={}\n\
             Success rate: {}/{k} rollouts reached reward={:.2}\n\
             Failure rate: {}/{k} rollouts finished below reward={:.2}",
            self.reward_mean,
            self.reward_min,
            self.reward_max,
            self.length_mean,
            self.length_min,
            self.length_max,
            self.success_count,
            self.success_threshold,
            self.failure_count,
            self.success_threshold,
        )
    }
}

const SUCCESS_EPS: f64 = 1e-9;

pub fn is_success(ret: f64, threshold: f64) -> bool {
    ret + SUCCESS_EPS >= threshold
}

pub fn aggregate_stats(
    trajectories: &[Trajectory],
    success_threshold: f64,
) -> Result<RolloutStats, EvidenceError> {
    if trajectories.is_empty() {
        return Err(EvidenceError::Empty);
    }
    let k = trajectories.len() as f64;
    let returns = trajectories.iter().map(|t| t.ret);
    let success_count = trajectories
        .iter()
        .filter(|t| is_success(t.ret, success_threshold))
        .count();
    Ok(RolloutStats {
        reward_mean: returns.clone().sum::<f64>() / k,
        reward_min: returns.clone().fold(f64::INFINITY, f64::min),
        reward_max: returns.fold(f64::NEG_INFINITY, f64::max),
        length_mean: trajectories.iter().map(|t| t.length as f64).sum::<f64>() / k,
        length_min: trajectories.iter().map(|t| t.length).min().unwrap_or(0),
        length_max: trajectories.iter().map(|t| t.length).max().unwrap_or(0),
        success_count,
        failure_count: trajectories.len() - success_count,
        success_threshold,
    })
}

/// Median of a list of reals, midpoint for even length.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

fn closest_to(returns: &[f64], target: f64) -> usize {
    let mut best = 0;
    for (i, r) in returns.iter().enumerate() {
        if (r - target).abs() < (returns[best] - target).abs() {
            best = i;
        }
    }
    best
}

fn returns_of(trajectories: &[Trajectory]) -> Vec<f64> {
    trajectories.iter().map(|t| t.ret).collect()
}

pub fn median_index(returns: &[f64]) -> Option<usize> {
    median(returns).map(|m| closest_to(returns, m))
}

pub fn mean_closest_index(returns: &[f64]) -> Option<usize> {
    if returns.is_empty() {
        return None;
    }
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    Some(closest_to(returns, mean))
}

/// Indices of (worst, median, best), lowest index on ties.
pub fn three_indices(returns: &[f64]) -> Option<(usize, usize, usize)> {
    let med = median_index(returns)?;
    let mut worst = 0;
    let mut best = 0;
    for (i, &r) in returns.iter().enumerate() {
        if r < returns[worst] {
            worst = i;
        }
        if r > returns[best] {
            best = i;
        }
    }
    Some((worst, med, best))
}

pub fn select_median_trajectory(trajectories: &[Trajectory]) -> Result<&Trajectory, EvidenceError> {
    median_index(&returns_of(trajectories))
        .map(|i| &trajectories[i])
        .ok_or(EvidenceError::Empty)
}

pub fn select_mean_closest(trajectories: &[Trajectory]) -> Result<&Trajectory, EvidenceError> {
    mean_closest_index(&returns_of(trajectories))
        .map(|i| &trajectories[i])
        .ok_or(EvidenceError::Empty)
}

pub fn select_three(
    trajectories: &[Trajectory],
) -> Result<(&Trajectory, &Trajectory, &Trajectory), EvidenceError> {
    let (w, m, b) = three_indices(&returns_of(trajectories)).ok_or(EvidenceError::Empty)?;
    Ok((&trajectories[w], &trajectories[m], &trajectories[b]))
}

/// Returns of the worst, median-selected and best rollouts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnProfile {
    pub worst: f64,
    pub median: f64,
    pub best: f64,
}

impl ReturnProfile {
    pub fn of(eval: &EvalResult) -> Option<Self> {
        let r = &eval.per_rollout_returns;
        three_indices(r).map(|(w, m, b)| ReturnProfile {
            worst: r[w],
            median: r[m],
            best: r[b],
        })
    }

    pub fn worst_lt_median(&self) -> bool {
        self.worst < self.median
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedTrajectory {
    pub role: Role,
    pub rollout_index: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub length: usize,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePackage {
    pub variant: EvidenceVariant,
    pub selected: Vec<SelectedTrajectory>,
    pub stats: Option<RolloutStats>,
    pub revision_threshold: Option<f64>,
}

impl EvidencePackage {
    /// Text substituted for the trajectory-summary placeholder.
    pub fn summary_text(&self) -> String {
        let mut blocks = Vec::new();
        if let Some(stats) = &self.stats {
            blocks.push(stats.render());
        }
        let rendered: Vec<String> = self
            .selected
            .iter()
            .map(|s| format!("{} {}", s.role.label(), s.rendered))
            .collect();
        match self.variant {
            EvidenceVariant::ThreeTraj => blocks.push(rendered.join("\n\n")),
            _ => blocks.extend(rendered),
        }
        blocks.join("\n")
    }
}

fn select(role: Role, t: &Trajectory, render_limit: usize) -> SelectedTrajectory {
    SelectedTrajectory {
        role,
        rollout_index: t.rollout_index,
        ret: t.ret,
        length: t.length,
        rendered: render_trajectory(t, render_limit),
    }
}

/// Builds the evidence package for a variant. Only `r2po` carries stats and
/// the revision threshold (taken from `spec.tau_c`).
pub fn build_evidence(
    variant: EvidenceVariant,
    eval: &EvalResult,
    spec: &EnvSpec,
    render_limit: usize,
) -> Result<EvidencePackage, EvidenceError> {
    let trajs = &eval.trajectories;
    match variant {
        EvidenceVariant::R2po => Ok(EvidencePackage {
            variant,
            selected: vec![select(
                Role::Median,
                select_median_trajectory(trajs)?,
                render_limit,
            )],
            stats: Some(aggregate_stats(trajs, spec.success_threshold)?),
            revision_threshold: Some(spec.tau_c),
        }),
        EvidenceVariant::RepTraj => Ok(EvidencePackage {
            variant,
            selected: vec![select(
                Role::MeanClosest,
                select_mean_closest(trajs)?,
                render_limit,
            )],
            stats: None,
            revision_threshold: None,
        }),
        EvidenceVariant::ThreeTraj => {
            let (w, m, b) = select_three(trajs)?;
            Ok(EvidencePackage {
                variant,
                selected: vec![
                    select(Role::Worst, w, render_limit),
                    select(Role::Median, m, render_limit),
                    select(Role::Best, b, render_limit),
                ],
                stats: None,
                revision_threshold: None,
            })
        }
    }
}
