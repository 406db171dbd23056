//! K-rollout evaluation of a parameter vector and trajectory rendering.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{make_env, Action, EnvError, EnvId, Observation};
use crate::policy::{ParamVector, PolicyBinding, PolicyError};
use crate::seed::derive_seed;

pub const DEFAULT_RENDER_LIMIT: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub observation: Observation,
    pub action: Action,
    pub reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Terminated,
    Truncated,
}

impl Outcome {
    pub fn phrase(self) -> &'static str {
        match self {
            Outcome::Truncated => "reached the rollout cap",
            Outcome::Terminated => "terminated before the rollout cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub rollout_index: usize,
    pub seed: u64,
    pub steps: Vec<Step>,
    #[serde(rename = "return")]
    pub ret: f64,
    pub length: usize,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn from_steps(rollout_index: usize, seed: u64, steps: Vec<Step>, outcome: Outcome) -> Self {
        let ret = steps.iter().map(|s| s.reward).sum();
        let length = steps.len();
        Self {
            rollout_index,
            seed,
            steps,
            ret,
            length,
            outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub mean_reward: f64,
    pub trajectories: Vec<Trajectory>,
    pub per_rollout_returns: Vec<f64>,
    pub base_seed: u64,
}

impl EvalResult {
    pub fn from_trajectories(trajectories: Vec<Trajectory>, base_seed: u64) -> Self {
        let per_rollout_returns: Vec<f64> = trajectories.iter().map(|t| t.ret).collect();
        let mean_reward =
            per_rollout_returns.iter().sum::<f64>() / per_rollout_returns.len().max(1) as f64;
        Self {
            mean_reward,
            trajectories,
            per_rollout_returns,
            base_seed,
        }
    }

    pub fn k(&self) -> usize {
        self.trajectories.len()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("K must be at least 1")]
    ZeroRollouts,
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("scripted evaluation: {0}")]
    Scripted(String),
}

/// Runs one episode to termination or the step cap.
pub fn run_episode(
    binding: &PolicyBinding,
    env_id: EnvId,
    rollout_index: usize,
    seed: u64,
) -> Result<Trajectory, EvalError> {
    let mut env = make_env(env_id, seed);
    let mut obs = env.reset();
    let mut steps = Vec::new();
    loop {
        let action = binding.act(&obs)?;
        let r = env.step(action)?;
        steps.push(Step {
            observation: obs,
            action,
            reward: r.reward,
        });
        if r.terminated {
            return Ok(Trajectory::from_steps(
                rollout_index,
                seed,
                steps,
                Outcome::Terminated,
            ));
        }
        if r.truncated {
            return Ok(Trajectory::from_steps(
                rollout_index,
                seed,
                steps,
                Outcome::Truncated,
            ));
        }
        obs = r.observation;
    }
}

/// Evaluates `params` over `k` rollouts; rollout `i` is seeded with
/// `derive_seed(base_seed, i)`.
pub fn eval_policy(
    env_id: EnvId,
    params: &ParamVector,
    k: usize,
    base_seed: u64,
) -> Result<EvalResult, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroRollouts);
    }
    let binding = PolicyBinding::new(params.clone(), env_id.spec())?;
    let trajectories = (0..k)
        .into_par_iter()
        .map(|i| run_episode(&binding, env_id, i, derive_seed(base_seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalResult::from_trajectories(trajectories, base_seed))
}

fn render_observation(obs: &Observation) -> String {
    match obs {
        Observation::State(s) => s.to_string(),
        Observation::Vector(v) => {
            let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

pub fn trajectory_header(traj: &Trajectory) -> String {
    format!(
        "(rollout {}, reward={:.4}, length={}, outcome={})",
        traj.rollout_index,
        traj.ret,
        traj.length,
        traj.outcome.phrase()
    )
}

/// Header line plus one `t: obs=... action=... reward=...` line per step.
/// Long trajectories keep the first and last `max_rendered_steps / 2` steps.
pub fn render_trajectory(traj: &Trajectory, max_rendered_steps: usize) -> String {
    let mut out = trajectory_header(traj);
    out.push('\n');
    let n = traj.steps.len();
    let line = |out: &mut String, t: usize| {
        let s = &traj.steps[t];
        let _ = writeln!(
            out,
            "{t}: obs={} action={} reward={:.2}",
            render_observation(&s.observation),
            s.action,
            s.reward
        );
    };
    if n <= max_rendered_steps {
        (0..n).for_each(|t| line(&mut out, t));
    } else {
        let half = max_rendered_steps / 2;
        (0..half).for_each(|t| line(&mut out, t));
        let _ = writeln!(out, "... ({} steps omitted) ...", n - 2 * half);
        (n - half..n).for_each(|t| line(&mut out, t));
    }
    out.truncate(out.trim_end().len());
    out
}
