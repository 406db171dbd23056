use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::env::{Action, ActionSpace, EnvId, EnvSpec, Observation, ObservationSpace};
use crate::policy::ParamVector;
use crate::rollout::{eval_policy, EvalError, EvalResult, Outcome, Step, Trajectory};
use crate::seed::derive_seed;

/// The loop's view of `Eval(theta)`; counts every episode it runs.
pub trait Evaluator {
    fn evaluate(
        &mut self,
        params: &ParamVector,
        k: usize,
        seed: u64,
    ) -> Result<EvalResult, EvalError>;
    fn episodes(&self) -> usize;
}

/// Evaluates in the real environment.
#[derive(Debug, Clone)]
pub struct LiveEvaluator {
    env: EnvId,
    episodes: usize,
}

impl LiveEvaluator {
    pub fn new(env: EnvId) -> Self {
        Self { env, episodes: 0 }
    }
}

impl Evaluator for LiveEvaluator {
    fn evaluate(
        &mut self,
        params: &ParamVector,
        k: usize,
        seed: u64,
    ) -> Result<EvalResult, EvalError> {
        let r = eval_policy(self.env, params, k, seed)?;
        self.episodes += r.k();
        Ok(r)
    }

    fn episodes(&self) -> usize {
        self.episodes
    }
}

/// Per-rollout returns (and optionally lengths) for one scripted evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEval {
    pub returns: Vec<f64>,
    #[serde(default)]
    pub lengths: Option<Vec<usize>>,
}

/// Replays recorded rollout returns instead of running the environment.
/// Each synthesized trajectory has zero reward on every step but the last,
/// which carries the whole return.
#[derive(Debug, Clone)]
pub struct ScriptedEvaluator {
    spec: EnvSpec,
    queue: VecDeque<ScriptedEval>,
    episodes: usize,
}

impl ScriptedEvaluator {
    pub fn new(env: EnvId, evals: impl IntoIterator<Item = ScriptedEval>) -> Self {
        Self {
            spec: env.spec(),
            queue: evals.into_iter().collect(),
            episodes: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.len()
    }

    fn trajectory(&self, index: usize, seed: u64, ret: f64, length: usize) -> Trajectory {
        let observation = match self.spec.observation_space {
            ObservationSpace::Vector { dim } => Observation::Vector(vec![0.0; dim]),
            ObservationSpace::States { .. } => Observation::State(0),
        };
        let action = match self.spec.action_space {
            ActionSpace::Discrete(_) => Action::Discrete(0),
            ActionSpace::Continuous { .. } => Action::Continuous(0.0),
        };
        let length = length.max(1);
        let mut steps = vec![
            Step {
                observation,
                action,
                reward: 0.0,
            };
            length
        ];
        steps[length - 1].reward = ret;
        let outcome = if length >= self.spec.max_steps {
            Outcome::Truncated
        } else {
            Outcome::Terminated
        };
        Trajectory::from_steps(index, seed, steps, outcome)
    }
}

impl Evaluator for ScriptedEvaluator {
    fn evaluate(
        &mut self,
        params: &ParamVector,
        k: usize,
        seed: u64,
    ) -> Result<EvalResult, EvalError> {
        if k == 0 {
            return Err(EvalError::ZeroRollouts);
        }
        params.validate_for(&self.spec)?;
        let next = self
            .queue
            .pop_front()
            .ok_or_else(|| EvalError::Scripted("no scripted evaluations left".to_string()))?;
        if next.returns.len() != k {
            return Err(EvalError::Scripted(format!(
                "scripted evaluation has {} returns, expected {k}",
                next.returns.len()
            )));
        }
        let trajectories = next
            .returns
            .iter()
            .enumerate()
            .map(|(i, &ret)| {
                let len = next
                    .lengths
                    .as_ref()
                    .and_then(|l| l.get(i).copied())
                    .unwrap_or(1);
                self.trajectory(i, derive_seed(seed, i as u64), ret, len)
            })
            .collect();
        self.episodes += k;
        Ok(EvalResult::from_trajectories(trajectories, seed))
    }

    fn episodes(&self) -> usize {
        self.episodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_returns_are_replayed() {
        let mut returns = vec![303.0];
        returns.extend([500.0; 19]);
        let lengths = returns.iter().map(|&r| r as usize).collect();
        let mut ev = ScriptedEvaluator::new(
            EnvId::CartPole,
            [ScriptedEval {
                returns,
                lengths: Some(lengths),
            }],
        );
        let r = ev
            .evaluate(&ParamVector::continuous(&[0.0; 10]), 20, 1)
            .unwrap();
        assert!((r.mean_reward - 490.15).abs() < 1e-9);
        assert_eq!(r.trajectories[0].length, 303);
        assert_eq!(r.trajectories[1].outcome, Outcome::Truncated);
        assert_eq!(ev.episodes(), 20);
        assert!(ev
            .evaluate(&ParamVector::continuous(&[0.0; 10]), 20, 1)
            .is_err());
    }

    #[test]
    fn scripted_rejects_wrong_k_and_bad_params() {
        let mut ev = ScriptedEvaluator::new(
            EnvId::Nim,
            [ScriptedEval {
                returns: vec![1.0],
                lengths: None,
            }],
        );
        assert!(ev
            .evaluate(&ParamVector::Discrete(vec![0; 10]), 1, 0)
            .is_err());
        assert!(ev
            .evaluate(&ParamVector::Discrete(vec![0; 11]), 2, 0)
            .is_err());
    }

    #[test]
    fn live_counts_episodes() {
        let mut ev = LiveEvaluator::new(EnvId::Nim);
        ev.evaluate(&ParamVector::Discrete(vec![0; 11]), 5, 0)
            .unwrap();
        ev.evaluate(&ParamVector::Discrete(vec![0; 11]), 3, 1)
            .unwrap();
        assert_eq!(ev.episodes(), 8);
    }
}
