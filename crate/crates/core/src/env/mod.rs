//! Seeded episodic environments with a uniform interface.
//!
//! Each handle owns its own ChaCha stream seeded at construction. Two handles
//! built from the same `(EnvId, seed)` and fed the same actions produce
//! bit-identical episodes.

mod cartpole;
mod frozen_lake;
mod maze;
mod mountain_car;
mod nim;
mod pong;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cartpole::CartPole;
pub use frozen_lake::{frozenlake_transition_dist, FrozenLake, FROZEN_LAKE_MAP};
pub use maze::{Maze, MAZE_GOAL, MAZE_STEP_PENALTY};
pub use mountain_car::{MountainCar, MountainCarContinuous};
pub use nim::{nim_oracle, Nim, NimMove, NIM_START_STICKS};
pub use pong::{Pong, PongGeometry, PONG_DOWN, PONG_STAY, PONG_UP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("unsupported environment `{0}` (supported: cartpole, mountaincar, mountaincar_continuous, frozenlake, maze, nim, pong)")]
    Unsupported(String),
    #[error("action {action} is outside the action space {space}")]
    ActionOutOfRange { action: String, space: String },
    #[error("step called after the episode finished; call reset first")]
    EpisodeFinished,
    #[error("step called before reset")]
    NotReset,
    #[error("state {state} out of range [0, {states})")]
    StateOutOfRange { state: usize, states: usize },
    #[error("nim stick count {0} out of range [1, 10]")]
    SticksOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvId {
    #[serde(rename = "cartpole")]
    CartPole,
    #[serde(rename = "mountaincar")]
    MountainCar,
    #[serde(rename = "mountaincar_continuous")]
    MountainCarContinuous,
    #[serde(rename = "frozenlake")]
    FrozenLake,
    Maze,
    Nim,
    Pong,
}

impl EnvId {
    pub const ALL: [EnvId; 7] = [
        EnvId::CartPole,
        EnvId::MountainCar,
        EnvId::MountainCarContinuous,
        EnvId::FrozenLake,
        EnvId::Maze,
        EnvId::Nim,
        EnvId::Pong,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EnvId::CartPole => "cartpole",
            EnvId::MountainCar => "mountaincar",
            EnvId::MountainCarContinuous => "mountaincar_continuous",
            EnvId::FrozenLake => "frozenlake",
            EnvId::Maze => "maze",
            EnvId::Nim => "nim",
            EnvId::Pong => "pong",
        }
    }

    /// Static description of the environment.
    pub fn spec(self) -> EnvSpec {
        match self {
            EnvId::CartPole => EnvSpec {
                id: self,
                observation_space: ObservationSpace::Vector { dim: 4 },
                action_space: ActionSpace::Discrete(2),
                max_steps: 500,
                optimum: 500.0,
                tau_c: 480.0,
                success_threshold: 500.0,
            },
            EnvId::MountainCar => EnvSpec {
                id: self,
                observation_space: ObservationSpace::Vector { dim: 2 },
                action_space: ActionSpace::Discrete(3),
                max_steps: 200,
                optimum: -120.0,
                tau_c: -120.0,
                success_threshold: -120.0,
            },
            EnvId::MountainCarContinuous => EnvSpec {
                id: self,
                observation_space: ObservationSpace::Vector { dim: 2 },
                action_space: ActionSpace::Continuous {
                    low: -1.0,
                    high: 1.0,
                },
                max_steps: 999,
                optimum: 100.0,
                tau_c: 97.0,
                success_threshold: 100.0,
            },
            EnvId::FrozenLake => EnvSpec {
                id: self,
                observation_space: ObservationSpace::States { count: 16 },
                action_space: ActionSpace::Discrete(4),
                max_steps: 100,
                optimum: 1.0,
                tau_c: 0.85,
                success_threshold: 1.0,
            },
            // The prompt optimum is the rounded ceiling 0.97; success counts
            // the exact shortest-path return 1 - 3 * 0.011.
            EnvId::Maze => EnvSpec {
                id: self,
                observation_space: ObservationSpace::States { count: 9 },
                action_space: ActionSpace::Discrete(4),
                max_steps: 100,
                optimum: 0.97,
                tau_c: 0.90,
                success_threshold: 0.967,
            },
            EnvId::Nim => EnvSpec {
                id: self,
                observation_space: ObservationSpace::States { count: 11 },
                action_space: ActionSpace::Discrete(3),
                max_steps: 10,
                optimum: 1.0,
                tau_c: 0.95,
                success_threshold: 1.0,
            },
            // Stats blocks count a rollout with at least one return as a success.
            EnvId::Pong => EnvSpec {
                id: self,
                observation_space: ObservationSpace::Vector { dim: 5 },
                action_space: ActionSpace::Discrete(3),
                max_steps: 1000,
                optimum: 3.0,
                tau_c: 2.8,
                success_threshold: 1.0,
            },
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvId {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let normalized = s.trim().to_ascii_lowercase().replace('-', "_");
        EnvId::ALL
            .into_iter()
            .find(|id| id.as_str() == normalized)
            .ok_or_else(|| EnvError::Unsupported(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservationSpace {
    /// Real-valued feature vector (linear policies).
    Vector { dim: usize },
    /// Finite state index (tabular policies).
    States { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ActionSpace {
    Discrete(usize),
    Continuous { low: f64, high: f64 },
}

impl fmt::Display for ActionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSpace::Discrete(n) => write!(f, "Discrete({n})"),
            ActionSpace::Continuous { low, high } => write!(f, "Box([{low}, {high}])"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: EnvId,
    pub observation_space: ObservationSpace,
    pub action_space: ActionSpace,
    pub max_steps: usize,
    /// Reward ceiling shown to the LLM as `<OPTIMUM>`.
    pub optimum: f64,
    /// Revision threshold for the Critic's abstention rule.
    pub tau_c: f64,
    /// Return at or above which a rollout counts as a success in stats.
    pub success_threshold: f64,
}

impl EnvSpec {
    /// Observation width for vector envs, state count for tabular envs.
    pub fn obs_dim(&self) -> usize {
        match self.observation_space {
            ObservationSpace::Vector { dim } => dim,
            ObservationSpace::States { count } => count,
        }
    }

    pub fn is_tabular(&self) -> bool {
        matches!(self.observation_space, ObservationSpace::States { .. })
    }

    pub fn n_actions(&self) -> Option<usize> {
        match self.action_space {
            ActionSpace::Discrete(n) => Some(n),
            ActionSpace::Continuous { .. } => None,
        }
    }

    /// Number of policy parameters for this environment's policy class.
    pub fn param_rank(&self) -> usize {
        match (self.observation_space, self.action_space) {
            (ObservationSpace::States { count }, _) => count,
            (ObservationSpace::Vector { dim }, ActionSpace::Discrete(n)) => (dim + 1) * n,
            (ObservationSpace::Vector { dim }, ActionSpace::Continuous { .. }) => dim + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    Vector(Vec<f64>),
    State(usize),
}

impl Observation {
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Observation::Vector(v) => Some(v),
            Observation::State(_) => None,
        }
    }

    pub fn as_state(&self) -> Option<usize> {
        match self {
            Observation::State(s) => Some(*s),
            Observation::Vector(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Action {
    Discrete(usize),
    Continuous(f64),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Discrete(a) => write!(f, "{a}"),
            Action::Continuous(a) => write!(f, "{a:.4}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    /// Starts a new episode. Draws from the handle's stream; successive resets
    /// on one handle yield a deterministic sequence of episodes.
    fn reset(&mut self) -> Observation;

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError>;
}

/// Builds an environment handle seeded with `seed`.
pub fn make_env(id: EnvId, seed: u64) -> Box<dyn Environment> {
    match id {
        EnvId::CartPole => Box::new(CartPole::new(seed)),
        EnvId::MountainCar => Box::new(MountainCar::new(seed)),
        EnvId::MountainCarContinuous => Box::new(MountainCarContinuous::new(seed)),
        EnvId::FrozenLake => Box::new(FrozenLake::new(seed)),
        EnvId::Maze => Box::new(Maze::new(seed)),
        EnvId::Nim => Box::new(Nim::new(seed)),
        EnvId::Pong => Box::new(Pong::new(seed)),
    }
}

/// Parses `name` and builds the environment; unknown names are an error.
pub fn make_env_by_name(name: &str, seed: u64) -> Result<Box<dyn Environment>, EnvError> {
    Ok(make_env(name.parse()?, seed))
}

/// Step counter shared by all environments: tracks reset/finished state and
/// decides truncation after termination has been evaluated.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    started: bool,
    finished: bool,
}

impl EpisodeClock {
    pub(crate) fn reset(&mut self) {
        self.steps = 0;
        self.started = true;
        self.finished = false;
    }

    pub(crate) fn check_can_step(&self) -> Result<(), EnvError> {
        if !self.started {
            Err(EnvError::NotReset)
        } else if self.finished {
            Err(EnvError::EpisodeFinished)
        } else {
            Ok(())
        }
    }

    /// Advances the counter and returns `(terminated, truncated)`.
    pub(crate) fn advance(&mut self, terminated: bool, max_steps: usize) -> (bool, bool) {
        self.steps += 1;
        let truncated = !terminated && self.steps >= max_steps;
        self.finished = terminated || truncated;
        (terminated, truncated)
    }
}

pub(crate) fn discrete_action(action: Action, n: usize) -> Result<usize, EnvError> {
    match action {
        Action::Discrete(a) if a < n => Ok(a),
        other => Err(EnvError::ActionOutOfRange {
            action: format!("{other:?}"),
            space: ActionSpace::Discrete(n).to_string(),
        }),
    }
}
