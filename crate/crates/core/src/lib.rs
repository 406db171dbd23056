//! Two-stage LLM policy search over compact policy classes.
//!
//! A Search stage proposes parameter vectors from a reward-only replay
//! history; the environment evaluates them over `K` seeded rollouts; a Critic
//! stage reads a compact evidence package built from those rollouts and
//! proposes a revision; keep-best selection commits the better of the two.
//!
//! The crate is organised bottom-up:
//!
//! * [`env`] - seeded episodic environments (CartPole, MountainCar,
//!   MountainCarContinuous, FrozenLake, Maze, Nim, Pong).
//! * [`policy`] - linear and tabular policy classes and the `params[i]: v`
//!   text codec.
//! * [`rollout`] - the evaluation contract and trajectory rendering.
//! * [`evidence`] - Critic evidence packages (median + stats, mean-closest,
//!   worst/median/best).
//! * [`llm`] - prompt templates, replay history formatting and completion
//!   backends (remote chat-completions or scripted playback).
//! * [`optimizer`] - the two-stage loop, its ablation variants and budget
//!   accounting.
//! * [`analysis`] - run metrics, Welch/Holm significance, salience coding and
//!   CSV reports.

pub mod analysis;
pub mod env;
pub mod evidence;
pub mod llm;
pub mod optimizer;
pub mod policy;
pub mod rollout;
pub mod seed;

pub use env::{make_env, Action, EnvId, EnvSpec, Environment, Observation, StepResult};
pub use evidence::{build_evidence, EvidencePackage, EvidenceVariant, RolloutStats};
pub use optimizer::{Method, Optimizer, RevisionRecord, RunConfig, RunLog};
pub use policy::{ParamKind, ParamVector};
pub use rollout::{eval_policy, EvalResult, Trajectory};
