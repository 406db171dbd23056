use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    discrete_action, Action, ActionSpace, EnvError, EnvId, EnvSpec, Environment, EpisodeClock,
    Observation, StepResult,
};

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GRAVITY: f64 = 0.0025;
const DISCRETE_FORCE: f64 = 0.001;
const DISCRETE_GOAL: f64 = 0.5;
const CONTINUOUS_POWER: f64 = 0.0015;
const CONTINUOUS_GOAL: f64 = 0.45;

#[derive(Debug, Clone, Copy)]
struct CarState {
    position: f64,
    velocity: f64,
}

impl CarState {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        Self {
            position: rng.gen_range(-0.6..-0.4),
            velocity: 0.0,
        }
    }

    fn advance(&mut self, force: f64) {
        self.velocity += force - GRAVITY * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position += self.velocity;
        self.position = self.position.clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
    }

    fn observation(&self) -> Observation {
        Observation::Vector(vec![self.position, self.velocity])
    }
}

/// Under-powered car in a valley with three discrete actions
/// (0 push left, 1 no push, 2 push right). Reward -1 per step.
pub struct MountainCar {
    spec: EnvSpec,
    rng: ChaCha8Rng,
    state: CarState,
    clock: EpisodeClock,
}

impl MountainCar {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvId::MountainCar.spec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: CarState {
                position: -0.5,
                velocity: 0.0,
            },
            clock: EpisodeClock::default(),
        }
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        self.state = CarState::sample(&mut self.rng);
        self.clock.reset();
        self.state.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let a = discrete_action(action, 3)?;
        self.state.advance((a as f64 - 1.0) * DISCRETE_FORCE);
        let goal = self.state.position >= DISCRETE_GOAL && self.state.velocity >= 0.0;
        let (terminated, truncated) = self.clock.advance(goal, self.spec.max_steps);
        Ok(StepResult {
            observation: self.state.observation(),
            reward: -1.0,
            terminated,
            truncated,
        })
    }
}

/// Continuous-force variant: action in [-1, 1], +100 on reaching the goal,
/// minus `0.1 * a^2` every step.
pub struct MountainCarContinuous {
    spec: EnvSpec,
    rng: ChaCha8Rng,
    state: CarState,
    clock: EpisodeClock,
}

impl MountainCarContinuous {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvId::MountainCarContinuous.spec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: CarState {
                position: -0.5,
                velocity: 0.0,
            },
            clock: EpisodeClock::default(),
        }
    }
}

impl Environment for MountainCarContinuous {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        self.state = CarState::sample(&mut self.rng);
        self.clock.reset();
        self.state.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let force = match action {
            Action::Continuous(a) if a.is_finite() && (-1.0..=1.0).contains(&a) => a,
            other => {
                return Err(EnvError::ActionOutOfRange {
                    action: format!("{other:?}"),
                    space: ActionSpace::Continuous {
                        low: -1.0,
                        high: 1.0,
                    }
                    .to_string(),
                })
            }
        };
        self.state.advance(force * CONTINUOUS_POWER);
        let goal = self.state.position >= CONTINUOUS_GOAL && self.state.velocity >= 0.0;
        let mut reward = -0.1 * force * force;
        if goal {
            reward += 100.0;
        }
        let (terminated, truncated) = self.clock.advance(goal, self.spec.max_steps);
        Ok(StepResult {
            observation: self.state.observation(),
            reward,
            terminated,
            truncated,
        })
    }
}
