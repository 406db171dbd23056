use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    discrete_action, Action, EnvError, EnvId, EnvSpec, Environment, EpisodeClock, Observation,
    StepResult,
};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const HALF_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * HALF_LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const X_THRESHOLD: f64 = 2.4;
const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

/// Cart-pole balancing with Euler integration. Observation is
/// `[x, x_dot, theta, theta_dot]`; action 0 pushes left, 1 pushes right.
/// Reward is +1 for every step, including the terminating one.
pub struct CartPole {
    spec: EnvSpec,
    rng: ChaCha8Rng,
    state: [f64; 4],
    clock: EpisodeClock,
}

impl CartPole {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvId::CartPole.spec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: [0.0; 4],
            clock: EpisodeClock::default(),
        }
    }

    /// Places the system in an explicit state, starting a fresh episode.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.clock.reset();
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }
}

impl Environment for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        for s in &mut self.state {
            *s = self.rng.gen_range(-0.05..=0.05);
        }
        self.clock.reset();
        Observation::Vector(self.state.to_vec())
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let a = discrete_action(action, 2)?;
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if a == 1 { FORCE_MAG } else { -FORCE_MAG };
        let (sin, cos) = theta.sin_cos();

        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;

        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];

        let [x, _, theta, _] = self.state;
        let fell = !(-X_THRESHOLD..=X_THRESHOLD).contains(&x)
            || !(-THETA_THRESHOLD..=THETA_THRESHOLD).contains(&theta);
        let (terminated, truncated) = self.clock.advance(fell, self.spec.max_steps);
        Ok(StepResult {
            observation: Observation::Vector(self.state.to_vec()),
            reward: 1.0,
            terminated,
            truncated,
        })
    }
}
