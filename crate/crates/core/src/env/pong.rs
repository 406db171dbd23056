use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    discrete_action, Action, EnvError, EnvId, EnvSpec, Environment, EpisodeClock, Observation,
    StepResult,
};

/// Field and paddle constants. `y` grows upwards; "up" moves the agent paddle
/// towards larger `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PongGeometry {
    pub width: f64,
    pub height: f64,
    pub agent_x: f64,
    pub opponent_x: f64,
    pub paddle_half_height: f64,
    pub paddle_speed: f64,
    pub ball_speed_x: f64,
    pub serve_vy_max: f64,
    pub hits_to_win: u32,
}

impl Default for PongGeometry {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 600.0,
            agent_x: 20.0,
            opponent_x: 780.0,
            paddle_half_height: 60.0,
            paddle_speed: 20.0,
            ball_speed_x: 6.0,
            serve_vy_max: 4.0,
            hits_to_win: 3,
        }
    }
}

pub const PONG_UP: usize = 0;
pub const PONG_STAY: usize = 1;
pub const PONG_DOWN: usize = 2;

/// Single-paddle Pong against a wall-like opponent that never misses.
///
/// Observation: `[ball_x, ball_y, ball_vx, ball_vy, paddle_y]`.
/// Actions: 0 up, 1 stay, 2 down. +1 per successful return; the episode
/// ends on a miss or on the third return.
pub struct Pong {
    spec: EnvSpec,
    geometry: PongGeometry,
    rng: ChaCha8Rng,
    ball: [f64; 4],
    paddle_y: f64,
    hits: u32,
    clock: EpisodeClock,
}

impl Pong {
    pub fn new(seed: u64) -> Self {
        let geometry = PongGeometry::default();
        Self {
            spec: EnvId::Pong.spec(),
            geometry,
            rng: ChaCha8Rng::seed_from_u64(seed),
            ball: [
                geometry.width / 2.0,
                geometry.height / 2.0,
                -geometry.ball_speed_x,
                0.0,
            ],
            paddle_y: geometry.height / 2.0,
            hits: 0,
            clock: EpisodeClock::default(),
        }
    }

    pub fn geometry(&self) -> PongGeometry {
        self.geometry
    }

    fn observation(&self) -> Observation {
        let [x, y, vx, vy] = self.ball;
        Observation::Vector(vec![x, y, vx, vy, self.paddle_y])
    }
}

impl Environment for Pong {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        let g = self.geometry;
        let vy = self.rng.gen_range(-g.serve_vy_max..=g.serve_vy_max);
        self.ball = [g.width / 2.0, g.height / 2.0, -g.ball_speed_x, vy];
        self.paddle_y = g.height / 2.0;
        self.hits = 0;
        self.clock.reset();
        self.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let g = self.geometry;
        let direction = match discrete_action(action, 3)? {
            PONG_UP => 1.0,
            PONG_DOWN => -1.0,
            _ => 0.0,
        };
        self.paddle_y = (self.paddle_y + direction * g.paddle_speed)
            .clamp(g.paddle_half_height, g.height - g.paddle_half_height);

        let [mut x, mut y, mut vx, mut vy] = self.ball;
        let prev_x = x;
        x += vx;
        y += vy;
        if y < 0.0 {
            y = -y;
            vy = -vy;
        } else if y > g.height {
            y = 2.0 * g.height - y;
            vy = -vy;
        }

        let mut reward = 0.0;
        let mut missed = false;
        if vx < 0.0 && prev_x > g.agent_x && x <= g.agent_x {
            if (y - self.paddle_y).abs() <= g.paddle_half_height {
                x = 2.0 * g.agent_x - x;
                vx = -vx;
                reward = 1.0;
                self.hits += 1;
            }
        } else if vx > 0.0 && x >= g.opponent_x {
            x = 2.0 * g.opponent_x - x;
            vx = -vx;
        }
        if x < 0.0 {
            missed = true;
        }
        self.ball = [x, y, vx, vy];

        let over = missed || self.hits >= g.hits_to_win;
        let (terminated, truncated) = self.clock.advance(over, self.spec.max_steps);
        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated,
            truncated,
        })
    }
}
