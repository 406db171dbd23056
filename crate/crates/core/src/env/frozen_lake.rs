use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    discrete_action, Action, EnvError, EnvId, EnvSpec, Environment, EpisodeClock, Observation,
    StepResult,
};

/// 4x4 lake, row-major. S start, F frozen, H hole, G goal.
pub const FROZEN_LAKE_MAP: [&str; 4] = ["SFFF", "FHFH", "FFFH", "HFFG"];

const SIDE: usize = 4;
const STATES: usize = SIDE * SIDE;

fn tile(state: usize) -> u8 {
    FROZEN_LAKE_MAP[state / SIDE].as_bytes()[state % SIDE]
}

fn is_absorbing(state: usize) -> bool {
    matches!(tile(state), b'H' | b'G')
}

/// Moves one cell in `direction` (0 left, 1 down, 2 right, 3 up), clamped at
/// the grid edge.
fn shift(state: usize, direction: usize) -> usize {
    let (row, col) = (state / SIDE, state % SIDE);
    let (row, col) = match direction {
        0 => (row, col.saturating_sub(1)),
        1 => ((row + 1).min(SIDE - 1), col),
        2 => (row, (col + 1).min(SIDE - 1)),
        _ => (row.saturating_sub(1), col),
    };
    row * SIDE + col
}

/// The intended direction and its two perpendiculars, each taken w.p. 1/3.
fn slip_directions(action: usize) -> [usize; 3] {
    [(action + 3) % 4, action, (action + 1) % 4]
}

/// Exact transition distribution of the slippery lake, merged by next state
/// and sorted by state index.
pub fn frozenlake_transition_dist(
    state: usize,
    action: usize,
) -> Result<Vec<(usize, f64)>, EnvError> {
    if state >= STATES {
        return Err(EnvError::StateOutOfRange {
            state,
            states: STATES,
        });
    }
    if action >= 4 {
        return Err(EnvError::ActionOutOfRange {
            action: action.to_string(),
            space: "Discrete(4)".into(),
        });
    }
    if is_absorbing(state) {
        return Ok(vec![(state, 1.0)]);
    }
    let mut counts = [0u32; STATES];
    for d in slip_directions(action) {
        counts[shift(state, d)] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(s, c)| (s, *c as f64 / 3.0))
        .collect())
}

/// Slippery 4x4 FrozenLake. Reward 1 on reaching G; the episode ends in a
/// hole or at the goal.
pub struct FrozenLake {
    spec: EnvSpec,
    rng: ChaCha8Rng,
    state: usize,
    clock: EpisodeClock,
}

impl FrozenLake {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvId::FrozenLake.spec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: 0,
            clock: EpisodeClock::default(),
        }
    }

    /// Starts a fresh episode from an arbitrary state (test hook).
    pub fn set_state(&mut self, state: usize) {
        self.state = state;
        self.clock.reset();
    }
}

impl Environment for FrozenLake {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        self.state = 0;
        self.clock.reset();
        Observation::State(0)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let a = discrete_action(action, 4)?;
        let direction = slip_directions(a)[self.rng.gen_range(0..3)];
        self.state = shift(self.state, direction);
        let reward = if tile(self.state) == b'G' { 1.0 } else { 0.0 };
        let (terminated, truncated) = self
            .clock
            .advance(is_absorbing(self.state), self.spec.max_steps);
        Ok(StepResult {
            observation: Observation::State(self.state),
            reward,
            terminated,
            truncated,
        })
    }
}
