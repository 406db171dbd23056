use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    discrete_action, Action, EnvError, EnvId, EnvSpec, Environment, EpisodeClock, Observation,
    StepResult,
};

pub const NIM_START_STICKS: usize = 10;

/// Optimal-play classification of a Nim position (misere: whoever takes the
/// last stick loses).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NimMove {
    /// Take this many sticks to leave the opponent on a losing position.
    Remove(usize),
    /// Every move leaves the opponent winning.
    Losing,
}

/// Losing positions are exactly those with `(sticks - 1) % 4 == 0`.
pub fn nim_oracle(sticks: usize) -> Result<NimMove, EnvError> {
    if !(1..=NIM_START_STICKS).contains(&sticks) {
        return Err(EnvError::SticksOutOfRange(sticks));
    }
    Ok(match (sticks - 1) % 4 {
        0 => NimMove::Losing,
        take => NimMove::Remove(take),
    })
}

/// Ten-stick misere Nim against a rule-based opponent. The agent moves first;
/// action `a` removes `a + 1` sticks (capped at what is left). The opponent
/// plays the oracle move when it has one and otherwise removes a uniform
/// random 1..=3 sticks. Reward +1 for a win, -1 for a loss, 0 otherwise.
pub struct Nim {
    spec: EnvSpec,
    rng: ChaCha8Rng,
    sticks: usize,
    clock: EpisodeClock,
}

impl Nim {
    pub fn new(seed: u64) -> Self {
        Self {
            spec: EnvId::Nim.spec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            sticks: NIM_START_STICKS,
            clock: EpisodeClock::default(),
        }
    }

    fn opponent_take(&mut self) -> usize {
        match nim_oracle(self.sticks) {
            Ok(NimMove::Remove(n)) => n,
            _ => self.rng.gen_range(1..=3usize).min(self.sticks),
        }
    }
}

impl Environment for Nim {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        self.sticks = NIM_START_STICKS;
        self.clock.reset();
        Observation::State(self.sticks)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let take = (discrete_action(action, 3)? + 1).min(self.sticks);
        self.sticks -= take;
        let reward = if self.sticks == 0 {
            -1.0
        } else {
            let opp = self.opponent_take();
            self.sticks -= opp;
            if self.sticks == 0 {
                1.0
            } else {
                0.0
            }
        };
        let (terminated, truncated) = self.clock.advance(self.sticks == 0, self.spec.max_steps);
        Ok(StepResult {
            observation: Observation::State(self.sticks),
            reward,
            terminated,
            truncated,
        })
    }
}
