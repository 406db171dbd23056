use super::{
    discrete_action, Action, EnvError, EnvId, EnvSpec, Environment, EpisodeClock, Observation,
    StepResult,
};

pub const MAZE_GOAL: usize = 5;
pub const MAZE_STEP_PENALTY: f64 = 0.011;

const SIDE: usize = 3;
/// Blocked edges between adjacent cells (unordered pairs).
const WALLS: [(usize, usize); 2] = [(1, 2), (3, 6)];

fn blocked(a: usize, b: usize) -> bool {
    WALLS
        .iter()
        .any(|&(x, y)| (x == a && y == b) || (x == b && y == a))
}

/// Deterministic 3x3 maze. Cells are row-major 0..9, start 0, goal 5.
/// Actions: 0 up, 1 down, 2 right, 3 left. Every step costs 0.011, reaching
/// the goal pays +1. Bumping into a wall or the border is a costly no-op.
pub struct Maze {
    spec: EnvSpec,
    cell: usize,
    clock: EpisodeClock,
}

impl Maze {
    pub fn new(_seed: u64) -> Self {
        Self {
            spec: EnvId::Maze.spec(),
            cell: 0,
            clock: EpisodeClock::default(),
        }
    }

    /// Destination of `action` from `cell`, honouring walls and borders.
    pub fn next_cell(cell: usize, action: usize) -> usize {
        let (row, col) = (cell / SIDE, cell % SIDE);
        let target = match action {
            0 if row > 0 => Some(cell - SIDE),
            1 if row + 1 < SIDE => Some(cell + SIDE),
            2 if col + 1 < SIDE => Some(cell + 1),
            3 if col > 0 => Some(cell - 1),
            _ => None,
        };
        match target {
            Some(t) if !blocked(cell, t) => t,
            _ => cell,
        }
    }
}

impl Environment for Maze {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Observation {
        self.cell = 0;
        self.clock.reset();
        Observation::State(0)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.clock.check_can_step()?;
        let a = discrete_action(action, 4)?;
        self.cell = Self::next_cell(self.cell, a);
        let at_goal = self.cell == MAZE_GOAL;
        let reward = if at_goal {
            1.0 - MAZE_STEP_PENALTY
        } else {
            -MAZE_STEP_PENALTY
        };
        let (terminated, truncated) = self.clock.advance(at_goal, self.spec.max_steps);
        Ok(StepResult {
            observation: Observation::State(self.cell),
            reward,
            terminated,
            truncated,
        })
    }
}
