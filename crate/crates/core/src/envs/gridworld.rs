//! Open grid navigation with eight compass moves.
//!
//! Action `a` moves along the direction at angle `2πa/8`, so actions that are
//! neighbours on the ring are also neighbouring headings: E, NE, N, NW, W,
//! SW, S, SE. The y axis points north.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Environment;
use crate::error::{Error, Result};

/// Unit moves `(dx, dy)` indexed by action.
pub const COMPASS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// How positions are presented to the agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One-hot over cells, index `y · width + x`.
    OneHot,
    /// `(x, y)` scaled into `[0, 1]`.
    Coordinates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    pub walls: Vec<(usize, usize)>,
    pub step_penalty: f64,
    pub goal_reward: f64,
    pub max_steps: usize,
    pub encoding: Encoding,
    /// Start each episode in a seeded random free cell instead of `start`.
    pub random_start: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: 9,
            height: 9,
            start: (0, 0),
            goal: (8, 8),
            walls: Vec::new(),
            step_penalty: -0.01,
            goal_reward: 1.0,
            max_steps: 200,
            encoding: Encoding::OneHot,
            random_start: false,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("env: {msg}")));
        if self.width == 0 || self.height == 0 {
            return bad("grid must be at least 1x1".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if !(self.step_penalty.is_finite() && self.goal_reward.is_finite()) {
            return bad("rewards must be finite".into());
        }
        for (name, cell) in [("start", self.start), ("goal", self.goal)] {
            if !self.in_bounds(cell) {
                return bad(format!("{name} {cell:?} is outside the grid"));
            }
            if self.walls.contains(&cell) {
                return bad(format!("{name} {cell:?} is a wall"));
            }
        }
        if self.start == self.goal {
            return bad("start and goal coincide".into());
        }
        Ok(())
    }

    fn in_bounds(&self, (x, y): (usize, usize)) -> bool {
        x < self.width && y < self.height
    }

    pub fn observation_len(&self) -> usize {
        match self.encoding {
            Encoding::OneHot => self.width * self.height,
            Encoding::Coordinates => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// The episode ended on the step limit rather than at the goal.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    config: GridConfig,
    position: (usize, usize),
    steps: usize,
    done: bool,
}

impl GridWorld {
    pub fn new(config: GridConfig) -> Result<Self> {
        config.validate()?;
        let position = config.start;
        Ok(Self {
            config,
            position,
            steps: 0,
            done: false,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn position(&self) -> (usize, usize) {
        self.position
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Place the agent at `cell` without touching the step counter.
    pub fn teleport(&mut self, cell: (usize, usize)) -> Result<()> {
        if !self.config.in_bounds(cell) || self.config.walls.contains(&cell) {
            return Err(Error::InvalidArgument(format!("{cell:?} is not a free cell")));
        }
        self.position = cell;
        Ok(())
    }

    pub fn encode(&self, (x, y): (usize, usize)) -> Vec<f64> {
        let c = &self.config;
        match c.encoding {
            Encoding::OneHot => {
                let mut v = vec![0.0; c.width * c.height];
                v[y * c.width + x] = 1.0;
                v
            }
            Encoding::Coordinates => {
                let scale = |p: usize, size: usize| {
                    if size > 1 {
                        p as f64 / (size - 1) as f64
                    } else {
                        0.0
                    }
                };
                vec![scale(x, c.width), scale(y, c.height)]
            }
        }
    }

    fn free_cells(&self) -> Vec<(usize, usize)> {
        let c = &self.config;
        (0..c.height)
            .flat_map(|y| (0..c.width).map(move |x| (x, y)))
            .filter(|cell| *cell != c.goal && !c.walls.contains(cell))
            .collect()
    }
}

impl Environment for GridWorld {
    fn n_actions(&self) -> usize {
        COMPASS.len()
    }

    fn observation_len(&self) -> usize {
        self.config.observation_len()
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.position = if self.config.random_start {
            let cells = self.free_cells();
            cells[ChaCha8Rng::seed_from_u64(seed).random_range(0..cells.len())]
        } else {
            self.config.start
        };
        self.steps = 0;
        self.done = false;
        self.encode(self.position)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::State("step called on a finished episode".into()));
        }
        let (dx, dy) = *COMPASS
            .get(action)
            .ok_or_else(|| Error::InvalidArgument(format!("action {action} out of range")))?;
        let (x, y) = self.position;
        let target = (x as i64 + dx, y as i64 + dy);
        if target.0 >= 0 && target.1 >= 0 {
            let cell = (target.0 as usize, target.1 as usize);
            if self.config.in_bounds(cell) && !self.config.walls.contains(&cell) {
                self.position = cell;
            }
        }
        self.steps += 1;
        let at_goal = self.position == self.config.goal;
        let reward = if at_goal {
            self.config.goal_reward
        } else {
            self.config.step_penalty
        };
        self.done = at_goal || self.steps >= self.config.max_steps;
        Ok(StepOutcome {
            observation: self.encode(self.position),
            reward,
            done: self.done,
            truncated: self.done && !at_goal,
        })
    }
}
