//! Mountain-car: an underpowered car must rock back and forth to escape a
//! valley.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, StepOutcome};
use crate::error::{Error, Result};

const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;
const MAX_SPEED: f64 = 0.07;
const GOAL_POSITION: f64 = 0.5;
const FORCE: f64 = 0.001;
const GRAVITY: f64 = 0.0025;
const STEP_CAP: usize = 200;

/// State: position, velocity. Actions: 0 pushes left, 1 coasts, 2 pushes
/// right.
#[derive(Debug, Clone)]
pub struct MountainCar {
    position: f64,
    velocity: f64,
    step_index: usize,
    step_cap: usize,
    done: bool,
}

impl MountainCar {
    pub fn new() -> Self {
        Self::with_step_cap(STEP_CAP)
    }

    /// The goal is reachable by undirected exploration only on horizons far
    /// beyond the standard cap; training setups can lengthen it here.
    pub fn with_step_cap(step_cap: usize) -> Self {
        Self { position: 0.0, velocity: 0.0, step_index: 0, step_cap, done: true }
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) {
        self.position = position;
        self.velocity = velocity;
        self.done = false;
    }

    pub fn state(&self) -> (f64, f64) {
        (self.position, self.velocity)
    }
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for MountainCar {
    fn obs_dim(&self) -> usize {
        2
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.position = rng.random_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.step_index = 0;
        self.done = false;
        vec![self.position, self.velocity]
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::State("mountain-car episode is over".into()));
        }
        if action > 2 {
            return Err(Error::Shape(format!("mountain-car action {action} out of range")));
        }
        self.velocity += (action as f64 - 1.0) * FORCE - GRAVITY * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position += self.velocity;
        self.position = self.position.clamp(MIN_POSITION, MAX_POSITION);
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0; // inelastic left wall
        }
        self.step_index += 1;

        self.done = self.position >= GOAL_POSITION || self.step_index >= self.step_cap;
        Ok(StepOutcome {
            observation: vec![self.position, self.velocity],
            reward: -1.0,
            terminal: self.done,
        })
    }

    fn step_index(&self) -> usize {
        self.step_index
    }
}
