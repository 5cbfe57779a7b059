//! Cart-pole balancing with the standard benchmark dynamics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, StepOutcome};
use crate::error::{Error, Result};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const LENGTH: f64 = 0.5; // half the pole's length
const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
const X_THRESHOLD: f64 = 2.4;
const STEP_CAP: usize = 200;

/// State: cart position (m), cart velocity (m/s), pole angle (rad),
/// pole angular velocity (rad/s). Actions: 0 pushes left, 1 pushes right.
#[derive(Debug, Clone)]
pub struct CartPole {
    state: [f64; 4],
    step_index: usize,
    done: bool,
}

impl CartPole {
    pub fn new() -> Self {
        Self { state: [0.0; 4], step_index: 0, done: true }
    }

    /// Set the state directly; used by the dynamics tests.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.done = false;
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for CartPole {
    fn obs_dim(&self) -> usize {
        4
    }

    fn num_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in self.state.iter_mut() {
            *v = rng.random_range(-0.05..0.05);
        }
        self.step_index = 0;
        self.done = false;
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::State("cartpole episode is over".into()));
        }
        if action > 1 {
            return Err(Error::Shape(format!("cartpole action {action} out of range")));
        }
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let cos_t = theta.cos();
        let sin_t = theta.sin();

        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_t - cos_t * temp)
            / (LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS;

        // explicit Euler, position before velocity
        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
        self.step_index += 1;

        let fell = self.state[0].abs() > X_THRESHOLD || self.state[2].abs() > THETA_THRESHOLD;
        self.done = fell || self.step_index >= STEP_CAP;
        Ok(StepOutcome {
            observation: self.state.to_vec(),
            reward: 1.0,
            terminal: self.done,
        })
    }

    fn step_index(&self) -> usize {
        self.step_index
    }
}
