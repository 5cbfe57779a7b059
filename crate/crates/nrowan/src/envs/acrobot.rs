//! Acrobot: a two-link pendulum actuated only at the middle joint must swing
//! its tip above a target height.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{Environment, StepOutcome};
use crate::error::{Error, Result};

const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_1: f64 = 0.5;
const LINK_COM_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
const DT: f64 = 0.2;
const MAX_VEL_1: f64 = 4.0 * PI;
const MAX_VEL_2: f64 = 9.0 * PI;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];
const STEP_CAP: usize = 500;

/// Internal state: (θ₁, θ₂, θ̇₁, θ̇₂), angles measured from the downward
/// vertical. The observation is (cos θ₁, sin θ₁, cos θ₂, sin θ₂, θ̇₁, θ̇₂).
/// Actions index the torque on the second joint: {−1, 0, +1}.
#[derive(Debug, Clone)]
pub struct Acrobot {
    state: [f64; 4],
    step_index: usize,
    done: bool,
}

/// Equations of motion for the torque-augmented state.
pub(crate) fn dynamics(s: [f64; 4], torque: f64) -> [f64; 4] {
    let [theta1, theta2, dtheta1, dtheta2] = s;
    let (m1, m2) = (LINK_MASS_1, LINK_MASS_2);
    let l1 = LINK_LENGTH_1;
    let (lc1, lc2) = (LINK_COM_1, LINK_COM_2);
    let (i1, i2) = (LINK_MOI, LINK_MOI);
    let g = GRAVITY;

    let d1 = m1 * lc1 * lc1
        + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos())
        + i1
        + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1
        - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin()
        - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

/// One classic fourth-order Runge-Kutta step of size `h`.
pub(crate) fn rk4_step(s: [f64; 4], torque: f64, h: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], c: f64| {
        [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2], a[3] + c * b[3]]
    };
    let k1 = dynamics(s, torque);
    let k2 = dynamics(add(s, k1, h / 2.0), torque);
    let k3 = dynamics(add(s, k2, h / 2.0), torque);
    let k4 = dynamics(add(s, k3, h), torque);
    let mut out = s;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

impl Acrobot {
    pub fn new() -> Self {
        Self { state: [0.0; 4], step_index: 0, done: true }
    }

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.done = false;
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    fn observe(&self) -> Vec<f64> {
        let [t1, t2, d1, d2] = self.state;
        vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), d1, d2]
    }

    fn tip_is_up(&self) -> bool {
        -self.state[0].cos() - (self.state[0] + self.state[1]).cos() > 1.0
    }
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Acrobot {
    fn obs_dim(&self) -> usize {
        6
    }

    fn num_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in self.state.iter_mut() {
            *v = rng.random_range(-0.1..0.1);
        }
        self.step_index = 0;
        self.done = false;
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::State("acrobot episode is over".into()));
        }
        if action > 2 {
            return Err(Error::Shape(format!("acrobot action {action} out of range")));
        }
        let next = rk4_step(self.state, TORQUES[action], DT);
        self.state = [
            wrap_angle(next[0]),
            wrap_angle(next[1]),
            next[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            next[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        ];
        self.step_index += 1;

        self.done = self.tip_is_up() || self.step_index >= STEP_CAP;
        Ok(StepOutcome {
            observation: self.observe(),
            reward: -1.0,
            terminal: self.done,
        })
    }

    fn step_index(&self) -> usize {
        self.step_index
    }
}
