//! Native classic-control environments behind one episodic interface.
//!
//! All environments are deterministic state machines: a fixed reset seed and
//! a fixed action sequence reproduce a trajectory bitwise.

mod acrobot;
mod cartpole;
mod mountain_car;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use mountain_car::MountainCar;

use crate::error::Result;

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

/// Episodic environment with seeded resets and deterministic stepping.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn num_actions(&self) -> usize;

    /// Start a new episode; the initial observation is a deterministic
    /// function of the seed.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    /// Advance one step. Stepping a finished episode is a state error.
    fn step(&mut self, action: usize) -> Result<StepOutcome>;

    /// Steps taken in the current episode.
    fn step_index(&self) -> usize;
}

/// The supported environments, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EnvKind {
    Cartpole,
    Mountaincar,
    Acrobot,
}

impl EnvKind {
    pub const ALL: [EnvKind; 3] = [EnvKind::Cartpole, EnvKind::Mountaincar, EnvKind::Acrobot];

    pub fn name(&self) -> &'static str {
        match self {
            EnvKind::Cartpole => "cartpole",
            EnvKind::Mountaincar => "mountaincar",
            EnvKind::Acrobot => "acrobot",
        }
    }

    pub fn build(&self) -> Box<dyn Environment> {
        match self {
            EnvKind::Cartpole => Box::new(CartPole::new()),
            EnvKind::Mountaincar => Box::new(MountainCar::new()),
            EnvKind::Acrobot => Box::new(Acrobot::new()),
        }
    }

    /// Reward anchors (inf R, sup R) for the online weight schedule:
    /// inf R near what a random policy collects, sup R near the best this
    /// setup reaches.
    pub fn reward_anchors(&self) -> (f64, f64) {
        match self {
            EnvKind::Cartpole => (0.0, 200.0),
            EnvKind::Mountaincar => (-200.0, -110.0),
            EnvKind::Acrobot => (-500.0, -80.0),
        }
    }

    /// Per-environment learning rate defaults.
    pub fn default_learning_rate(&self) -> f64 {
        match self {
            EnvKind::Cartpole => 0.0001,
            EnvKind::Mountaincar => 0.001,
            EnvKind::Acrobot => 0.001,
        }
    }

    /// Hard bounds on an episode return, used for sanity checks.
    pub fn return_bounds(&self) -> (f64, f64) {
        match self {
            EnvKind::Cartpole => (1.0, 200.0),
            EnvKind::Mountaincar => (-200.0, -1.0),
            EnvKind::Acrobot => (-500.0, -1.0),
        }
    }
}

impl std::str::FromStr for EnvKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartpole" => Ok(EnvKind::Cartpole),
            "mountaincar" => Ok(EnvKind::Mountaincar),
            "acrobot" => Ok(EnvKind::Acrobot),
            other => Err(crate::error::Error::Config(format!(
                "unknown environment '{other}'"
            ))),
        }
    }
}
