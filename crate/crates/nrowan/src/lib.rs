//! NROWAN-DQN laboratory: noisy-network Q-learning with noise reduction and
//! online weight adjustment, plain-DQN and NoisyNet-DQN baselines, native
//! classic-control environments, and a reproducible experiment harness.

pub mod agent;
pub mod envs;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nn;
pub mod noisy;
pub mod replay;

pub use error::{Error, Result};
