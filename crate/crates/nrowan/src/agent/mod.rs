//! Agents: network construction, action selection, TD learning with the
//! weighted noise-reduction term, and the training loop.

mod network;
mod schedule;
mod trainer;

pub use network::{AdamSet, EffectiveParams, ForwardTrace, NetGrads, NoisyLayerGrads, QNetwork};
pub use schedule::{k_frame, k_reward, KSchedule};
pub use trainer::{
    argmax, augmented_grads, eval_mode, evaluate, run_episode, select_action, step_on_batch,
    td_targets, train, train_step, ActionMode, AgentConfig, Algorithm, EpisodeRow, EvalStats,
    FrameRow, RunMetrics, TrainOutcome,
};
