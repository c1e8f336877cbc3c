//! Adaptive reflection and length coordinated penalty (ARLCP) reward shaping
//! for reasoning-model rollouts.
//!
//! The pipeline for a group of rollouts sampled from one prompt:
//!
//! 1. [`trace`] splits each response at `</think>`, extracts the answer and
//!    counts reflection triggers ("wait", "hmm", ...) and tokens.
//! 2. [`complexity`] buckets each rollout by its reflection count and splits
//!    the overall penalty budget between reflection and length.
//! 3. [`reward`] scores rollouts against the correct members of their group.
//! 4. [`advantage`] turns group rewards into leave-one-out advantages and
//!    evaluates the clipped surrogate.
//!
//! [`sim`] closes the loop on a synthetic policy over response archetypes,
//! and [`metrics`], [`analysis`] and [`report`] back the command-line tool.

pub mod advantage;
pub mod analysis;
pub mod complexity;
pub mod config;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod report;
pub mod reward;
pub mod sim;
pub mod trace;

pub use advantage::{
    broadcast_token_advantages, density_ratio, ppo_clipped_term, rloo_advantages, AdvantageBatch,
    RewardVector,
};
pub use complexity::{allocate_coefficients, classify_complexity, ComplexityBucket, PenaltyConfig};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use metrics::{compute_eval_metrics, EvalReport};
pub use reward::{
    composite_reward, correct_group_stats, length_penalty, reflection_penalty, score_group,
    GroupStats, Measurement, ScoredRollout,
};
pub use sim::{run_training, Archetype, RewardMode, SimConfig, SimPolicy};
pub use trace::{
    count_reflection_tokens, extract_answer, parse_trace_file, response_length, split_thinking,
    Rollout, SegmentedRollout, TriggerLexicon,
};
