//! Leave-one-out advantages and the clipped policy-gradient surrogate.

use crate::error::{Error, Result};

/// Default PPO clipping range.
pub const DEFAULT_CLIP_EPS: f64 = 0.2;

/// Rewards of the `m >= 2` rollouts sampled for one prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector(Vec<f64>);

impl RewardVector {
    pub fn new(rewards: Vec<f64>) -> Result<Self> {
        if rewards.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "leave-one-out baseline needs at least 2 rewards, got {}",
                rewards.len()
            )));
        }
        Ok(RewardVector(rewards))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Each reward minus the mean of the other `m - 1` rewards.
pub fn rloo_advantages(rewards: &RewardVector) -> Vec<f64> {
    let r = rewards.as_slice();
    let total: f64 = r.iter().sum();
    let others = (r.len() - 1) as f64;
    r.iter().map(|&ri| ri - (total - ri) / others).collect()
}

/// Sequence-level advantages broadcast to every token of their rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageBatch {
    pub advantages: Vec<f64>,
    pub token_lengths: Vec<usize>,
}

impl AdvantageBatch {
    /// Per-rollout token advantages: `token_lengths[i]` copies of `advantages[i]`.
    pub fn token_advantages(&self) -> Vec<Vec<f64>> {
        self.advantages
            .iter()
            .zip(&self.token_lengths)
            .map(|(&a, &n)| vec![a; n])
            .collect()
    }

    pub fn flat_token_advantages(&self) -> Vec<f64> {
        self.token_advantages().concat()
    }
}

pub fn broadcast_token_advantages(
    advantages: &[f64],
    token_lengths: &[usize],
) -> Result<AdvantageBatch> {
    if advantages.len() != token_lengths.len() {
        return Err(Error::InvalidInput(format!(
            "{} advantages but {} token lengths",
            advantages.len(),
            token_lengths.len()
        )));
    }
    if let Some(i) = token_lengths.iter().position(|&n| n == 0) {
        return Err(Error::InvalidInput(format!("rollout {i} has zero tokens")));
    }
    Ok(AdvantageBatch {
        advantages: advantages.to_vec(),
        token_lengths: token_lengths.to_vec(),
    })
}

pub fn density_ratio(p_new: f64, p_old: f64) -> Result<f64> {
    if p_old.is_nan() || p_old <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "old probability must be positive, got {p_old}"
        )));
    }
    if p_new.is_nan() || p_new < 0.0 {
        return Err(Error::InvalidInput(format!(
            "new probability must be non-negative, got {p_new}"
        )));
    }
    Ok(p_new / p_old)
}

/// `min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)`.
pub fn ppo_clipped_term(ratio: f64, advantage: f64, clip_eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
    (ratio * advantage).min(clipped * advantage)
}

/// Derivative of [`ppo_clipped_term`] with respect to the ratio. Zero when the
/// clipped branch is strictly smaller, since the clipped ratio is then constant.
pub fn ppo_clipped_term_slope(ratio: f64, advantage: f64, clip_eps: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps);
    if ratio * advantage <= clipped * advantage {
        advantage
    } else {
        0.0
    }
}
