//! Group-relative reflection and length penalties and the composite reward.
//!
//! Every rollout in a group is scored against statistics of the *correct*
//! rollouts of that same group. A correct rollout earns
//! `1 - alpha1 * f(rtc) - alpha2 * f(len)` where `f` is the sigmoid of the
//! z-score against those statistics; an incorrect rollout earns 0.

use serde::Serialize;

use crate::complexity::{
    allocate_coefficients, classify_complexity, ComplexityBucket, PenaltyConfig,
};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::trace::{
    count_reflection_tokens, extract_answer, normalize_answer, response_length, split_thinking,
    Rollout, TriggerLexicon,
};

/// The three quantities the reward depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    pub rtc: u64,
    pub len: u64,
    pub correct: bool,
}

impl Measurement {
    pub fn new(rtc: u64, len: u64, correct: bool) -> Self {
        Measurement { rtc, len, correct }
    }
}

/// Mean and population standard deviation of reflection counts and lengths
/// over the correct members of a group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupStats {
    pub mean_rtc_correct: f64,
    pub std_rtc_correct: f64,
    pub mean_len_correct: f64,
    pub std_len_correct: f64,
    pub n_correct: usize,
    pub n_total: usize,
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (0.0, 0.0),
        1 => (values[0], 0.0),
        n => {
            let mean = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            (mean, var.sqrt())
        }
    }
}

pub fn correct_group_stats(group: &[Measurement]) -> Result<GroupStats> {
    if group.is_empty() {
        return Err(Error::InvalidInput(
            "cannot compute statistics of an empty group".into(),
        ));
    }
    let (rtcs, lens): (Vec<f64>, Vec<f64>) = group
        .iter()
        .filter(|m| m.correct)
        .map(|m| (m.rtc as f64, m.len as f64))
        .unzip();
    let (mean_rtc_correct, std_rtc_correct) = mean_and_std(&rtcs);
    let (mean_len_correct, std_len_correct) = mean_and_std(&lens);
    Ok(GroupStats {
        mean_rtc_correct,
        std_rtc_correct,
        mean_len_correct,
        std_len_correct,
        n_correct: rtcs.len(),
        n_total: group.len(),
    })
}

/// Logistic function, kept strictly inside (0, 1) even where `exp` saturates.
pub fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn standardized_penalty(
    value: f64,
    mean: f64,
    std: f64,
    n_correct: usize,
    cfg: &PenaltyConfig,
) -> f64 {
    let z = if n_correct >= 2 && std > cfg.std_epsilon {
        (value - mean) / std
    } else {
        0.0
    };
    sigmoid(z)
}

pub fn reflection_penalty(rtc: u64, stats: &GroupStats, cfg: &PenaltyConfig) -> f64 {
    standardized_penalty(
        rtc as f64,
        stats.mean_rtc_correct,
        stats.std_rtc_correct,
        stats.n_correct,
        cfg,
    )
}

pub fn length_penalty(len: u64, stats: &GroupStats, cfg: &PenaltyConfig) -> f64 {
    standardized_penalty(
        len as f64,
        stats.mean_len_correct,
        stats.std_len_correct,
        stats.n_correct,
        cfg,
    )
}

pub fn composite_reward(correct: bool, f_rtc: f64, f_len: f64, alpha1: f64, alpha2: f64) -> f64 {
    if correct {
        1.0 - alpha1 * f_rtc - alpha2 * f_len
    } else {
        0.0
    }
}

/// Reward breakdown for one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub rtc: u64,
    pub len: u64,
    pub bucket: ComplexityBucket,
    pub alpha1: f64,
    pub alpha2: f64,
    pub correct: bool,
    pub reflection_penalty: f64,
    pub length_penalty: f64,
    pub reward: f64,
}

pub fn score_against(m: Measurement, stats: &GroupStats, cfg: &PenaltyConfig) -> Score {
    let bucket = classify_complexity(m.rtc, cfg);
    let (alpha1, alpha2) = allocate_coefficients(bucket, cfg);
    let f_rtc = reflection_penalty(m.rtc, stats, cfg);
    let f_len = length_penalty(m.len, stats, cfg);
    Score {
        rtc: m.rtc,
        len: m.len,
        bucket,
        alpha1,
        alpha2,
        correct: m.correct,
        reflection_penalty: f_rtc,
        length_penalty: f_len,
        reward: composite_reward(m.correct, f_rtc, f_len, alpha1, alpha2),
    }
}

/// Scores a group of measurements against its own correct-member statistics.
pub fn score_measurements(
    group: &[Measurement],
    cfg: &PenaltyConfig,
) -> Result<(Vec<Score>, GroupStats)> {
    let stats = correct_group_stats(group)?;
    let scores = group
        .iter()
        .map(|&m| score_against(m, &stats, cfg))
        .collect();
    Ok((scores, stats))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRollout {
    pub prompt_id: String,
    pub rollout_id: String,
    pub answer: Option<String>,
    #[serde(flatten)]
    pub score: Score,
}

/// Reduces a rollout to its reward inputs: reflection count over the full
/// text, response length, and answer correctness.
pub fn measure_rollout(
    rollout: &Rollout,
    lexicon: &TriggerLexicon,
) -> Result<(Measurement, Option<String>)> {
    let answer = extract_answer(&split_thinking(rollout));
    let correct = answer
        .as_deref()
        .is_some_and(|a| a == normalize_answer(&rollout.ground_truth));
    let rtc = count_reflection_tokens(&rollout.text, lexicon);
    let len = response_length(rollout)?;
    Ok((Measurement { rtc, len, correct }, answer))
}

pub fn score_group(
    rollouts: &[Rollout],
    lexicon: &TriggerLexicon,
    cfg: &PenaltyConfig,
) -> Result<(Vec<ScoredRollout>, GroupStats)> {
    let first = rollouts
        .first()
        .ok_or_else(|| Error::InvalidGroup("group has no rollouts".into()))?;
    if let Some(other) = rollouts.iter().find(|r| r.prompt_id != first.prompt_id) {
        return Err(Error::InvalidGroup(format!(
            "mixed prompt ids {:?} and {:?}",
            first.prompt_id, other.prompt_id
        )));
    }
    let (measurements, answers): (Vec<_>, Vec<_>) = rollouts
        .iter()
        .map(|r| measure_rollout(r, lexicon))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let (scores, stats) = score_measurements(&measurements, cfg)?;
    let scored = rollouts
        .iter()
        .zip(answers)
        .zip(scores)
        .map(|((r, answer), score)| ScoredRollout {
            prompt_id: r.prompt_id.clone(),
            rollout_id: r.rollout_id.clone(),
            answer,
            score,
        })
        .collect();
    Ok((scored, stats))
}

/// Splits a corpus into prompt groups, ordered by first appearance.
pub fn group_by_prompt(rollouts: &[Rollout]) -> Vec<Vec<&Rollout>> {
    let mut index = std::collections::HashMap::new();
    let mut groups: Vec<Vec<&Rollout>> = Vec::new();
    for r in rollouts {
        let slot = *index.entry(r.prompt_id.as_str()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(r);
    }
    groups
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGroup {
    pub prompt_id: String,
    pub rollouts: Vec<Rollout>,
    pub scored: Vec<ScoredRollout>,
    pub stats: GroupStats,
}

impl ScoredGroup {
    pub fn mean_reward(&self) -> f64 {
        self.scored.iter().map(|s| s.score.reward).sum::<f64>() / self.scored.len() as f64
    }
}

/// Scores every prompt group of a corpus. Groups are independent, so
/// `ExecMode::Parallel` spreads them across threads; output order is the
/// group order of [`group_by_prompt`] either way.
pub fn score_corpus(
    rollouts: &[Rollout],
    lexicon: &TriggerLexicon,
    cfg: &PenaltyConfig,
    mode: ExecMode,
) -> Result<Vec<ScoredGroup>> {
    let groups: Vec<Vec<Rollout>> = group_by_prompt(rollouts)
        .into_iter()
        .map(|g| g.into_iter().cloned().collect())
        .collect();
    exec::map(mode, groups, |group| {
        let (scored, stats) = score_group(&group, lexicon, cfg)?;
        Ok(ScoredGroup {
            prompt_id: group[0].prompt_id.clone(),
            rollouts: group,
            scored,
            stats,
        })
    })
    .into_iter()
    .collect()
}
