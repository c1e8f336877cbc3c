//! Synthetic policy-gradient training over response archetypes.
//!
//! The "model" is a softmax policy over a handful of archetypes, each a
//! distribution over (correct, reflection count, length). Every step samples
//! a group of `m` rollouts, scores them, turns rewards into leave-one-out
//! advantages and ascends the clipped surrogate. The whole loop is driven by
//! a seeded ChaCha stream, so a config and seed fix the trace bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::advantage::{
    ppo_clipped_term, ppo_clipped_term_slope, rloo_advantages, RewardVector, DEFAULT_CLIP_EPS,
};
use crate::complexity::PenaltyConfig;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::reward::{
    correct_group_stats, score_against, score_measurements, GroupStats, Measurement,
};

/// A synthetic response style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Archetype {
    pub name: String,
    pub p_correct: f64,
    pub len_mean: f64,
    pub len_std: f64,
    pub rtc_mean: f64,
    pub rtc_std: f64,
}

impl Archetype {
    pub fn new(name: &str, p_correct: f64, len: (f64, f64), rtc: (f64, f64)) -> Self {
        Archetype {
            name: name.to_string(),
            p_correct,
            len_mean: len.0,
            len_std: len.1,
            rtc_mean: rtc.0,
            rtc_std: rtc.1,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(format!("archetype {:?}: {what}", self.name)));
        if !(0.0..=1.0).contains(&self.p_correct) {
            return bad("p_correct must lie in [0, 1]");
        }
        if !(self.len_mean > 0.0 && self.len_mean.is_finite()) {
            return bad("len_mean must be positive");
        }
        if !(self.rtc_mean >= 0.0 && self.rtc_mean.is_finite()) {
            return bad("rtc_mean must be non-negative");
        }
        if !(self.len_std >= 0.0
            && self.len_std.is_finite()
            && self.rtc_std >= 0.0
            && self.rtc_std.is_finite())
        {
            return bad("standard deviations must be non-negative");
        }
        Ok(())
    }

    /// Draws correctness, then length, then reflection count.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Measurement {
        let correct = rng.random::<f64>() < self.p_correct;
        let z_len: f64 = rng.sample(StandardNormal);
        let z_rtc: f64 = rng.sample(StandardNormal);
        let len = (self.len_mean + self.len_std * z_len).round().max(1.0) as u64;
        let rtc = (self.rtc_mean + self.rtc_std * z_rtc).round().max(0.0) as u64;
        Measurement { rtc, len, correct }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    #[default]
    Arlcp,
    AccuracyOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub archetypes: Vec<Archetype>,
    /// Rollouts per step.
    pub m: usize,
    pub steps: usize,
    /// Taken from the toolkit-level `[penalty]` table when loaded from a file.
    #[serde(skip)]
    pub penalty: PenaltyConfig,
    pub reward_mode: RewardMode,
    pub clip_eps: f64,
    pub epochs_per_batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Starting logits; uniform when absent.
    pub initial_logits: Option<Vec<f64>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::benchmark()
    }
}

impl SimConfig {
    /// Three archetypes: concise-correct, verbose-reflective-correct and
    /// mostly-incorrect, 16 rollouts per step for 2000 steps.
    pub fn benchmark() -> Self {
        SimConfig {
            archetypes: vec![
                Archetype::new("concise-correct", 0.9, (300.0, 50.0), (10.0, 5.0)),
                Archetype::new(
                    "verbose-reflective-correct",
                    0.9,
                    (2000.0, 300.0),
                    (100.0, 20.0),
                ),
                Archetype::new("incorrect", 0.1, (1500.0, 300.0), (80.0, 20.0)),
            ],
            m: 16,
            steps: 2000,
            penalty: PenaltyConfig::default(),
            reward_mode: RewardMode::Arlcp,
            clip_eps: DEFAULT_CLIP_EPS,
            epochs_per_batch: 1,
            learning_rate: 0.05,
            seed: 0,
            initial_logits: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.archetypes.len() < 2 {
            return Err(Error::Config("at least two archetypes are required".into()));
        }
        for a in &self.archetypes {
            a.validate()?;
        }
        if self.m < 2 {
            return Err(Error::Config(format!(
                "m must be at least 2, got {}",
                self.m
            )));
        }
        self.penalty.validate()?;
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return Err(Error::Config(format!(
                "clip_eps {} not in (0, 1)",
                self.clip_eps
            )));
        }
        if self.epochs_per_batch == 0 {
            return Err(Error::Config("epochs_per_batch must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if let Some(logits) = &self.initial_logits {
            if logits.len() != self.archetypes.len() {
                return Err(Error::Config(format!(
                    "{} initial logits for {} archetypes",
                    logits.len(),
                    self.archetypes.len()
                )));
            }
            if logits.iter().any(|l| !l.is_finite()) {
                return Err(Error::Config("initial logits must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn initial_policy(&self) -> SimPolicy {
        SimPolicy {
            logits: self
                .initial_logits
                .clone()
                .unwrap_or_else(|| vec![0.0; self.archetypes.len()]),
            learning_rate: self.learning_rate,
            rng_seed: self.seed,
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Categorical policy over archetypes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPolicy {
    pub logits: Vec<f64>,
    pub learning_rate: f64,
    pub rng_seed: u64,
}

impl SimPolicy {
    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimRollout {
    pub archetype: usize,
    pub measurement: Measurement,
}

fn draw_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding slack above the cumulative sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

pub fn sample_group<R: Rng + ?Sized>(
    policy: &SimPolicy,
    cfg: &SimConfig,
    rng: &mut R,
) -> Vec<SimRollout> {
    let probs = policy.probabilities();
    (0..cfg.m)
        .map(|_| {
            let archetype = draw_index(&probs, rng);
            SimRollout {
                archetype,
                measurement: cfg.archetypes[archetype].sample(rng),
            }
        })
        .collect()
}

pub fn group_rewards(group: &[SimRollout], cfg: &SimConfig) -> Result<Vec<f64>> {
    match cfg.reward_mode {
        RewardMode::AccuracyOnly => Ok(group
            .iter()
            .map(|r| if r.measurement.correct { 1.0 } else { 0.0 })
            .collect()),
        RewardMode::Arlcp => {
            let measurements: Vec<_> = group.iter().map(|r| r.measurement).collect();
            let (scores, _) = score_measurements(&measurements, &cfg.penalty)?;
            Ok(scores.into_iter().map(|s| s.reward).collect())
        }
    }
}

/// Clipped surrogate `sum_i min(rho_i A_i, clip(rho_i) A_i)` at `logits`,
/// where `rho_i = pi(a_i) / pi_old(a_i)`.
pub fn surrogate(
    logits: &[f64],
    old_probs: &[f64],
    actions: &[usize],
    advantages: &[f64],
    clip_eps: f64,
) -> f64 {
    let probs = softmax(logits);
    actions
        .iter()
        .zip(advantages)
        .map(|(&a, &adv)| ppo_clipped_term(probs[a] / old_probs[a], adv, clip_eps))
        .sum()
}

/// Analytic gradient of [`surrogate`] with respect to the logits, using
/// `d rho / d logit_k = rho * (1[k = a] - pi_k)`.
pub fn surrogate_gradient(
    logits: &[f64],
    old_probs: &[f64],
    actions: &[usize],
    advantages: &[f64],
    clip_eps: f64,
) -> Vec<f64> {
    let probs = softmax(logits);
    let mut grad = vec![0.0; logits.len()];
    for (&a, &adv) in actions.iter().zip(advantages) {
        let ratio = probs[a] / old_probs[a];
        let weight = ppo_clipped_term_slope(ratio, adv, clip_eps) * ratio;
        if weight == 0.0 {
            continue;
        }
        for (k, g) in grad.iter_mut().enumerate() {
            let indicator = if k == a { 1.0 } else { 0.0 };
            *g += weight * (indicator - probs[k]);
        }
    }
    grad
}

fn update_with_rewards(
    policy: &SimPolicy,
    group: &[SimRollout],
    rewards: &[f64],
    cfg: &SimConfig,
) -> Result<SimPolicy> {
    let advantages = rloo_advantages(&RewardVector::new(rewards.to_vec())?);
    let actions: Vec<usize> = group.iter().map(|r| r.archetype).collect();
    let old_probs = policy.probabilities();
    let mut logits = policy.logits.clone();
    for _ in 0..cfg.epochs_per_batch {
        let grad = surrogate_gradient(&logits, &old_probs, &actions, &advantages, cfg.clip_eps);
        for (l, g) in logits.iter_mut().zip(grad) {
            *l += policy.learning_rate * g;
        }
    }
    Ok(SimPolicy {
        logits,
        ..policy.clone()
    })
}

/// One update: rewards per `cfg.reward_mode`, leave-one-out advantages, then
/// `epochs_per_batch` ascent steps on the clipped surrogate against the
/// pre-update policy.
pub fn policy_gradient_step(
    policy: &SimPolicy,
    group: &[SimRollout],
    cfg: &SimConfig,
) -> Result<SimPolicy> {
    let rewards = group_rewards(group, cfg)?;
    update_with_rewards(policy, group, &rewards, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    /// Policy after this step's update.
    pub probabilities: Vec<f64>,
    pub mean_reward: f64,
    pub mean_rtc: f64,
    pub mean_len: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub trace: Vec<TraceRow>,
    pub initial_policy: SimPolicy,
    pub final_policy: SimPolicy,
}

pub fn run_training(cfg: &SimConfig) -> Result<TrainingRun> {
    cfg.validate()?;
    let initial_policy = cfg.initial_policy();
    let mut rng = initial_policy.rng();
    let mut policy = initial_policy.clone();
    let mut trace = Vec::with_capacity(cfg.steps);
    let m = cfg.m as f64;
    for step in 1..=cfg.steps {
        let group = sample_group(&policy, cfg, &mut rng);
        let rewards = group_rewards(&group, cfg)?;
        policy = update_with_rewards(&policy, &group, &rewards, cfg)?;
        trace.push(TraceRow {
            step,
            probabilities: policy.probabilities(),
            mean_reward: rewards.iter().sum::<f64>() / m,
            mean_rtc: group.iter().map(|r| r.measurement.rtc as f64).sum::<f64>() / m,
            mean_len: group.iter().map(|r| r.measurement.len as f64).sum::<f64>() / m,
            accuracy: group.iter().filter(|r| r.measurement.correct).count() as f64 / m,
        });
    }
    Ok(TrainingRun {
        trace,
        initial_policy,
        final_policy: policy,
    })
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

const MC_CHUNK: usize = 4096;

// Each chunk draws from its own ChaCha stream, so the samples, and the order
// in which chunk sums are combined, do not depend on the thread count.
fn chunked_samples<T, F>(n: usize, seed: u64, mode: ExecMode, f: F) -> Vec<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
{
    let chunks = n.div_ceil(MC_CHUNK);
    exec::map_range(mode, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = MC_CHUNK.min(n - c * MC_CHUNK);
        (0..len).map(|_| f(&mut rng)).collect()
    })
}

/// Expected composite reward of rollouts drawn from `arch`, each scored against
/// the fixed `reference` statistics.
pub fn brute_force_expected_reward(
    arch: &Archetype,
    reference: &GroupStats,
    cfg: &PenaltyConfig,
    n_mc: usize,
    seed: u64,
    mode: ExecMode,
) -> OracleEstimate {
    let sums = exec::map(
        mode,
        chunked_samples(n_mc, seed, mode, |rng| {
            score_against(arch.sample(rng), reference, cfg).reward
        }),
        |chunk| {
            let s: f64 = chunk.iter().sum();
            let s2: f64 = chunk.iter().map(|r| r * r).sum();
            (s, s2)
        },
    );
    let (s, s2) = sums
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = n_mc as f64;
    let mean = s / n;
    let var = if n_mc > 1 {
        ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    OracleEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n: n_mc,
    }
}

/// Correct-member statistics of `n` rollouts drawn from the archetype mixture
/// weighted by `probs`.
pub fn reference_stats(
    archetypes: &[Archetype],
    probs: &[f64],
    n: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<GroupStats> {
    let samples: Vec<Measurement> = chunked_samples(n, seed, mode, |rng| {
        let a = draw_index(probs, rng);
        archetypes[a].sample(rng)
    })
    .concat();
    correct_group_stats(&samples)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRanking {
    pub reference: GroupStats,
    pub estimates: Vec<OracleEstimate>,
}

impl OracleRanking {
    pub fn argmax(&self) -> usize {
        argmax(self.estimates.iter().map(|e| e.mean))
    }

    /// Gap between the best and runner-up means, in units of the standard
    /// error of their difference.
    pub fn separation(&self) -> f64 {
        let best = self.argmax();
        let e = &self.estimates;
        (0..e.len())
            .filter(|&i| i != best)
            .map(|i| {
                let se = (e[best].std_error.powi(2) + e[i].std_error.powi(2)).sqrt();
                let gap = e[best].mean - e[i].mean;
                if se == 0.0 {
                    if gap > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    gap / se
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Oracle seed derived from a training seed, so the oracle's draws do not
/// replay the trainer's random stream.
pub fn oracle_seed(training_seed: u64) -> u64 {
    training_seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Ranks every archetype by expected reward under `cfg.reward_mode`. The
/// reference statistics are those of the initial policy's mixture, i.e. the
/// group the first training steps score against.
pub fn oracle_ranking(
    cfg: &SimConfig,
    n_mc: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<OracleRanking> {
    cfg.validate()?;
    let probs = cfg.initial_policy().probabilities();
    let reference = reference_stats(&cfg.archetypes, &probs, n_mc, seed, mode)?;
    let estimates = cfg
        .archetypes
        .iter()
        .enumerate()
        .map(|(i, arch)| match cfg.reward_mode {
            RewardMode::Arlcp => brute_force_expected_reward(
                arch,
                &reference,
                &cfg.penalty,
                n_mc,
                seed.wrapping_add(1 + i as u64),
                mode,
            ),
            RewardMode::AccuracyOnly => {
                let p = arch.p_correct;
                OracleEstimate {
                    mean: p,
                    std_error: 0.0,
                    n: 0,
                }
            }
        })
        .collect();
    Ok(OracleRanking {
        reference,
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub archetypes: Vec<String>,
    pub steps: usize,
    pub reward_mode: RewardMode,
    pub final_probabilities: Vec<f64>,
    pub oracle: OracleRanking,
    pub oracle_argmax: usize,
    pub policy_argmax: usize,
    /// Policy puts more than [`CONVERGENCE_PROBABILITY`] on the oracle's best archetype.
    pub converged: bool,
}

pub const CONVERGENCE_PROBABILITY: f64 = 0.9;

pub fn summarize(cfg: &SimConfig, run: &TrainingRun, oracle: OracleRanking) -> TrainingSummary {
    let final_probabilities = run.final_policy.probabilities();
    let oracle_argmax = oracle.argmax();
    let policy_argmax = argmax(final_probabilities.iter().copied());
    let converged = policy_argmax == oracle_argmax
        && final_probabilities[policy_argmax] > CONVERGENCE_PROBABILITY;
    TrainingSummary {
        archetypes: cfg.archetypes.iter().map(|a| a.name.clone()).collect(),
        steps: run.trace.len(),
        reward_mode: cfg.reward_mode,
        final_probabilities,
        oracle,
        oracle_argmax,
        policy_argmax,
        converged,
    }
}
