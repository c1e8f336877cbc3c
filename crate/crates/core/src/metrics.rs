//! pass@1 accuracy, mean length and deltas against a baseline run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::reward::{group_by_prompt, measure_rollout};
use crate::trace::{Rollout, TriggerLexicon};

/// One sampled answer to an evaluation case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub correct: bool,
    pub len: u64,
}

/// Dataset name to cases, each case holding its `k` samples.
pub type EvalRuns = BTreeMap<String, Vec<Vec<Sample>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetrics {
    pub pass1_accuracy: f64,
    pub mean_length: f64,
    pub cases: usize,
    pub samples_per_case: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_dataset: BTreeMap<String, DatasetMetrics>,
    /// Mean accuracy change in percentage points; present only with a baseline.
    pub delta_acc: Option<f64>,
    /// Mean relative length change in percent; present only with a baseline.
    pub delta_length_pct: Option<f64>,
}

fn dataset_metrics(name: &str, cases: &[Vec<Sample>]) -> Result<DatasetMetrics> {
    let k = cases
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::Metric(format!("dataset {name:?} has no cases")))?;
    if k == 0 {
        return Err(Error::Metric(format!(
            "dataset {name:?} has a case without samples"
        )));
    }
    if let Some(bad) = cases.iter().find(|c| c.len() != k) {
        return Err(Error::Metric(format!(
            "dataset {name:?}: cases have {k} and {} samples",
            bad.len()
        )));
    }
    // Integer totals keep the result independent of case and sample order.
    let n_correct: u64 = cases.iter().flatten().filter(|s| s.correct).count() as u64;
    let total_len: u128 = cases.iter().flatten().map(|s| s.len as u128).sum();
    let n_samples = (cases.len() * k) as f64;
    Ok(DatasetMetrics {
        pass1_accuracy: n_correct as f64 / n_samples,
        mean_length: total_len as f64 / n_samples,
        cases: cases.len(),
        samples_per_case: k,
    })
}

pub fn compute_eval_metrics(runs: &EvalRuns, baseline: Option<&EvalReport>) -> Result<EvalReport> {
    let per_dataset = runs
        .iter()
        .map(|(name, cases)| Ok((name.clone(), dataset_metrics(name, cases)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;

    let (delta_acc, delta_length_pct) = match baseline {
        None => (None, None),
        Some(base) => {
            let mut acc = 0.0;
            let mut len = 0.0;
            for (name, run) in &per_dataset {
                let b = base.per_dataset.get(name).ok_or_else(|| {
                    Error::Metric(format!("dataset {name:?} missing from baseline"))
                })?;
                if b.mean_length <= 0.0 {
                    return Err(Error::Metric(format!(
                        "baseline mean length for {name:?} is not positive"
                    )));
                }
                acc += (run.pass1_accuracy - b.pass1_accuracy) * 100.0;
                len += (run.mean_length - b.mean_length) / b.mean_length * 100.0;
            }
            let n = per_dataset.len() as f64;
            if per_dataset.is_empty() {
                (None, None)
            } else {
                (Some(acc / n), Some(len / n))
            }
        }
    };
    Ok(EvalReport {
        per_dataset,
        delta_acc,
        delta_length_pct,
    })
}

/// Turns a corpus into evaluation runs: datasets from the `dataset` key,
/// cases from prompt groups, correctness from answer extraction.
pub fn runs_from_corpus(
    rollouts: &[Rollout],
    lexicon: &TriggerLexicon,
    mode: ExecMode,
) -> Result<EvalRuns> {
    let groups: Vec<Vec<Rollout>> = group_by_prompt(rollouts)
        .into_iter()
        .map(|g| g.into_iter().cloned().collect())
        .collect();
    let cases = exec::map(mode, groups, |group| {
        let samples = group
            .iter()
            .map(|r| {
                let (m, _) = measure_rollout(r, lexicon)?;
                Ok(Sample {
                    correct: m.correct,
                    len: m.len,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((group[0].dataset_name().to_string(), samples))
    });
    let mut runs = EvalRuns::new();
    for case in cases {
        let (dataset, samples) = case?;
        runs.entry(dataset).or_default().push(samples);
    }
    Ok(runs)
}
