//! Corpus-level reflection statistics: per-dataset means, correct versus
//! incorrect splits, accuracy by reflection-count interval, and the raw
//! reflection-count histogram used to pick complexity thresholds for a new
//! model.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::reward::measure_rollout;
use crate::trace::{Rollout, TriggerLexicon};

pub const DEFAULT_BIN_WIDTH: u64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub dataset: String,
    pub n: usize,
    pub mean_rtc: f64,
    pub mean_len: f64,
}

/// Mean length and reflection count of one correctness class. Means are
/// absent when the class is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSummary {
    pub correct: bool,
    pub n: usize,
    pub mean_len: Option<f64>,
    pub mean_rtc: Option<f64>,
}

/// Rollouts whose reflection count lies in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RtcBin {
    pub lo: u64,
    pub hi: u64,
    pub n: usize,
    pub n_correct: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusAnalysis {
    pub per_dataset: Vec<DatasetSummary>,
    pub by_outcome: [OutcomeSummary; 2],
    pub rtc_bins: Vec<RtcBin>,
    /// Distinct reflection counts in ascending order with their frequency.
    pub rtc_histogram: Vec<(u64, usize)>,
}

struct Row {
    dataset: String,
    rtc: u64,
    len: u64,
    correct: bool,
}

fn mean(values: impl Iterator<Item = u64>) -> Option<f64> {
    let (sum, n) = values.fold((0u128, 0u64), |(s, n), v| (s + v as u128, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

pub fn analyze_corpus(
    rollouts: &[Rollout],
    lexicon: &TriggerLexicon,
    bin_width: u64,
    mode: ExecMode,
) -> Result<CorpusAnalysis> {
    if bin_width == 0 {
        return Err(Error::InvalidInput("bin width must be positive".into()));
    }
    let rows = exec::map(mode, rollouts.iter().collect(), |r: &Rollout| {
        let (m, _) = measure_rollout(r, lexicon)?;
        Ok(Row {
            dataset: r.dataset_name().to_string(),
            rtc: m.rtc,
            len: m.len,
            correct: m.correct,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut datasets: BTreeMap<&str, Vec<&Row>> = BTreeMap::new();
    for row in &rows {
        datasets.entry(row.dataset.as_str()).or_default().push(row);
    }
    let per_dataset = datasets
        .into_iter()
        .map(|(name, rows)| DatasetSummary {
            dataset: name.to_string(),
            n: rows.len(),
            mean_rtc: mean(rows.iter().map(|r| r.rtc)).unwrap_or(0.0),
            mean_len: mean(rows.iter().map(|r| r.len)).unwrap_or(0.0),
        })
        .collect();

    let outcome = |correct: bool| {
        let class = || rows.iter().filter(move |r| r.correct == correct);
        OutcomeSummary {
            correct,
            n: class().count(),
            mean_len: mean(class().map(|r| r.len)),
            mean_rtc: mean(class().map(|r| r.rtc)),
        }
    };
    let by_outcome = [outcome(true), outcome(false)];

    let max_rtc = rows.iter().map(|r| r.rtc).max();
    let rtc_bins = match max_rtc {
        None => Vec::new(),
        Some(max) => (0..=max / bin_width)
            .map(|b| {
                let lo = b * bin_width;
                let hi = lo + bin_width - 1;
                let members = || rows.iter().filter(move |r| r.rtc >= lo && r.rtc <= hi);
                let n = members().count();
                let n_correct = members().filter(|r| r.correct).count();
                RtcBin {
                    lo,
                    hi,
                    n,
                    n_correct,
                    accuracy: (n > 0).then(|| n_correct as f64 / n as f64),
                }
            })
            .collect(),
    };

    let mut histogram: BTreeMap<u64, usize> = BTreeMap::new();
    for row in &rows {
        *histogram.entry(row.rtc).or_default() += 1;
    }

    Ok(CorpusAnalysis {
        per_dataset,
        by_outcome,
        rtc_bins,
        rtc_histogram: histogram.into_iter().collect(),
    })
}
