//! Output formats: scored-record JSONL and the CSV reports.
//!
//! Reals are written with 9 decimal digits everywhere.

use serde::Serialize;
use serde_json::value::RawValue;

use crate::advantage::{rloo_advantages, RewardVector};
use crate::analysis::CorpusAnalysis;
use crate::complexity::ComplexityBucket;
use crate::metrics::EvalReport;
use crate::reward::ScoredGroup;
use crate::sim::{TraceRow, TrainingSummary};

/// Formats a real with 9 decimals; negative zero prints as zero.
pub fn fmt9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.9}")
}

fn fmt9_opt(x: Option<f64>) -> String {
    x.map(fmt9).unwrap_or_default()
}

fn raw9(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt9(x)).expect("formatted real is valid JSON")
}

#[derive(Serialize)]
struct ScoredRecord<'a> {
    prompt_id: &'a str,
    rollout_id: &'a str,
    text: &'a str,
    ground_truth: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    token_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<&'a str>,
    answer: Option<&'a str>,
    rtc: u64,
    len: u64,
    bucket: ComplexityBucket,
    alpha1: Box<RawValue>,
    alpha2: Box<RawValue>,
    f_rtc: Box<RawValue>,
    f_len: Box<RawValue>,
    correct: bool,
    reward: Box<RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    advantage: Option<Option<Box<RawValue>>>,
}

/// Leave-one-out advantages of a group, or `None` for a single-rollout group.
pub fn group_advantages(group: &ScoredGroup) -> Option<Vec<f64>> {
    let rewards = group.scored.iter().map(|s| s.score.reward).collect();
    RewardVector::new(rewards).ok().map(|r| rloo_advantages(&r))
}

/// Input records plus their reward breakdown, one JSON object per line. With
/// `emit_advantages`, each record also carries its leave-one-out advantage
/// within its prompt group (`null` for single-rollout groups).
pub fn scored_jsonl(groups: &[ScoredGroup], emit_advantages: bool) -> String {
    let mut out = String::new();
    for group in groups {
        let advantages = if emit_advantages {
            group_advantages(group)
        } else {
            None
        };
        for (i, (r, s)) in group.rollouts.iter().zip(&group.scored).enumerate() {
            let advantage = emit_advantages.then(|| advantages.as_ref().map(|a| raw9(a[i])));
            let record = ScoredRecord {
                prompt_id: &r.prompt_id,
                rollout_id: &r.rollout_id,
                text: &r.text,
                ground_truth: &r.ground_truth,
                token_count: r.declared_token_count,
                dataset: r.dataset.as_deref(),
                answer: s.answer.as_deref(),
                rtc: s.score.rtc,
                len: s.score.len,
                bucket: s.score.bucket,
                alpha1: raw9(s.score.alpha1),
                alpha2: raw9(s.score.alpha2),
                f_rtc: raw9(s.score.reflection_penalty),
                f_len: raw9(s.score.length_penalty),
                correct: s.score.correct,
                reward: raw9(s.score.reward),
                advantage,
            };
            out.push_str(&serde_json::to_string(&record).expect("scored record serializes"));
            out.push('\n');
        }
    }
    out
}

fn csv_string(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub fn group_summary_csv(groups: &[ScoredGroup]) -> String {
    let mut rows = vec![header(&[
        "prompt_id",
        "n_total",
        "n_correct",
        "mean_rtc_correct",
        "std_rtc_correct",
        "mean_len_correct",
        "std_len_correct",
        "mean_reward",
    ])];
    for g in groups {
        rows.push(vec![
            g.prompt_id.clone(),
            g.stats.n_total.to_string(),
            g.stats.n_correct.to_string(),
            fmt9(g.stats.mean_rtc_correct),
            fmt9(g.stats.std_rtc_correct),
            fmt9(g.stats.mean_len_correct),
            fmt9(g.stats.std_len_correct),
            fmt9(g.mean_reward()),
        ]);
    }
    csv_string(rows)
}

pub fn trace_csv(archetypes: &[String], trace: &[TraceRow]) -> String {
    let mut head = vec!["step".to_string()];
    head.extend(archetypes.iter().map(|a| format!("p_{a}")));
    head.extend(["mean_reward", "mean_rtc", "mean_len", "accuracy"].map(String::from));
    let mut rows = vec![head];
    for row in trace {
        let mut r = vec![row.step.to_string()];
        r.extend(row.probabilities.iter().copied().map(fmt9));
        r.extend([row.mean_reward, row.mean_rtc, row.mean_len, row.accuracy].map(fmt9));
        rows.push(r);
    }
    csv_string(rows)
}

pub fn training_summary_csv(summary: &TrainingSummary) -> String {
    let mut rows = vec![header(&[
        "archetype",
        "final_probability",
        "oracle_expected_reward",
        "oracle_std_error",
        "oracle_best",
        "policy_best",
    ])];
    for (i, name) in summary.archetypes.iter().enumerate() {
        let est = summary.oracle.estimates[i];
        rows.push(vec![
            name.clone(),
            fmt9(summary.final_probabilities[i]),
            fmt9(est.mean),
            fmt9(est.std_error),
            (i == summary.oracle_argmax).to_string(),
            (i == summary.policy_argmax).to_string(),
        ]);
    }
    csv_string(rows)
}

/// CSVs produced by `analyze`, keyed by file name.
pub fn analysis_csvs(a: &CorpusAnalysis) -> Vec<(&'static str, String)> {
    let mut per_dataset = vec![header(&["dataset", "n", "mean_rtc", "mean_len"])];
    for d in &a.per_dataset {
        per_dataset.push(vec![
            d.dataset.clone(),
            d.n.to_string(),
            fmt9(d.mean_rtc),
            fmt9(d.mean_len),
        ]);
    }

    let mut outcome = vec![header(&["outcome", "n", "mean_len", "mean_rtc", "note"])];
    for o in &a.by_outcome {
        outcome.push(vec![
            if o.correct { "correct" } else { "incorrect" }.to_string(),
            o.n.to_string(),
            fmt9_opt(o.mean_len),
            fmt9_opt(o.mean_rtc),
            if o.n == 0 { "empty" } else { "" }.to_string(),
        ]);
    }

    let mut bins = vec![header(&["rtc_lo", "rtc_hi", "n", "n_correct", "accuracy"])];
    for b in &a.rtc_bins {
        bins.push(vec![
            b.lo.to_string(),
            b.hi.to_string(),
            b.n.to_string(),
            b.n_correct.to_string(),
            fmt9_opt(b.accuracy),
        ]);
    }

    let mut hist = vec![header(&["rtc", "count"])];
    for (rtc, count) in &a.rtc_histogram {
        hist.push(vec![rtc.to_string(), count.to_string()]);
    }

    vec![
        ("rtc_by_dataset.csv", csv_string(per_dataset)),
        ("outcome_split.csv", csv_string(outcome)),
        ("accuracy_by_rtc_bin.csv", csv_string(bins)),
        ("rtc_histogram.csv", csv_string(hist)),
    ]
}

pub fn eval_csv(report: &EvalReport, baseline: Option<&EvalReport>) -> String {
    let mut rows = vec![header(&[
        "dataset",
        "cases",
        "samples_per_case",
        "pass1_accuracy",
        "mean_length",
        "baseline_pass1_accuracy",
        "baseline_mean_length",
    ])];
    for (name, m) in &report.per_dataset {
        let base = baseline.and_then(|b| b.per_dataset.get(name));
        rows.push(vec![
            name.clone(),
            m.cases.to_string(),
            m.samples_per_case.to_string(),
            fmt9(m.pass1_accuracy),
            fmt9(m.mean_length),
            fmt9_opt(base.map(|b| b.pass1_accuracy)),
            fmt9_opt(base.map(|b| b.mean_length)),
        ]);
    }
    rows.push(vec![
        "ALL".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        format!("delta_acc={}", fmt9_opt(report.delta_acc)),
        format!("delta_length_pct={}", fmt9_opt(report.delta_length_pct)),
    ]);
    csv_string(rows)
}
