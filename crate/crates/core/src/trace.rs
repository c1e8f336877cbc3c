//! Rollout corpora and reasoning-trace analysis.
//!
//! A rollout is one sampled response to a prompt. Its text holds a thinking
//! phase closed by [`THINK_TERMINATOR`], followed by a solution segment that
//! carries the final answer. This module parses line-delimited corpora,
//! splits thinking from solution, extracts answers and counts
//! reflection-trigger occurrences.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal that closes the thinking phase of a response.
pub const THINK_TERMINATOR: &str = "</think>";

/// Default reflection triggers, in canonical order.
pub const DEFAULT_TRIGGERS: [&str; 13] = [
    "wait",
    "alternatively",
    "hold on",
    "another thought",
    "verify",
    "think again",
    "but",
    "however",
    "alternative",
    "check",
    "double-check",
    "oh",
    "hmm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPolicy {
    pub case_insensitive: bool,
    pub word_boundary: bool,
    pub longest_match_first: bool,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            case_insensitive: true,
            word_boundary: true,
            longest_match_first: true,
        }
    }
}

/// Ordered set of reflection-trigger phrases plus the policy used to match
/// them against response text.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerLexicon {
    triggers: Vec<String>,
    policy: MatchPolicy,
    // Trigger char sequences in match-priority order.
    patterns: Vec<Vec<char>>,
}

impl TriggerLexicon {
    pub fn new<I, S>(triggers: I, policy: MatchPolicy) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut phrases = Vec::new();
        for raw in triggers {
            let phrase = raw
                .as_ref()
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase();
            if phrase.is_empty() {
                return Err(Error::InvalidInput("empty trigger phrase".into()));
            }
            let words = phrase.split(' ').count();
            if words > 3 {
                return Err(Error::InvalidInput(format!(
                    "trigger {phrase:?} has {words} words (at most 3 allowed)"
                )));
            }
            if !seen.insert(phrase.clone()) {
                return Err(Error::InvalidInput(format!("duplicate trigger {phrase:?}")));
            }
            phrases.push(phrase);
        }
        if phrases.is_empty() {
            return Err(Error::InvalidInput("trigger lexicon is empty".into()));
        }

        let mut patterns: Vec<Vec<char>> = phrases.iter().map(|p| p.chars().collect()).collect();
        if policy.longest_match_first {
            // stable: equal lengths keep lexicon order
            patterns.sort_by_key(|p| std::cmp::Reverse(p.len()));
        }
        Ok(TriggerLexicon {
            triggers: phrases,
            policy,
            patterns,
        })
    }

    /// Parses a lexicon override: one phrase per line, `#` starts a comment.
    pub fn parse(contents: &str, policy: MatchPolicy) -> Result<Self> {
        let phrases = contents
            .lines()
            .map(|line| match line.find('#') {
                Some(idx) => &line[..idx],
                None => line,
            })
            .map(str::trim)
            .filter(|line| !line.is_empty());
        TriggerLexicon::new(phrases, policy)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TriggerLexicon::parse(&contents, MatchPolicy::default())
    }

    pub fn triggers(&self) -> &[String] {
        &self.triggers
    }

    pub fn policy(&self) -> MatchPolicy {
        self.policy
    }
}

impl Default for TriggerLexicon {
    fn default() -> Self {
        TriggerLexicon::new(DEFAULT_TRIGGERS, MatchPolicy::default())
            .expect("default lexicon is valid")
    }
}

/// One sampled response to a prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rollout {
    pub prompt_id: String,
    pub rollout_id: String,
    pub text: String,
    pub ground_truth: String,
    /// Model-tokenizer length supplied by whoever produced the corpus.
    #[serde(
        rename = "token_count",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub declared_token_count: Option<u64>,
    /// Benchmark the prompt belongs to; used by `analyze` and `eval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

impl Rollout {
    pub fn new(
        prompt_id: impl Into<String>,
        rollout_id: impl Into<String>,
        text: impl Into<String>,
        ground_truth: impl Into<String>,
    ) -> Self {
        Rollout {
            prompt_id: prompt_id.into(),
            rollout_id: rollout_id.into(),
            text: text.into(),
            ground_truth: ground_truth.into(),
            declared_token_count: None,
            dataset: None,
        }
    }

    pub fn with_token_count(mut self, count: u64) -> Self {
        self.declared_token_count = Some(count);
        self
    }

    pub fn with_dataset(mut self, dataset: impl Into<String>) -> Self {
        self.dataset = Some(dataset.into());
        self
    }

    pub fn dataset_name(&self) -> &str {
        self.dataset.as_deref().unwrap_or("default")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedRollout {
    pub thinking: String,
    pub solution: String,
    pub had_terminator: bool,
}

impl SegmentedRollout {
    pub fn reassemble(&self) -> String {
        if self.had_terminator {
            format!("{}{}{}", self.thinking, THINK_TERMINATOR, self.solution)
        } else {
            self.thinking.clone()
        }
    }
}

/// Parses a line-delimited corpus held in memory. Blank lines are skipped;
/// reported line numbers are 1-based.
pub fn parse_trace_str(contents: &str) -> Result<Vec<Rollout>> {
    let mut seen = HashSet::new();
    let mut rollouts = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rollout: Rollout = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if rollout.text.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "field `text` is empty".into(),
            });
        }
        if rollout.declared_token_count == Some(0) {
            return Err(Error::Parse {
                line: line_no,
                message: "field `token_count` must be at least 1".into(),
            });
        }
        if !seen.insert((rollout.prompt_id.clone(), rollout.rollout_id.clone())) {
            return Err(Error::DuplicateRecord {
                line: line_no,
                prompt_id: rollout.prompt_id,
                rollout_id: rollout.rollout_id,
            });
        }
        rollouts.push(rollout);
    }
    Ok(rollouts)
}

pub fn parse_trace_file(path: impl AsRef<Path>) -> Result<Vec<Rollout>> {
    let path = path.as_ref();
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace_str(&contents)
}

/// Serializes rollouts in the corpus format, one record per line.
pub fn to_jsonl(rollouts: &[Rollout]) -> String {
    let mut out = String::new();
    for r in rollouts {
        out.push_str(&serde_json::to_string(r).expect("rollout serializes"));
        out.push('\n');
    }
    out
}

pub fn split_thinking(rollout: &Rollout) -> SegmentedRollout {
    split_text(&rollout.text)
}

pub fn split_text(text: &str) -> SegmentedRollout {
    match text.find(THINK_TERMINATOR) {
        Some(pos) => SegmentedRollout {
            thinking: text[..pos].to_string(),
            solution: text[pos + THINK_TERMINATOR.len()..].to_string(),
            had_terminator: true,
        },
        None => SegmentedRollout {
            thinking: text.to_string(),
            solution: String::new(),
            had_terminator: false,
        },
    }
}

/// Trims, strips enclosing `$` delimiters and collapses internal whitespace.
pub fn normalize_answer(raw: &str) -> String {
    let mut s = raw.trim();
    while s.len() >= 2 && s.starts_with('$') && s.ends_with('$') {
        s = s[1..s.len() - 1].trim();
    }
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Extracts the final answer: the last balanced `\boxed{...}` in the solution
/// (or the thinking when the solution is empty), falling back to the last
/// standalone number.
pub fn extract_answer(segmented: &SegmentedRollout) -> Option<String> {
    let source = if segmented.solution.is_empty() {
        &segmented.thinking
    } else {
        &segmented.solution
    };
    let raw = last_boxed(source).or_else(|| last_number(source))?;
    let answer = normalize_answer(raw);
    if answer.is_empty() {
        None
    } else {
        Some(answer)
    }
}

fn last_boxed(s: &str) -> Option<&str> {
    const MARKER: &str = "\\boxed{";
    let mut found = None;
    let mut from = 0;
    while let Some(rel) = s[from..].find(MARKER) {
        let open = from + rel + MARKER.len();
        let mut depth = 1usize;
        let mut close = None;
        for (i, c) in s[open..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(open + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(close) = close {
            found = Some(&s[open..close]);
        }
        from = open;
    }
    found
}

fn last_number(s: &str) -> Option<&str> {
    let bytes = s.as_bytes();
    let n = bytes.len();
    let is_word = |b: u8| b.is_ascii_alphanumeric() || b >= 0x80;
    let mut found = None;
    let mut i = 0;
    while i < n {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let mut start = i;
        let mut end = i;
        while end < n && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end + 1 < n && bytes[end] == b'.' && bytes[end + 1].is_ascii_digit() {
            end += 1;
            while end < n && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        if start > 0 && bytes[start - 1] == b'-' {
            start -= 1;
        }
        let before_ok = start == 0 || !(is_word(bytes[start - 1]) || bytes[start - 1] == b'.');
        let after_ok = end == n || !is_word(bytes[end]);
        if before_ok && after_ok {
            found = Some(&s[start..end]);
        }
        i = end;
    }
    found
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Counts non-overlapping reflection-trigger occurrences in `text`.
///
/// A space inside a trigger phrase matches any non-empty run of whitespace.
/// With the default policy, matching ignores case, a trigger never matches
/// inside a longer alphanumeric run, and at each position the longest trigger
/// wins.
pub fn count_reflection_tokens(text: &str, lexicon: &TriggerLexicon) -> u64 {
    let chars: Vec<char> = if lexicon.policy.case_insensitive {
        text.chars().flat_map(char::to_lowercase).collect()
    } else {
        text.chars().collect()
    };
    let boundary = lexicon.policy.word_boundary;
    let mut count = 0;
    let mut i = 0;
    while i < chars.len() {
        let matched = lexicon
            .patterns
            .iter()
            .find_map(|pattern| match_at(&chars, i, pattern, boundary));
        match matched {
            Some(end) => {
                count += 1;
                i = end;
            }
            None => i += 1,
        }
    }
    count
}

// Returns the end index of a match of `pattern` starting at `start`.
fn match_at(text: &[char], start: usize, pattern: &[char], boundary: bool) -> Option<usize> {
    let first = *pattern.first()?;
    if boundary && is_word_char(first) && start > 0 && is_word_char(text[start - 1]) {
        return None;
    }
    let mut t = start;
    for &p in pattern {
        if p == ' ' {
            let ws_start = t;
            while t < text.len() && text[t].is_whitespace() {
                t += 1;
            }
            if t == ws_start {
                return None;
            }
        } else {
            if t >= text.len() || text[t] != p {
                return None;
            }
            t += 1;
        }
    }
    let last = *pattern.last()?;
    if boundary && is_word_char(last) && t < text.len() && is_word_char(text[t]) {
        return None;
    }
    Some(t)
}

/// Response length in tokens: the declared count when present, otherwise the
/// number of whitespace-delimited tokens (an approximation of model tokens).
pub fn response_length(rollout: &Rollout) -> Result<u64> {
    match rollout.declared_token_count {
        Some(0) => Err(Error::InvalidRecord(format!(
            "rollout {}/{} declares token_count = 0",
            rollout.prompt_id, rollout.rollout_id
        ))),
        Some(n) => Ok(n),
        None => {
            let n = rollout.text.split_whitespace().count() as u64;
            if n == 0 {
                Err(Error::InvalidRecord(format!(
                    "rollout {}/{} has no tokens",
                    rollout.prompt_id, rollout.rollout_id
                )))
            } else {
                Ok(n)
            }
        }
    }
}
