//! Complexity buckets and coordinated penalty coefficients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the adaptive penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PenaltyConfig {
    /// Reflection counts at or below `n1` are simple.
    pub n1: u64,
    /// Reflection counts above `n2` are hard.
    pub n2: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Overall penalty budget shared between reflection and length.
    pub alpha: f64,
    /// Standard deviations at or below this are treated as zero.
    pub std_epsilon: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            n1: 40,
            n2: 80,
            lambda1: 0.05,
            lambda2: 0.1,
            lambda3: 0.15,
            alpha: 0.2,
            std_epsilon: 1e-8,
        }
    }
}

impl PenaltyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Config("n1 and n2 must be positive".into()));
        }
        if self.n1 >= self.n2 {
            return Err(Error::Config(format!(
                "n1 ({}) must be smaller than n2 ({})",
                self.n1, self.n2
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} not in (0, 1)", self.alpha)));
        }
        for (name, lambda) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::Config(format!("{name} {lambda} not in (0, 1)")));
            }
            if lambda > self.alpha {
                return Err(Error::Config(format!(
                    "{name} {lambda} exceeds alpha {}",
                    self.alpha
                )));
            }
        }
        if !(self.std_epsilon > 0.0 && self.std_epsilon.is_finite()) {
            return Err(Error::Config(
                "std_epsilon must be a small positive number".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexityBucket {
    Simple,
    Moderate,
    Hard,
}

impl ComplexityBucket {
    pub const ALL: [ComplexityBucket; 3] = [
        ComplexityBucket::Simple,
        ComplexityBucket::Moderate,
        ComplexityBucket::Hard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ComplexityBucket::Simple => "simple",
            ComplexityBucket::Moderate => "moderate",
            ComplexityBucket::Hard => "hard",
        }
    }
}

impl fmt::Display for ComplexityBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComplexityBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(ComplexityBucket::Simple),
            "moderate" => Ok(ComplexityBucket::Moderate),
            "hard" => Ok(ComplexityBucket::Hard),
            other => Err(Error::InvalidInput(format!("unknown bucket {other:?}"))),
        }
    }
}

pub fn classify_complexity(rtc: u64, cfg: &PenaltyConfig) -> ComplexityBucket {
    if rtc <= cfg.n1 {
        ComplexityBucket::Simple
    } else if rtc <= cfg.n2 {
        ComplexityBucket::Moderate
    } else {
        ComplexityBucket::Hard
    }
}

/// Returns `(alpha1, alpha2)`: the reflection weight for the bucket and the
/// remainder of the overall budget, which goes to the length penalty.
///
/// `alpha2` is chosen so that `alpha1 + alpha2 == alpha` holds in floating
/// point whenever some `f64` achieves it (always for the default weights).
/// Otherwise the sum rounds to a neighbour of `alpha`, one ulp away.
pub fn allocate_coefficients(bucket: ComplexityBucket, cfg: &PenaltyConfig) -> (f64, f64) {
    let alpha1 = match bucket {
        ComplexityBucket::Simple => cfg.lambda1,
        ComplexityBucket::Moderate => cfg.lambda2,
        ComplexityBucket::Hard => cfg.lambda3,
    };
    (alpha1, remainder(cfg.alpha, alpha1))
}

fn remainder(total: f64, part: f64) -> f64 {
    let mut rest = total - part;
    // the subtraction is off by at most an ulp; a round-half-even tie can
    // leave both candidates one ulp away, hence the bounded search
    for _ in 0..4 {
        let sum = part + rest;
        if sum == total {
            break;
        }
        rest = if sum > total {
            rest.next_down()
        } else {
            rest.next_up()
        };
    }
    rest.max(0.0)
}
