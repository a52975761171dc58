//! Log-space probabilities.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ConfigError;

/// A natural-log probability. Probability zero is the explicit marker
/// [`LogProb::ZERO`] (negative infinity); it serializes as JSON `null`.
#[derive(Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    /// Wraps a value that is already a natural log.
    pub fn from_ln(value: f64) -> Self {
        debug_assert!(!value.is_nan(), "log-probability is NaN");
        if value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogProb(value)
        }
    }

    /// Converts a probability (or any nonnegative weight) into log space.
    pub fn from_prob(p: f64) -> Self {
        debug_assert!(p >= 0.0, "negative probability {p}");
        if p <= 0.0 {
            Self::ZERO
        } else {
            LogProb(p.ln())
        }
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self / other` in probability space. A zero numerator stays zero even
    /// over a zero denominator.
    pub fn ratio(self, other: LogProb) -> LogProb {
        if self.is_zero() {
            Self::ZERO
        } else {
            LogProb(self.0 - other.0)
        }
    }

    /// Total ordering used for argmax; zero sorts lowest.
    pub fn total_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for LogProb {
    type Output = LogProb;

    /// Product of the underlying probabilities.
    fn add(self, rhs: LogProb) -> LogProb {
        if self.is_zero() || rhs.is_zero() {
            Self::ZERO
        } else {
            LogProb(self.0 + rhs.0)
        }
    }
}

impl Sum for LogProb {
    fn sum<I: Iterator<Item = LogProb>>(iter: I) -> LogProb {
        iter.fold(LogProb::ONE, |acc, x| acc + x)
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogProb({})", self.0)
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for LogProb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_zero() {
            serializer.serialize_none()
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogProb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value: Option<f64> = Option::deserialize(deserializer)?;
        Ok(value.map_or(LogProb::ZERO, LogProb::from_ln))
    }
}

/// Log of `sum(exp(x))`, stable under large magnitudes.
pub fn log_sum_exp(values: impl IntoIterator<Item = LogProb>) -> LogProb {
    let values: Vec<f64> = values.into_iter().filter(|v| !v.is_zero()).map(LogProb::ln).collect();
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return LogProb::ZERO;
    };
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    LogProb(max + sum.ln())
}

/// Scales nonnegative weights to sum to 1. Weights already summing to 1
/// within 1e-9 are returned unchanged; otherwise a warning is logged.
pub fn normalize_priors(raw: &[f64]) -> Result<Vec<f64>, ConfigError> {
    if let Some(bad) = raw.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(ConfigError::Priors(format!("invalid prior {bad}")));
    }
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(ConfigError::Priors("all priors are zero".into()));
    }
    if (sum - 1.0).abs() <= 1e-9 {
        return Ok(raw.to_vec());
    }
    log::warn!("hypothesis priors sum to {sum}; normalizing");
    Ok(raw.iter().map(|p| p / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_absorbs_products() {
        assert!((LogProb::ZERO + LogProb::from_prob(0.5)).is_zero());
        assert!(LogProb::ZERO.ratio(LogProb::ZERO).is_zero());
        assert_eq!(LogProb::from_prob(0.0), LogProb::ZERO);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.1, 0.2, 0.3].map(LogProb::from_prob);
        assert!((log_sum_exp(xs).prob() - 0.6).abs() < 1e-12);
        assert!(log_sum_exp([LogProb::ZERO]).is_zero());
        let big = [LogProb::from_ln(-1000.0), LogProb::from_ln(-1000.0)];
        assert!((log_sum_exp(big).ln() - (-1000.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip_uses_null_for_zero() {
        let text = serde_json::to_string(&[LogProb::ZERO, LogProb::from_ln(-1.5)]).unwrap();
        assert_eq!(text, "[null,-1.5]");
        let back: Vec<LogProb> = serde_json::from_str(&text).unwrap();
        assert!(back[0].is_zero());
        assert_eq!(back[1].ln(), -1.5);
    }

    #[test]
    fn priors_normalize() {
        assert_eq!(normalize_priors(&[0.2, 0.2]).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize_priors(&[0.25, 0.75]).unwrap(), vec![0.25, 0.75]);
        assert!(normalize_priors(&[0.0, 0.0]).is_err());
        assert!(normalize_priors(&[-0.1, 1.1]).is_err());
        assert!(normalize_priors(&[]).unwrap().is_empty());
    }
}
