//! Per-inequality verification records.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Default ceiling for fitted implied constants.
pub const DEFAULT_CONSTANT_CEILING: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Inconclusive => "inconclusive",
        }
    }

    /// Combines two statuses: any failure wins, then inconclusive, then pass.
    pub fn and(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            (Pass, _) | (_, Pass) => Pass,
            _ => Skipped,
        }
    }
}

/// A report field. Exact values (big integers, rationals) are kept as decimal
/// strings so they survive serialization without rounding.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(String),
    Real(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub experiment: String,
    /// Which stated result the record checks, e.g. `"Lemma 2.3 (2.1)"`.
    pub anchor: String,
    pub params: Vec<(String, Value)>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` for explicit-constant checks.
    pub margin: f64,
    pub fitted_constant: Option<f64>,
    pub status: Status,
    pub seed: Option<u64>,
    pub details: Vec<(String, Value)>,
}

impl VerificationReport {
    pub fn new(experiment: &str, anchor: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            anchor: anchor.to_string(),
            params: Vec::new(),
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            fitted_constant: None,
            status: Status::Pass,
            seed: None,
            details: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.push((key.to_string(), value.into()));
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.push((key.to_string(), value.into()));
        self
    }

    pub fn exact(self, key: &str, value: impl ToString) -> Self {
        self.detail(key, Value::Exact(value.to_string()))
    }

    pub fn sides(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        self.margin = rhs - lhs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    /// Records a fitted implied constant and sets the status from the ceiling.
    pub fn fitted(mut self, constant: f64, ceiling: f64) -> Self {
        self.fitted_constant = Some(constant);
        self.status = if constant.is_finite() && constant <= ceiling { Status::Pass } else { Status::Fail };
        self.detail("ceiling", ceiling)
    }

    pub fn skipped(mut self, reason: &str) -> Self {
        self.status = Status::Skipped;
        self.detail("skip_reason", reason)
    }

    pub fn is_failure(&self) -> bool {
        self.status == Status::Fail
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_combination() {
        assert_eq!(Status::Pass.and(Status::Fail), Status::Fail);
        assert_eq!(Status::Pass.and(Status::Inconclusive), Status::Inconclusive);
        assert_eq!(Status::Skipped.and(Status::Pass), Status::Pass);
        assert_eq!(Status::Skipped.and(Status::Skipped), Status::Skipped);
    }

    #[test]
    fn fitted_constant_respects_ceiling() {
        let r = VerificationReport::new("x", "y").fitted(3.0, 100.0);
        assert_eq!(r.status, Status::Pass);
        let r = VerificationReport::new("x", "y").fitted(300.0, 100.0);
        assert_eq!(r.status, Status::Fail);
        let r = VerificationReport::new("x", "y").fitted(f64::INFINITY, 100.0);
        assert_eq!(r.status, Status::Fail);
    }
}
