use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use super::LedgerError;

/// Per-endorser response time in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EndorserLatency {
    Fixed { ms: f64 },
    Uniform { min_ms: f64, max_ms: f64 },
}

impl EndorserLatency {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EndorserLatency::Fixed { ms } => ms,
            EndorserLatency::Uniform { min_ms, max_ms } if max_ms > min_ms => rng.random_range(min_ms..max_ms),
            EndorserLatency::Uniform { min_ms, .. } => min_ms,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            EndorserLatency::Fixed { ms } => ms.is_finite() && ms >= 0.0,
            EndorserLatency::Uniform { min_ms, max_ms } => {
                min_ms.is_finite() && max_ms.is_finite() && 0.0 <= min_ms && min_ms <= max_ms
            }
        }
    }
}

/// `k`-of-any endorsement over a fixed peer set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndorsementPolicy {
    k: usize,
    endorsers: Vec<String>,
    latency: EndorserLatency,
}

impl EndorsementPolicy {
    pub fn new(k: usize, endorsers: Vec<String>, latency: EndorserLatency) -> Result<Self, LedgerError> {
        let policy = EndorsementPolicy { k, endorsers, latency };
        policy.validate()?;
        Ok(policy)
    }

    /// `k`-of-`total` with peers named `peer0`, `peer1`, ...
    pub fn any(k: usize, total: usize, latency: EndorserLatency) -> Result<Self, LedgerError> {
        EndorsementPolicy::new(k, (0..total).map(|i| format!("peer{i}")).collect(), latency)
    }

    pub(crate) fn validate(&self) -> Result<(), LedgerError> {
        let mut names = self.endorsers.clone();
        names.sort();
        names.dedup();
        if self.k == 0 || self.k > self.endorsers.len() || names.len() != self.endorsers.len() {
            return Err(LedgerError::InvalidPolicy(format!(
                "{}-of-{} over {} distinct peers",
                self.k,
                self.endorsers.len(),
                names.len()
            )));
        }
        if !self.latency.is_valid() {
            return Err(LedgerError::InvalidPolicy(
                "latency must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn endorsers(&self) -> &[String] {
        &self.endorsers
    }

    pub fn latency(&self) -> EndorserLatency {
        self.latency
    }

    pub fn with_latency(mut self, latency: EndorserLatency) -> Result<Self, LedgerError> {
        self.latency = latency;
        self.validate()?;
        Ok(self)
    }

    pub fn label(&self) -> String {
        format!("{}-of-{}", self.k, self.endorsers.len())
    }
}

/// A parsed `k-of-total` flag value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PolicySpec {
    pub k: usize,
    pub total: usize,
}

impl FromStr for PolicySpec {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LedgerError::InvalidPolicy(format!("expected <k>-of-<total>, got `{s}`"));
        let (k, total) = s.split_once("-of-").ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        let total: usize = match total.trim() {
            "any" => 3,
            t => t.parse().map_err(|_| bad())?,
        };
        if k == 0 || k > total {
            return Err(bad());
        }
        Ok(PolicySpec { k, total })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-of-{}", self.k, self.total)
    }
}
