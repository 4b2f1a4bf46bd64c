// SPDX-License-Identifier: Apache-2.0

//! The monitoring loop: per-cluster edit statistics, the breaking-news
//! criteria, and eviction of idle clusters.

mod candidate;
mod cluster;
mod engine;

use serde::{Deserialize, Serialize};

pub use candidate::{Candidate, CandidateId, VerdictState};
pub use cluster::{merge, Cluster, ClusterSummary, EditRecord};
pub use engine::{Monitor, MonitorCounters, MonitorEvent};

/// Thresholds a cluster must meet to become a candidate, plus the idle
/// bound after which it leaves the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriteriaConfig {
    pub min_occurrences: u32,
    pub max_secs_between_edits: u32,
    pub min_concurrent_editors: u32,
    pub max_secs_since_last_edit: u32,
    pub ttl_secs: u32,
    pub eviction_period_secs: u32,
}

impl Default for CriteriaConfig {
    fn default() -> Self {
        CriteriaConfig {
            min_occurrences: 5,
            max_secs_between_edits: 60,
            min_concurrent_editors: 2,
            max_secs_since_last_edit: 240,
            ttl_secs: 240,
            eviction_period_secs: 240,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriteriaError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("ttl_secs ({ttl}) must be at least max_secs_since_last_edit ({idle})")]
    TtlTooShort { ttl: u32, idle: u32 },
}

impl CriteriaConfig {
    pub fn validate(&self) -> Result<(), CriteriaError> {
        let fields = [
            ("min_occurrences", self.min_occurrences),
            ("max_secs_between_edits", self.max_secs_between_edits),
            ("min_concurrent_editors", self.min_concurrent_editors),
            ("max_secs_since_last_edit", self.max_secs_since_last_edit),
            ("ttl_secs", self.ttl_secs),
            ("eviction_period_secs", self.eviction_period_secs),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(CriteriaError::NotPositive(name));
        }
        if self.ttl_secs < self.max_secs_since_last_edit {
            return Err(CriteriaError::TtlTooShort {
                ttl: self.ttl_secs,
                idle: self.max_secs_since_last_edit,
            });
        }
        Ok(())
    }

    /// The four criteria, given a cluster's counted statistics and the
    /// milliseconds since its last counted edit.
    pub fn satisfied(&self, occurrences: usize, max_gap_ms: i64, editors: usize, since_last_ms: i64) -> bool {
        occurrences >= self.min_occurrences as usize
            && max_gap_ms <= i64::from(self.max_secs_between_edits) * 1000
            && editors >= self.min_concurrent_editors as usize
            && since_last_ms <= i64::from(self.max_secs_since_last_edit) * 1000
    }
}
