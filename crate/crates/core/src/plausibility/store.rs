// SPDX-License-Identifier: Apache-2.0

//! In-memory candidate store. Mutations are the same three operations the
//! run log records, so applying a log in order rebuilds the store exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PlausibilityResult;
use crate::monitor::{Candidate, CandidateId, VerdictState};
use crate::time::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Confirmed,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub candidate_id: CandidateId,
    pub decision: Decision,
    pub evaluator: String,
    pub decided_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("unknown candidate {0}")]
    NotFound(CandidateId),
    #[error("candidate {0} already has a verdict")]
    Conflict(CandidateId),
    #[error("candidate {0} already stored")]
    Duplicate(CandidateId),
}

#[derive(Clone, Debug, Default)]
pub struct CandidateStore {
    candidates: BTreeMap<CandidateId, Candidate>,
    verdicts: u64,
}

impl CandidateStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, candidate: Candidate) -> Result<(), StoreError> {
        if self.candidates.contains_key(&candidate.id) {
            return Err(StoreError::Duplicate(candidate.id));
        }
        self.candidates.insert(candidate.id, candidate);
        Ok(())
    }

    pub fn attach_results(&mut self, id: CandidateId, results: impl IntoIterator<Item = PlausibilityResult>) -> Result<(), StoreError> {
        let candidate = self.candidates.get_mut(&id).ok_or(StoreError::NotFound(id))?;
        candidate.plausibility.extend(results);
        Ok(())
    }

    /// Checks that `verdict` may be applied without applying it.
    pub fn check_verdict(&self, verdict: &Verdict) -> Result<(), StoreError> {
        let candidate = self
            .candidates
            .get(&verdict.candidate_id)
            .ok_or(StoreError::NotFound(verdict.candidate_id))?;
        if candidate.verdict != VerdictState::Pending {
            return Err(StoreError::Conflict(verdict.candidate_id));
        }
        Ok(())
    }

    /// Moves a pending candidate to confirmed or rejected, exactly once.
    pub fn record_verdict(&mut self, verdict: &Verdict) -> Result<&Candidate, StoreError> {
        self.check_verdict(verdict)?;
        let candidate = self
            .candidates
            .get_mut(&verdict.candidate_id)
            .ok_or(StoreError::NotFound(verdict.candidate_id))?;
        candidate.verdict = match verdict.decision {
            Decision::Confirmed => VerdictState::Confirmed,
            Decision::Rejected => VerdictState::Rejected,
        };
        candidate.verdict_by = Some(verdict.evaluator.clone());
        candidate.verdict_at = Some(verdict.decided_at);
        candidate.verdict_note = verdict.note.clone();
        self.verdicts += 1;
        Ok(candidate)
    }

    pub fn get(&self, id: CandidateId) -> Option<&Candidate> {
        self.candidates.get(&id)
    }

    pub fn candidates(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.values()
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn verdict_count(&self) -> u64 {
        self.verdicts
    }

    /// Smallest id not yet used.
    pub fn next_id(&self) -> u64 {
        self.candidates.keys().next_back().map_or(1, |id| id.0 + 1)
    }

    /// Canonical serialization of the whole store, ordered by id.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let all: Vec<&Candidate> = self.candidates.values().collect();
        serde_json::to_vec(&all).unwrap_or_default()
    }
}
