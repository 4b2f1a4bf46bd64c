// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use super::cluster::{Cluster, EditRecord};
use crate::graph::{ArticleKey, ClusterId};
use crate::plausibility::{build_queries, PlausibilityResult, SearchQuery};
use crate::time::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub u64);

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictState {
    Pending,
    Confirmed,
    Rejected,
}

/// Snapshot of a cluster at the moment it met every criterion, plus what the
/// plausibility checks and the evaluator made of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: CandidateId,
    pub cluster_id: ClusterId,
    pub members: Vec<ArticleKey>,
    pub edit_count: usize,
    pub editors: Vec<String>,
    pub timeline: Vec<EditRecord>,
    pub max_gap_secs: f64,
    pub fired_at: Timestamp,
    pub queries: Vec<SearchQuery>,
    pub plausibility: Vec<PlausibilityResult>,
    pub verdict: VerdictState,
    pub verdict_by: Option<String>,
    pub verdict_at: Option<Timestamp>,
    pub verdict_note: Option<String>,
}

impl Candidate {
    pub fn from_cluster(id: CandidateId, cluster: &Cluster, fired_at: Timestamp) -> Self {
        let members: Vec<ArticleKey> = cluster.members.iter().cloned().collect();
        Candidate {
            id,
            cluster_id: cluster.id,
            queries: build_queries(&members),
            members,
            edit_count: cluster.occurrences,
            editors: cluster.editors.iter().cloned().collect(),
            timeline: cluster.edits.clone(),
            max_gap_secs: cluster.max_gap_secs(),
            fired_at,
            plausibility: Vec::new(),
            verdict: VerdictState::Pending,
            verdict_by: None,
            verdict_at: None,
            verdict_note: None,
        }
    }
}
