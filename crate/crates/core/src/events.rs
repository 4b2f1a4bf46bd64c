// SPDX-License-Identifier: Apache-2.0

//! Events pushed to clients. Each wire message is one JSON object with
//! `kind`, `seq`, `payload` and `emitted_at`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::monitor::{Candidate, CandidateId, ClusterSummary, EditRecord, MonitorEvent};
use crate::pipeline::RunSummary;
use crate::plausibility::{PlausibilityResult, Verdict};
use crate::time::Timestamp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventKind {
    NewCluster,
    ExistingCluster,
    BreakingNewsCandidate,
    PlausibilityResult,
    Verdict,
    Stats,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EventBody {
    NewCluster { cluster: ClusterSummary, edit: EditRecord },
    ExistingCluster { cluster: ClusterSummary, edit: EditRecord },
    BreakingNewsCandidate(Box<Candidate>),
    PlausibilityResult { candidate_id: CandidateId, results: Vec<PlausibilityResult> },
    Verdict(Verdict),
    Stats(RunSummary),
}

impl EventBody {
    pub fn kind(&self) -> EventKind {
        match self {
            EventBody::NewCluster { .. } => EventKind::NewCluster,
            EventBody::ExistingCluster { .. } => EventKind::ExistingCluster,
            EventBody::BreakingNewsCandidate(_) => EventKind::BreakingNewsCandidate,
            EventBody::PlausibilityResult { .. } => EventKind::PlausibilityResult,
            EventBody::Verdict(_) => EventKind::Verdict,
            EventBody::Stats(_) => EventKind::Stats,
        }
    }

    pub fn payload(&self) -> Value {
        let value = match self {
            EventBody::NewCluster { cluster, edit } | EventBody::ExistingCluster { cluster, edit } => {
                Ok(json!({ "cluster": cluster, "edit": edit }))
            }
            EventBody::BreakingNewsCandidate(candidate) => serde_json::to_value(candidate),
            EventBody::PlausibilityResult { candidate_id, results } => {
                Ok(json!({ "candidate_id": candidate_id, "results": results }))
            }
            EventBody::Verdict(verdict) => serde_json::to_value(verdict),
            EventBody::Stats(stats) => serde_json::to_value(stats),
        };
        value.unwrap_or(Value::Null)
    }
}

impl From<MonitorEvent> for EventBody {
    fn from(event: MonitorEvent) -> Self {
        match event {
            MonitorEvent::NewCluster { cluster, edit } => EventBody::NewCluster { cluster, edit },
            MonitorEvent::ExistingCluster { cluster, edit } => EventBody::ExistingCluster { cluster, edit },
            MonitorEvent::BreakingNewsCandidate(c) => EventBody::BreakingNewsCandidate(c),
        }
    }
}

/// An event body stamped with the (virtual or wall) time it happened.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    pub body: EventBody,
    pub at: Timestamp,
}

impl Emission {
    pub fn new(body: EventBody, at: Timestamp) -> Self {
        Emission { body, at }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    pub kind: EventKind,
    pub seq: u64,
    pub payload: Value,
    pub emitted_at: Timestamp,
}

impl WireEvent {
    pub fn from_emission(emission: &Emission, seq: u64) -> Self {
        WireEvent {
            kind: emission.body.kind(),
            seq,
            payload: emission.body.payload(),
            emitted_at: emission.at,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}
