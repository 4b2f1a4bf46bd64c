// SPDX-License-Identifier: Apache-2.0

//! The incremental monitoring engine. All state lives on one consumer;
//! `observe` and `evict` must be called in timestamp order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::candidate::{Candidate, CandidateId};
use super::cluster::{merge, Cluster, ClusterSummary, EditRecord};
use super::CriteriaConfig;
use crate::classifier::EditClass;
use crate::graph::{ArticleKey, ClusterId, ClusterIndex, LangLinkSet};
use crate::ingest::RecentChange;
use crate::time::Timestamp;

#[derive(Clone, Debug, PartialEq)]
pub enum MonitorEvent {
    NewCluster { cluster: ClusterSummary, edit: EditRecord },
    ExistingCluster { cluster: ClusterSummary, edit: EditRecord },
    BreakingNewsCandidate(Box<Candidate>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorCounters {
    pub edits: u64,
    pub counted_edits: u64,
    pub clusters_created: u64,
    pub merges: u64,
    pub candidates_fired: u64,
    pub evicted: u64,
}

pub struct Monitor {
    config: CriteriaConfig,
    index: ClusterIndex,
    clusters: HashMap<ClusterId, Cluster>,
    next_seq: u64,
    next_candidate: u64,
    counters: MonitorCounters,
}

impl Monitor {
    pub fn new(config: CriteriaConfig) -> Self {
        Monitor {
            config,
            index: ClusterIndex::new(),
            clusters: HashMap::new(),
            next_seq: 0,
            next_candidate: 1,
            counters: MonitorCounters::default(),
        }
    }

    /// Candidate ids start at `first`, e.g. to continue after a restored log.
    pub fn with_first_candidate_id(mut self, first: u64) -> Self {
        self.next_candidate = first.max(1);
        self
    }

    pub fn config(&self) -> &CriteriaConfig {
        &self.config
    }

    pub fn counters(&self) -> MonitorCounters {
        self.counters
    }

    pub fn live_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn indexed_keys(&self) -> usize {
        self.index.len()
    }

    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.get(&id)
    }

    pub fn clusters(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.values()
    }

    /// Resolves the cluster of `change` from its language links, folding any
    /// clusters the links reveal to be the same topic, then ingests the edit.
    pub fn observe(&mut self, change: &RecentChange, links: &LangLinkSet, class: EditClass) -> Vec<MonitorEvent> {
        let Ok(key) = ArticleKey::new(&change.language, &change.title) else {
            return Vec::new();
        };
        let resolution = self.index.cluster_of(&key, links);
        let id = resolution.id;
        for absorbed in resolution.absorbed {
            let Some(other) = self.clusters.remove(&absorbed) else { continue };
            if let Some(survivor) = self.clusters.remove(&id) {
                self.clusters.insert(id, merge(survivor, other));
                self.counters.merges += 1;
            }
        }
        self.apply(id, key, resolution.new_keys, change, class)
    }

    /// Ingests an edit into a cluster the caller has already resolved,
    /// bypassing language-link resolution.
    pub fn ingest_edit(&mut self, change: &RecentChange, cluster_id: ClusterId, class: EditClass) -> Vec<MonitorEvent> {
        let Ok(key) = ArticleKey::new(&change.language, &change.title) else {
            return Vec::new();
        };
        let members = vec![key.clone()];
        self.apply(cluster_id, key, members, change, class)
    }

    fn apply(
        &mut self,
        id: ClusterId,
        key: ArticleKey,
        new_members: Vec<ArticleKey>,
        change: &RecentChange,
        class: EditClass,
    ) -> Vec<MonitorEvent> {
        let edit = EditRecord {
            seq: self.next_seq,
            timestamp: change.timestamp,
            editor: change.editor.clone(),
            article: key,
            delta: change.delta,
            class,
            diff_rev: change.diff_rev,
            old_rev: change.old_rev,
        };
        self.next_seq += 1;
        self.counters.edits += 1;
        if edit.counted() {
            self.counters.counted_edits += 1;
        }

        let mut events = Vec::with_capacity(2);
        let cluster = match self.clusters.get_mut(&id) {
            Some(cluster) => {
                cluster.members.extend(new_members);
                cluster.record(edit.clone());
                events.push(MonitorEvent::ExistingCluster {
                    cluster: cluster.summary(),
                    edit,
                });
                cluster
            }
            None => {
                self.counters.clusters_created += 1;
                let cluster = self
                    .clusters
                    .entry(id)
                    .or_insert_with(|| Cluster::new(id, new_members, edit.clone()));
                events.push(MonitorEvent::NewCluster {
                    cluster: cluster.summary(),
                    edit,
                });
                cluster
            }
        };

        let now = change.timestamp;
        if !cluster.candidate_fired {
            let fires = cluster.since_last_counted_ms(now).is_some_and(|since| {
                self.config
                    .satisfied(cluster.occurrences, cluster.max_gap_ms, cluster.editors.len(), since)
            });
            if fires {
                cluster.candidate_fired = true;
                let candidate = Candidate::from_cluster(CandidateId(self.next_candidate), cluster, now);
                self.next_candidate += 1;
                self.counters.candidates_fired += 1;
                events.push(MonitorEvent::BreakingNewsCandidate(Box::new(candidate)));
            }
        }
        events
    }

    /// Removes every cluster idle for at least `ttl_secs` at `now` and
    /// releases its index entries. Returns the evicted ids in ascending order.
    pub fn evict(&mut self, now: Timestamp) -> Vec<ClusterId> {
        let ttl_ms = i64::from(self.config.ttl_secs) * 1000;
        let mut stale: Vec<ClusterId> = self
            .clusters
            .values()
            .filter(|c| now.millis_since(c.last_edit_at) >= ttl_ms)
            .map(|c| c.id)
            .collect();
        stale.sort_unstable();
        for id in &stale {
            if let Some(cluster) = self.clusters.remove(id) {
                self.index.release(&cluster.members);
            }
        }
        self.counters.evicted += stale.len() as u64;
        stale
    }
}
