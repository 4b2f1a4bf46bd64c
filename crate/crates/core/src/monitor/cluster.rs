// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classifier::EditClass;
use crate::graph::{ArticleKey, ClusterId};
use crate::time::Timestamp;

/// One edit in a cluster's timeline. `seq` is the global arrival index and
/// breaks timestamp ties when timelines are interleaved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditRecord {
    pub seq: u64,
    pub timestamp: Timestamp,
    pub editor: String,
    pub article: ArticleKey,
    pub delta: i64,
    pub class: EditClass,
    pub diff_rev: Option<u64>,
    pub old_rev: Option<u64>,
}

impl EditRecord {
    /// Trivial edits stay in the timeline but do not feed the criteria.
    pub fn counted(&self) -> bool {
        !self.class.is_trivial()
    }
}

/// A monitored topic: its member articles and rolling edit statistics.
///
/// Occurrences, editors and gaps are computed over counted edits only;
/// `last_edit_at` follows every edit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: BTreeSet<ArticleKey>,
    pub edits: Vec<EditRecord>,
    pub editors: BTreeSet<String>,
    pub occurrences: usize,
    pub created_at: Timestamp,
    pub last_edit_at: Timestamp,
    pub last_counted_at: Option<Timestamp>,
    pub max_gap_ms: i64,
    pub candidate_fired: bool,
}

impl Cluster {
    pub fn new(id: ClusterId, members: impl IntoIterator<Item = ArticleKey>, first: EditRecord) -> Self {
        let mut cluster = Cluster {
            id,
            members: members.into_iter().collect(),
            edits: Vec::new(),
            editors: BTreeSet::new(),
            occurrences: 0,
            created_at: first.timestamp,
            last_edit_at: first.timestamp,
            last_counted_at: None,
            max_gap_ms: 0,
            candidate_fired: false,
        };
        cluster.record(first);
        cluster
    }

    /// Appends an edit that is not older than the current timeline.
    pub fn record(&mut self, edit: EditRecord) {
        self.last_edit_at = self.last_edit_at.max(edit.timestamp);
        if edit.counted() {
            if let Some(prev) = self.last_counted_at {
                self.max_gap_ms = self.max_gap_ms.max(edit.timestamp.millis_since(prev));
            }
            self.last_counted_at = Some(edit.timestamp);
            self.occurrences += 1;
            if !self.editors.contains(&edit.editor) {
                self.editors.insert(edit.editor.clone());
            }
        }
        self.edits.push(edit);
    }

    pub fn max_gap_secs(&self) -> f64 {
        self.max_gap_ms as f64 / 1000.0
    }

    /// Milliseconds from the last counted edit to `now`; `None` before any
    /// counted edit.
    pub fn since_last_counted_ms(&self, now: Timestamp) -> Option<i64> {
        self.last_counted_at.map(|t| now.millis_since(t))
    }

    pub fn summary(&self) -> ClusterSummary {
        ClusterSummary {
            id: self.id,
            members: self.members.iter().cloned().collect(),
            occurrences: self.occurrences,
            editors: self.editors.len(),
            edits: self.edits.len(),
            max_gap_secs: self.max_gap_secs(),
            created_at: self.created_at,
            last_edit_at: self.last_edit_at,
            candidate_fired: self.candidate_fired,
        }
    }
}

/// Compact cluster view carried by `newCluster`/`existingCluster` events.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: ClusterId,
    pub members: Vec<ArticleKey>,
    pub occurrences: usize,
    pub editors: usize,
    pub edits: usize,
    pub max_gap_secs: f64,
    pub created_at: Timestamp,
    pub last_edit_at: Timestamp,
    pub candidate_fired: bool,
}

/// Folds two live clusters that turned out to be one topic. The result keeps
/// `a.id`; timelines are interleaved by `(timestamp, seq)` and all statistics
/// are recomputed over the merged timeline.
pub fn merge(a: Cluster, b: Cluster) -> Cluster {
    let mut edits = Vec::with_capacity(a.edits.len() + b.edits.len());
    let (mut left, mut right) = (a.edits.into_iter().peekable(), b.edits.into_iter().peekable());
    loop {
        let take_left = match (left.peek(), right.peek()) {
            (Some(l), Some(r)) => (l.timestamp, l.seq) <= (r.timestamp, r.seq),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        let next = if take_left { left.next() } else { right.next() };
        edits.extend(next);
    }

    let mut members = a.members;
    members.extend(b.members);
    let mut merged = Cluster {
        id: a.id,
        members,
        edits: Vec::with_capacity(edits.len()),
        editors: BTreeSet::new(),
        occurrences: 0,
        created_at: a.created_at.min(b.created_at),
        last_edit_at: a.last_edit_at.max(b.last_edit_at),
        last_counted_at: None,
        max_gap_ms: 0,
        candidate_fired: a.candidate_fired || b.candidate_fired,
    };
    for edit in edits {
        merged.record(edit);
    }
    merged
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::classifier::EditClass;

    fn edit(seq: u64, secs: i64, editor: &str, trivial: bool) -> EditRecord {
        EditRecord {
            seq,
            timestamp: Timestamp::from_secs(secs),
            editor: editor.to_string(),
            article: ArticleKey::new("en", &format!("A{}", seq % 3)).unwrap(),
            delta: 10,
            class: if trivial { EditClass::trivial() } else { EditClass::minor() },
            diff_rev: None,
            old_rev: None,
        }
    }

    fn build(id: u64, edits: Vec<EditRecord>) -> Cluster {
        let mut it = edits.into_iter();
        let first = it.next().unwrap();
        let mut c = Cluster::new(ClusterId(id), [first.article.clone()], first);
        for e in it {
            c.members.insert(e.article.clone());
            c.record(e);
        }
        c
    }

    #[test]
    fn statistics_skip_trivial_edits() {
        let c = build(
            1,
            vec![edit(0, 0, "a", false), edit(1, 20, "b", true), edit(2, 30, "c", false), edit(3, 100, "d", true)],
        );
        assert_eq!(c.occurrences, 2);
        assert_eq!(c.editors, BTreeSet::from(["a".to_string(), "c".to_string()]));
        assert_eq!(c.max_gap_ms, 30_000);
        assert_eq!(c.last_edit_at, Timestamp::from_secs(100));
        assert_eq!(c.last_counted_at, Some(Timestamp::from_secs(30)));
        assert_eq!(c.edits.len(), 4);
    }

    #[test]
    fn single_edit_has_zero_gap() {
        let c = build(1, vec![edit(0, 5, "a", false)]);
        assert_eq!(c.max_gap_ms, 0);
        assert_eq!(c.occurrences, 1);
    }

    #[test]
    fn merging_singletons_ten_seconds_apart() {
        let a = build(1, vec![edit(0, 100, "a", false)]);
        let b = build(2, vec![edit(1, 110, "b", false)]);
        let m = merge(a, b);
        assert_eq!(m.id, ClusterId(1));
        assert_eq!(m.max_gap_secs(), 10.0);
        assert_eq!(m.occurrences, 2);
        assert_eq!(m.editors.len(), 2);
        assert_eq!(m.created_at, Timestamp::from_secs(100));
    }

    /// Statistics derived directly from a sorted timeline.
    fn from_scratch(timeline: &[EditRecord]) -> (usize, BTreeSet<String>, i64, Timestamp, Option<Timestamp>) {
        let counted: Vec<&EditRecord> = timeline.iter().filter(|e| !e.class.is_trivial()).collect();
        let max_gap = counted
            .windows(2)
            .map(|w| w[1].timestamp.as_millis() - w[0].timestamp.as_millis())
            .max()
            .unwrap_or(0);
        let editors = counted.iter().map(|e| e.editor.clone()).collect();
        let last = timeline.iter().map(|e| e.timestamp).max().unwrap();
        (counted.len(), editors, max_gap, last, counted.last().map(|e| e.timestamp))
    }

    fn timeline_strategy() -> impl Strategy<Value = Vec<(i64, u8, bool)>> {
        prop::collection::vec((0i64..400, 0u8..5, prop::bool::weighted(0.2)), 1..30)
    }

    proptest! {
        #[test]
        fn merge_equals_recomputation(xs in timeline_strategy(), ys in timeline_strategy(), fa in any::<bool>(), fb in any::<bool>()) {
            // Assign global arrival order, then split into two clusters.
            let mut all: Vec<(i64, u8, bool, bool)> = xs.iter().map(|&(t, e, tr)| (t, e, tr, true))
                .chain(ys.iter().map(|&(t, e, tr)| (t, e, tr, false))).collect();
            all.sort_by_key(|x| x.0);
            let records: Vec<(EditRecord, bool)> = all.iter().enumerate()
                .map(|(i, &(t, e, tr, left))| (edit(i as u64, t, &format!("ed{e}"), tr), left)).collect();
            let left: Vec<EditRecord> = records.iter().filter(|r| r.1).map(|r| r.0.clone()).collect();
            let right: Vec<EditRecord> = records.iter().filter(|r| !r.1).map(|r| r.0.clone()).collect();
            prop_assume!(!left.is_empty() && !right.is_empty());

            let mut a = build(1, left);
            let mut b = build(2, right);
            a.candidate_fired = fa;
            b.candidate_fired = fb;
            let m = merge(a, b);

            let mut concat: Vec<EditRecord> = records.into_iter().map(|r| r.0).collect();
            concat.sort_by_key(|e| (e.timestamp, e.seq));
            let (occ, editors, gap, last, last_counted) = from_scratch(&concat);
            prop_assert_eq!(m.occurrences, occ);
            prop_assert_eq!(&m.editors, &editors);
            prop_assert_eq!(m.max_gap_ms, gap);
            prop_assert_eq!(m.last_edit_at, last);
            prop_assert_eq!(m.last_counted_at, last_counted);
            prop_assert_eq!(m.candidate_fired, fa || fb);
            prop_assert_eq!(&m.edits, &concat);
        }
    }
}
