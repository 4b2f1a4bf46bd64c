// SPDX-License-Identifier: Apache-2.0

//! Edit classification from revision diffs.

mod compare;
mod rules;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use compare::{
    compare_fixture_path, compare_url, parse_compare_response, CompareError, DiffSource, FixtureDiffs, NoDiffs,
};
pub use rules::{classify, punctuation_insensitive, ClassifierConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EditLevel {
    Trivial,
    Minor,
    Major,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signal {
    LivingPeopleRemoved,
    NewParagraph,
    TenseChange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditClass {
    pub level: EditLevel,
    pub signals: BTreeSet<Signal>,
}

impl EditClass {
    pub fn trivial() -> Self {
        EditClass {
            level: EditLevel::Trivial,
            signals: BTreeSet::new(),
        }
    }

    pub fn minor() -> Self {
        EditClass {
            level: EditLevel::Minor,
            signals: BTreeSet::new(),
        }
    }

    pub fn major(signal: Signal) -> Self {
        EditClass {
            level: EditLevel::Major,
            signals: BTreeSet::from([signal]),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.level == EditLevel::Trivial
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffStatus {
    Available,
    /// Fragments present but their byte balance disagrees with the feed's delta.
    Stale,
    /// No diff could be obtained; classification falls back to delta and comment.
    Unavailable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionDiff {
    pub from_rev: u64,
    pub to_rev: u64,
    pub added: Vec<String>,
    pub removed: Vec<String>,
    pub net_delta: i64,
    pub status: DiffStatus,
}

impl RevisionDiff {
    pub fn unavailable(from_rev: u64, to_rev: u64) -> Self {
        RevisionDiff {
            from_rev,
            to_rev,
            added: Vec::new(),
            removed: Vec::new(),
            net_delta: 0,
            status: DiffStatus::Unavailable,
        }
    }

    pub fn is_available(&self) -> bool {
        self.status != DiffStatus::Unavailable
    }

    /// Flags the diff stale when its byte balance disagrees with the feed's
    /// delta (tolerance 0).
    pub fn reconcile(mut self, feed_delta: i64) -> Self {
        if self.status == DiffStatus::Available && self.net_delta != feed_delta {
            self.status = DiffStatus::Stale;
        }
        self
    }
}
