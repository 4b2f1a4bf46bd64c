// SPDX-License-Identifier: Apache-2.0

//! Append-only run log of candidates, plausibility results and verdicts.
//!
//! One JSON object per line with a `kind` field. Replaying the log through
//! [`rebuild_store`] reproduces the candidate store that wrote it.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::monitor::{Candidate, CandidateId};
use crate::plausibility::{CandidateStore, PlausibilityResult, StoreError, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogRecord {
    Candidate { candidate: Candidate },
    Plausibility { candidate_id: CandidateId, results: Vec<PlausibilityResult> },
    Verdict { verdict: Verdict },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FsyncPolicy {
    /// Flush to the OS after every record, leave syncing to the OS.
    #[default]
    Never,
    /// `fsync` after every record.
    EveryRecord,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("run log i/o: {0}")]
    Io(#[from] io::Error),
    #[error("run log line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub struct RunLog {
    file: File,
    path: PathBuf,
    offset: u64,
    fsync: FsyncPolicy,
}

impl RunLog {
    /// Opens (creating if needed) a log for appending; new records go after
    /// whatever the file already holds.
    pub fn open(path: impl AsRef<Path>, fsync: FsyncPolicy) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        let offset = file.metadata()?.len();
        Ok(RunLog { file, path, offset, fsync })
    }

    /// Appends one record and returns the byte offset it starts at.
    pub fn append(&mut self, record: &LogRecord) -> io::Result<u64> {
        let mut line = serde_json::to_vec(record).map_err(io::Error::other)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()?;
        if self.fsync == FsyncPolicy::EveryRecord {
            self.file.sync_data()?;
        }
        let at = self.offset;
        self.offset += line.len() as u64;
        Ok(at)
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub fn read_log(path: impl AsRef<Path>) -> Result<Vec<LogRecord>, LogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| LogError::Corrupt {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn apply(store: &mut CandidateStore, record: LogRecord) -> Result<(), StoreError> {
    match record {
        LogRecord::Candidate { candidate } => store.insert(candidate),
        LogRecord::Plausibility { candidate_id, results } => store.attach_results(candidate_id, results),
        LogRecord::Verdict { verdict } => store.record_verdict(&verdict).map(|_| ()),
    }
}

pub fn rebuild_store(records: impl IntoIterator<Item = LogRecord>) -> Result<CandidateStore, StoreError> {
    let mut store = CandidateStore::new();
    for record in records {
        apply(&mut store, record)?;
    }
    Ok(store)
}

/// The candidate store together with the log that backs it. Every mutation
/// is written to the log before it is applied.
pub struct Ledger {
    store: CandidateStore,
    log: Option<RunLog>,
}

impl Ledger {
    /// A ledger with no backing file.
    pub fn in_memory() -> Self {
        Ledger {
            store: CandidateStore::new(),
            log: None,
        }
    }

    /// Restores the store from `path` if it exists, then appends to it.
    pub fn open(path: impl AsRef<Path>, fsync: FsyncPolicy) -> Result<Self, LogError> {
        let path = path.as_ref();
        let store = if path.exists() {
            rebuild_store(read_log(path)?)?
        } else {
            CandidateStore::new()
        };
        Ok(Ledger {
            store,
            log: Some(RunLog::open(path, fsync)?),
        })
    }

    pub fn store(&self) -> &CandidateStore {
        &self.store
    }

    fn persist(&mut self, record: &LogRecord) -> Result<(), LogError> {
        if let Some(log) = self.log.as_mut() {
            log.append(record)?;
        }
        Ok(())
    }

    pub fn add_candidate(&mut self, candidate: Candidate) -> Result<(), LogError> {
        if self.store.get(candidate.id).is_some() {
            return Err(StoreError::Duplicate(candidate.id).into());
        }
        let record = LogRecord::Candidate { candidate };
        self.persist(&record)?;
        apply(&mut self.store, record)?;
        Ok(())
    }

    pub fn add_results(&mut self, candidate_id: CandidateId, results: Vec<PlausibilityResult>) -> Result<(), LogError> {
        if self.store.get(candidate_id).is_none() {
            return Err(StoreError::NotFound(candidate_id).into());
        }
        let record = LogRecord::Plausibility { candidate_id, results };
        self.persist(&record)?;
        apply(&mut self.store, record)?;
        Ok(())
    }

    pub fn record_verdict(&mut self, verdict: Verdict) -> Result<Candidate, LogError> {
        self.store.check_verdict(&verdict)?;
        let record = LogRecord::Verdict { verdict: verdict.clone() };
        self.persist(&record)?;
        Ok(self.store.record_verdict(&verdict)?.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::EditClass;
    use crate::graph::{ArticleKey, ClusterId};
    use crate::monitor::{Cluster, EditRecord, VerdictState};
    use crate::plausibility::{CheckStatus, Decision, SearchQuery};
    use crate::time::Timestamp;

    fn candidate(id: u64) -> Candidate {
        let key = ArticleKey::new("en", "A").unwrap();
        let edit = EditRecord {
            seq: 0,
            timestamp: Timestamp::from_secs(100),
            editor: "x".into(),
            article: key.clone(),
            delta: 3,
            class: EditClass::minor(),
            diff_rev: Some(2),
            old_rev: Some(1),
        };
        let cluster = Cluster::new(ClusterId(id), [key], edit);
        Candidate::from_cluster(CandidateId(id), &cluster, Timestamp::from_secs(100))
    }

    fn verdict(id: u64, decision: Decision) -> Verdict {
        Verdict {
            candidate_id: CandidateId(id),
            decision,
            evaluator: "alice".into(),
            decided_at: Timestamp::from_secs(200),
            note: None,
        }
    }

    #[test]
    fn offsets_increase_and_continue_after_restart() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let mut log = RunLog::open(&path, FsyncPolicy::EveryRecord).unwrap();
        let a = log.append(&LogRecord::Candidate { candidate: candidate(1) }).unwrap();
        let b = log.append(&LogRecord::Verdict { verdict: verdict(1, Decision::Confirmed) }).unwrap();
        assert_eq!(a, 0);
        assert!(b > a);
        let end = log.offset();
        drop(log);

        let mut log = RunLog::open(&path, FsyncPolicy::Never).unwrap();
        assert_eq!(log.offset(), end);
        let c = log.append(&LogRecord::Candidate { candidate: candidate(2) }).unwrap();
        assert_eq!(c, end);
        assert_eq!(read_log(&path).unwrap().len(), 3);
    }

    #[test]
    fn record_kinds_are_self_describing() {
        let line = serde_json::to_string(&LogRecord::Verdict { verdict: verdict(4, Decision::Rejected) }).unwrap();
        assert!(line.starts_with(r#"{"kind":"verdict","verdict":{"candidate_id":4,"decision":"rejected""#), "{line}");
    }

    #[test]
    fn verdict_lifecycle() {
        let mut ledger = Ledger::in_memory();
        ledger.add_candidate(candidate(1)).unwrap();
        assert!(matches!(ledger.add_candidate(candidate(1)), Err(LogError::Store(StoreError::Duplicate(_)))));

        let c = ledger.record_verdict(verdict(1, Decision::Confirmed)).unwrap();
        assert_eq!(c.verdict, VerdictState::Confirmed);
        assert_eq!(c.verdict_by.as_deref(), Some("alice"));
        assert!(matches!(
            ledger.record_verdict(verdict(1, Decision::Rejected)),
            Err(LogError::Store(StoreError::Conflict(CandidateId(1))))
        ));
        assert!(matches!(
            ledger.record_verdict(verdict(9, Decision::Rejected)),
            Err(LogError::Store(StoreError::NotFound(CandidateId(9))))
        ));
        assert_eq!(ledger.store().verdict_count(), 1);
        assert_eq!(ledger.store().next_id(), 2);
    }

    #[test]
    fn ledger_round_trips_through_its_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl");
        let mut ledger = Ledger::open(&path, FsyncPolicy::Never).unwrap();
        ledger.add_candidate(candidate(1)).unwrap();
        ledger.add_candidate(candidate(2)).unwrap();
        let result = PlausibilityResult {
            connector: "twitter".into(),
            query: SearchQuery { language: "en".into(), query_text: "A".into() },
            hits: Vec::new(),
            fetched_at: Timestamp::from_secs(101),
            status: CheckStatus::Empty,
            error: None,
        };
        ledger.add_results(CandidateId(2), vec![result]).unwrap();
        ledger.record_verdict(verdict(2, Decision::Rejected)).unwrap();
        // Failed operations leave no trace in the log.
        assert!(ledger.record_verdict(verdict(2, Decision::Confirmed)).is_err());
        assert!(ledger.add_results(CandidateId(5), Vec::new()).is_err());

        let live = ledger.store().canonical_bytes();
        let rebuilt = rebuild_store(read_log(&path).unwrap()).unwrap();
        assert_eq!(rebuilt.canonical_bytes(), live);

        drop(ledger);
        let reopened = Ledger::open(&path, FsyncPolicy::Never).unwrap();
        assert_eq!(reopened.store().canonical_bytes(), live);
        assert_eq!(reopened.store().next_id(), 3);
    }

    #[test]
    fn corrupt_line_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"kind\":\"nope\"}\n").unwrap();
        assert!(matches!(read_log(&path), Err(LogError::Corrupt { line: 1, .. })));
    }
}
