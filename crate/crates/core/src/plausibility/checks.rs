// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use super::SearchQuery;
use crate::time::Timestamp;

pub const DEFAULT_CHECK_TIMEOUT: Duration = Duration::from_secs(10);

/// A social-network post returned by a connector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub author: String,
    pub text: String,
    pub posted_at: Timestamp,
    pub source_url: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Ok,
    Empty,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlausibilityResult {
    pub connector: String,
    pub query: SearchQuery,
    pub hits: Vec<Hit>,
    pub fetched_at: Timestamp,
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConnectorError {
    #[error("no result for query {0:?}")]
    NotFound(String),
    #[error("connector i/o: {0}")]
    Io(String),
    #[error("bad connector response: {0}")]
    Malformed(String),
    #[error("timed out")]
    Timeout,
}

/// A full-text social search backend.
pub trait SearchConnector: Send + Sync {
    fn name(&self) -> &str;
    fn search(&self, query: &SearchQuery) -> Result<Vec<Hit>, ConnectorError>;
}

pub fn query_digest(query_text: &str) -> String {
    let digest = Sha1::digest(query_text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// `<root>/<connector>/<sha1 of query text>.json`
pub fn corpus_path(root: &Path, connector: &str, query_text: &str) -> PathBuf {
    root.join(connector).join(format!("{}.json", query_digest(query_text)))
}

/// Reference connector answering from canned hit arrays on disk.
#[derive(Clone, Debug)]
pub struct CorpusConnector {
    name: String,
    root: PathBuf,
}

impl CorpusConnector {
    pub fn new(name: impl Into<String>, corpus_root: impl Into<PathBuf>) -> Self {
        CorpusConnector {
            name: name.into(),
            root: corpus_root.into(),
        }
    }
}

impl SearchConnector for CorpusConnector {
    fn name(&self) -> &str {
        &self.name
    }

    fn search(&self, query: &SearchQuery) -> Result<Vec<Hit>, ConnectorError> {
        if !self.root.join(&self.name).is_dir() {
            return Err(ConnectorError::Io(format!("no corpus directory for {}", self.name)));
        }
        let path = corpus_path(&self.root, &self.name, &query.query_text);
        let body = match std::fs::read_to_string(&path) {
            Ok(body) => body,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ConnectorError::NotFound(query.query_text.clone()))
            }
            Err(e) => return Err(ConnectorError::Io(e.to_string())),
        };
        serde_json::from_str(&body).map_err(|e| ConnectorError::Malformed(e.to_string()))
    }
}

fn result_for(connector: &str, query: &SearchQuery, outcome: Result<Vec<Hit>, ConnectorError>, at: Timestamp) -> PlausibilityResult {
    let (hits, status, error) = match outcome {
        Ok(hits) if hits.is_empty() => (hits, CheckStatus::Empty, None),
        Ok(hits) => (hits, CheckStatus::Ok, None),
        // The corpus holds no post for this query.
        Err(ConnectorError::NotFound(_)) => (Vec::new(), CheckStatus::Empty, None),
        Err(e) => (Vec::new(), CheckStatus::Error, Some(e.to_string())),
    };
    PlausibilityResult {
        connector: connector.to_string(),
        query: query.clone(),
        hits,
        fetched_at: at,
        status,
        error,
    }
}

/// Runs every query against every connector concurrently. Always returns
/// `connectors.len() * queries.len()` results in connector-major order; a
/// call still running after `timeout` is reported as an error and left to
/// finish on its own thread.
pub fn run_checks(
    queries: &[SearchQuery],
    connectors: &[Arc<dyn SearchConnector>],
    timeout: Duration,
    fetched_at: Timestamp,
) -> Vec<PlausibilityResult> {
    let total = queries.len() * connectors.len();
    let mut outcomes: Vec<Option<Result<Vec<Hit>, ConnectorError>>> = vec![None; total];
    let (tx, rx) = mpsc::channel();

    for (ci, connector) in connectors.iter().enumerate() {
        for (qi, query) in queries.iter().enumerate() {
            let slot = ci * queries.len() + qi;
            let (tx, connector, query) = (tx.clone(), Arc::clone(connector), query.clone());
            std::thread::spawn(move || {
                let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| connector.search(&query)))
                    .unwrap_or_else(|_| Err(ConnectorError::Io("connector panicked".into())));
                let _ = tx.send((slot, outcome));
            });
        }
    }
    drop(tx);

    let deadline = Instant::now() + timeout;
    let mut pending = total;
    while pending > 0 {
        let left = deadline.saturating_duration_since(Instant::now());
        match rx.recv_timeout(left) {
            Ok((slot, outcome)) => {
                outcomes[slot] = Some(outcome);
                pending -= 1;
            }
            Err(_) => break,
        }
    }

    let mut results = Vec::with_capacity(total);
    for (ci, connector) in connectors.iter().enumerate() {
        for (qi, query) in queries.iter().enumerate() {
            let outcome = outcomes[ci * queries.len() + qi]
                .take()
                .unwrap_or(Err(ConnectorError::Timeout));
            results.push(result_for(connector.name(), query, outcome, fetched_at));
        }
    }
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(lang: &str, text: &str) -> SearchQuery {
        SearchQuery { language: lang.into(), query_text: text.into() }
    }

    struct Slow;
    impl SearchConnector for Slow {
        fn name(&self) -> &str {
            "slow"
        }
        fn search(&self, _q: &SearchQuery) -> Result<Vec<Hit>, ConnectorError> {
            std::thread::sleep(Duration::from_secs(2));
            Ok(Vec::new())
        }
    }

    struct Panicky;
    impl SearchConnector for Panicky {
        fn name(&self) -> &str {
            "panicky"
        }
        fn search(&self, _q: &SearchQuery) -> Result<Vec<Hit>, ConnectorError> {
            panic!("boom")
        }
    }

    #[test]
    fn digest_is_sha1_hex() {
        assert_eq!(query_digest("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
        assert_eq!(query_digest(""), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    }

    #[test]
    fn corpus_connector_reads_hits() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_path(dir.path(), "twitter", "Pope Benedict XVI");
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(
            &path,
            r#"[{"author":"Reuters","text":"Pope Benedict to resign","posted_at":"2013-02-11T10:59:00Z","source_url":"https://example.org/1"}]"#,
        )
        .unwrap();
        let empty = corpus_path(dir.path(), "twitter", "Nothing");
        std::fs::write(&empty, "[]").unwrap();

        let twitter: Arc<dyn SearchConnector> = Arc::new(CorpusConnector::new("twitter", dir.path()));
        let facebook: Arc<dyn SearchConnector> = Arc::new(CorpusConnector::new("facebook", dir.path()));
        let queries = [q("en", "Pope Benedict XVI"), q("en", "Nothing"), q("en", "Unknown")];
        let at = Timestamp::from_secs(9);
        let results = run_checks(&queries, &[twitter, facebook], DEFAULT_CHECK_TIMEOUT, at);

        assert_eq!(results.len(), 6);
        assert_eq!(results[0].status, CheckStatus::Ok);
        assert_eq!(results[0].hits[0].author, "Reuters");
        assert_eq!(results[0].fetched_at, at);
        assert_eq!(results[1].status, CheckStatus::Empty);
        assert_eq!(results[2].status, CheckStatus::Empty);
        assert_eq!(results[3].connector, "facebook");
        assert!(results[3..].iter().all(|r| r.status == CheckStatus::Error && r.hits.is_empty()));
    }

    #[test]
    fn failures_are_isolated_and_cardinality_holds() {
        let connectors: Vec<Arc<dyn SearchConnector>> = vec![Arc::new(Slow), Arc::new(Panicky), Arc::new(CorpusConnector::new("x", "/nonexistent"))];
        let queries = [q("en", "A"), q("fr", "B")];
        let t0 = Instant::now();
        let results = run_checks(&queries, &connectors, Duration::from_millis(200), Timestamp::EPOCH);
        assert!(t0.elapsed() < Duration::from_secs(1));
        assert_eq!(results.len(), 6);
        assert!(results.iter().all(|r| r.status == CheckStatus::Error));
        assert_eq!(results[0].error.as_deref(), Some("timed out"));
        assert_eq!(results[2].error.as_deref(), Some("connector i/o: connector panicked"));
    }

    #[test]
    fn no_connectors_no_results() {
        assert!(run_checks(&[q("en", "A")], &[], DEFAULT_CHECK_TIMEOUT, Timestamp::EPOCH).is_empty());
    }
}
