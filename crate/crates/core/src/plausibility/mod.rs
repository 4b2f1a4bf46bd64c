// SPDX-License-Identifier: Apache-2.0

//! Cross-language plausibility checks and evaluator verdicts.

mod checks;
mod store;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use checks::{
    corpus_path, query_digest, run_checks, ConnectorError, CorpusConnector, Hit, PlausibilityResult,
    SearchConnector, CheckStatus, DEFAULT_CHECK_TIMEOUT,
};
pub use store::{CandidateStore, Decision, StoreError, Verdict};

use crate::graph::ArticleKey;

/// One search: an article title in its own language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SearchQuery {
    pub language: String,
    pub query_text: String,
}

/// One query per member article, ordered by language code, with exact
/// `(language, text)` duplicates removed.
pub fn build_queries(members: &[ArticleKey]) -> Vec<SearchQuery> {
    let set: BTreeSet<SearchQuery> = members
        .iter()
        .map(|k| SearchQuery {
            language: k.language.clone(),
            query_text: k.title.replace('_', " "),
        })
        .filter(|q| !q.query_text.is_empty())
        .collect();
    set.into_iter().collect()
}
