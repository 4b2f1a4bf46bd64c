// SPDX-License-Identifier: Apache-2.0

//! MediaWiki API lookups used by the live pipeline.

use std::time::Duration;

use reqwest::StatusCode;
use wikipulse_core::classifier::{compare_url, parse_compare_response, RevisionDiff};
use wikipulse_core::graph::{langlinks_url, parse_langlinks_response, ArticleKey, LangLinkCache, LangLinkError, LangLinkSet};
use wikipulse_core::time::Timestamp;

const USER_AGENT: &str = concat!("wikipulse/", env!("CARGO_PKG_VERSION"), " (edit-spike monitor)");

#[derive(Clone, Debug)]
pub struct ApiConfig {
    /// Replaces `http://<lang>.wikipedia.org` with `<base>/<lang>`. Used to
    /// point the client at a local stand-in.
    pub base_override: Option<String>,
    pub langlinks_timeout: Duration,
    pub rate_limit_retry_after: Duration,
    pub diff_timeout: Duration,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            base_override: None,
            langlinks_timeout: Duration::from_secs(10),
            rate_limit_retry_after: Duration::from_secs(1),
            diff_timeout: Duration::from_secs(2),
        }
    }
}

pub struct WikiApi {
    client: reqwest::Client,
    config: ApiConfig,
    cache: LangLinkCache,
}

enum Attempt {
    Done(LangLinkSet),
    RateLimited,
    Failed,
}

impl WikiApi {
    pub fn new(config: ApiConfig, cache: LangLinkCache) -> reqwest::Result<Self> {
        let client = reqwest::Client::builder().user_agent(USER_AGENT).build()?;
        Ok(WikiApi { client, config, cache })
    }

    pub fn cache(&self) -> &LangLinkCache {
        &self.cache
    }

    fn target(&self, url: String, lang: &str) -> String {
        match &self.config.base_override {
            None => url,
            Some(base) => {
                let path = url.find("/w/api.php").map_or("", |i| &url[i..]);
                format!("{}/{lang}{path}", base.trim_end_matches('/'))
            }
        }
    }

    async fn langlinks_once(&self, url: &str, key: &ArticleKey, now: Timestamp) -> Attempt {
        let response = match self.client.get(url).timeout(self.config.langlinks_timeout).send().await {
            Ok(r) => r,
            Err(e) => {
                tracing::debug!(error = %e, %key, "langlinks request failed");
                return Attempt::Failed;
            }
        };
        if response.status() == StatusCode::TOO_MANY_REQUESTS {
            return Attempt::RateLimited;
        }
        let body = match response.text().await {
            Ok(b) => b,
            Err(_) => return Attempt::Failed,
        };
        match parse_langlinks_response(key, &body, now) {
            Ok(set) => Attempt::Done(set),
            Err(LangLinkError::RateLimited) => Attempt::RateLimited,
            Err(e) => {
                tracing::debug!(error = %e, %key, "langlinks response rejected");
                Attempt::Failed
            }
        }
    }

    /// Sibling set for `key`, served from cache when fresh. A rate-limited
    /// request is retried once; any other failure yields an unresolved set
    /// so the edit still forms a single-article cluster.
    pub async fn langlinks(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet {
        if let Some(hit) = self.cache.get(key, now) {
            return hit;
        }
        let url = self.target(langlinks_url(key), &key.language);
        let mut attempt = self.langlinks_once(&url, key, now).await;
        if matches!(attempt, Attempt::RateLimited) {
            tokio::time::sleep(self.config.rate_limit_retry_after).await;
            attempt = self.langlinks_once(&url, key, now).await;
        }
        match attempt {
            Attempt::Done(set) => {
                self.cache.insert(set.clone());
                set
            }
            _ => LangLinkSet::unresolved(key.clone(), now),
        }
    }

    async fn diff_inner(&self, lang: &str, from: u64, to: u64) -> Option<RevisionDiff> {
        let url = compare_url(lang, i64::try_from(from).ok()?, i64::try_from(to).ok()?).ok()?;
        let response = self.client.get(self.target(url, lang)).send().await.ok()?;
        if !response.status().is_success() {
            return None;
        }
        parse_compare_response(&response.text().await.ok()?, from, to).ok()
    }

    /// Diff between two revisions, or an unavailable diff if the API does
    /// not answer in time.
    pub async fn diff(&self, lang: &str, from: u64, to: u64) -> RevisionDiff {
        match tokio::time::timeout(self.config.diff_timeout, self.diff_inner(lang, from, to)).await {
            Ok(Some(diff)) => diff,
            _ => RevisionDiff::unavailable(from, to),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_override_keeps_query() {
        let api = WikiApi::new(
            ApiConfig {
                base_override: Some("http://127.0.0.1:9/".into()),
                ..ApiConfig::default()
            },
            LangLinkCache::default(),
        )
        .unwrap();
        let key = ArticleKey::new("fr", "Benoît XVI").unwrap();
        let url = api.target(langlinks_url(&key), "fr");
        assert!(url.starts_with("http://127.0.0.1:9/fr/w/api.php?action=query"), "{url}");
        assert!(url.contains("titles=Beno%C3%AEt%20XVI"), "{url}");
    }
}
