// SPDX-License-Identifier: Apache-2.0

//! Language links: URL construction, response parsing, fixture lookup and a
//! TTL/LRU cache.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use lru::LruCache;
use parking_lot::Mutex;
use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ArticleKey;
use crate::time::Timestamp;

pub const DEFAULT_CACHE_TTL_SECS: i64 = 6 * 3600;
pub const DEFAULT_CACHE_CAPACITY: usize = 100_000;

/// Everything except RFC 3986 unreserved characters.
const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// Percent-encodes a query value or file name component (UTF-8, unreserved
/// characters kept).
pub fn encode_component(s: &str) -> String {
    utf8_percent_encode(s, COMPONENT).to_string()
}

pub fn langlinks_url(key: &ArticleKey) -> String {
    format!(
        "http://{}.wikipedia.org/w/api.php?action=query&format=json&prop=langlinks&titles={}&lllimit=500",
        key.language,
        encode_component(&key.title)
    )
}

/// Sibling articles of `source` in other language editions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LangLinkSet {
    pub source: ArticleKey,
    pub siblings: BTreeSet<ArticleKey>,
    pub fetched_at: Timestamp,
    /// False when the lookup failed; the article then clusters alone.
    pub resolved: bool,
}

impl LangLinkSet {
    /// Builds a set, dropping the source itself and keeping the first sibling
    /// seen for each language.
    pub fn new(source: ArticleKey, siblings: impl IntoIterator<Item = ArticleKey>, fetched_at: Timestamp) -> Self {
        let mut seen = HashSet::new();
        seen.insert(source.language.clone());
        let siblings = siblings
            .into_iter()
            .filter(|k| seen.insert(k.language.clone()))
            .collect();
        LangLinkSet {
            source,
            siblings,
            fetched_at,
            resolved: true,
        }
    }

    pub fn unresolved(source: ArticleKey, fetched_at: Timestamp) -> Self {
        LangLinkSet {
            source,
            siblings: BTreeSet::new(),
            fetched_at,
            resolved: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LangLinkError {
    #[error("rate limited by the API")]
    RateLimited,
    #[error("API error {0}")]
    Api(String),
    #[error("malformed langlinks response: {0}")]
    Malformed(String),
}

fn link_title(entry: &Value) -> Option<&str> {
    entry
        .get("*")
        .or_else(|| entry.get("title"))
        .and_then(Value::as_str)
}

/// Parses an `action=query&prop=langlinks` response body. Accepts both the
/// legacy object-of-pages layout and `formatversion=2` arrays.
pub fn parse_langlinks_response(source: &ArticleKey, body: &str, fetched_at: Timestamp) -> Result<LangLinkSet, LangLinkError> {
    let root: Value = serde_json::from_str(body).map_err(|e| LangLinkError::Malformed(e.to_string()))?;
    if let Some(error) = root.get("error") {
        let code = error.get("code").and_then(Value::as_str).unwrap_or("unknown");
        return Err(if code == "ratelimited" || code == "maxlag" {
            LangLinkError::RateLimited
        } else {
            LangLinkError::Api(code.to_string())
        });
    }
    let pages = root
        .get("query")
        .and_then(|q| q.get("pages"))
        .ok_or_else(|| LangLinkError::Malformed("no query.pages".into()))?;
    let pages: Vec<&Value> = match pages {
        Value::Object(map) => map.values().collect(),
        Value::Array(items) => items.iter().collect(),
        _ => return Err(LangLinkError::Malformed("query.pages is neither object nor array".into())),
    };

    let mut siblings = Vec::new();
    for page in pages {
        let Some(links) = page.get("langlinks") else { continue };
        let links = links
            .as_array()
            .ok_or_else(|| LangLinkError::Malformed("langlinks is not an array".into()))?;
        for entry in links {
            let (Some(lang), Some(title)) = (entry.get("lang").and_then(Value::as_str), link_title(entry)) else {
                return Err(LangLinkError::Malformed(format!("bad langlink entry {entry}")));
            };
            if let Ok(key) = ArticleKey::new(lang, title) {
                siblings.push(key);
            }
        }
    }
    Ok(LangLinkSet::new(source.clone(), siblings, fetched_at))
}

/// Synchronous langlinks lookup. Failures are folded into an unresolved set.
pub trait LangLinkSource {
    fn fetch(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet;
}

/// `<root>/langlinks/<lang>/<percent-encoded title>.json`
pub fn fixture_path(root: &Path, key: &ArticleKey) -> PathBuf {
    root.join("langlinks")
        .join(&key.language)
        .join(format!("{}.json", encode_component(&key.title)))
}

/// Reads verbatim API responses from a fixture tree. Never touches the network.
#[derive(Clone, Debug)]
pub struct FixtureLangLinks {
    root: PathBuf,
}

impl FixtureLangLinks {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureLangLinks { root: root.into() }
    }
}

impl LangLinkSource for FixtureLangLinks {
    fn fetch(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet {
        let path = fixture_path(&self.root, key);
        let Ok(body) = std::fs::read_to_string(&path) else {
            return LangLinkSet::unresolved(key.clone(), now);
        };
        parse_langlinks_response(key, &body, now).unwrap_or_else(|e| {
            tracing::warn!(path = %path.display(), error = %e, "bad langlinks fixture");
            LangLinkSet::unresolved(key.clone(), now)
        })
    }
}

/// In-memory link table; links are returned exactly as inserted.
#[derive(Clone, Debug, Default)]
pub struct StaticLangLinks {
    table: HashMap<ArticleKey, Vec<ArticleKey>>,
}

impl StaticLangLinks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: ArticleKey, siblings: Vec<ArticleKey>) {
        self.table.insert(source, siblings);
    }
}

impl LangLinkSource for StaticLangLinks {
    fn fetch(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet {
        match self.table.get(key) {
            Some(siblings) => LangLinkSet::new(key.clone(), siblings.iter().cloned(), now),
            None => LangLinkSet::new(key.clone(), [], now),
        }
    }
}

/// Thread-safe LRU cache of resolved link sets with a freshness bound.
/// Unresolved sets are never cached so a transient failure is retried on the
/// next sighting.
pub struct LangLinkCache {
    entries: Mutex<LruCache<ArticleKey, LangLinkSet>>,
    ttl_ms: i64,
}

impl LangLinkCache {
    pub fn new(capacity: usize, ttl_secs: i64) -> Self {
        let capacity = NonZeroUsize::new(capacity.max(1)).unwrap_or(NonZeroUsize::MIN);
        LangLinkCache {
            entries: Mutex::new(LruCache::new(capacity)),
            ttl_ms: ttl_secs * 1000,
        }
    }

    pub fn get(&self, key: &ArticleKey, now: Timestamp) -> Option<LangLinkSet> {
        let mut entries = self.entries.lock();
        match entries.get(key) {
            Some(set) if now.millis_since(set.fetched_at) < self.ttl_ms => Some(set.clone()),
            Some(_) => {
                entries.pop(key);
                None
            }
            None => None,
        }
    }

    pub fn insert(&self, set: LangLinkSet) {
        if set.resolved {
            self.entries.lock().put(set.source.clone(), set);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for LangLinkCache {
    fn default() -> Self {
        LangLinkCache::new(DEFAULT_CACHE_CAPACITY, DEFAULT_CACHE_TTL_SECS)
    }
}

/// A source fronted by a [`LangLinkCache`].
pub struct CachedLangLinks<S> {
    inner: S,
    cache: LangLinkCache,
}

impl<S: LangLinkSource> CachedLangLinks<S> {
    pub fn new(inner: S, cache: LangLinkCache) -> Self {
        CachedLangLinks { inner, cache }
    }

    pub fn cache(&self) -> &LangLinkCache {
        &self.cache
    }
}

impl<S: LangLinkSource> LangLinkSource for CachedLangLinks<S> {
    fn fetch(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet {
        if let Some(hit) = self.cache.get(key, now) {
            return hit;
        }
        let set = self.inner.fetch(key, now);
        self.cache.insert(set.clone());
        set
    }
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;

    fn key(l: &str, t: &str) -> ArticleKey {
        ArticleKey::new(l, t).unwrap()
    }

    /// Byte-wise reference encoder, written independently of the
    /// percent-encoding crate.
    fn oracle_encode(s: &str) -> String {
        let mut out = String::new();
        for b in s.bytes() {
            if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
                out.push(b as char);
            } else {
                out.push_str(&format!("%{b:02X}"));
            }
        }
        out
    }

    #[test]
    fn url_pattern() {
        assert_eq!(
            langlinks_url(&key("en", "2013 Russian meteor event")),
            "http://en.wikipedia.org/w/api.php?action=query&format=json&prop=langlinks&titles=2013%20Russian%20meteor%20event&lllimit=500"
        );
        let amp = langlinks_url(&key("en", "A&B"));
        assert!(amp.contains("titles=A%26B&lllimit=500"), "{amp}");
        let ru = langlinks_url(&key("ru", "Падение"));
        assert!(ru.starts_with("http://ru.wikipedia.org/"));
        assert!(ru.contains("titles=%D0%9F%D0%B0%D0%B4%D0%B5%D0%BD%D0%B8%D0%B5&"), "{ru}");
    }

    #[test]
    fn encoding_matches_oracle() {
        for s in ["A&B", "C++ (language)", "Падение метеорита на Урале в 2013 году", "a/b?c=d#e", "100% ~._-", "日本"] {
            assert_eq!(encode_component(s), oracle_encode(s), "{s}");
        }
    }

    #[test]
    fn parses_legacy_and_v2_layouts() {
        let src = key("en", "2013 Russian meteor event");
        let legacy = r#"{"query":{"pages":{"38502353":{"pageid":38502353,"ns":0,"title":"2013 Russian meteor event",
            "langlinks":[{"lang":"ru","*":"Падение метеорита на Урале в 2013 году"},{"lang":"de","*":"Meteor von Tscheljabinsk"},
            {"lang":"de","*":"Duplicate"},{"lang":"en","*":"Self link"}]}}}}"#;
        let set = parse_langlinks_response(&src, legacy, Timestamp::EPOCH).unwrap();
        assert!(set.resolved);
        assert_eq!(set.siblings.len(), 2);
        assert!(set.siblings.contains(&key("ru", "Падение метеорита на Урале в 2013 году")));
        assert!(set.siblings.contains(&key("de", "Meteor von Tscheljabinsk")));

        let v2 = r#"{"query":{"pages":[{"title":"X","langlinks":[{"lang":"fr","title":"Y"}]}]}}"#;
        let set = parse_langlinks_response(&src, v2, Timestamp::EPOCH).unwrap();
        assert_eq!(set.siblings.into_iter().collect::<Vec<_>>(), vec![key("fr", "Y")]);

        let missing = r#"{"query":{"pages":{"-1":{"ns":0,"title":"Nope","missing":""}}}}"#;
        assert!(parse_langlinks_response(&src, missing, Timestamp::EPOCH).unwrap().siblings.is_empty());
    }

    #[test]
    fn response_errors() {
        let src = key("en", "A");
        assert_eq!(
            parse_langlinks_response(&src, r#"{"error":{"code":"ratelimited"}}"#, Timestamp::EPOCH),
            Err(LangLinkError::RateLimited)
        );
        assert!(matches!(
            parse_langlinks_response(&src, r#"{"error":{"code":"badtitle"}}"#, Timestamp::EPOCH),
            Err(LangLinkError::Api(_))
        ));
        assert!(matches!(parse_langlinks_response(&src, "<html>", Timestamp::EPOCH), Err(LangLinkError::Malformed(_))));
        assert!(matches!(parse_langlinks_response(&src, "{}", Timestamp::EPOCH), Err(LangLinkError::Malformed(_))));
    }

    #[test]
    fn fixture_source_reads_tree_and_degrades() {
        let dir = tempfile::tempdir().unwrap();
        let src = key("en", "A&B/C");
        let path = fixture_path(dir.path(), &src);
        assert!(path.ends_with("langlinks/en/A%26B%2FC.json"));
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, r#"{"query":{"pages":{"1":{"langlinks":[{"lang":"fr","*":"Z"}]}}}}"#).unwrap();

        let fixtures = FixtureLangLinks::new(dir.path());
        let set = fixtures.fetch(&src, Timestamp::from_secs(5));
        assert!(set.resolved);
        assert_eq!(set.fetched_at, Timestamp::from_secs(5));
        assert_eq!(set.siblings.len(), 1);

        let none = fixtures.fetch(&key("en", "Absent"), Timestamp::EPOCH);
        assert!(!none.resolved);
        assert!(none.siblings.is_empty());

        std::fs::write(&path, "not json").unwrap();
        assert!(!fixtures.fetch(&src, Timestamp::EPOCH).resolved);
    }

    struct Counting<'a> {
        calls: &'a Cell<usize>,
        resolved: bool,
    }

    impl LangLinkSource for Counting<'_> {
        fn fetch(&self, key: &ArticleKey, now: Timestamp) -> LangLinkSet {
            self.calls.set(self.calls.get() + 1);
            if self.resolved {
                LangLinkSet::new(key.clone(), [ArticleKey::new("fr", "X").unwrap()], now)
            } else {
                LangLinkSet::unresolved(key.clone(), now)
            }
        }
    }

    #[test]
    fn cache_respects_ttl_and_skips_failures() {
        let calls = Cell::new(0);
        let cached = CachedLangLinks::new(Counting { calls: &calls, resolved: true }, LangLinkCache::new(10, 60));
        let k = key("en", "A");
        cached.fetch(&k, Timestamp::from_secs(0));
        cached.fetch(&k, Timestamp::from_secs(59));
        assert_eq!(calls.get(), 1);
        cached.fetch(&k, Timestamp::from_secs(60));
        assert_eq!(calls.get(), 2);

        let calls = Cell::new(0);
        let cached = CachedLangLinks::new(Counting { calls: &calls, resolved: false }, LangLinkCache::new(10, 60));
        cached.fetch(&k, Timestamp::EPOCH);
        cached.fetch(&k, Timestamp::EPOCH);
        assert_eq!(calls.get(), 2);
        assert!(cached.cache().is_empty());
    }

    #[test]
    fn cache_is_capacity_bounded() {
        let cache = LangLinkCache::new(2, 3600);
        for t in ["A", "B", "C"] {
            cache.insert(LangLinkSet::new(key("en", t), [], Timestamp::EPOCH));
        }
        assert_eq!(cache.len(), 2);
        assert!(cache.get(&key("en", "A"), Timestamp::EPOCH).is_none());
        assert!(cache.get(&key("en", "C"), Timestamp::EPOCH).is_some());
    }
}
