// SPDX-License-Identifier: Apache-2.0

//! Cross-language article identity: who is the same topic as whom.

mod index;
mod links;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use index::{ClusterIndex, Resolution};
pub use links::{
    encode_component, fixture_path, langlinks_url, parse_langlinks_response, CachedLangLinks,
    FixtureLangLinks, LangLinkCache, LangLinkError, LangLinkSet, LangLinkSource, StaticLangLinks,
    DEFAULT_CACHE_CAPACITY, DEFAULT_CACHE_TTL_SECS,
};

use crate::ingest::canonical_title;

/// `(language, title)` identity of one article version. Titles are stored
/// canonically with the first letter upper-cased, so two keys compare equal
/// exactly when MediaWiki would treat them as the same page.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArticleKey {
    pub language: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("article key needs a non-empty language and title (got {language:?}, {title:?})")]
pub struct InvalidKey {
    pub language: String,
    pub title: String,
}

impl ArticleKey {
    pub fn new(language: &str, title: &str) -> Result<Self, InvalidKey> {
        let lang = language.trim();
        let title = first_letter_upper(&canonical_title(title));
        if lang.is_empty() || title.is_empty() {
            return Err(InvalidKey {
                language: language.to_string(),
                title,
            });
        }
        Ok(ArticleKey {
            language: lang.to_string(),
            title,
        })
    }
}

impl fmt::Display for ArticleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.title)
    }
}

fn first_letter_upper(title: &str) -> String {
    let mut chars = title.chars();
    let Some(first) = chars.next() else {
        return String::new();
    };
    let mut upper = first.to_uppercase();
    // Multi-char expansions (e.g. 'ß') are left alone, as MediaWiki does.
    match (upper.next(), upper.next()) {
        (Some(u), None) => {
            let mut out = String::with_capacity(title.len());
            out.push(u);
            out.push_str(chars.as_str());
            out
        }
        _ => title.to_string(),
    }
}

/// Stable identifier of one live article cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub u64);

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cluster-{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_letter_case_insensitive_identity() {
        let a = ArticleKey::new("en", "iPhone").unwrap();
        let b = ArticleKey::new("en", "IPhone").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.title, "IPhone");
        assert_ne!(ArticleKey::new("en", "Abc").unwrap(), ArticleKey::new("en", "ABc").unwrap());
        assert_eq!(
            ArticleKey::new("ru", "падение_метеорита").unwrap().title,
            "Падение метеорита"
        );
        assert_eq!(ArticleKey::new("de", "ßx").unwrap().title, "ßx");
    }

    #[test]
    fn empty_parts_rejected() {
        assert!(ArticleKey::new("", "A").is_err());
        assert!(ArticleKey::new("en", " _ ").is_err());
    }
}
