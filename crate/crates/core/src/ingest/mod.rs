// SPDX-License-Identifier: Apache-2.0

//! Recent-change acquisition: channel naming, line parsing, filtering and
//! replay of captured streams.

mod filter;
mod parse;
mod replay;

use serde::{Deserialize, Serialize};

use crate::time::Timestamp;

pub use filter::{is_bot_editor, is_meta_title, BotPolicy, IngestFilter, Rejection, META_NAMESPACES};
pub use parse::{parse_rc_line, parse_rc_payload, render_payload, strip_control_codes, ParseError, ParseErrorKind};
pub use replay::{
    replay, ChangeSink, ReplayError, ReplayReader, ReplayRecord, ReplaySummary, Speedup,
};

/// One message as received from a recent-changes room.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawLine {
    pub channel: String,
    pub payload: String,
    pub received_at: Timestamp,
}

impl RawLine {
    pub fn new(channel: impl Into<String>, payload: impl Into<String>, received_at: Timestamp) -> Self {
        RawLine {
            channel: channel.into(),
            payload: payload.into(),
            received_at,
        }
    }
}

/// One parsed edit event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecentChange {
    pub language: String,
    /// Underscores replaced by spaces, outer whitespace trimmed, case kept.
    pub title: String,
    pub diff_rev: Option<u64>,
    pub old_rev: Option<u64>,
    pub url: String,
    pub editor: String,
    pub delta: i64,
    pub comment: String,
    pub timestamp: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LanguageError {
    #[error("language code must be a non-empty token without whitespace or dots, got {0:?}")]
    Invalid(String),
    #[error("channel {0:?} does not match #<lang>.wikipedia")]
    BadChannel(String),
}

fn valid_language_token(lang: &str) -> bool {
    !lang.is_empty() && !lang.contains('.') && !lang.chars().any(char::is_whitespace)
}

/// Room name carrying the recent changes of one language edition.
pub fn channel_for_language(lang: &str) -> Result<String, LanguageError> {
    if !valid_language_token(lang) {
        return Err(LanguageError::Invalid(lang.to_string()));
    }
    Ok(format!("#{lang}.wikipedia"))
}

/// Inverse of [`channel_for_language`].
pub fn language_for_channel(channel: &str) -> Result<&str, LanguageError> {
    channel
        .strip_prefix('#')
        .and_then(|rest| rest.strip_suffix(".wikipedia"))
        .filter(|lang| valid_language_token(lang))
        .ok_or_else(|| LanguageError::BadChannel(channel.to_string()))
}

/// Canonical form of a wire title: underscores become spaces and outer
/// whitespace is trimmed. First-letter case is left alone here; identity
/// comparison happens on [`crate::graph::ArticleKey`].
pub fn canonical_title(raw: &str) -> String {
    raw.replace('_', " ").trim().to_string()
}
