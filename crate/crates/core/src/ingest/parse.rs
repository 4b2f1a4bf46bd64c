// SPDX-License-Identifier: Apache-2.0

//! Parser for the recent-changes bot messages.
//!
//! After colour codes are removed a message looks like
//!
//! ```text
//! [[Juniata River]] http://en.wikipedia.org/w/index.php?diff=516269072&oldid=514659029 * Johanna-Hypatia * (+67) Category:Place names ...
//! ```
//!
//! i.e. `[[title]] [flags] url * editor * (delta) comment`. Only the part after
//! the closing `]]` is split on `*`, and at most three ways, so comments may
//! contain asterisks.

use std::fmt;

use url::Url;

use super::{canonical_title, language_for_channel, RawLine, RecentChange};
use crate::time::Timestamp;

const BOLD: char = '\u{02}';
const COLOR: char = '\u{03}';
const RESET: char = '\u{0F}';
const REVERSE: char = '\u{16}';
const ITALIC: char = '\u{1D}';
const UNDERLINE: char = '\u{1F}';

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    BadChannel,
    EmptyPayload,
    MissingTitle,
    TooFewFields,
    EmptyEditor,
    BadDelta,
}

/// A line that could not be turned into a [`RecentChange`]. Carries the raw
/// payload so the caller can log it.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub payload: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ParseErrorKind::BadChannel => "channel is not #<lang>.wikipedia",
            ParseErrorKind::EmptyPayload => "empty payload",
            ParseErrorKind::MissingTitle => "missing [[title]] span",
            ParseErrorKind::TooFewFields => "fewer than 3 '*'-separated fields",
            ParseErrorKind::EmptyEditor => "empty editor field",
            ParseErrorKind::BadDelta => "unparseable (+N)/(-N) size token",
        };
        write!(f, "{what}: {:?}", self.payload)
    }
}

fn err(kind: ParseErrorKind, payload: &str) -> ParseError {
    ParseError {
        kind,
        payload: payload.to_string(),
    }
}

/// Removes mIRC formatting: bold, colour (with up to two foreground digits and
/// an optional `,bg` pair), reset, reverse, italic and underline.
pub fn strip_control_codes(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            BOLD | RESET | REVERSE | ITALIC | UNDERLINE => {}
            COLOR => {
                let mut fg = 0;
                while fg < 2 && chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                    chars.next();
                    fg += 1;
                }
                if fg > 0 && chars.peek() == Some(&',') {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek().is_some_and(|d| d.is_ascii_digit()) {
                        chars.next();
                        let mut bg = 0;
                        while bg < 2 && chars.peek().is_some_and(|d| d.is_ascii_digit()) {
                            chars.next();
                            bg += 1;
                        }
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out
}

fn parse_delta(token: &str) -> Option<i64> {
    let inner = token.strip_prefix('(')?.strip_suffix(')')?;
    let (negative, digits) = match inner.as_bytes().first()? {
        b'+' => (false, &inner[1..]),
        b'-' => (true, &inner[1..]),
        _ => (false, inner),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let magnitude: i64 = digits.parse().ok()?;
    Some(if negative { -magnitude } else { magnitude })
}

fn revisions_from_url(url: &str) -> (Option<u64>, Option<u64>) {
    let Ok(parsed) = Url::parse(url) else {
        return (None, None);
    };
    let mut diff = None;
    let mut old = None;
    for (k, v) in parsed.query_pairs() {
        match k.as_ref() {
            "diff" => diff = v.parse().ok(),
            "oldid" => old = v.parse().ok(),
            _ => {}
        }
    }
    if old.is_none() {
        diff = None;
    }
    (diff, old)
}

/// Parses one payload for `language`, stamping it with `timestamp`.
pub fn parse_rc_payload(language: &str, payload: &str, timestamp: Timestamp) -> Result<RecentChange, ParseError> {
    let clean = strip_control_codes(payload);
    if clean.trim().is_empty() {
        return Err(err(ParseErrorKind::EmptyPayload, payload));
    }

    let open = clean.find("[[").ok_or_else(|| err(ParseErrorKind::MissingTitle, payload))?;
    let after_open = &clean[open + 2..];
    let close = after_open
        .find("]]")
        .ok_or_else(|| err(ParseErrorKind::MissingTitle, payload))?;
    let title = canonical_title(&after_open[..close]);
    if title.is_empty() {
        return Err(err(ParseErrorKind::MissingTitle, payload));
    }

    let rest = &after_open[close + 2..];
    let mut fields = rest.splitn(3, '*');
    let (Some(head), Some(editor), Some(tail)) = (fields.next(), fields.next(), fields.next()) else {
        return Err(err(ParseErrorKind::TooFewFields, payload));
    };

    // The head holds optional flags (N, M, B, !) followed by the URL.
    let url = head
        .split_whitespace()
        .rev()
        .find(|tok| tok.contains("://"))
        .unwrap_or("")
        .to_string();
    let (diff_rev, old_rev) = revisions_from_url(&url);

    let editor = editor.trim();
    if editor.is_empty() {
        return Err(err(ParseErrorKind::EmptyEditor, payload));
    }

    let tail = tail.trim_start();
    let (delta_token, comment) = match tail.find(char::is_whitespace) {
        Some(i) => (&tail[..i], tail[i..].trim()),
        None => (tail, ""),
    };
    let delta = parse_delta(delta_token).ok_or_else(|| err(ParseErrorKind::BadDelta, payload))?;

    Ok(RecentChange {
        language: language.to_string(),
        title,
        diff_rev,
        old_rev,
        url,
        editor: editor.to_string(),
        delta,
        comment: comment.to_string(),
        timestamp,
    })
}

/// Parses a raw room message; the language comes from the channel name.
pub fn parse_rc_line(line: &RawLine) -> Result<RecentChange, ParseError> {
    let language =
        language_for_channel(&line.channel).map_err(|_| err(ParseErrorKind::BadChannel, &line.payload))?;
    parse_rc_payload(language, &line.payload, line.received_at)
}

/// Renders the canonical (colour-free, flag-free) payload for a change.
pub fn render_payload(change: &RecentChange) -> String {
    let sign = if change.delta < 0 { '-' } else { '+' };
    let mut out = format!(
        "[[{}]] {} * {} * ({}{})",
        change.title,
        change.url,
        change.editor,
        sign,
        change.delta.unsigned_abs()
    );
    if !change.comment.is_empty() {
        out.push(' ');
        out.push_str(&change.comment);
    }
    out
}
