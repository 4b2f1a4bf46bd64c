// SPDX-License-Identifier: Apache-2.0

//! `action=compare` URL building and response parsing.

use std::path::{Path, PathBuf};

use serde_json::Value;

use super::{DiffStatus, RevisionDiff};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompareError {
    #[error("revision ids must be positive (from {from}, to {to})")]
    NonPositiveRevision { from: i64, to: i64 },
    #[error("malformed compare response: {0}")]
    Malformed(String),
    #[error("API error {0}")]
    Api(String),
}

pub fn compare_url(lang: &str, from_rev: i64, to_rev: i64) -> Result<String, CompareError> {
    if from_rev <= 0 || to_rev <= 0 {
        return Err(CompareError::NonPositiveRevision { from: from_rev, to: to_rev });
    }
    Ok(format!(
        "http://{lang}.wikipedia.org/w/api.php?action=compare&torev={to_rev}&fromrev={from_rev}&format=json"
    ))
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let Some(semi) = rest[..rest.len().min(12)].find(';') else {
            out.push('&');
            rest = &rest[1..];
            continue;
        };
        let entity = &rest[1..semi];
        let decoded = match entity {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            "nbsp" => Some('\u{a0}'),
            _ => entity
                .strip_prefix("#x")
                .or_else(|| entity.strip_prefix("#X"))
                .and_then(|hex| u32::from_str_radix(hex, 16).ok())
                .or_else(|| entity.strip_prefix('#').and_then(|dec| dec.parse().ok()))
                .and_then(char::from_u32),
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    decode_entities(&out)
}

/// Text of every `<td class="<class>...">` cell in a diff table.
fn cells(html: &str, class: &str) -> Vec<String> {
    let needle = format!("class=\"{class}");
    let mut out = Vec::new();
    let mut rest = html;
    while let Some(at) = rest.find(&needle) {
        rest = &rest[at + needle.len()..];
        let Some(open_end) = rest.find('>') else { break };
        rest = &rest[open_end + 1..];
        let end = rest.find("</td>").unwrap_or(rest.len());
        let text = strip_tags(&rest[..end]);
        if !text.is_empty() {
            out.push(text);
        }
        rest = &rest[end..];
    }
    out
}

/// Parses a compare response into added/removed line fragments.
pub fn parse_compare_response(body: &str, from_rev: u64, to_rev: u64) -> Result<RevisionDiff, CompareError> {
    let root: Value = serde_json::from_str(body).map_err(|e| CompareError::Malformed(e.to_string()))?;
    if let Some(error) = root.get("error") {
        let code = error.get("code").and_then(Value::as_str).unwrap_or("unknown");
        return Err(CompareError::Api(code.to_string()));
    }
    let compare = root
        .get("compare")
        .ok_or_else(|| CompareError::Malformed("no compare object".into()))?;
    let html = compare
        .get("*")
        .or_else(|| compare.get("body"))
        .and_then(Value::as_str)
        .unwrap_or("");

    let added = cells(html, "diff-addedline");
    let removed = cells(html, "diff-deletedline");
    let sizes = (
        compare.get("fromsize").and_then(Value::as_i64),
        compare.get("tosize").and_then(Value::as_i64),
    );
    let net_delta = match sizes {
        (Some(from), Some(to)) => to - from,
        _ => {
            let bytes = |v: &[String]| v.iter().map(|s| s.len() as i64).sum::<i64>();
            bytes(&added) - bytes(&removed)
        }
    };
    Ok(RevisionDiff {
        from_rev,
        to_rev,
        added,
        removed,
        net_delta,
        status: DiffStatus::Available,
    })
}

/// Synchronous diff lookup. Failures come back as an unavailable diff.
pub trait DiffSource {
    fn fetch_diff(&self, lang: &str, from_rev: u64, to_rev: u64) -> RevisionDiff;
}

/// Always reports the diff as unavailable.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoDiffs;

impl DiffSource for NoDiffs {
    fn fetch_diff(&self, _lang: &str, from_rev: u64, to_rev: u64) -> RevisionDiff {
        RevisionDiff::unavailable(from_rev, to_rev)
    }
}

/// `<root>/compare/<lang>/<from>_<to>.json`
pub fn compare_fixture_path(root: &Path, lang: &str, from_rev: u64, to_rev: u64) -> PathBuf {
    root.join("compare").join(lang).join(format!("{from_rev}_{to_rev}.json"))
}

#[derive(Clone, Debug)]
pub struct FixtureDiffs {
    root: PathBuf,
}

impl FixtureDiffs {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureDiffs { root: root.into() }
    }
}

impl DiffSource for FixtureDiffs {
    fn fetch_diff(&self, lang: &str, from_rev: u64, to_rev: u64) -> RevisionDiff {
        let path = compare_fixture_path(&self.root, lang, from_rev, to_rev);
        let Ok(body) = std::fs::read_to_string(&path) else {
            return RevisionDiff::unavailable(from_rev, to_rev);
        };
        parse_compare_response(&body, from_rev, to_rev).unwrap_or_else(|e| {
            tracing::warn!(path = %path.display(), error = %e, "bad compare fixture");
            RevisionDiff::unavailable(from_rev, to_rev)
        })
    }
}
