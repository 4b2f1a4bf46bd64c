// SPDX-License-Identifier: Apache-2.0

//! Deliberately naive reference implementations used to check the real ones.

use std::collections::BTreeSet;

/// Fields of a colour-free payload, found by splitting on `" * "` and
/// scanning characters by hand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefFields {
    pub title: String,
    pub url: String,
    pub diff_rev: Option<u64>,
    pub old_rev: Option<u64>,
    pub editor: String,
    pub delta: i64,
    pub comment: String,
}

fn query_value(url: &str, key: &str) -> Option<u64> {
    let query = url.split_once('?')?.1;
    query
        .split('&')
        .filter_map(|pair| pair.split_once('='))
        .filter(|(k, _)| *k == key)
        .filter_map(|(_, v)| v.parse().ok())
        .next_back()
}

pub fn reference_tokenize(payload: &str) -> Option<RefFields> {
    let start = payload.find("[[")?;
    let len = payload[start + 2..].find("]]")?;
    let title: String = payload[start + 2..start + 2 + len]
        .chars()
        .map(|c| if c == '_' { ' ' } else { c })
        .collect::<String>()
        .trim()
        .to_string();
    let rest = &payload[start + 2 + len + 2..];
    let parts: Vec<&str> = rest.split(" * ").collect();
    if parts.len() < 3 {
        return None;
    }
    let url = parts[0].split(' ').rfind(|t| t.starts_with("http")).unwrap_or("").to_string();
    let old_rev = query_value(&url, "oldid");
    let diff_rev = old_rev.and(query_value(&url, "diff"));
    let editor = parts[1].trim().to_string();
    let tail = parts[2..].join(" * ");

    let tail = tail.strip_prefix('(')?;
    let close = tail.find(')')?;
    let token = &tail[..close];
    let (sign, digits) = match token.chars().next()? {
        '-' => (-1, &token[1..]),
        '+' => (1, &token[1..]),
        _ => (1, token),
    };
    let mut magnitude: i64 = 0;
    for c in digits.chars() {
        magnitude = magnitude * 10 + i64::from(c.to_digit(10)?);
    }
    if digits.is_empty() {
        return None;
    }
    Some(RefFields {
        title,
        url,
        diff_rev,
        old_rev,
        editor,
        delta: sign * magnitude,
        comment: tail[close + 1..].trim().to_string(),
    })
}

/// One edit of a synthetic topic, as the criteria checker sees it.
#[derive(Clone, Debug)]
pub struct TopicEdit {
    pub at_ms: i64,
    pub editor: String,
    pub counted: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    pub min_occurrences: usize,
    pub max_gap_ms: i64,
    pub min_editors: usize,
    pub max_since_ms: i64,
    pub ttl_ms: i64,
    pub tick_period_ms: i64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_occurrences: 5,
            max_gap_ms: 60_000,
            min_editors: 2,
            max_since_ms: 240_000,
            ttl_ms: 240_000,
            tick_period_ms: 240_000,
        }
    }
}

/// True when the eviction tick grid separates two consecutive edits of the
/// same topic: some tick `T` with `prev < T <= next` finds the topic idle
/// for at least the TTL. Ticks sit at multiples of the period.
pub fn lifetime_breaks(prev_ms: i64, next_ms: i64, t: &Thresholds) -> bool {
    let last_tick = next_ms.div_euclid(t.tick_period_ms) * t.tick_period_ms;
    last_tick > prev_ms && last_tick - prev_ms >= t.ttl_ms
}

/// Fire times for one topic, recomputing every statistic from scratch on
/// each prefix of each cluster lifetime.
pub fn brute_force_fires(edits: &[TopicEdit], t: &Thresholds) -> Vec<i64> {
    let mut lifetimes: Vec<&[TopicEdit]> = Vec::new();
    let mut start = 0;
    for i in 1..edits.len() {
        if lifetime_breaks(edits[i - 1].at_ms, edits[i].at_ms, t) {
            lifetimes.push(&edits[start..i]);
            start = i;
        }
    }
    if start < edits.len() {
        lifetimes.push(&edits[start..]);
    }

    let mut fires = Vec::new();
    for lifetime in lifetimes {
        for end in 0..lifetime.len() {
            let prefix = &lifetime[..=end];
            let counted: Vec<&TopicEdit> = prefix.iter().filter(|e| e.counted).collect();
            let Some(last) = counted.last() else { continue };
            let occurrences = counted.len();
            let max_gap = counted.windows(2).map(|w| w[1].at_ms - w[0].at_ms).max().unwrap_or(0);
            let editors: BTreeSet<&str> = counted.iter().map(|e| e.editor.as_str()).collect();
            let since = prefix[end].at_ms - last.at_ms;
            if occurrences >= t.min_occurrences
                && max_gap <= t.max_gap_ms
                && editors.len() >= t.min_editors
                && since <= t.max_since_ms
            {
                fires.push(prefix[end].at_ms);
                break;
            }
        }
    }
    fires
}

/// Peak resident set size of this process in bytes, where the platform
/// reports it.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
