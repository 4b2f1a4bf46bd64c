// SPDX-License-Identifier: Apache-2.0

//! The classification policy. Rules are tried in order, first match wins:
//!
//! 1. a removed fragment contains `[[Category:Living people]]` → Major
//! 2. an added fragment grows its removed counterpart (same position) by at
//!    least `paragraph_min_bytes` → Major
//! 3. `|delta| <= trivial_max_bytes` and the changed fragments differ only in
//!    punctuation or whitespace → Trivial
//! 4. a removed/added fragment pair differs only by present→past verb
//!    substitutions (is→was, are→were, has→had) → Major
//! 5. otherwise Minor
//!
//! Without a diff, rules 1 and 2 look at the comment and the delta, and
//! rule 3 holds vacuously.

use serde::{Deserialize, Serialize};

use super::{EditClass, RevisionDiff, Signal};

const LIVING_PEOPLE: &str = "[[Category:Living people]]";
const TENSE_TABLE: &[(&str, &str)] = &[("is", "was"), ("are", "were"), ("has", "had")];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub trivial_max_bytes: i64,
    pub paragraph_min_bytes: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            trivial_max_bytes: 6,
            paragraph_min_bytes: 200,
        }
    }
}

/// Keeps only alphanumeric characters.
pub fn punctuation_insensitive(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).collect()
}

fn comment_removes_living_people(comment: &str) -> bool {
    let lower = comment.to_lowercase();
    lower.contains("removed [[category:living people]]") || lower.contains("-[[category:living people]]")
}

/// Alternating runs of word and non-word characters.
fn runs(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut prev: Option<bool> = None;
    for (i, c) in s.char_indices() {
        let word = c.is_alphanumeric();
        if prev.is_some_and(|p| p != word) {
            out.push(&s[start..i]);
            start = i;
        }
        prev = Some(word);
    }
    if start < s.len() {
        out.push(&s[start..]);
    }
    out
}

fn is_tense_pair(present: &str, past: &str) -> bool {
    TENSE_TABLE.iter().any(|(p, q)| {
        (present == *p && past == *q) || {
            let mut pc = p.chars();
            let mut qc = q.chars();
            let cap = |first: Option<char>, rest: &str| {
                first.map(|f| f.to_ascii_uppercase().to_string() + rest).unwrap_or_default()
            };
            let (pf, qf) = (pc.next(), qc.next());
            present == cap(pf, pc.as_str()) && past == cap(qf, qc.as_str())
        }
    })
}

fn tense_change(removed: &str, added: &str) -> bool {
    let (before, after) = (runs(removed), runs(added));
    if before.len() != after.len() {
        return false;
    }
    let mut substituted = false;
    for (b, a) in before.iter().zip(&after) {
        if b == a {
            continue;
        }
        if !is_tense_pair(b, a) {
            return false;
        }
        substituted = true;
    }
    substituted
}

/// Total, pure classification of one edit.
pub fn classify(diff: &RevisionDiff, comment: &str, delta: i64, config: &ClassifierConfig) -> EditClass {
    let available = diff.is_available();

    // (1)
    let living_removed = if available {
        diff.removed.iter().any(|f| f.contains(LIVING_PEOPLE))
    } else {
        comment_removes_living_people(comment)
    };
    if living_removed {
        return EditClass::major(Signal::LivingPeopleRemoved);
    }

    // (2)
    let paragraph = if available {
        diff.added
            .iter()
            .enumerate()
            .any(|(i, f)| f.len().saturating_sub(diff.removed.get(i).map_or(0, |r| r.len())) >= config.paragraph_min_bytes)
    } else {
        delta >= config.paragraph_min_bytes as i64
    };
    if paragraph {
        return EditClass::major(Signal::NewParagraph);
    }

    // (3)
    if delta.abs() <= config.trivial_max_bytes {
        let same_text = !available
            || punctuation_insensitive(&diff.removed.concat()) == punctuation_insensitive(&diff.added.concat());
        if same_text {
            return EditClass::trivial();
        }
    }

    // (4)
    if available
        && diff
            .removed
            .iter()
            .zip(&diff.added)
            .any(|(r, a)| tense_change(r, a))
    {
        return EditClass::major(Signal::TenseChange);
    }

    EditClass::minor()
}
