// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use super::RecentChange;

/// Namespace prefixes of non-article pages. Matched case-insensitively.
pub const META_NAMESPACES: &[&str] = &[
    "Special:",
    "Talk:",
    "User:",
    "User talk:",
    "Wikipedia:",
    "File:",
    "Template:",
    "Category talk:",
];

pub fn is_meta_title(title: &str) -> bool {
    META_NAMESPACES.iter().any(|ns| {
        title
            .get(..ns.len())
            .is_some_and(|head| head.eq_ignore_ascii_case(ns))
    })
}

/// True for handles ending in "bot"/"Bot" or listed explicitly.
pub fn is_bot_editor(editor: &str, extra: &HashSet<String>) -> bool {
    editor.ends_with("bot") || editor.ends_with("Bot") || extra.contains(editor)
}

#[derive(Clone, Debug, Default)]
pub struct BotPolicy {
    pub include_bots: bool,
    pub extra_bots: HashSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    MetaPage,
    Bot,
}

/// Drops edits that must never reach the monitor.
#[derive(Clone, Debug, Default)]
pub struct IngestFilter {
    pub bots: BotPolicy,
}

impl IngestFilter {
    pub fn new(bots: BotPolicy) -> Self {
        IngestFilter { bots }
    }

    pub fn check(&self, change: &RecentChange) -> Result<(), Rejection> {
        if is_meta_title(&change.title) {
            return Err(Rejection::MetaPage);
        }
        if !self.bots.include_bots && is_bot_editor(&change.editor, &self.bots.extra_bots) {
            return Err(Rejection::Bot);
        }
        Ok(())
    }
}
