// SPDX-License-Identifier: Apache-2.0

//! Randomized multi-topic edit streams with complete language links, fed
//! either through the real pipeline or through the brute-force checker.

use rand::seq::SliceRandom;
use rand::Rng;
use wikipulse_core::classifier::EditClass;
use wikipulse_core::events::EventBody;
use wikipulse_core::graph::{ArticleKey, LangLinkSet};
use wikipulse_core::ingest::RecentChange;
use wikipulse_core::langs::DEFAULT_LANGUAGES;
use wikipulse_core::persist::{LogError, Ledger};
use wikipulse_core::pipeline::{shared_ledger, Pipeline, PipelineConfig};
use wikipulse_core::time::Timestamp;

use crate::oracle::{brute_force_fires, Thresholds, TopicEdit};

#[derive(Clone, Debug)]
pub struct StreamEvent {
    pub at_ms: i64,
    pub topic: usize,
    pub article: usize,
    pub editor: String,
    pub trivial: bool,
}

#[derive(Clone, Debug)]
pub struct TopicStream {
    /// Articles of each topic, one per language.
    pub topics: Vec<Vec<ArticleKey>>,
    pub events: Vec<StreamEvent>,
}

/// A stream of `1..=max_events` edits over 1–5 topics of 1–8 articles,
/// 1–6 editors and gaps of 1–300 s, biased towards short gaps so that
/// bursts happen.
pub fn random_stream(rng: &mut impl Rng, max_events: usize) -> TopicStream {
    let topic_count = rng.gen_range(1..=5);
    let topics: Vec<Vec<ArticleKey>> = (0..topic_count)
        .map(|t| {
            let mut langs = DEFAULT_LANGUAGES.to_vec();
            langs.shuffle(rng);
            langs
                .iter()
                .take(rng.gen_range(1..=8))
                .map(|lang| ArticleKey::new(lang, &format!("Topic {t} {lang}")).expect("valid key"))
                .collect()
        })
        .collect();
    let editors = rng.gen_range(1..=6);
    let n = rng.gen_range(1..=max_events);
    let mut at_ms: i64 = 1_300_000_000_000 + rng.gen_range(0..1_000_000_000);
    let mut topic = rng.gen_range(0..topic_count);
    let events = (0..n)
        .map(|i| {
            if i > 0 {
                at_ms += if rng.gen_bool(0.6) { rng.gen_range(1_000..=15_000) } else { rng.gen_range(1_000..=300_000) };
            }
            if rng.gen_bool(0.3) {
                topic = rng.gen_range(0..topic_count);
            }
            StreamEvent {
                at_ms,
                topic,
                article: rng.gen_range(0..topics[topic].len()),
                editor: format!("editor-{}", rng.gen_range(0..editors)),
                trivial: rng.gen_bool(0.1),
            }
        })
        .collect();
    TopicStream { topics, events }
}

impl TopicStream {
    pub fn change(&self, ev: &StreamEvent) -> RecentChange {
        let key = &self.topics[ev.topic][ev.article];
        RecentChange {
            language: key.language.clone(),
            title: key.title.clone(),
            diff_rev: None,
            old_rev: None,
            url: String::new(),
            editor: ev.editor.clone(),
            delta: if ev.trivial { 1 } else { 40 },
            comment: String::new(),
            timestamp: Timestamp::from_millis(ev.at_ms),
        }
    }

    pub fn links(&self, ev: &StreamEvent) -> LangLinkSet {
        let articles = &self.topics[ev.topic];
        let source = articles[ev.article].clone();
        let siblings: Vec<ArticleKey> = articles.iter().filter(|k| **k != source).cloned().collect();
        LangLinkSet::new(source, siblings, Timestamp::from_millis(ev.at_ms))
    }

    fn topic_of(&self, key: &ArticleKey) -> Option<usize> {
        self.topics.iter().position(|t| t.contains(key))
    }

    pub fn last_at(&self) -> Option<Timestamp> {
        self.events.last().map(|e| Timestamp::from_millis(e.at_ms))
    }
}

pub fn fresh_pipeline() -> Pipeline {
    Pipeline::new(&PipelineConfig::default(), shared_ledger(Ledger::in_memory())).expect("default criteria are valid")
}

/// Feeds `stream` through `pipeline` (eviction ticks included) and returns
/// `(topic, fire time ms)` for every candidate, sorted.
pub fn run_engine(stream: &TopicStream, pipeline: &mut Pipeline) -> Result<Vec<(usize, i64)>, LogError> {
    let mut fires = Vec::new();
    for ev in &stream.events {
        let change = stream.change(ev);
        pipeline.advance_to(change.timestamp);
        let class = if ev.trivial { EditClass::trivial() } else { EditClass::minor() };
        for emission in pipeline.process(&change, &stream.links(ev), class)? {
            if let EventBody::BreakingNewsCandidate(c) = emission.body {
                let topic = c.members.first().and_then(|k| stream.topic_of(k)).unwrap_or(usize::MAX);
                fires.push((topic, c.fired_at.as_millis()));
            }
        }
    }
    fires.sort_unstable();
    Ok(fires)
}

/// The same answer computed per topic from scratch.
pub fn run_oracle(stream: &TopicStream, thresholds: &Thresholds) -> Vec<(usize, i64)> {
    let mut fires = Vec::new();
    for topic in 0..stream.topics.len() {
        let edits: Vec<TopicEdit> = stream
            .events
            .iter()
            .filter(|e| e.topic == topic)
            .map(|e| TopicEdit {
                at_ms: e.at_ms,
                editor: e.editor.clone(),
                counted: !e.trivial,
            })
            .collect();
        fires.extend(brute_force_fires(&edits, thresholds).into_iter().map(|t| (topic, t)));
    }
    fires.sort_unstable();
    fires
}
