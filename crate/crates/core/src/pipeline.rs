// SPDX-License-Identifier: Apache-2.0

//! Wiring shared by live and replay runs: filtering, classification, the
//! monitor, eviction ticks and the ledger.

use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, ClassifierConfig, DiffSource, EditClass, RevisionDiff};
use crate::events::{Emission, EventBody};
use crate::graph::{ArticleKey, ClusterId, LangLinkSet, LangLinkSource};
use crate::ingest::{
    replay, BotPolicy, ChangeSink, IngestFilter, ParseError, RecentChange, Rejection, ReplayError, ReplayReader,
    ReplaySummary, Speedup,
};
use crate::monitor::{Candidate, CriteriaConfig, CriteriaError, Monitor, MonitorEvent};
use crate::persist::{Ledger, LogError};
use crate::plausibility::{run_checks, SearchConnector, Verdict, DEFAULT_CHECK_TIMEOUT};
use crate::time::Timestamp;

pub type SharedLedger = Arc<Mutex<Ledger>>;

pub fn shared_ledger(ledger: Ledger) -> SharedLedger {
    Arc::new(Mutex::new(ledger))
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub criteria: CriteriaConfig,
    pub classifier: ClassifierConfig,
    pub bots: BotPolicy,
    pub check_timeout: Duration,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            criteria: CriteriaConfig::default(),
            classifier: ClassifierConfig::default(),
            bots: BotPolicy::default(),
            check_timeout: DEFAULT_CHECK_TIMEOUT,
        }
    }
}

/// Run totals, also pushed to clients as the `stats` event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub events_ingested: u64,
    pub parse_errors: u64,
    pub filtered_meta: u64,
    pub filtered_bots: u64,
    pub clusters_created: u64,
    pub live_clusters: u64,
    pub candidates_fired: u64,
    pub verdicts_recorded: u64,
    pub dropped_events: u64,
}

pub struct Pipeline {
    monitor: Monitor,
    filter: IngestFilter,
    classifier: ClassifierConfig,
    ledger: SharedLedger,
    period_ms: i64,
    next_tick: Option<Timestamp>,
    summary: RunSummary,
}

fn ceil_to_grid(t: Timestamp, period_ms: i64) -> Timestamp {
    let ms = t.as_millis();
    Timestamp::from_millis(ms.div_euclid(period_ms) * period_ms + if ms.rem_euclid(period_ms) == 0 { 0 } else { period_ms })
}

impl Pipeline {
    pub fn new(config: &PipelineConfig, ledger: SharedLedger) -> Result<Self, CriteriaError> {
        config.criteria.validate()?;
        let first_id = ledger.lock().store().next_id();
        Ok(Pipeline {
            monitor: Monitor::new(config.criteria).with_first_candidate_id(first_id),
            filter: IngestFilter::new(config.bots.clone()),
            classifier: config.classifier,
            ledger,
            period_ms: i64::from(config.criteria.eviction_period_secs) * 1000,
            next_tick: None,
            summary: RunSummary::default(),
        })
    }

    pub fn monitor(&self) -> &Monitor {
        &self.monitor
    }

    pub fn ledger(&self) -> &SharedLedger {
        &self.ledger
    }

    /// Runs every eviction tick due at or before `now`. Ticks sit on a fixed
    /// grid of `eviction_period_secs` multiples since the Unix epoch, and a
    /// tick at `t` runs before any edit stamped `t`.
    pub fn advance_to(&mut self, now: Timestamp) -> Vec<ClusterId> {
        let mut evicted = Vec::new();
        let mut next = self.next_tick.unwrap_or_else(|| ceil_to_grid(now, self.period_ms));
        while next <= now {
            if self.monitor.live_clusters() == 0 {
                let jump = ceil_to_grid(now, self.period_ms);
                if jump > next {
                    next = jump;
                    continue;
                }
            }
            evicted.extend(self.monitor.evict(next));
            next = next.plus_millis(self.period_ms);
        }
        self.next_tick = Some(next);
        evicted
    }

    /// One eviction pass at `now`, outside the tick grid.
    pub fn evict_now(&mut self, now: Timestamp) -> Vec<ClusterId> {
        self.monitor.evict(now)
    }

    pub fn note_parse_error(&mut self) {
        self.summary.parse_errors += 1;
    }

    /// Counts the change and applies the meta-page and bot filters.
    pub fn admit(&mut self, change: &RecentChange) -> bool {
        self.summary.events_ingested += 1;
        match self.filter.check(change) {
            Ok(()) => true,
            Err(Rejection::MetaPage) => {
                self.summary.filtered_meta += 1;
                false
            }
            Err(Rejection::Bot) => {
                self.summary.filtered_bots += 1;
                false
            }
        }
    }

    pub fn classify(&self, change: &RecentChange, diff: &RevisionDiff) -> EditClass {
        classify(diff, &change.comment, change.delta, &self.classifier)
    }

    /// Feeds an admitted, resolved, classified change to the monitor and
    /// persists any candidate it fires before returning the events.
    pub fn process(&mut self, change: &RecentChange, links: &LangLinkSet, class: EditClass) -> Result<Vec<Emission>, LogError> {
        let events = self.monitor.observe(change, links, class);
        let mut out = Vec::with_capacity(events.len());
        for event in events {
            if let MonitorEvent::BreakingNewsCandidate(candidate) = &event {
                self.ledger.lock().add_candidate(candidate.as_ref().clone())?;
            }
            out.push(Emission::new(event.into(), change.timestamp));
        }
        Ok(out)
    }

    pub fn summary(&self) -> RunSummary {
        let counters = self.monitor.counters();
        let ledger = self.ledger.lock();
        RunSummary {
            clusters_created: counters.clusters_created,
            live_clusters: self.monitor.live_clusters() as u64,
            candidates_fired: counters.candidates_fired,
            verdicts_recorded: ledger.store().verdict_count(),
            ..self.summary
        }
    }
}

/// Stores plausibility results and returns the event announcing them.
pub fn attach_plausibility(
    ledger: &SharedLedger,
    candidate: &Candidate,
    results: Vec<crate::plausibility::PlausibilityResult>,
    at: Timestamp,
) -> Result<Emission, LogError> {
    ledger.lock().add_results(candidate.id, results.clone())?;
    Ok(Emission::new(
        EventBody::PlausibilityResult {
            candidate_id: candidate.id,
            results,
        },
        at,
    ))
}

/// Applies an evaluator's verdict and returns the updated candidate and the
/// event announcing it.
pub fn submit_verdict(ledger: &SharedLedger, verdict: Verdict) -> Result<(Candidate, Emission), LogError> {
    let at = verdict.decided_at;
    let candidate = ledger.lock().record_verdict(verdict.clone())?;
    Ok((candidate, Emission::new(EventBody::Verdict(verdict), at)))
}

/// Adapts a [`Pipeline`] to a replayed stream with synchronous lookups.
/// Plausibility checks run inline so the run log is identical for any
/// replay speed.
pub struct ReplayDriver<'a> {
    pub pipeline: &'a mut Pipeline,
    pub links: Option<&'a dyn LangLinkSource>,
    pub diffs: Option<&'a dyn DiffSource>,
    pub connectors: &'a [Arc<dyn SearchConnector>],
    pub check_timeout: Duration,
    pub on_event: &'a mut dyn FnMut(Emission),
    pub error: Option<LogError>,
}

impl ReplayDriver<'_> {
    fn handle(&mut self, change: RecentChange) -> Result<(), LogError> {
        if !self.pipeline.admit(&change) {
            return Ok(());
        }
        let Ok(key) = ArticleKey::new(&change.language, &change.title) else {
            return Ok(());
        };
        let links = match self.links {
            Some(source) => source.fetch(&key, change.timestamp),
            None => LangLinkSet::unresolved(key, change.timestamp),
        };
        let diff = match (self.diffs, change.old_rev, change.diff_rev) {
            (Some(source), Some(old), Some(new)) => source.fetch_diff(&change.language, old, new).reconcile(change.delta),
            (_, old, new) => RevisionDiff::unavailable(old.unwrap_or(0), new.unwrap_or(0)),
        };
        let class = self.pipeline.classify(&change, &diff);
        for emission in self.pipeline.process(&change, &links, class)? {
            let candidate = match &emission.body {
                EventBody::BreakingNewsCandidate(c) => Some(c.as_ref().clone()),
                _ => None,
            };
            (self.on_event)(emission);
            if let Some(candidate) = candidate {
                if !self.connectors.is_empty() {
                    let results = run_checks(&candidate.queries, self.connectors, self.check_timeout, candidate.fired_at);
                    let emission = attach_plausibility(self.pipeline.ledger(), &candidate, results, candidate.fired_at)?;
                    (self.on_event)(emission);
                }
            }
        }
        Ok(())
    }
}

impl ChangeSink for ReplayDriver<'_> {
    fn advance_to(&mut self, now: Timestamp) {
        self.pipeline.advance_to(now);
    }

    fn deliver(&mut self, change: RecentChange) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.handle(change) {
            self.error = Some(e);
        }
    }

    fn skipped(&mut self, _error: &ParseError) {
        self.pipeline.note_parse_error();
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Log(#[from] LogError),
}

/// Replays `source` through `driver` and surfaces the first persistence
/// failure, if any.
pub fn run_replay(
    source: &ReplayReader,
    epoch: Timestamp,
    speedup: Speedup,
    driver: &mut ReplayDriver<'_>,
) -> Result<ReplaySummary, RunError> {
    let summary = replay(source, epoch, speedup, driver)?;
    match driver.error.take() {
        Some(e) => Err(e.into()),
        None => Ok(summary),
    }
}
