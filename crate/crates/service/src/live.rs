// SPDX-License-Identifier: Apache-2.0

//! Live run: IRC ingest, concurrent API enrichment in arrival order, the
//! monitor, plausibility checks and gateway fan-out.

use std::future::Future;
use std::sync::Arc;
use std::time::Duration;

use futures::{stream, StreamExt};
use parking_lot::Mutex;
use tokio::sync::mpsc;
use wikipulse_core::classifier::RevisionDiff;
use wikipulse_core::events::{Emission, EventBody};
use wikipulse_core::graph::{ArticleKey, LangLinkSet};
use wikipulse_core::ingest::{parse_rc_line, RawLine, RecentChange};
use wikipulse_core::monitor::Candidate;
use wikipulse_core::pipeline::{attach_plausibility, Pipeline, RunSummary};
use wikipulse_core::plausibility::{run_checks, SearchConnector, DEFAULT_CHECK_TIMEOUT};
use wikipulse_core::time::Timestamp;

use crate::fetch::WikiApi;
use crate::gateway::Hub;
use crate::irc::{connect_live, Health, IrcConfig};

const RAW_QUEUE: usize = 10_000;

pub struct LiveOptions {
    pub irc: IrcConfig,
    pub connectors: Vec<Arc<dyn SearchConnector>>,
    pub check_timeout: Duration,
    /// Lookups in flight at once; results are still consumed in order.
    pub enrich_concurrency: usize,
    /// How far eviction ticks trail the wall clock, so an edit still being
    /// enriched is never older than the last tick.
    pub eviction_lag: Duration,
    pub stats_interval: Duration,
}

impl LiveOptions {
    pub fn new(irc: IrcConfig) -> Self {
        LiveOptions {
            irc,
            connectors: Vec::new(),
            check_timeout: DEFAULT_CHECK_TIMEOUT,
            enrich_concurrency: 64,
            eviction_lag: Duration::from_secs(15),
            stats_interval: Duration::from_secs(5),
        }
    }
}

pub fn summary_with_gateway(pipeline: &Pipeline, hub: &Hub) -> RunSummary {
    RunSummary {
        dropped_events: hub.dropped_events(),
        ..pipeline.summary()
    }
}

type Enriched = (RecentChange, Option<(LangLinkSet, RevisionDiff)>);

async fn enrich(api: Arc<WikiApi>, change: RecentChange) -> Enriched {
    let Ok(key) = ArticleKey::new(&change.language, &change.title) else {
        return (change, None);
    };
    let diff = async {
        match (change.old_rev, change.diff_rev) {
            (Some(old), Some(new)) => api.diff(&change.language, old, new).await.reconcile(change.delta),
            (old, new) => RevisionDiff::unavailable(old.unwrap_or(0), new.unwrap_or(0)),
        }
    };
    let (links, diff) = tokio::join!(api.langlinks(&key, change.timestamp), diff);
    (change, Some((links, diff)))
}

fn spawn_checks(candidate: Candidate, pipeline: &Arc<Mutex<Pipeline>>, hub: &Arc<Hub>, options: &LiveOptions) {
    if options.connectors.is_empty() {
        return;
    }
    let ledger = Arc::clone(pipeline.lock().ledger());
    let hub = Arc::clone(hub);
    let (connectors, timeout) = (options.connectors.clone(), options.check_timeout);
    tokio::task::spawn_blocking(move || {
        let results = run_checks(&candidate.queries, &connectors, timeout, Timestamp::now());
        match attach_plausibility(&ledger, &candidate, results, Timestamp::now()) {
            Ok(emission) => {
                hub.broadcast(&emission);
            }
            Err(e) => tracing::error!(error = %e, candidate = %candidate.id, "plausibility results not persisted"),
        }
    });
}

/// Runs until `shutdown` resolves, then stops ingest, drains in-flight
/// changes through the monitor and returns the run totals.
pub async fn run_live(
    pipeline: Pipeline,
    api: Arc<WikiApi>,
    options: LiveOptions,
    hub: Arc<Hub>,
    health: Health,
    shutdown: impl Future<Output = ()>,
) -> RunSummary {
    let pipeline = Arc::new(Mutex::new(pipeline));
    let (raw_tx, raw_rx) = mpsc::channel::<RawLine>(RAW_QUEUE);
    let ingest = connect_live(options.irc.clone(), raw_tx, health);

    let admitted = {
        let pipeline = Arc::clone(&pipeline);
        stream::unfold(raw_rx, |mut rx| async move { rx.recv().await.map(|raw| (raw, rx)) }).filter_map(move |raw| {
            let mut p = pipeline.lock();
            let admitted = match parse_rc_line(&raw) {
                Ok(change) => p.admit(&change).then_some(change),
                Err(e) => {
                    tracing::debug!(error = %e, "unparseable change");
                    p.note_parse_error();
                    None
                }
            };
            futures::future::ready(admitted)
        })
    };
    let enriched = admitted
        .map(|change| enrich(Arc::clone(&api), change))
        .buffered(options.enrich_concurrency.max(1));

    let process = {
        let (pipeline, hub) = (Arc::clone(&pipeline), Arc::clone(&hub));
        let options = &options;
        enriched.for_each(move |(change, lookups)| {
            if let Some((links, diff)) = lookups {
                let mut p = pipeline.lock();
                p.advance_to(change.timestamp);
                let class = p.classify(&change, &diff);
                let outcome = p.process(&change, &links, class);
                drop(p);
                match outcome {
                    Ok(emissions) => {
                        for emission in emissions {
                            hub.broadcast(&emission);
                            if let EventBody::BreakingNewsCandidate(candidate) = emission.body {
                                spawn_checks(*candidate, &pipeline, &hub, options);
                            }
                        }
                    }
                    Err(e) => tracing::error!(error = %e, "candidate not persisted"),
                }
            }
            futures::future::ready(())
        })
    };

    let housekeeping = {
        let (pipeline, hub) = (Arc::clone(&pipeline), Arc::clone(&hub));
        let (lag, every) = (options.eviction_lag, options.stats_interval);
        async move {
            let mut evict = tokio::time::interval(Duration::from_secs(1));
            let mut stats = tokio::time::interval(every);
            loop {
                tokio::select! {
                    _ = evict.tick() => {
                        let at = Timestamp::now().plus_millis(-(lag.as_millis() as i64));
                        let evicted = pipeline.lock().advance_to(at);
                        if !evicted.is_empty() {
                            tracing::debug!(count = evicted.len(), "evicted clusters");
                        }
                    }
                    _ = stats.tick() => {
                        let summary = summary_with_gateway(&pipeline.lock(), &hub);
                        hub.broadcast(&Emission::new(EventBody::Stats(summary), Timestamp::now()));
                    }
                }
            }
        }
    };

    tokio::pin!(process);
    let stopped = tokio::select! {
        _ = &mut process => false,
        _ = housekeeping => false,
        _ = shutdown => true,
    };
    if stopped {
        ingest.abort();
        let _ = ingest.await;
        process.await;
    }
    let summary = summary_with_gateway(&pipeline.lock(), &hub);
    summary
}
