// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wikipulse_core::classifier::FixtureDiffs;
use wikipulse_core::events::{Emission, WireEvent};
use wikipulse_core::graph::{ArticleKey, FixtureLangLinks, LangLinkSource, StaticLangLinks};
use wikipulse_core::ingest::{ReplayReader, ReplaySummary, Speedup};
use wikipulse_core::persist::Ledger;
use wikipulse_core::pipeline::{run_replay, shared_ledger, Pipeline, PipelineConfig, ReplayDriver, RunSummary};
use wikipulse_core::plausibility::{CorpusConnector, SearchConnector, DEFAULT_CHECK_TIMEOUT};
use wikipulse_core::time::Timestamp;

fn pope() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/pope")
}

struct Run {
    events: Vec<String>,
    store: Vec<u8>,
    replay: ReplaySummary,
    summary: RunSummary,
}

fn run(source: &ReplayReader, speedup: Speedup, links: Option<&dyn LangLinkSource>, with_fixtures: bool) -> Run {
    let root = pope();
    let ledger = shared_ledger(Ledger::in_memory());
    let mut pipeline = Pipeline::new(&PipelineConfig::default(), ledger.clone()).unwrap();
    let diffs = FixtureDiffs::new(root.join("compare"));
    let connectors: Vec<Arc<dyn SearchConnector>> = if with_fixtures {
        vec![Arc::new(CorpusConnector::new("twitter", root.join("corpus")))]
    } else {
        Vec::new()
    };
    let mut events = Vec::new();
    let mut seq = 0;
    let mut on_event = |e: Emission| {
        seq += 1;
        events.push(WireEvent::from_emission(&e, seq).to_json());
    };
    let mut driver = ReplayDriver {
        pipeline: &mut pipeline,
        links,
        diffs: with_fixtures.then_some(&diffs as _),
        connectors: &connectors,
        check_timeout: DEFAULT_CHECK_TIMEOUT,
        on_event: &mut on_event,
        error: None,
    };
    let replay = run_replay(source, Timestamp::EPOCH, speedup, &mut driver).unwrap();
    let summary = pipeline.summary();
    let store = ledger.lock().store().canonical_bytes();
    Run { events, store, replay, summary }
}

#[test]
fn pope_fixture_is_speed_independent() {
    let source = ReplayReader::File(pope().join("pope.tsv"));
    let links = FixtureLangLinks::new(pope());
    let fast = run(&source, Speedup::Unbounded, Some(&links), true);
    let paced = run(&source, Speedup::Finite(1e9), Some(&links), true);
    assert_eq!(fast.events, paced.events);
    assert_eq!(fast.store, paced.store);
    assert_eq!(fast.summary.candidates_fired, 1);
    assert_eq!(fast.summary.parse_errors, 1);
    assert_eq!(fast.summary.filtered_meta, 1);
    assert_eq!(fast.summary.filtered_bots, 1);
}

fn mixed_capture(rng: &mut impl Rng, count: usize) -> Vec<u8> {
    let mut out = String::new();
    let mut offset = 1_360_000_000_000u64;
    for i in 0..count {
        offset += rng.gen_range(0..3_000);
        let lang = ["en", "fr", "de"][rng.gen_range(0..3)];
        let title = match rng.gen_range(0..10) {
            0 => format!("Talk:Topic {}", rng.gen_range(0..5)),
            1 => "no brackets".into(),
            _ => format!("Topic {}", rng.gen_range(0..5)),
        };
        let editor = if rng.gen_bool(0.1) { "SomeBot".to_string() } else { format!("Ed{}", rng.gen_range(0..4)) };
        let payload = if title == "no brackets" {
            format!("garbage line {i}")
        } else {
            format!("[[{title}]] http://{lang}.wikipedia.org/w/index.php?diff={}&oldid={i} * {editor} * (+{})", i + 1, rng.gen_range(0..400))
        };
        out.push_str(&format!("{offset}\t#{lang}.wikipedia\t{payload}\n"));
    }
    out.into_bytes()
}

#[test]
fn generated_capture_is_speed_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let source = ReplayReader::Bytes(mixed_capture(&mut rng, 2_000));
    let mut links = StaticLangLinks::new();
    for t in 0..5 {
        let keys: Vec<ArticleKey> = ["en", "fr", "de"].iter().map(|l| ArticleKey::new(l, &format!("Topic {t}")).unwrap()).collect();
        for k in &keys {
            links.insert(k.clone(), keys.iter().filter(|o| *o != k).cloned().collect());
        }
    }
    let a = run(&source, Speedup::Unbounded, Some(&links), false);
    let b = run(&source, Speedup::Finite(1e12), Some(&links), false);
    assert_eq!(a.events, b.events);
    assert_eq!(a.store, b.store);
    assert!(a.summary.candidates_fired > 0);
}

#[test]
fn ten_thousand_lines_are_all_accounted_for() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let source = ReplayReader::Bytes(mixed_capture(&mut rng, 10_000));
    let r = run(&source, Speedup::Unbounded, None, false);
    assert_eq!(r.replay.records, 10_000);
    assert_eq!(r.replay.delivered + r.replay.skipped, r.replay.records);
    assert_eq!(r.summary.events_ingested, r.replay.delivered);
    assert_eq!(r.summary.parse_errors, r.replay.skipped);
    let cluster_events = r
        .events
        .iter()
        .filter(|e| e.contains("\"kind\":\"newCluster\"") || e.contains("\"kind\":\"existingCluster\""))
        .count() as u64;
    assert_eq!(r.summary.filtered_meta + r.summary.filtered_bots + cluster_events, r.summary.events_ingested);
    assert!(r.summary.filtered_meta > 0 && r.summary.filtered_bots > 0 && r.summary.parse_errors > 0);
}

#[test]
fn unsorted_capture_is_rejected_before_delivery() {
    let source = ReplayReader::Bytes(b"2000\t#en.wikipedia\t[[A]] u * e * (+1)\n1000\t#en.wikipedia\t[[B]] u * e * (+1)\n".to_vec());
    let ledger = shared_ledger(Ledger::in_memory());
    let mut pipeline = Pipeline::new(&PipelineConfig::default(), ledger).unwrap();
    let mut delivered = 0;
    let mut on_event = |_e: Emission| delivered += 1;
    let mut driver = ReplayDriver {
        pipeline: &mut pipeline,
        links: None,
        diffs: None,
        connectors: &[],
        check_timeout: DEFAULT_CHECK_TIMEOUT,
        on_event: &mut on_event,
        error: None,
    };
    assert!(run_replay(&source, Timestamp::EPOCH, Speedup::Unbounded, &mut driver).is_err());
    assert_eq!(delivered, 0);
}

#[test]
fn candidate_payload_names_both_languages() {
    let source = ReplayReader::File(pope().join("pope.tsv"));
    let links = FixtureLangLinks::new(pope());
    let r = run(&source, Speedup::Unbounded, Some(&links), true);
    let candidate = r.events.iter().find(|e| e.contains("\"kind\":\"breakingNewsCandidate\"")).unwrap();
    assert!(candidate.contains("Pope Benedict XVI"));
    assert!(candidate.contains("Benoît XVI"));
    let value: serde_json::Value = serde_json::from_str(candidate).unwrap();
    assert_eq!(value["payload"]["edit_count"], 5);
}
