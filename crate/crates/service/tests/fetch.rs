// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use wikipulse::fetch::{ApiConfig, WikiApi};
use wikipulse_core::classifier::DiffStatus;
use wikipulse_core::graph::{ArticleKey, LangLinkCache};
use wikipulse_core::time::Timestamp;

const LANGLINKS: &str = r#"{"query":{"pages":{"1":{"pageid":1,"ns":0,"title":"Benoît XVI","langlinks":[{"lang":"en","*":"Pope Benedict XVI"},{"lang":"de","*":"Benedikt XVI."}]}}}}"#;

#[derive(Clone, Default)]
struct Mock {
    langlink_calls: Arc<AtomicUsize>,
    throttle_first: bool,
}

async fn api(State(mock): State<Mock>, Query(query): Query<HashMap<String, String>>) -> Response {
    match query.get("action").map(String::as_str) {
        Some("query") => {
            let call = mock.langlink_calls.fetch_add(1, Ordering::SeqCst);
            if mock.throttle_first && call == 0 {
                return (StatusCode::TOO_MANY_REQUESTS, "slow down").into_response();
            }
            LANGLINKS.into_response()
        }
        Some("compare") => {
            tokio::time::sleep(Duration::from_secs(5)).await;
            "{}".into_response()
        }
        _ => StatusCode::BAD_REQUEST.into_response(),
    }
}

async fn start(mock: Mock) -> WikiApi {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = Router::new().route("/{lang}/w/api.php", get(api)).with_state(mock);
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let config = ApiConfig {
        base_override: Some(format!("http://{addr}")),
        rate_limit_retry_after: Duration::from_millis(50),
        diff_timeout: Duration::from_millis(200),
        ..ApiConfig::default()
    };
    WikiApi::new(config, LangLinkCache::default()).unwrap()
}

#[tokio::test]
async fn rate_limited_lookup_is_retried_once_then_cached() {
    let mock = Mock {
        throttle_first: true,
        ..Mock::default()
    };
    let calls = mock.langlink_calls.clone();
    let api = start(mock).await;
    let key = ArticleKey::new("fr", "Benoît XVI").unwrap();
    let now = Timestamp::from_secs(1_360_000_000);

    let set = api.langlinks(&key, now).await;
    assert!(set.resolved);
    let siblings: Vec<String> = set.siblings.iter().map(|k| format!("{}:{}", k.language, k.title)).collect();
    assert_eq!(siblings, ["de:Benedikt XVI.", "en:Pope Benedict XVI"]);
    assert_eq!(calls.load(Ordering::SeqCst), 2);

    api.langlinks(&key, now).await;
    assert_eq!(calls.load(Ordering::SeqCst), 2, "second lookup is served from cache");
}

#[tokio::test]
async fn unreachable_api_gives_unresolved_links() {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let api = WikiApi::new(
        ApiConfig {
            base_override: Some(format!("http://{addr}")),
            ..ApiConfig::default()
        },
        LangLinkCache::default(),
    )
    .unwrap();
    let set = api.langlinks(&ArticleKey::new("en", "Foo").unwrap(), Timestamp::EPOCH).await;
    assert!(!set.resolved);
    assert!(set.siblings.is_empty());
}

#[tokio::test]
async fn slow_diff_falls_back_to_unavailable() {
    let api = start(Mock::default()).await;
    let started = Instant::now();
    let diff = api.diff("en", 537645766, 537646005).await;
    assert_eq!(diff.status, DiffStatus::Unavailable);
    assert!(started.elapsed() < Duration::from_secs(2));
}
