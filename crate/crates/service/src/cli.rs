// SPDX-License-Identifier: Apache-2.0

use std::ffi::OsString;
use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use parking_lot::Mutex;
use tokio::net::TcpListener;
use wikipulse_core::classifier::FixtureDiffs;
use wikipulse_core::events::Emission;
use wikipulse_core::graph::{FixtureLangLinks, LangLinkCache};
use wikipulse_core::ingest::{BotPolicy, ReplayReader, Speedup};
use wikipulse_core::langs;
use wikipulse_core::monitor::CriteriaConfig;
use wikipulse_core::persist::{FsyncPolicy, Ledger};
use wikipulse_core::pipeline::{run_replay, Pipeline, PipelineConfig, ReplayDriver, RunSummary};
use wikipulse_core::plausibility::{CorpusConnector, SearchConnector, DEFAULT_CHECK_TIMEOUT};
use wikipulse_core::time::Timestamp;

use crate::fetch::{ApiConfig, WikiApi};
use crate::gateway::{serve, AppState, Hub};
use crate::irc::{Health, IrcConfig};
use crate::live::{run_live, summary_with_gateway, LiveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8080";
pub const FIXTURE_ENV: &str = "WIKIPULSE_FIXTURES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Live,
    Replay,
}

#[derive(Debug, Parser)]
#[command(name = "wikipulse", version, about = "Spot breaking news from concurrent Wikipedia edits")]
struct Args {
    #[arg(long, value_enum, default_value_t = Mode::Live)]
    mode: Mode,
    /// `default`, `all`, or a comma-separated list of language codes.
    #[arg(long, default_value = "default")]
    languages: String,
    #[arg(long)]
    replay_file: Option<PathBuf>,
    /// Replay pacing: `inf`, a positive number or a ratio like `3/2`.
    #[arg(long)]
    speedup: Option<String>,
    /// Virtual time of replay offset 0 (RFC 3339); defaults to the Unix epoch.
    #[arg(long)]
    replay_epoch: Option<Timestamp>,
    #[arg(long, default_value_t = 5)]
    min_occurrences: u32,
    #[arg(long, default_value_t = 60)]
    max_gap_secs: u32,
    #[arg(long, default_value_t = 2)]
    min_editors: u32,
    #[arg(long, default_value_t = 240)]
    max_idle_secs: u32,
    #[arg(long, default_value_t = 240)]
    ttl_secs: u32,
    #[arg(long, default_value_t = 240)]
    eviction_period_secs: u32,
    /// Root of langlinks/, compare/ and corpus/ fixtures.
    #[arg(long, env = FIXTURE_ENV)]
    fixture_root: Option<PathBuf>,
    #[arg(long, default_value = "wikipulse-run.jsonl")]
    log_path: PathBuf,
    #[arg(long)]
    fsync: bool,
    /// Gateway address. Live runs default to 127.0.0.1:8080; replay runs
    /// stay headless unless this is given.
    #[arg(long)]
    listen: Option<SocketAddr>,
    /// Keep serving the gateway after a replay ends, until interrupted.
    #[arg(long)]
    hold: bool,
    #[arg(long)]
    include_bots: bool,
    /// Extra editor handles to treat as bots.
    #[arg(long = "bot", value_delimiter = ',')]
    bots: Vec<String>,
    /// Stand-in for `http://<lang>.wikipedia.org` in live API calls.
    #[arg(long, hide = true)]
    api_base: Option<String>,
    #[arg(long, default_value = crate::irc::DEFAULT_SERVER)]
    irc_server: String,
    #[arg(long, default_value_t = crate::irc::DEFAULT_PORT)]
    irc_port: u16,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub languages: Vec<String>,
    pub replay_file: Option<PathBuf>,
    pub speedup: Speedup,
    pub replay_epoch: Timestamp,
    pub criteria: CriteriaConfig,
    pub fixture_root: Option<PathBuf>,
    pub log_path: PathBuf,
    pub fsync: FsyncPolicy,
    pub listen_address: Option<SocketAddr>,
    pub hold: bool,
    pub bots: BotPolicy,
    pub api_base: Option<String>,
    pub irc_server: String,
    pub irc_port: u16,
}

#[derive(Debug)]
pub enum CliError {
    /// `--help` or `--version`; the text goes to stdout.
    Info(String),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Info(s) | CliError::Usage(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot start runtime: {0}")]
    Runtime(std::io::Error),
    #[error("cannot open run log {path}: {source}")]
    Log { path: PathBuf, source: wikipulse_core::persist::LogError },
    #[error("invalid criteria: {0}")]
    Criteria(#[from] wikipulse_core::monitor::CriteriaError),
    #[error("cannot listen on {addr}: {source}")]
    Listen { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Replay(#[from] wikipulse_core::pipeline::RunError),
    #[error("http client: {0}")]
    Http(#[from] reqwest::Error),
    #[error("invalid language: {0}")]
    Language(#[from] wikipulse_core::ingest::LanguageError),
}

fn parse_languages(raw: &str) -> Result<Vec<String>, String> {
    match raw.trim() {
        "default" => Ok(langs::default_languages()),
        "all" => Ok(langs::all_languages()),
        list => {
            let mut out: Vec<String> = Vec::new();
            for lang in list.split(',').map(str::trim) {
                if lang.is_empty() || lang.chars().any(|c| c.is_whitespace() || c.is_ascii_uppercase()) {
                    return Err(format!("invalid language code {lang:?}"));
                }
                if !out.iter().any(|l| l == lang) {
                    out.push(lang.to_string());
                }
            }
            Ok(out)
        }
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| {
        if e.use_stderr() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Info(e.to_string())
        }
    })?;
    let usage = |m: String| CliError::Usage(format!("error: {m}"));

    match (args.mode, &args.replay_file) {
        (Mode::Replay, None) => return Err(usage("--mode replay requires --replay-file".into())),
        (Mode::Live, Some(_)) => return Err(usage("--replay-file needs --mode replay".into())),
        _ => {}
    }
    if args.mode == Mode::Live && args.hold {
        return Err(usage("--hold only applies to --mode replay".into()));
    }
    let speedup = match &args.speedup {
        Some(raw) => raw.parse().map_err(usage)?,
        None => Speedup::Unbounded,
    };
    let criteria = CriteriaConfig {
        min_occurrences: args.min_occurrences,
        max_secs_between_edits: args.max_gap_secs,
        min_concurrent_editors: args.min_editors,
        max_secs_since_last_edit: args.max_idle_secs,
        ttl_secs: args.ttl_secs,
        eviction_period_secs: args.eviction_period_secs,
    };
    criteria.validate().map_err(|e| usage(e.to_string()))?;
    let listen_address = match (args.mode, args.listen) {
        (_, Some(addr)) => Some(addr),
        (Mode::Live, None) => Some(DEFAULT_LISTEN.parse().expect("valid default address")),
        (Mode::Replay, None) if args.hold => return Err(usage("--hold needs --listen".into())),
        (Mode::Replay, None) => None,
    };

    Ok(RunConfig {
        mode: args.mode,
        languages: parse_languages(&args.languages).map_err(usage)?,
        replay_file: args.replay_file,
        speedup,
        replay_epoch: args.replay_epoch.unwrap_or(Timestamp::EPOCH),
        criteria,
        fixture_root: args.fixture_root,
        log_path: args.log_path,
        fsync: if args.fsync { FsyncPolicy::EveryRecord } else { FsyncPolicy::Never },
        listen_address,
        hold: args.hold,
        bots: BotPolicy {
            include_bots: args.include_bots,
            extra_bots: args.bots.into_iter().filter(|b| !b.is_empty()).collect(),
        },
        api_base: args.api_base,
        irc_server: args.irc_server,
        irc_port: args.irc_port,
    })
}

/// Connectors named after the subdirectories of `<root>/corpus`, sorted.
pub fn corpus_connectors(root: &Path) -> Vec<Arc<dyn SearchConnector>> {
    let corpus = root.join("corpus");
    let Ok(entries) = std::fs::read_dir(&corpus) else {
        return Vec::new();
    };
    let mut names: Vec<String> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| Arc::new(CorpusConnector::new(name, &corpus)) as Arc<dyn SearchConnector>)
        .collect()
}

async fn start_gateway(addr: SocketAddr, state: AppState) -> Result<(SocketAddr, tokio::task::JoinHandle<()>), RunError> {
    let listener = TcpListener::bind(addr).await.map_err(|source| RunError::Listen { addr, source })?;
    let bound = listener.local_addr().map_err(|source| RunError::Listen { addr, source })?;
    tracing::info!(%bound, "gateway listening");
    let handle = tokio::spawn(async move {
        if let Err(e) = serve(listener, state, shutdown_signal()).await {
            tracing::error!(error = %e, "gateway stopped");
        }
    });
    Ok((bound, handle))
}

async fn shutdown_signal() {
    let _ = tokio::signal::ctrl_c().await;
}

fn replay_blocking(config: &RunConfig, pipeline: &mut Pipeline, hub: &Hub) -> Result<(), RunError> {
    let source = ReplayReader::File(config.replay_file.clone().unwrap_or_default());
    let links = config.fixture_root.as_ref().map(|r| FixtureLangLinks::new(r.clone()));
    let diffs = config.fixture_root.as_ref().map(|r| FixtureDiffs::new(r.clone()));
    let connectors = config.fixture_root.as_deref().map(corpus_connectors).unwrap_or_default();
    let mut on_event = |e: Emission| {
        hub.broadcast(&e);
    };
    let mut driver = ReplayDriver {
        pipeline,
        links: links.as_ref().map(|l| l as _),
        diffs: diffs.as_ref().map(|d| d as _),
        connectors: &connectors,
        check_timeout: DEFAULT_CHECK_TIMEOUT,
        on_event: &mut on_event,
        error: None,
    };
    run_replay(&source, config.replay_epoch, config.speedup, &mut driver)?;
    Ok(())
}

/// Runs to completion (replay) or until interrupted (live) and returns the
/// run totals.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(RunError::Runtime)?;
    runtime.block_on(run_async(config))
}

async fn run_async(config: &RunConfig) -> Result<RunSummary, RunError> {
    let ledger = Ledger::open(&config.log_path, config.fsync).map_err(|source| RunError::Log {
        path: config.log_path.clone(),
        source,
    })?;
    let ledger = Arc::new(Mutex::new(ledger));
    let pipeline_config = PipelineConfig {
        criteria: config.criteria,
        bots: config.bots.clone(),
        ..PipelineConfig::default()
    };
    let mut pipeline = Pipeline::new(&pipeline_config, Arc::clone(&ledger))?;
    let hub = Arc::new(Hub::default());
    let health = Health::default();
    let state = AppState {
        hub: Arc::clone(&hub),
        ledger: Arc::clone(&ledger),
        health: health.clone(),
        mode: match config.mode {
            Mode::Live => "live",
            Mode::Replay => "replay",
        },
    };

    match config.mode {
        Mode::Replay => {
            health.set(true);
            let gateway = match config.listen_address {
                Some(addr) => Some(start_gateway(addr, state).await?),
                None => None,
            };
            let (summary, result) = tokio::task::block_in_place(|| {
                let result = replay_blocking(config, &mut pipeline, &hub);
                (summary_with_gateway(&pipeline, &hub), result)
            });
            result?;
            if let Some((_, handle)) = gateway {
                if config.hold {
                    let _ = handle.await;
                } else {
                    handle.abort();
                }
            }
            Ok(summary)
        }
        Mode::Live => {
            if let Some(addr) = config.listen_address {
                start_gateway(addr, state).await?;
            }
            let mut irc = IrcConfig::for_languages(&config.languages)?;
            irc.server = config.irc_server.clone();
            irc.port = config.irc_port;
            let api = WikiApi::new(
                ApiConfig {
                    base_override: config.api_base.clone(),
                    ..ApiConfig::default()
                },
                LangLinkCache::default(),
            )?;
            let mut options = LiveOptions::new(irc);
            options.connectors = config.fixture_root.as_deref().map(corpus_connectors).unwrap_or_default();
            Ok(run_live(pipeline, Arc::new(api), options, hub, health, shutdown_signal()).await)
        }
    }
}

pub fn render_summary(summary: &RunSummary) -> String {
    format!(
        "events ingested: {}\nparse errors: {}\nfiltered meta pages: {}\nfiltered bot edits: {}\nclusters created: {}\ncandidates fired: {}\nverdicts recorded: {}\ndropped client events: {}\n",
        summary.events_ingested,
        summary.parse_errors,
        summary.filtered_meta,
        summary.filtered_bots,
        summary.clusters_created,
        summary.candidates_fired,
        summary.verdicts_recorded,
        summary.dropped_events,
    )
}

/// Entry point behind `main`; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(argv) {
        Ok(c) => c,
        Err(CliError::Info(text)) => {
            print!("{text}");
            return EXIT_OK;
        }
        Err(CliError::Usage(text)) => {
            eprint!("{text}");
            if !text.ends_with('\n') {
                eprintln!();
            }
            return EXIT_USAGE;
        }
    };
    match run(&config) {
        Ok(summary) => {
            print!("{}", render_summary(&summary));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
