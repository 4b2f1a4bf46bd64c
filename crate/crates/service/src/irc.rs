// SPDX-License-Identifier: Apache-2.0

//! Minimal read-only IRC client for the recent-changes rooms.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::TcpStream;
use tokio::sync::mpsc;
use tokio::task::JoinHandle;
use wikipulse_core::ingest::{channel_for_language, LanguageError, RawLine};
use wikipulse_core::time::Timestamp;

pub const DEFAULT_SERVER: &str = "irc.wikimedia.org";
pub const DEFAULT_PORT: u16 = 6667;

// Keeps each JOIN line well under the 512-byte protocol limit.
const CHANNELS_PER_JOIN: usize = 20;

#[derive(Clone, Debug)]
pub struct IrcConfig {
    pub server: String,
    pub port: u16,
    pub nick: String,
    pub channels: Vec<String>,
    pub backoff_initial: Duration,
    pub backoff_cap: Duration,
}

impl IrcConfig {
    pub fn for_languages(languages: &[String]) -> Result<Self, LanguageError> {
        let channels = languages
            .iter()
            .map(|l| channel_for_language(l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IrcConfig {
            server: DEFAULT_SERVER.to_string(),
            port: DEFAULT_PORT,
            nick: format!("wikipulse{}", std::process::id() % 100_000),
            channels,
            backoff_initial: Duration::from_secs(1),
            backoff_cap: Duration::from_secs(60),
        })
    }
}

/// Exponential reconnect delay, doubling up to a cap.
#[derive(Clone, Debug)]
pub struct Backoff {
    initial: Duration,
    cap: Duration,
    next: Duration,
}

impl Backoff {
    pub fn new(initial: Duration, cap: Duration) -> Self {
        Backoff { initial, cap, next: initial }
    }

    pub fn next_delay(&mut self) -> Duration {
        let delay = self.next;
        self.next = (self.next * 2).min(self.cap);
        delay
    }

    pub fn reset(&mut self) {
        self.next = self.initial;
    }
}

/// Shared ingest health flag, true while registered with the server.
#[derive(Clone, Debug, Default)]
pub struct Health(Arc<AtomicBool>);

impl Health {
    pub fn set(&self, up: bool) {
        self.0.store(up, Ordering::Relaxed);
    }

    pub fn is_up(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub enum IrcMessage<'a> {
    Welcome,
    Ping(&'a str),
    Privmsg { target: &'a str, text: &'a str },
    Other,
}

pub fn parse_message(line: &str) -> IrcMessage<'_> {
    let mut rest = line.trim_end_matches(['\r', '\n']);
    if let Some(stripped) = rest.strip_prefix(':') {
        rest = stripped.split_once(' ').map_or("", |(_, r)| r);
    }
    let (command, params) = rest.split_once(' ').unwrap_or((rest, ""));
    match command {
        "001" => IrcMessage::Welcome,
        "PING" => IrcMessage::Ping(params.strip_prefix(':').unwrap_or(params)),
        "PRIVMSG" => match params.split_once(" :") {
            Some((target, text)) => IrcMessage::Privmsg { target, text },
            None => IrcMessage::Other,
        },
        _ => IrcMessage::Other,
    }
}

enum SessionEnd {
    Disconnected,
    SinkClosed,
}

async fn session(config: &IrcConfig, sink: &mpsc::Sender<RawLine>, health: &Health, backoff: &mut Backoff) -> std::io::Result<SessionEnd> {
    let stream = TcpStream::connect((config.server.as_str(), config.port)).await?;
    let (read, mut write) = stream.into_split();
    write
        .write_all(format!("NICK {}\r\nUSER {} 0 * :{}\r\n", config.nick, config.nick, config.nick).as_bytes())
        .await?;
    let mut lines = BufReader::new(read).lines();
    while let Some(line) = lines.next_line().await? {
        match parse_message(&line) {
            IrcMessage::Welcome => {
                for chunk in config.channels.chunks(CHANNELS_PER_JOIN) {
                    write.write_all(format!("JOIN {}\r\n", chunk.join(",")).as_bytes()).await?;
                }
                health.set(true);
                backoff.reset();
                tracing::info!(server = %config.server, channels = config.channels.len(), "joined");
            }
            IrcMessage::Ping(token) => write.write_all(format!("PONG :{token}\r\n").as_bytes()).await?,
            IrcMessage::Privmsg { target, text } => {
                let raw = RawLine::new(target, text, Timestamp::now());
                if sink.send(raw).await.is_err() {
                    return Ok(SessionEnd::SinkClosed);
                }
            }
            IrcMessage::Other => {}
        }
    }
    Ok(SessionEnd::Disconnected)
}

/// Connects, joins every configured room and forwards each message to
/// `sink` in arrival order. Connection failures are retried forever with
/// exponential backoff and reported only through `health`. The task ends
/// when `sink` is closed.
pub fn connect_live(config: IrcConfig, sink: mpsc::Sender<RawLine>, health: Health) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut backoff = Backoff::new(config.backoff_initial, config.backoff_cap);
        loop {
            match session(&config, &sink, &health, &mut backoff).await {
                Ok(SessionEnd::SinkClosed) => return,
                Ok(SessionEnd::Disconnected) => tracing::warn!("irc connection closed"),
                Err(e) => tracing::warn!(error = %e, "irc connection failed"),
            }
            health.set(false);
            if sink.is_closed() {
                return;
            }
            tokio::time::sleep(backoff.next_delay()).await;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_to_cap_and_resets() {
        let mut b = Backoff::new(Duration::from_secs(1), Duration::from_secs(60));
        let delays: Vec<u64> = (0..9).map(|_| b.next_delay().as_secs()).collect();
        assert_eq!(delays, [1, 2, 4, 8, 16, 32, 60, 60, 60]);
        b.reset();
        assert_eq!(b.next_delay(), Duration::from_secs(1));
    }

    #[test]
    fn message_parsing() {
        assert_eq!(parse_message(":irc.wikimedia.org 001 me :Welcome\r\n"), IrcMessage::Welcome);
        assert_eq!(parse_message("PING :irc.wikimedia.org"), IrcMessage::Ping("irc.wikimedia.org"));
        assert_eq!(
            parse_message(":rc-pmtpa!~rc-pmtpa@localhost PRIVMSG #en.wikipedia :\x0314[[Foo]]\x03 * x * (+1) y"),
            IrcMessage::Privmsg {
                target: "#en.wikipedia",
                text: "\x0314[[Foo]]\x03 * x * (+1) y"
            }
        );
        assert_eq!(parse_message(":srv NOTICE * :hello"), IrcMessage::Other);
        assert_eq!(parse_message(""), IrcMessage::Other);
    }

    #[test]
    fn channels_from_languages() {
        let c = IrcConfig::for_languages(&["en".into(), "ru".into()]).unwrap();
        assert_eq!(c.channels, ["#en.wikipedia", "#ru.wikipedia"]);
        assert!(IrcConfig::for_languages(&[" ".into()]).is_err());
    }
}
