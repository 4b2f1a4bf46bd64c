// SPDX-License-Identifier: Apache-2.0

//! Replay of captured streams.
//!
//! File format: one record per line, `offset_ms<TAB>channel<TAB>payload`,
//! UTF-8, sorted by offset (ties keep file order). Blank lines are ignored.
//! Record times are `epoch + offset_ms` on a virtual clock; wall-clock pacing
//! only decides when a record is handed over, never what time it carries.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Cursor};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use super::{parse_rc_line, ParseError, RawLine, RecentChange};
use crate::time::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayRecord {
    pub offset_ms: u64,
    pub channel: String,
    pub payload: String,
}

impl ReplayRecord {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}", self.offset_ms, self.channel, self.payload)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("replay i/o: {0}")]
    Io(#[from] io::Error),
    #[error("replay line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("replay line {line}: offset {offset} precedes previous offset {previous}")]
    Unsorted { line: usize, offset: u64, previous: u64 },
}

/// Replay pacing. `Unbounded` delivers as fast as possible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Speedup {
    Finite(f64),
    Unbounded,
}

impl FromStr for Speedup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" | "max" => Ok(Speedup::Unbounded),
            other => match other.split_once('/').map_or_else(
                || other.parse::<f64>().ok(),
                |(n, d)| Some(n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?),
            ) {
                Some(v) if v.is_infinite() && v > 0.0 => Ok(Speedup::Unbounded),
                Some(v) if v.is_finite() && v > 0.0 => Ok(Speedup::Finite(v)),
                _ => Err(format!("speedup must be a positive number or \"inf\", got {s:?}")),
            },
        }
    }
}

/// Consumer of replayed (or live) changes. Called from one thread at a time.
pub trait ChangeSink {
    /// The virtual clock moved to `now`; called before the record stamped
    /// `now` is delivered or skipped.
    fn advance_to(&mut self, _now: Timestamp) {}

    fn deliver(&mut self, change: RecentChange);

    fn skipped(&mut self, _error: &ParseError) {}
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub records: u64,
    pub delivered: u64,
    pub skipped: u64,
    pub first_at: Option<Timestamp>,
    pub last_at: Option<Timestamp>,
}

/// Where replay records come from. Files are read twice: once to check
/// ordering, once to deliver, so large captures are never held in memory.
#[derive(Clone, Debug)]
pub enum ReplayReader {
    File(PathBuf),
    Bytes(Vec<u8>),
}

impl ReplayReader {
    fn open(&self) -> io::Result<Box<dyn BufRead + '_>> {
        Ok(match self {
            ReplayReader::File(path) => Box::new(BufReader::with_capacity(1 << 16, File::open(path)?)),
            ReplayReader::Bytes(bytes) => Box::new(Cursor::new(bytes.as_slice())),
        })
    }

    /// Iterates records with their 1-based line numbers.
    pub fn records(&self) -> io::Result<impl Iterator<Item = Result<(usize, ReplayRecord), ReplayError>> + '_> {
        let reader = self.open()?;
        Ok(reader
            .lines()
            .enumerate()
            .filter_map(|(idx, line)| {
                let line_no = idx + 1;
                match line {
                    Err(e) => Some(Err(ReplayError::Io(e))),
                    Ok(l) if l.trim().is_empty() => None,
                    Ok(l) => Some(parse_record(line_no, &l).map(|r| (line_no, r))),
                }
            }))
    }

    /// Checks the whole source for format and ordering errors; returns the
    /// record count.
    pub fn validate(&self) -> Result<u64, ReplayError> {
        let mut previous = 0u64;
        let mut count = 0u64;
        for item in self.records()? {
            let (line, record) = item?;
            if record.offset_ms < previous {
                return Err(ReplayError::Unsorted {
                    line,
                    offset: record.offset_ms,
                    previous,
                });
            }
            previous = record.offset_ms;
            count += 1;
        }
        Ok(count)
    }
}

fn parse_record(line_no: usize, line: &str) -> Result<ReplayRecord, ReplayError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let mut parts = line.splitn(3, '\t');
    let (Some(offset), Some(channel), Some(payload)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(ReplayError::Format {
            line: line_no,
            reason: "expected offset_ms<TAB>channel<TAB>payload".into(),
        });
    };
    let offset_ms = offset.trim().parse::<u64>().map_err(|_| ReplayError::Format {
        line: line_no,
        reason: format!("offset {offset:?} is not a non-negative integer"),
    })?;
    Ok(ReplayRecord {
        offset_ms,
        channel: channel.to_string(),
        payload: payload.to_string(),
    })
}

/// Replays `source` into `sink`. Record `i` carries virtual time
/// `epoch + offset_ms`. With a finite speedup, delivery is paced so that
/// wall time since the first record equals `(offset - first_offset) / speedup`.
pub fn replay<S: ChangeSink + ?Sized>(
    source: &ReplayReader,
    epoch: Timestamp,
    speedup: Speedup,
    sink: &mut S,
) -> Result<ReplaySummary, ReplayError> {
    source.validate()?;

    let mut summary = ReplaySummary::default();
    let started = Instant::now();
    let mut first_offset = None;

    for item in source.records()? {
        let (_, record) = item?;
        let base = *first_offset.get_or_insert(record.offset_ms);
        if let Speedup::Finite(factor) = speedup {
            let due = Duration::from_secs_f64((record.offset_ms - base) as f64 / 1000.0 / factor);
            if let Some(wait) = due.checked_sub(started.elapsed()) {
                std::thread::sleep(wait);
            }
        }

        let now = epoch.plus_millis(record.offset_ms as i64);
        summary.records += 1;
        summary.first_at.get_or_insert(now);
        summary.last_at = Some(now);
        sink.advance_to(now);

        let raw = RawLine {
            channel: record.channel,
            payload: record.payload,
            received_at: now,
        };
        match parse_rc_line(&raw) {
            Ok(change) => {
                summary.delivered += 1;
                sink.deliver(change);
            }
            Err(e) => {
                summary.skipped += 1;
                tracing::debug!(error = %e, "skipping unparseable replay record");
                sink.skipped(&e);
            }
        }
    }
    Ok(summary)
}
