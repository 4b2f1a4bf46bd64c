// SPDX-License-Identifier: Apache-2.0

//! Detects breaking news from bursts of concurrent edits to the same topic
//! across Wikipedia language editions.

pub mod classifier;
pub mod events;
pub mod graph;
pub mod ingest;
pub mod langs;
pub mod monitor;
pub mod persist;
pub mod pipeline;
pub mod plausibility;
pub mod time;
