// SPDX-License-Identifier: Apache-2.0

//! Live and replay runner for the edit-spike monitor, with its push gateway.

pub mod cli;
pub mod fetch;
pub mod gateway;
pub mod irc;
pub mod live;
