// SPDX-License-Identifier: Apache-2.0

//! Test support: synthetic workloads and independent reference checkers.

pub mod oracle;
pub mod streams;
pub mod synth;
