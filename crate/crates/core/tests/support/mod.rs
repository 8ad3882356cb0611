// SPDX-License-Identifier: Apache-2.0

//! Reference texts and independent oracles shared by test targets.

#![allow(dead_code)]

pub mod appendix;
pub mod oracle;
