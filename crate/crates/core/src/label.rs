// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Whether a vague concept applies to a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "yes",
            Label::No => "no",
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Yes => Label::No,
            Label::No => Label::Yes,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" | "pos" | "positive" => Ok(Label::Yes),
            "no" | "n" | "neg" | "negative" => Ok(Label::No),
            other => Err(format!("not a label: {other:?}")),
        }
    }
}

/// One sampled verdict. `Invalid` covers replies without a parseable marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vote {
    Yes,
    No,
    Invalid,
}

impl Vote {
    pub fn label(self) -> Option<Label> {
        match self {
            Vote::Yes => Some(Label::Yes),
            Vote::No => Some(Label::No),
            Vote::Invalid => None,
        }
    }
}

impl From<Label> for Vote {
    fn from(label: Label) -> Self {
        match label {
            Label::Yes => Vote::Yes,
            Label::No => Vote::No,
        }
    }
}

impl From<Option<Label>> for Vote {
    fn from(label: Option<Label>) -> Self {
        label.map_or(Vote::Invalid, Vote::from)
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Vote::Yes => "yes",
            Vote::No => "no",
            Vote::Invalid => "invalid",
        })
    }
}
