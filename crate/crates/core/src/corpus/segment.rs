// SPDX-License-Identifier: Apache-2.0

//! Splits a raw judgment into its five sections.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Header,
    Facts,
    CourtView,
    Verdict,
    Conclusion,
}

impl Section {
    pub const ALL: [Section; 5] = [Section::Header, Section::Facts, Section::CourtView, Section::Verdict, Section::Conclusion];
}

/// Marker strings that open each section in the raw format, in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionMarkers {
    pub header: String,
    pub facts: String,
    pub court_view: String,
    pub verdict: String,
    pub conclusion: String,
}

impl Default for SectionMarkers {
    fn default() -> Self {
        SectionMarkers {
            header: "【首部】".into(),
            facts: "【事实】".into(),
            court_view: "【法庭观点】".into(),
            verdict: "【判决结果】".into(),
            conclusion: "【尾部】".into(),
        }
    }
}

impl SectionMarkers {
    pub fn get(&self, section: Section) -> &str {
        match section {
            Section::Header => &self.header,
            Section::Facts => &self.facts,
            Section::CourtView => &self.court_view,
            Section::Verdict => &self.verdict,
            Section::Conclusion => &self.conclusion,
        }
    }

    /// Inverse of [`segment_with`] for well-formed sections.
    pub fn render(&self, sections: &Sections) -> String {
        let mut out = String::new();
        for (i, s) in Section::ALL.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(self.get(*s));
            out.push('\n');
            out.push_str(sections.get(*s));
        }
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sections {
    pub header: String,
    pub facts: String,
    pub court_view: String,
    pub verdict: String,
    pub conclusion: String,
}

impl Sections {
    pub fn get(&self, section: Section) -> &str {
        match section {
            Section::Header => &self.header,
            Section::Facts => &self.facts,
            Section::CourtView => &self.court_view,
            Section::Verdict => &self.verdict,
            Section::Conclusion => &self.conclusion,
        }
    }

    fn slot(&mut self, section: Section) -> &mut String {
        match section {
            Section::Header => &mut self.header,
            Section::Facts => &mut self.facts,
            Section::CourtView => &mut self.court_view,
            Section::Verdict => &mut self.verdict,
            Section::Conclusion => &mut self.conclusion,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SegmentWarning {
    /// No marker found at all; the whole text was placed in `facts`.
    Unsegmented,
    MissingMarker {
        section: Section,
    },
}

/// Result of segmentation. The raw text is exactly
/// `preamble + Σ(delimiter_i + section_i) + trailer` over the found markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    pub sections: Sections,
    pub preamble: String,
    /// Delimiter text (surrounding whitespace plus marker) per found section.
    pub delimiters: Vec<(Section, String)>,
    pub trailer: String,
    pub warnings: Vec<SegmentWarning>,
}

impl Segmentation {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    /// Reassembles the raw text from its parts.
    pub fn reassemble(&self) -> String {
        let mut out = self.preamble.clone();
        for (section, delim) in &self.delimiters {
            out.push_str(delim);
            out.push_str(self.sections.get(*section));
        }
        out.push_str(&self.trailer);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SegmentError {
    #[error("empty judgment text")]
    Empty,
}

pub fn segment_judgment(raw: &str) -> Result<Segmentation, SegmentError> {
    segment_with(raw, &SectionMarkers::default())
}

pub fn segment_with(raw: &str, markers: &SectionMarkers) -> Result<Segmentation, SegmentError> {
    if raw.trim().is_empty() {
        return Err(SegmentError::Empty);
    }

    // (section, marker start, marker end), searched in order.
    let mut found = Vec::new();
    let mut warnings = Vec::new();
    let mut cursor = 0;
    for section in Section::ALL {
        let marker = markers.get(section);
        match raw[cursor..].find(marker) {
            Some(off) => {
                let start = cursor + off;
                let end = start + marker.len();
                found.push((section, start, end));
                cursor = end;
            }
            None => warnings.push(SegmentWarning::MissingMarker { section }),
        }
    }

    if found.is_empty() {
        return Ok(Segmentation {
            sections: Sections { facts: raw.to_owned(), ..Default::default() },
            preamble: String::new(),
            delimiters: vec![(Section::Facts, String::new())],
            trailer: String::new(),
            warnings: vec![SegmentWarning::Unsegmented],
        });
    }

    let mut sections = Sections::default();
    let mut delimiters = Vec::with_capacity(found.len());
    let mut preamble = String::new();
    // Delimiters absorb the whitespace on both sides of a marker.
    let mut body_start: Option<(Section, usize)> = None;
    for (k, &(section, mstart, mend)) in found.iter().enumerate() {
        let floor = body_start.map_or(0, |(_, p)| p);
        let lo = raw[..mstart].trim_end().len().max(floor);
        let next_start = found.get(k + 1).map_or(raw.len(), |n| n.1);
        let after = &raw[mend..];
        let hi = (mend + after.len() - after.trim_start().len()).min(next_start);
        match body_start {
            Some((prev, p)) => *sections.slot(prev) = raw[p..lo].to_owned(),
            None => preamble = raw[..lo].to_owned(),
        }
        delimiters.push((section, raw[lo..hi].to_owned()));
        body_start = Some((section, hi));
    }
    let (last, body_start) = body_start.expect("at least one marker found");
    let tail = &raw[body_start..];
    let body_len = tail.trim_end().len();
    *sections.slot(last) = tail[..body_len].to_owned();
    let trailer = tail[body_len..].to_owned();

    Ok(Segmentation { sections, preamble, delimiters, trailer, warnings })
}
