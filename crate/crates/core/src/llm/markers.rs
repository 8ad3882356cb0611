// SPDX-License-Identifier: Apache-2.0

//! Terminal `[[…]]` verdict markers in model replies. The last marker wins.

use std::ops::Range;

use crate::label::Label;

/// Byte range and inner text of the last `[[…]]` marker.
pub fn last_marker(text: &str) -> Option<(Range<usize>, &str)> {
    let mut found = None;
    let mut from = 0;
    while let Some(off) = text[from..].find("[[") {
        let open = from + off;
        let inner_start = open + 2;
        match text[inner_start..].find("]]") {
            Some(len) => {
                let inner = &text[inner_start..inner_start + len];
                if inner.contains('[') || inner.contains('\n') {
                    from = open + 1;
                    continue;
                }
                let end = inner_start + len + 2;
                found = Some((open..end, inner));
                from = end;
            }
            None => break,
        }
    }
    found
}

/// `[[是]]`/`[[Yes]]` → yes, `[[否]]`/`[[No]]` → no, anything else → none.
pub fn parse_verdict(text: &str) -> Option<Label> {
    let (_, inner) = last_marker(text)?;
    match inner.trim().to_lowercase().as_str() {
        "是" | "yes" => Some(Label::Yes),
        "否" | "no" => Some(Label::No),
        _ => None,
    }
}

/// Integer inside the last marker, e.g. `[[7]]`.
pub fn parse_score(text: &str) -> Option<i64> {
    let (_, inner) = last_marker(text)?;
    inner.trim().parse().ok()
}

/// The reply with its last marker removed and surrounding whitespace trimmed.
pub fn strip_last_marker(text: &str) -> String {
    match last_marker(text) {
        Some((range, _)) => {
            let mut s = String::with_capacity(text.len());
            s.push_str(&text[..range.start]);
            s.push_str(&text[range.end..]);
            s.trim().to_owned()
        }
        None => text.trim().to_owned(),
    }
}
