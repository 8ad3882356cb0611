// SPDX-License-Identifier: Apache-2.0

//! Text helpers shared by ingestion, retrieval and reason verification.

use unicode_normalization::{is_nfc, UnicodeNormalization};

/// Canonical composition (NFC). Every string entering the corpus passes
/// through here so that substring matching is well defined.
pub fn nfc(s: &str) -> String {
    if is_nfc(s) {
        s.to_owned()
    } else {
        s.nfc().collect()
    }
}

/// Drops every whitespace character.
pub fn strip_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

const TERMINALS: [char; 4] = ['。', '！', '？', '；'];

/// Splits on CJK terminal punctuation (kept with its sentence) and on line
/// breaks (dropped). Whitespace-only pieces are skipped; other pieces are
/// returned untrimmed.
pub fn split_sentences(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in s.char_indices() {
        let end = i + c.len_utf8();
        if TERMINALS.contains(&c) {
            push_piece(&mut out, &s[start..end]);
            start = end;
        } else if c == '\n' || c == '\r' {
            push_piece(&mut out, &s[start..i]);
            start = end;
        }
    }
    push_piece(&mut out, &s[start..]);
    out
}

fn push_piece<'a>(out: &mut Vec<&'a str>, piece: &'a str) {
    if !piece.trim().is_empty() {
        out.push(piece);
    }
}

/// Parses an article number written either in ASCII digits or in Chinese
/// numerals (`二百六十四`, `一百三十三`, `十五`).
pub fn parse_article_number(s: &str) -> Option<u32> {
    if s.is_empty() {
        return None;
    }
    if s.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse().ok();
    }
    let mut total: u32 = 0;
    let mut digit: Option<u32> = None;
    for c in s.chars() {
        match c {
            '零' | '〇' => digit = Some(0),
            '一' => digit = Some(1),
            '二' | '两' => digit = Some(2),
            '三' => digit = Some(3),
            '四' => digit = Some(4),
            '五' => digit = Some(5),
            '六' => digit = Some(6),
            '七' => digit = Some(7),
            '八' => digit = Some(8),
            '九' => digit = Some(9),
            '十' | '百' | '千' => {
                let unit = match c {
                    '十' => 10,
                    '百' => 100,
                    _ => 1000,
                };
                // A bare 十 at the start reads as 一十.
                total += digit.take().unwrap_or(1) * unit;
            }
            _ => return None,
        }
    }
    total += digit.unwrap_or(0);
    (total > 0).then_some(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chinese_numerals() {
        assert_eq!(parse_article_number("二百六十四"), Some(264));
        assert_eq!(parse_article_number("一百三十三"), Some(133));
        assert_eq!(parse_article_number("一百二十五"), Some(125));
        assert_eq!(parse_article_number("三百八十四"), Some(384));
        assert_eq!(parse_article_number("十五"), Some(15));
        assert_eq!(parse_article_number("二十"), Some(20));
        assert_eq!(parse_article_number("一百零五"), Some(105));
        assert_eq!(parse_article_number("一千零一"), Some(1001));
        assert_eq!(parse_article_number("264"), Some(264));
        assert_eq!(parse_article_number("条"), None);
        assert_eq!(parse_article_number(""), None);
    }

    #[test]
    fn sentence_split_keeps_terminals() {
        let s = "甲系住宅。乙与外界隔离！\n丙 ";
        assert_eq!(split_sentences(s), vec!["甲系住宅。", "乙与外界隔离！", "丙 "]);
        assert!(split_sentences("  \n ").is_empty());
    }

    #[test]
    fn nfc_composes() {
        let decomposed = "e\u{0301}";
        assert_eq!(nfc(decomposed), "\u{00e9}");
        assert_eq!(nfc("入户盗窃"), "入户盗窃");
    }
}
