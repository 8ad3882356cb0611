// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::text::parse_article_number;

/// Canonical article identifier, `<law-code>:<article-number>` (e.g. `PRC-CL:264`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArticleId {
    law: String,
    number: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid article identifier {0:?}: expected <law-code>:<article-number>")]
pub struct ArticleIdError(pub String);

static LAW_CODE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z][A-Za-z0-9_-]*$").unwrap());
static CN_CITATION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"第([0-9]+|[零〇一二两三四五六七八九十百千]+)条").unwrap());

impl ArticleId {
    pub fn new(law: &str, number: u32) -> Result<Self, ArticleIdError> {
        if !LAW_CODE.is_match(law) || number == 0 {
            return Err(ArticleIdError(format!("{law}:{number}")));
        }
        Ok(ArticleId { law: law.to_owned(), number })
    }

    pub fn law(&self) -> &str {
        &self.law
    }

    pub fn number(&self) -> u32 {
        self.number
    }
}

impl fmt::Display for ArticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.law, self.number)
    }
}

impl FromStr for ArticleId {
    type Err = ArticleIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ArticleIdError(s.to_owned());
        let (law, num) = s.trim().split_once(':').ok_or_else(err)?;
        if num.is_empty() || !num.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let number = num.parse().map_err(|_| err())?;
        ArticleId::new(law, number).map_err(|_| err())
    }
}

impl Serialize for ArticleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ArticleId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Finds `第…条` citations in free text and maps them onto `law`.
pub fn scan_citations(text: &str, law: &str) -> Vec<ArticleId> {
    let mut out: Vec<ArticleId> = CN_CITATION
        .captures_iter(text)
        .filter_map(|c| parse_article_number(&c[1]))
        .filter_map(|n| ArticleId::new(law, n).ok())
        .collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let id: ArticleId = "PRC-CL:264".parse().unwrap();
        assert_eq!(id.law(), "PRC-CL");
        assert_eq!(id.number(), 264);
        assert_eq!(id.to_string(), "PRC-CL:264");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["264", "PRC-CL:", ":264", "PRC CL:264", "PRC-CL:2a", "PRC-CL:0", "第264条"] {
            assert!(bad.parse::<ArticleId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn scans_chinese_citations() {
        let text = "依照《中华人民共和国刑法》第二百六十四条、第六十七条第三款及第264条之规定";
        let found = scan_citations(text, "PRC-CL");
        let nums: Vec<u32> = found.iter().map(ArticleId::number).collect();
        assert_eq!(nums, vec![67, 264]);
    }
}
