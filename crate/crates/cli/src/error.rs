// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use atri_core::bench::BenchError;
use atri_core::corpus::{ConceptError, IngestError};
use atri_core::filter::FilterError;
use atri_core::interpret::InterpretError;
use atri_core::io::JsonlError;
use atri_core::llm::{LlmError, TemplateError, TransportError};
use atri_core::retrieval::{CaseSetError, RetrievalError};
use atri_core::synthetic::SyntheticError;

/// Failure class; each maps to one process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Runtime,
    Usage,
    Config,
    Provider,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Runtime => "runtime",
            Category::Usage => "usage",
            Category::Config => "config",
            Category::Provider => "provider",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::Runtime => 1,
            Category::Usage => 2,
            Category::Config => 3,
            Category::Provider => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError { category, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self::new(Category::Runtime, message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Category::Usage, message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Category::Config, message)
    }

    pub fn provider(message: impl Into<String>) -> Self {
        Self::new(Category::Provider, message)
    }

    /// Prefixes the message with `context: `.
    pub fn context(mut self, context: impl fmt::Display) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }
}

/// Single line: `error[<category>]: <message>`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: Vec<&str> = self.message.split_whitespace().collect();
        write!(f, "error[{}]: {}", self.category.as_str(), flat.join(" "))
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::InvalidRequest(_) => CliError::runtime(e.to_string()),
            LlmError::Provider { .. } | LlmError::Auth(_) => CliError::provider(e.to_string()),
        }
    }
}

impl From<TransportError> for CliError {
    fn from(e: TransportError) -> Self {
        CliError::provider(e.to_string())
    }
}

impl From<TemplateError> for CliError {
    fn from(e: TemplateError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<ConceptError> for CliError {
    fn from(e: ConceptError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<JsonlError> for CliError {
    fn from(e: JsonlError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<CaseSetError> for CliError {
    fn from(e: CaseSetError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<RetrievalError> for CliError {
    fn from(e: RetrievalError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<SyntheticError> for CliError {
    fn from(e: SyntheticError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::Llm(e) => e.into(),
            FilterError::Template(e) => e.into(),
            other => CliError::runtime(other.to_string()),
        }
    }
}

impl From<InterpretError> for CliError {
    fn from(e: InterpretError) -> Self {
        match e {
            InterpretError::Llm(e) => e.into(),
            InterpretError::Template(e) => e.into(),
            other => CliError::runtime(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Llm(e) => e.into(),
            BenchError::Template(e) => e.into(),
            BenchError::Filter(e) => e.into(),
            other => CliError::runtime(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_one_line() {
        let e = CliError::config("bad\nvalue   here");
        assert_eq!(e.to_string(), "error[config]: bad value here");
    }

    #[test]
    fn exit_codes() {
        let codes: Vec<i32> =
            [Category::Runtime, Category::Usage, Category::Config, Category::Provider].iter().map(|c| c.exit_code()).collect();
        assert_eq!(codes, [1, 2, 3, 4]);
    }

    #[test]
    fn provider_failures_map_to_provider() {
        let e: CliError = FilterError::Llm(LlmError::Auth("no key".into())).into();
        assert_eq!(e.category, Category::Provider);
        let e: CliError = BenchError::NoReps.into();
        assert_eq!(e.category, Category::Runtime);
    }
}
