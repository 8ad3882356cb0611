// SPDX-License-Identifier: Apache-2.0

//! Case-grounded interpretation of vague legal concepts.
//!
//! The pipeline runs in three stages over a corpus of segmented court
//! judgments:
//!
//! 1. [`retrieval`] finds judgments that cite the article and mention the
//!    concept verbatim in the court view.
//! 2. [`filter`] asks a model whether each court view actually reasons about
//!    the concept, labels the outcome, extracts the reason and balances the
//!    resulting set.
//! 3. [`interpret`] summarizes the reasons into a structured interpretation.
//!
//! [`bench`] evaluates interpretations on the concept entailment task. All
//! model traffic flows through [`llm::Gateway`].

pub mod bench;
pub mod corpus;
pub mod filter;
pub mod interpret;
pub mod io;
pub mod label;
pub mod llm;
pub mod par;
pub mod retrieval;
pub mod synthetic;
pub mod text;

pub use bench::{BenchReport, EntailmentExample, EntailmentPrediction, Method};
pub use corpus::{ArticleId, CaseJudgment, ConceptSpec, Corpus, CorpusStats};
pub use filter::{BalanceConfig, ReasonRecord, Verification};
pub use interpret::{GenerationConfig, Interpretation, InterpretationSource};
pub use label::{Label, Vote};
pub use llm::{Gateway, LlmRequest, LlmResponse, PromptTemplate};
pub use retrieval::{CaseSet, RetrievalIndex, Stage};
