//! Automated document-level novelty scoring over atomic content units.
//!
//! A document is decomposed into atomic content units (ACUs), each unit is
//! judged for novelty against a bank of historical units and for salience
//! against the document's own summary, and the per-unit judgments aggregate
//! into an interpretable document score in [0, 1]. A statistics harness
//! correlates scores against labeled corpora.
//!
//! Module map:
//! - [`model`] — shared domain types (documents, ACUs, verdicts, scores)
//! - [`embedding`] — unit-norm sentence embeddings and cosine similarity
//! - [`acubank`] — cluster-partitioned historical ACU store with top-k
//!   retrieval, persistence, and a search-time benchmark
//! - [`llm`] — chat backend gateway, prompt templates, token accounting
//! - [`extraction`] — one-pass ACU/summary/salience decomposition
//! - [`novelty`] — the three ACU-level novelty evaluators
//! - [`scoring`] — weight curve, score aggregation, grid search
//! - [`stats`] — correlation statistics, strength bands, classification
//!   metrics
//! - [`corpus`] — labeled corpus ingestion and processing plans
//! - [`pipeline`] — end-to-end corpus runs and reports
//! - [`cli`] — the operator command surface

pub mod acubank;
pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod extraction;
pub mod llm;
pub mod model;
pub mod novelty;
pub mod pipeline;
mod retry;
pub mod scoring;
pub mod stats;

pub use retry::RetryPolicy;
