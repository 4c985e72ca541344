//! Labeled corpus ingestion for the two supported history layouts:
//! clustered (per-topic source/target groups) and chronological (one
//! time-ordered stream banked into a unified database).

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_document, Document, DocumentRole, ModelError, NoveltyGoldLabel};

/// Database name used for chronological corpora.
pub const UNIFIED_DB: &str = "_all";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("unknown label `{label}` at line {line}")]
    UnknownLabel { line: usize, label: String },
    #[error("document at line {line} invalid: {source}")]
    Invalid { line: usize, source: ModelError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusLayout {
    Clustered,
    Chronological,
}

/// JSONL line shape of one document.
#[derive(Deserialize)]
struct RawDocument {
    id: String,
    cluster: String,
    #[serde(default)]
    timestamp: Option<String>,
    #[serde(default)]
    title: Option<String>,
    text: String,
    role: String,
    #[serde(default)]
    label: Option<String>,
}

/// A validated corpus with documents held in canonical processing order.
#[derive(Debug, Clone)]
pub struct Corpus {
    layout: CorpusLayout,
    documents: Vec<Document>,
}

/// What the pipeline does with one document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanAction {
    BankOnly,
    ScoreThenBank,
}

/// One step of the corpus processing plan.
#[derive(Debug, Clone, Copy)]
pub struct PlanStep<'a> {
    pub doc: &'a Document,
    pub action: PlanAction,
}

impl Corpus {
    pub fn layout(&self) -> CorpusLayout {
        self.layout
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Cluster blocks in first-appearance order, each holding documents in
    /// canonical within-cluster order.
    pub fn clusters(&self) -> Vec<(&str, Vec<&Document>)> {
        let mut order: Vec<&str> = Vec::new();
        let mut groups: Vec<Vec<&Document>> = Vec::new();
        for doc in &self.documents {
            match order.iter().position(|&c| c == doc.cluster_id) {
                Some(i) => groups[i].push(doc),
                None => {
                    order.push(&doc.cluster_id);
                    groups.push(vec![doc]);
                }
            }
        }
        order.into_iter().zip(groups).collect()
    }
}

/// Bank database a document belongs to: its cluster when clustered, the
/// unified database when chronological.
pub fn bank_database_id(layout: CorpusLayout, doc: &Document) -> &str {
    match layout {
        CorpusLayout::Clustered => &doc.cluster_id,
        CorpusLayout::Chronological => UNIFIED_DB,
    }
}

/// Load and validate a JSONL corpus, normalizing document order:
/// chronological corpora sort globally by (timestamp, id); clustered corpora
/// keep file order except that sources precede targets within each cluster
/// and targets sort by (timestamp, id) when every target in the cluster
/// carries a timestamp.
pub fn load_corpus(path: &Path, layout: CorpusLayout) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path)?;
    let mut seen_ids = HashSet::new();
    let mut documents: Vec<Document> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = serde_json::from_str(line)
            .map_err(|e| CorpusError::ParseError { line: line_no, message: e.to_string() })?;
        let role = match raw.role.as_str() {
            "source" => DocumentRole::Source,
            "target" => DocumentRole::Target,
            other => {
                return Err(CorpusError::ParseError {
                    line: line_no,
                    message: format!("role must be `source` or `target`, got `{other}`"),
                })
            }
        };
        let gold_label = match &raw.label {
            None => None,
            Some(label) => Some(NoveltyGoldLabel::parse(label).ok_or_else(|| {
                CorpusError::UnknownLabel { line: line_no, label: label.clone() }
            })?),
        };
        let timestamp: Option<DateTime<Utc>> = match &raw.timestamp {
            None => None,
            Some(ts) => Some(
                DateTime::parse_from_rfc3339(ts)
                    .map_err(|e| CorpusError::ParseError {
                        line: line_no,
                        message: format!("bad timestamp `{ts}`: {e}"),
                    })?
                    .with_timezone(&Utc),
            ),
        };
        let doc = Document {
            id: raw.id,
            cluster_id: raw.cluster,
            timestamp,
            title: raw.title,
            text: raw.text,
            role,
            gold_label,
        };
        let doc = validate_document(doc, &mut seen_ids, layout == CorpusLayout::Chronological)
            .map_err(|source| CorpusError::Invalid { line: line_no, source })?;
        documents.push(doc);
    }

    let documents = match layout {
        CorpusLayout::Chronological => {
            let mut docs = documents;
            docs.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
            docs
        }
        CorpusLayout::Clustered => order_clustered(documents),
    };
    Ok(Corpus { layout, documents })
}

fn order_clustered(documents: Vec<Document>) -> Vec<Document> {
    let mut cluster_order: Vec<String> = Vec::new();
    for d in &documents {
        if !cluster_order.contains(&d.cluster_id) {
            cluster_order.push(d.cluster_id.clone());
        }
    }
    let mut out = Vec::with_capacity(documents.len());
    for cluster in &cluster_order {
        let sources = documents
            .iter()
            .filter(|d| &d.cluster_id == cluster && d.role == DocumentRole::Source);
        let mut targets: Vec<&Document> = documents
            .iter()
            .filter(|d| &d.cluster_id == cluster && d.role == DocumentRole::Target)
            .collect();
        if targets.iter().all(|d| d.timestamp.is_some()) {
            targets.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        }
        out.extend(sources.cloned());
        out.extend(targets.into_iter().cloned());
    }
    out
}

/// The deterministic processing plan: sources are banked, targets are scored
/// then banked. Chronological corpora process every document in time order;
/// the first document of a fresh bank scores all-novel by construction.
pub fn processing_plan(corpus: &Corpus) -> Vec<PlanStep<'_>> {
    corpus
        .documents()
        .iter()
        .map(|doc| PlanStep {
            doc,
            action: match doc.role {
                DocumentRole::Source => PlanAction::BankOnly,
                DocumentRole::Target => PlanAction::ScoreThenBank,
            },
        })
        .collect()
}
