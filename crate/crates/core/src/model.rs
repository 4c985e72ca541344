//! Shared domain vocabulary: documents, atomic content units, gold labels,
//! weight parameters, novelty verdicts, and document scores.
//!
//! Everything here is an immutable value object after construction and can be
//! shared freely across threads. Validation lives with the types; behavior
//! lives in the processing modules.

use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Weight given to salient ACUs in the aggregation; not a tunable.
pub const SALIENT_WEIGHT: f64 = 1.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("document `{0}` has empty text")]
    EmptyText(String),
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("document `{0}` has no timestamp but the corpus is chronological")]
    MissingTimestamp(String),
    #[error("alpha must be >= 0 for a monotone weight curve, got {0}")]
    NegativeAlpha(f64),
    #[error("weight parameter {name} must be finite, got {value}")]
    NonFiniteWeight { name: &'static str, value: f64 },
    #[error(
        "annotation carries novelty/salience labels but is not `correct` and `not_redundant`"
    )]
    InvalidAnnotation,
}

// ---------------------------------------------------------------------------
// Documents and gold labels
// ---------------------------------------------------------------------------

/// Whether a document only feeds the historical bank or is itself scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentRole {
    /// Banked as history, never scored.
    Source,
    /// Scored against the bank (and optionally banked afterwards).
    Target,
}

/// Human novelty judgment attached to a document.
///
/// One enum serves both labeling styles: binary novel/non-novel corpora and
/// three-way redundancy-graded corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoveltyGoldLabel {
    Novel,
    NonNovel,
    SomewhatRedundant,
    AbsoluteRedundant,
}

/// How a gold label is mapped onto a number for correlation statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelMode {
    /// novel -> 1.0, somewhat_redundant -> 0.5, the rest -> 0.0.
    Graded,
    /// novel -> 1.0, everything else -> 0.0.
    Binary,
}

impl NoveltyGoldLabel {
    pub fn numeric(self, mode: LabelMode) -> f64 {
        match (mode, self) {
            (_, NoveltyGoldLabel::Novel) => 1.0,
            (LabelMode::Graded, NoveltyGoldLabel::SomewhatRedundant) => 0.5,
            _ => 0.0,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "novel" => Some(Self::Novel),
            "non_novel" => Some(Self::NonNovel),
            "somewhat_redundant" => Some(Self::SomewhatRedundant),
            "absolute_redundant" => Some(Self::AbsoluteRedundant),
            _ => None,
        }
    }
}

/// Numeric view of a gold label; see [`NoveltyGoldLabel::numeric`].
pub fn gold_label_numeric(label: NoveltyGoldLabel, mode: LabelMode) -> f64 {
    label.numeric(mode)
}

/// A single input document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub cluster_id: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub title: Option<String>,
    pub text: String,
    pub role: DocumentRole,
    pub gold_label: Option<NoveltyGoldLabel>,
}

/// Check document invariants: non-empty text, unique id (against the
/// caller-supplied registry), and a timestamp when the corpus requires one.
///
/// Returns the document unchanged on success; the registry records its id.
pub fn validate_document(
    doc: Document,
    seen_ids: &mut HashSet<String>,
    require_timestamp: bool,
) -> Result<Document, ModelError> {
    if doc.text.trim().is_empty() {
        return Err(ModelError::EmptyText(doc.id));
    }
    if require_timestamp && doc.timestamp.is_none() {
        return Err(ModelError::MissingTimestamp(doc.id));
    }
    if !seen_ids.insert(doc.id.clone()) {
        return Err(ModelError::DuplicateId(doc.id));
    }
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Atomic content units
// ---------------------------------------------------------------------------

/// One atomic content unit: the minimal self-contained information group
/// conveying a single message, and the unit of novelty/salience judgment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acu {
    /// Unique id, `<doc_id>#<ordinal>`.
    pub acu_id: String,
    pub doc_id: String,
    /// 0-based position within the extraction output.
    pub ordinal: usize,
    pub text: String,
    pub salient: bool,
}

impl Acu {
    pub fn id_for(doc_id: &str, ordinal: usize) -> String {
        format!("{doc_id}#{ordinal}")
    }
}

// ---------------------------------------------------------------------------
// ACU-level human annotation schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correctness {
    Correct,
    Incorrect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Redundancy {
    Redundant,
    NotRedundant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotatedNovelty {
    Novel,
    NotNovel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotatedSalience {
    Salient,
    NonSalient,
}

/// Per-ACU human annotation record.
///
/// Novelty and salience are only judged for units that are correct and not
/// intra-document redundant; the other two fields stay empty otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcuAnnotation {
    pub correctness: Correctness,
    pub redundancy: Redundancy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub novelty: Option<AnnotatedNovelty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salience: Option<AnnotatedSalience>,
}

impl AcuAnnotation {
    pub fn validate(&self) -> Result<(), ModelError> {
        let judged = self.correctness == Correctness::Correct
            && self.redundancy == Redundancy::NotRedundant;
        if !judged && (self.novelty.is_some() || self.salience.is_some()) {
            return Err(ModelError::InvalidAnnotation);
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Weight parameters
// ---------------------------------------------------------------------------

/// Parameters of the cubic non-salient weight curve
/// `w_ns = min(1, alpha * (p_s - beta)^3 + gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Steepness of the cubic; must be >= 0 so the curve never decreases.
    pub alpha: f64,
    /// Salience ratio at which the mean devaluation `gamma` applies.
    pub beta: f64,
    /// Mean devaluation of non-salient ACUs.
    pub gamma: f64,
}

impl WeightParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, ModelError> {
        for (name, value) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteWeight { name, value });
            }
        }
        if alpha < 0.0 {
            return Err(ModelError::NegativeAlpha(alpha));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// (0, 0.5, 1): non-salient ACUs weigh the same as salient ones.
    pub fn no_adjustment() -> Self {
        Self { alpha: 0.0, beta: 0.5, gamma: 1.0 }
    }

    /// (1, 0.5, 0.7): the default curved adjustment.
    pub fn curved() -> Self {
        Self { alpha: 1.0, beta: 0.5, gamma: 0.7 }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        Self::new(self.alpha, self.beta, self.gamma).map(|_| ())
    }
}

// ---------------------------------------------------------------------------
// Verdicts and scores
// ---------------------------------------------------------------------------

/// Which novelty evaluator produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    CosSim,
    Nli,
    Qa,
}

impl std::fmt::Display for EvaluatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EvaluatorKind::CosSim => "cossim",
            EvaluatorKind::Nli => "nli",
            EvaluatorKind::Qa => "qa",
        })
    }
}

/// Three-way inference label over a (premise, hypothesis) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliLabel {
    Entailment,
    Contradiction,
    Neutral,
}

impl NliLabel {
    /// Case-insensitive parse of the response vocabulary.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entailment" => Some(Self::Entailment),
            "contradiction" => Some(Self::Contradiction),
            "neutral" => Some(Self::Neutral),
            _ => None,
        }
    }
}

/// One retrieval hit as recorded in verdict evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitEvidence {
    pub acu_id: String,
    pub doc_id: String,
    pub similarity: f64,
}

/// Evaluator-specific trace for one verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EvidenceTrace {
    CosSim {
        max_similarity: Option<f64>,
    },
    Nli {
        label: Option<NliLabel>,
    },
    Qa {
        questions: Vec<String>,
        answer: Option<String>,
        answer_similarity: Option<f64>,
    },
}

/// Retrieval hits plus the evaluator trace behind one verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub hits: Vec<HitEvidence>,
    pub trace: EvidenceTrace,
}

/// Binary novelty decision for one ACU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyVerdict {
    pub acu_id: String,
    pub is_novel: bool,
    pub evaluator: EvaluatorKind,
    pub evidence: Evidence,
}

/// Per-ACU line of a document score breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcuScore {
    pub acu_id: String,
    pub is_novel: bool,
    pub salient: bool,
    pub weight: f64,
}

/// Document-level score with the full per-ACU breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub novascore: f64,
    pub n_acus: usize,
    pub salience_ratio: f64,
    pub w_ns_used: f64,
    pub per_acu: Vec<AcuScore>,
}

impl DocumentScore {
    /// Recompute the score from the per-ACU breakdown (ordered sum).
    pub fn recompute(&self) -> f64 {
        let sum: f64 = self
            .per_acu
            .iter()
            .map(|a| if a.is_novel { a.weight } else { 0.0 })
            .sum();
        sum / self.n_acus as f64
    }

    /// Self-consistency: the stored score must match the breakdown within `tol`.
    pub fn is_self_consistent(&self, tol: f64) -> bool {
        (self.recompute() - self.novascore).abs() <= tol
            && self.per_acu.len() == self.n_acus
    }
}
