//! ACU-level novelty evaluators: cosine similarity, batched NLI, and the
//! two-step question-generation / question-answering route.
//!
//! All three share the same shape: given a target ACU and its retrieval
//! hits, decide whether the information is already present in the bank. No
//! hits means novel, decided locally with no backend call.

use serde::Deserialize;
use thiserror::Error;

use crate::acubank::RetrievalHit;
use crate::embedding::{cosine_similarity, Embedder, EmbeddingError};
use crate::llm::templates::{render_nli, render_question_answering, render_question_gen};
use crate::llm::{LlmError, LlmGateway, TemplateId};
use crate::model::{Acu, Evidence, EvidenceTrace, EvaluatorKind, HitEvidence, NliLabel, NoveltyVerdict};

/// Maximum premise-hypothesis pairs (or context-question groups) per backend
/// call; keeps responses parseable.
pub const EVAL_BATCH_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum NoveltyError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("targets and hit lists are misaligned: {targets} vs {hits}")]
    LengthMismatch { targets: usize, hits: usize },
    #[error("bad NLI payload: {0}")]
    NliParse(String),
    #[error("bad question-generation payload: {0}")]
    QgParse(String),
    #[error("bad question-answering payload: {0}")]
    QaParse(String),
}

/// Per-evaluator thresholds and retrieval settings.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvaluatorConfig {
    pub kind: EvaluatorKind,
    /// Retrieval depth per target ACU.
    #[serde(default = "default_k")]
    pub retrieval_k: usize,
    /// Retrieval floor; hits below it never reach an evaluator.
    #[serde(default = "default_retrieval_min_sim")]
    pub retrieval_min_sim: f64,
    /// Cosine evaluator decision threshold (inclusive).
    #[serde(default = "default_cossim_decision")]
    pub cossim_decision_threshold: f64,
    /// QA answer-vs-target similarity threshold (inclusive).
    #[serde(default = "default_qa_answer_sim")]
    pub qa_answer_sim_threshold: f64,
    /// Questions generated per target ACU.
    #[serde(default = "default_questions_per_acu")]
    pub questions_per_acu: usize,
}

fn default_k() -> usize {
    5
}
fn default_retrieval_min_sim() -> f64 {
    0.6
}
fn default_cossim_decision() -> f64 {
    0.6
}
fn default_qa_answer_sim() -> f64 {
    0.85
}
fn default_questions_per_acu() -> usize {
    3
}

impl EvaluatorConfig {
    pub fn new(kind: EvaluatorKind) -> Self {
        Self {
            kind,
            retrieval_k: default_k(),
            retrieval_min_sim: default_retrieval_min_sim(),
            cossim_decision_threshold: default_cossim_decision(),
            qa_answer_sim_threshold: default_qa_answer_sim(),
            questions_per_acu: default_questions_per_acu(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("retrieval_min_sim", self.retrieval_min_sim),
            ("cossim_decision_threshold", self.cossim_decision_threshold),
            ("qa_answer_sim_threshold", self.qa_answer_sim_threshold),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(format!("{name} must be in (0, 1], got {v}"));
            }
        }
        if self.retrieval_k == 0 {
            return Err("retrieval_k must be >= 1".into());
        }
        if self.questions_per_acu == 0 {
            return Err("questions_per_acu must be >= 1".into());
        }
        Ok(())
    }
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        Self::new(EvaluatorKind::CosSim)
    }
}

fn hit_evidence(hits: &[RetrievalHit<'_>]) -> Vec<HitEvidence> {
    hits.iter()
        .map(|h| HitEvidence {
            acu_id: h.record.acu_id.to_string(),
            doc_id: h.record.doc_id.to_string(),
            similarity: h.similarity,
        })
        .collect()
}

/// Hit texts joined by a single space in descending-similarity order (the
/// order retrieval returns them in).
fn joined_hit_texts(hits: &[RetrievalHit<'_>]) -> String {
    hits.iter().map(|h| h.record.text).collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Cosine evaluator
// ---------------------------------------------------------------------------

/// Non-novel iff any hit reaches the decision threshold (inclusive).
pub fn evaluate_cossim(
    target: &Acu,
    hits: &[RetrievalHit<'_>],
    cfg: &EvaluatorConfig,
) -> NoveltyVerdict {
    let max_similarity = hits
        .iter()
        .map(|h| h.similarity)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |m| m.max(s))));
    let is_novel = !max_similarity.is_some_and(|m| m >= cfg.cossim_decision_threshold);
    NoveltyVerdict {
        acu_id: target.acu_id.clone(),
        is_novel,
        evaluator: EvaluatorKind::CosSim,
        evidence: Evidence {
            hits: hit_evidence(hits),
            trace: EvidenceTrace::CosSim { max_similarity },
        },
    }
}

// ---------------------------------------------------------------------------
// NLI evaluator
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct NliResultEntry {
    id: u64,
    nli: String,
}

#[derive(Deserialize)]
struct NliPayload {
    nli_results: Vec<NliResultEntry>,
}

/// Batched NLI: the hits of each target are concatenated into a single
/// premise and the target ACU is the hypothesis. Entailment marks
/// non-novelty; contradiction and neutral are novel (contradictory
/// information is new information).
pub fn evaluate_nli(
    targets: &[Acu],
    hits_per_target: &[Vec<RetrievalHit<'_>>],
    gateway: &LlmGateway,
    _cfg: &EvaluatorConfig,
) -> Result<Vec<NoveltyVerdict>, NoveltyError> {
    if targets.len() != hits_per_target.len() {
        return Err(NoveltyError::LengthMismatch {
            targets: targets.len(),
            hits: hits_per_target.len(),
        });
    }
    let mut verdicts: Vec<Option<NoveltyVerdict>> = vec![None; targets.len()];
    let mut pending: Vec<usize> = Vec::new();
    for (i, (target, hits)) in targets.iter().zip(hits_per_target).enumerate() {
        if hits.is_empty() {
            verdicts[i] = Some(NoveltyVerdict {
                acu_id: target.acu_id.clone(),
                is_novel: true,
                evaluator: EvaluatorKind::Nli,
                evidence: Evidence { hits: vec![], trace: EvidenceTrace::Nli { label: None } },
            });
        } else {
            pending.push(i);
        }
    }

    for chunk in pending.chunks(EVAL_BATCH_LIMIT) {
        let pairs: Vec<(String, String)> = chunk
            .iter()
            .map(|&i| (joined_hit_texts(&hits_per_target[i]), targets[i].text.clone()))
            .collect();
        let response = gateway.complete(TemplateId::NliBatch, render_nli(&pairs))?;
        let value = response
            .parsed_json
            .ok_or_else(|| NoveltyError::NliParse("response carries no JSON payload".into()))?;
        let payload: NliPayload = serde_json::from_value(value)
            .map_err(|e| NoveltyError::NliParse(e.to_string()))?;
        if payload.nli_results.len() != chunk.len() {
            return Err(NoveltyError::NliParse(format!(
                "expected {} results, got {}",
                chunk.len(),
                payload.nli_results.len()
            )));
        }
        let mut labels: Vec<Option<NliLabel>> = vec![None; chunk.len()];
        for entry in &payload.nli_results {
            let idx = entry
                .id
                .checked_sub(1)
                .map(|v| v as usize)
                .filter(|&v| v < chunk.len())
                .ok_or_else(|| NoveltyError::NliParse(format!("id {} out of range", entry.id)))?;
            if labels[idx].is_some() {
                return Err(NoveltyError::NliParse(format!("duplicate id {}", entry.id)));
            }
            let label = NliLabel::parse(&entry.nli)
                .ok_or_else(|| NoveltyError::NliParse(format!("unknown label {:?}", entry.nli)))?;
            labels[idx] = Some(label);
        }
        for (slot, &i) in labels.iter().zip(chunk) {
            let label = slot.ok_or_else(|| {
                NoveltyError::NliParse(format!("missing id {} in nli_results", i + 1))
            })?;
            verdicts[i] = Some(NoveltyVerdict {
                acu_id: targets[i].acu_id.clone(),
                is_novel: label != NliLabel::Entailment,
                evaluator: EvaluatorKind::Nli,
                evidence: Evidence {
                    hits: hit_evidence(&hits_per_target[i]),
                    trace: EvidenceTrace::Nli { label: Some(label) },
                },
            });
        }
    }
    Ok(verdicts.into_iter().map(|v| v.expect("every target decided")).collect())
}

// ---------------------------------------------------------------------------
// QA evaluator
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct QuestionsPayload {
    questions_list: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct AnswersPayload {
    answers: Vec<String>,
}

/// Inclusive answer-similarity decision, split out so the threshold rule is
/// testable on exact values.
pub fn qa_is_non_novel(answer_similarity: f64, threshold: f64) -> bool {
    answer_similarity >= threshold
}

/// Two-step QA: generate questions answered by each target ACU, answer them
/// from the concatenated hit texts, embed the consolidated answer, and mark
/// non-novelty when it lands within the answer-similarity threshold of the
/// target ACU embedding.
pub fn evaluate_qa(
    targets: &[Acu],
    hits_per_target: &[Vec<RetrievalHit<'_>>],
    gateway: &LlmGateway,
    embedder: &dyn Embedder,
    cfg: &EvaluatorConfig,
) -> Result<Vec<NoveltyVerdict>, NoveltyError> {
    if targets.len() != hits_per_target.len() {
        return Err(NoveltyError::LengthMismatch {
            targets: targets.len(),
            hits: hits_per_target.len(),
        });
    }
    let mut verdicts: Vec<Option<NoveltyVerdict>> = vec![None; targets.len()];
    let mut pending: Vec<usize> = Vec::new();
    for (i, (target, hits)) in targets.iter().zip(hits_per_target).enumerate() {
        if hits.is_empty() {
            verdicts[i] = Some(NoveltyVerdict {
                acu_id: target.acu_id.clone(),
                is_novel: true,
                evaluator: EvaluatorKind::Qa,
                evidence: Evidence {
                    hits: vec![],
                    trace: EvidenceTrace::Qa {
                        questions: vec![],
                        answer: None,
                        answer_similarity: None,
                    },
                },
            });
        } else {
            pending.push(i);
        }
    }

    for chunk in pending.chunks(EVAL_BATCH_LIMIT) {
        // Step 1: questions whose answer is the target ACU.
        let target_texts: Vec<&str> = chunk.iter().map(|&i| targets[i].text.as_str()).collect();
        let qg_response =
            gateway.complete(TemplateId::QaQuestionGen, render_question_gen(&target_texts))?;
        let qg_value = qg_response
            .parsed_json
            .ok_or_else(|| NoveltyError::QgParse("response carries no JSON payload".into()))?;
        let qg: QuestionsPayload =
            serde_json::from_value(qg_value).map_err(|e| NoveltyError::QgParse(e.to_string()))?;
        if qg.questions_list.len() != chunk.len() {
            return Err(NoveltyError::QgParse(format!(
                "expected {} question groups, got {}",
                chunk.len(),
                qg.questions_list.len()
            )));
        }
        for (i, group) in qg.questions_list.iter().enumerate() {
            if group.len() != cfg.questions_per_acu {
                return Err(NoveltyError::QgParse(format!(
                    "target {} got {} questions, expected {}",
                    i + 1,
                    group.len(),
                    cfg.questions_per_acu
                )));
            }
        }

        // Step 2: answer from the historical context, consolidated per target.
        let items: Vec<(String, Vec<String>)> = chunk
            .iter()
            .zip(&qg.questions_list)
            .map(|(&i, questions)| (joined_hit_texts(&hits_per_target[i]), questions.clone()))
            .collect();
        let qa_response =
            gateway.complete(TemplateId::QaAnswering, render_question_answering(&items))?;
        let qa_value = qa_response
            .parsed_json
            .ok_or_else(|| NoveltyError::QaParse("response carries no JSON payload".into()))?;
        let qa: AnswersPayload =
            serde_json::from_value(qa_value).map_err(|e| NoveltyError::QaParse(e.to_string()))?;
        if qa.answers.len() != chunk.len() {
            return Err(NoveltyError::QaParse(format!(
                "expected {} answers, got {}",
                chunk.len(),
                qa.answers.len()
            )));
        }

        // Step 3: compare consolidated answers to the target ACUs.
        let answer_texts: Vec<String> = qa.answers.clone();
        let target_owned: Vec<String> = chunk.iter().map(|&i| targets[i].text.clone()).collect();
        let answer_vecs = embedder.embed(&answer_texts)?;
        let target_vecs = embedder.embed(&target_owned)?;
        for (((&i, questions), answer), (av, tv)) in chunk
            .iter()
            .zip(&qg.questions_list)
            .zip(&qa.answers)
            .zip(answer_vecs.iter().zip(&target_vecs))
        {
            let similarity = cosine_similarity(av, tv)?;
            verdicts[i] = Some(NoveltyVerdict {
                acu_id: targets[i].acu_id.clone(),
                is_novel: !qa_is_non_novel(similarity, cfg.qa_answer_sim_threshold),
                evaluator: EvaluatorKind::Qa,
                evidence: Evidence {
                    hits: hit_evidence(&hits_per_target[i]),
                    trace: EvidenceTrace::Qa {
                        questions: questions.clone(),
                        answer: Some(answer.clone()),
                        answer_similarity: Some(similarity),
                    },
                },
            });
        }
    }
    Ok(verdicts.into_iter().map(|v| v.expect("every target decided")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acubank::{AcuBank, NewAcuRecord};
    use crate::embedding::{DeterministicHashEmbedder, EmbeddingVector};
    use crate::llm::ScriptedBackend;

    fn acu(id: &str, text: &str) -> Acu {
        Acu {
            acu_id: format!("{id}#0"),
            doc_id: id.into(),
            ordinal: 0,
            text: text.into(),
            salient: false,
        }
    }

    fn bank_with(texts: &[&str]) -> AcuBank {
        let embedder = DeterministicHashEmbedder::new(64);
        let mut bank = AcuBank::new(64);
        let owned: Vec<String> = texts.iter().map(|t| t.to_string()).collect();
        if owned.is_empty() {
            bank.ensure_cluster("c").unwrap();
            return bank;
        }
        let vectors = embedder.embed(&owned).unwrap();
        let records = owned
            .iter()
            .zip(vectors)
            .enumerate()
            .map(|(i, (text, vector))| NewAcuRecord {
                acu_id: format!("hist{i}#0"),
                doc_id: format!("hist{i}"),
                text: text.clone(),
                vector,
            })
            .collect();
        bank.insert("c", records).unwrap();
        bank
    }

    fn search<'a>(bank: &'a AcuBank, text: &str) -> Vec<RetrievalHit<'a>> {
        let embedder = DeterministicHashEmbedder::new(64);
        let q = embedder.embed(&[text.to_string()]).unwrap().remove(0);
        bank.search_top_k("c", &q, 5, 0.6).unwrap()
    }

    fn scripted(lines: &[(TemplateId, &str)]) -> LlmGateway {
        let backend = ScriptedBackend::new();
        for (t, r) in lines {
            backend.push_response(*t, *r);
        }
        LlmGateway::new(Box::new(backend), "test")
    }

    #[test]
    fn cossim_no_hits_is_novel() {
        let cfg = EvaluatorConfig::new(EvaluatorKind::CosSim);
        let v = evaluate_cossim(&acu("t", "anything"), &[], &cfg);
        assert!(v.is_novel);
        assert!(matches!(v.evidence.trace, EvidenceTrace::CosSim { max_similarity: None }));
    }

    #[test]
    fn cossim_hit_above_threshold_is_non_novel() {
        let bank = bank_with(&["the quick brown fox jumps"]);
        let hits = search(&bank, "the quick brown fox jumps");
        assert!(!hits.is_empty());
        let cfg = EvaluatorConfig::new(EvaluatorKind::CosSim);
        let v = evaluate_cossim(&acu("t", "the quick brown fox jumps"), &hits, &cfg);
        assert!(!v.is_novel);
    }

    #[test]
    fn cossim_threshold_is_inclusive() {
        // Decide directly against a synthetic hit at exactly the threshold.
        let bank = bank_with(&["alpha beta gamma delta"]);
        let hits = search(&bank, "alpha beta gamma delta");
        let sim = hits[0].similarity;
        let mut cfg = EvaluatorConfig::new(EvaluatorKind::CosSim);
        cfg.cossim_decision_threshold = sim; // exactly at the hit similarity
        let v = evaluate_cossim(&acu("t", "alpha beta gamma delta"), &hits, &cfg);
        assert!(!v.is_novel);
    }

    #[test]
    fn cossim_monotone_in_threshold() {
        let bank = bank_with(&["one two three four five six"]);
        let hits = search(&bank, "one two three four five seven");
        assert!(!hits.is_empty());
        let mut cfg = EvaluatorConfig::new(EvaluatorKind::CosSim);
        let mut last_novel = false;
        for t in [0.2, 0.4, 0.6, 0.8, 0.9999, 1.0] {
            cfg.cossim_decision_threshold = t;
            let v = evaluate_cossim(&acu("t", "x"), &hits, &cfg);
            // Once novel at a lower threshold, raising it keeps it novel.
            assert!(!last_novel || v.is_novel);
            last_novel = v.is_novel;
        }
    }

    #[test]
    fn nli_empty_hits_short_circuits_without_tokens() {
        let gw = scripted(&[]);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Nli);
        let verdicts = evaluate_nli(&[acu("t", "claim")], &[vec![]], &gw, &cfg).unwrap();
        assert!(verdicts[0].is_novel);
        assert_eq!(gw.ledger_totals().nli_evaluator.prompt_tokens, 0);
    }

    #[test]
    fn nli_entailment_is_non_novel_neutral_is_novel() {
        let bank = bank_with(&["alpha beta gamma delta", "epsilon zeta eta theta"]);
        let t1 = acu("t1", "alpha beta gamma delta");
        let t2 = acu("t2", "epsilon zeta eta theta");
        let hits = vec![search(&bank, &t1.text), search(&bank, &t2.text)];
        let gw = scripted(&[(
            TemplateId::NliBatch,
            r#"{"nli_results":[{"id":1,"nli":"entailment"},{"id":2,"nli":"neutral"}]}"#,
        )]);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Nli);
        let verdicts = evaluate_nli(&[t1, t2], &hits, &gw, &cfg).unwrap();
        assert!(!verdicts[0].is_novel);
        assert!(verdicts[1].is_novel);
        assert!(gw.ledger_totals().nli_evaluator.prompt_tokens > 0);
    }

    #[test]
    fn nli_contradiction_is_novel() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[(
            TemplateId::NliBatch,
            r#"{"nli_results":[{"id":1,"nli":"Contradiction"}]}"#,
        )]);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Nli);
        let verdicts = evaluate_nli(&[t], &hits, &gw, &cfg).unwrap();
        assert!(verdicts[0].is_novel);
        assert!(matches!(
            verdicts[0].evidence.trace,
            EvidenceTrace::Nli { label: Some(NliLabel::Contradiction) }
        ));
    }

    #[test]
    fn nli_rejects_missing_and_duplicate_ids() {
        let bank = bank_with(&["alpha beta gamma delta", "epsilon zeta eta theta"]);
        let t1 = acu("t1", "alpha beta gamma delta");
        let t2 = acu("t2", "epsilon zeta eta theta");
        let hits = vec![search(&bank, &t1.text), search(&bank, &t2.text)];
        let gw = scripted(&[(
            TemplateId::NliBatch,
            r#"{"nli_results":[{"id":1,"nli":"neutral"},{"id":1,"nli":"neutral"}]}"#,
        )]);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Nli);
        let err = evaluate_nli(&[t1, t2], &hits, &gw, &cfg).unwrap_err();
        assert!(matches!(err, NoveltyError::NliParse(msg) if msg.contains("duplicate")));
    }

    #[test]
    fn qa_empty_hits_short_circuits() {
        let gw = scripted(&[]);
        let embedder = DeterministicHashEmbedder::new(64);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let verdicts =
            evaluate_qa(&[acu("t", "claim")], &[vec![]], &gw, &embedder, &cfg).unwrap();
        assert!(verdicts[0].is_novel);
        assert_eq!(gw.ledger_totals().qa_evaluator.prompt_tokens, 0);
    }

    #[test]
    fn qa_identical_answer_is_non_novel() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[
            (
                TemplateId::QaQuestionGen,
                r#"{"questions_list":[["q1?","q2?","q3?"]]}"#,
            ),
            (TemplateId::QaAnswering, r#"{"answers":["alpha beta gamma delta"]}"#),
        ]);
        let embedder = DeterministicHashEmbedder::new(64);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let verdicts = evaluate_qa(&[t], &hits, &gw, &embedder, &cfg).unwrap();
        assert!(!verdicts[0].is_novel);
        match &verdicts[0].evidence.trace {
            EvidenceTrace::Qa { questions, answer, answer_similarity } => {
                assert_eq!(questions.len(), 3);
                assert_eq!(answer.as_deref(), Some("alpha beta gamma delta"));
                assert!(answer_similarity.unwrap() >= 0.85);
            }
            other => panic!("wrong trace: {other:?}"),
        }
    }

    #[test]
    fn qa_unrelated_answer_is_novel() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[
            (
                TemplateId::QaQuestionGen,
                r#"{"questions_list":[["q1?","q2?","q3?"]]}"#,
            ),
            (TemplateId::QaAnswering, r#"{"answers":["unrelated words entirely"]}"#),
        ]);
        let embedder = DeterministicHashEmbedder::new(64);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let verdicts = evaluate_qa(&[t], &hits, &gw, &embedder, &cfg).unwrap();
        assert!(verdicts[0].is_novel);
    }

    #[test]
    fn qa_wrong_question_count_is_an_error() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[(TemplateId::QaQuestionGen, r#"{"questions_list":[["q1?","q2?"]]}"#)]);
        let embedder = DeterministicHashEmbedder::new(64);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let err = evaluate_qa(&[t], &hits, &gw, &embedder, &cfg).unwrap_err();
        assert!(matches!(err, NoveltyError::QgParse(_)));
    }

    #[test]
    fn qa_answer_count_mismatch_is_an_error() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[
            (TemplateId::QaQuestionGen, r#"{"questions_list":[["q1?","q2?","q3?"]]}"#),
            (TemplateId::QaAnswering, r#"{"answers":[]}"#),
        ]);
        let embedder = DeterministicHashEmbedder::new(64);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let err = evaluate_qa(&[t], &hits, &gw, &embedder, &cfg).unwrap_err();
        assert!(matches!(err, NoveltyError::QaParse(_)));
    }

    #[test]
    fn qa_decision_threshold_is_inclusive_at_exact_value() {
        assert!(qa_is_non_novel(0.85, 0.85));
        assert!(!qa_is_non_novel(0.8499999999999999, 0.85));
        assert!(qa_is_non_novel(1.0, 0.85));
    }

    /// Embedder stub mapping each text to a fixed vector, for exact-similarity
    /// threshold tests through the full QA path.
    struct StubEmbedder;

    impl Embedder for StubEmbedder {
        fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
            texts
                .iter()
                .map(|t| {
                    // Target embeds to e1; the canned answer embeds to a vector
                    // at cosine exactly 0.85 from e1.
                    if t == "the target unit" {
                        EmbeddingVector::normalized(vec![1.0, 0.0])
                    } else {
                        let y = (1.0f64 - 0.85 * 0.85).sqrt();
                        EmbeddingVector::normalized(vec![0.85, y])
                    }
                })
                .collect()
        }
    }

    #[test]
    fn qa_full_path_at_exactly_threshold_is_non_novel() {
        let bank = bank_with(&["the target unit"]);
        let t = acu("t", "the target unit");
        let hits = vec![search(&bank, &t.text)];
        let gw = scripted(&[
            (TemplateId::QaQuestionGen, r#"{"questions_list":[["q1?","q2?","q3?"]]}"#),
            (TemplateId::QaAnswering, r#"{"answers":["a synthetic answer"]}"#),
        ]);
        let cfg = EvaluatorConfig::new(EvaluatorKind::Qa);
        let verdicts = evaluate_qa(&[t], &hits, &gw, &StubEmbedder, &cfg).unwrap();
        match &verdicts[0].evidence.trace {
            EvidenceTrace::Qa { answer_similarity, .. } => {
                assert_eq!(answer_similarity.unwrap(), 0.85);
            }
            other => panic!("wrong trace: {other:?}"),
        }
        assert!(!verdicts[0].is_novel, "similarity exactly at threshold is non-novel");
    }

    #[test]
    fn evaluators_are_deterministic_given_same_script() {
        let bank = bank_with(&["alpha beta gamma delta"]);
        let t = acu("t", "alpha beta gamma delta");
        let run = || {
            let hits = vec![search(&bank, &t.text)];
            let gw = scripted(&[(
                TemplateId::NliBatch,
                r#"{"nli_results":[{"id":1,"nli":"entailment"}]}"#,
            )]);
            let cfg = EvaluatorConfig::new(EvaluatorKind::Nli);
            evaluate_nli(std::slice::from_ref(&t), &hits, &gw, &cfg).unwrap()
        };
        assert_eq!(run(), run());
    }
}
