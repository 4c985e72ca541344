//! End-to-end orchestration: extract, retrieve, evaluate novelty, score,
//! bank, and aggregate a corpus run into a report.
//!
//! A document's own ACUs are only banked after its scoring completes, so a
//! unit can never be retrieved as its own history. Per-document backend
//! failures degrade to skipped entries instead of aborting a long corpus
//! run; bank and I/O failures abort.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acubank::{AcuBank, BankError, NewAcuRecord};
use crate::corpus::{bank_database_id, processing_plan, Corpus, CorpusError, CorpusLayout, PlanAction, PlanStep};
use crate::embedding::{build_embedder, Embedder, EmbeddingError, EmbeddingVector};
use crate::extraction::{extract, ExtractError, ExtractionResult};
use crate::llm::templates::ExtractionExample;
use crate::llm::{ChatBackend, LedgerTotals, LlmGateway, RemoteChatBackend, ScriptedBackend};
use crate::model::{Document, DocumentRole, DocumentScore, EvaluatorKind, LabelMode, NoveltyGoldLabel, WeightParams};
use crate::novelty::{evaluate_cossim, evaluate_nli, evaluate_qa, EvaluatorConfig, NoveltyError};
use crate::scoring::{novascore, ScoreError};
use crate::stats::{self, classify_strength, CorrelationResult, StrengthClass};

/// Report schema version.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid run config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("bank failure{}: {source}", doc_context(.doc_id))]
    Bank {
        doc_id: Option<String>,
        #[source]
        source: BankError,
    },
    #[error("extraction failed for document `{doc_id}`: {source}")]
    Extraction {
        doc_id: String,
        #[source]
        source: ExtractError,
    },
    #[error("embedding failed for document `{doc_id}`: {source}")]
    Embedding {
        doc_id: String,
        #[source]
        source: EmbeddingError,
    },
    #[error("novelty evaluation failed for document `{doc_id}`: {source}")]
    Novelty {
        doc_id: String,
        #[source]
        source: NoveltyError,
    },
    #[error("scoring failed for document `{doc_id}`: {source}")]
    Scoring {
        doc_id: String,
        #[source]
        source: ScoreError,
    },
    #[error("document `{0}` has role=source and cannot be scored")]
    NotScorable(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn doc_context(doc_id: &Option<String>) -> String {
    match doc_id {
        Some(id) => format!(" for document `{id}`"),
        None => String::new(),
    }
}

impl PipelineError {
    /// Whether this failure degrades to a skipped document rather than
    /// aborting the run.
    pub fn is_document_degradable(&self) -> bool {
        matches!(
            self,
            PipelineError::Extraction { .. }
                | PipelineError::Embedding { .. }
                | PipelineError::Novelty { .. }
                | PipelineError::Scoring { .. }
        )
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_model_name")]
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_path: Option<PathBuf>,
}

fn default_model_name() -> String {
    "gpt-4o".to_string()
}

/// Banking policy knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineFlags {
    /// Bank a scored target's ACUs so later documents see them as history.
    #[serde(default = "default_true")]
    pub bank_scored_targets: bool,
    /// Bank non-novel ACUs too (false keeps only novel ones).
    #[serde(default = "default_true")]
    pub bank_non_novel: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PipelineFlags {
    fn default() -> Self {
        Self { bank_scored_targets: true, bank_non_novel: true }
    }
}

/// Full run configuration; the CLI config file mirrors these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub evaluator: EvaluatorConfig,
    #[serde(default = "WeightParams::no_adjustment")]
    pub weights: WeightParams,
    #[serde(default)]
    pub embedder: crate::embedding::EmbedderConfig,
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bank_path: Option<PathBuf>,
    #[serde(default = "default_layout")]
    pub layout: CorpusLayout,
    #[serde(default)]
    pub flags: PipelineFlags,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_acus_per_doc: Option<usize>,
}

fn default_layout() -> CorpusLayout {
    CorpusLayout::Clustered
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.weights.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.evaluator.validate().map_err(PipelineError::Config)?;
        self.embedder.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        match self.backend.kind {
            BackendKind::Remote if self.backend.endpoint.is_none() => {
                Err(PipelineError::Config("remote backend requires an endpoint".into()))
            }
            BackendKind::Scripted if self.backend.script_path.is_none() => {
                Err(PipelineError::Config("scripted backend requires a script_path".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Build the configured chat gateway.
pub fn build_gateway(cfg: &BackendConfig) -> Result<LlmGateway, PipelineError> {
    let backend: Box<dyn ChatBackend> = match cfg.kind {
        BackendKind::Scripted => {
            let path = cfg
                .script_path
                .as_ref()
                .ok_or_else(|| PipelineError::Config("scripted backend requires a script_path".into()))?;
            Box::new(ScriptedBackend::from_script_file(path).map_err(|e| {
                PipelineError::Config(format!("cannot load script file: {e}"))
            })?)
        }
        BackendKind::Remote => {
            let endpoint = cfg
                .endpoint
                .as_ref()
                .ok_or_else(|| PipelineError::Config("remote backend requires an endpoint".into()))?;
            Box::new(RemoteChatBackend::from_env(endpoint.clone()))
        }
    };
    Ok(LlmGateway::new(backend, cfg.model_name.clone()))
}

/// Open the configured bank: load it when a manifest exists at `bank_path`,
/// otherwise start fresh at the embedder dimension.
pub fn open_bank(cfg: &RunConfig) -> Result<AcuBank, PipelineError> {
    if let Some(path) = &cfg.bank_path {
        if path.join("manifest.json").exists() {
            return AcuBank::load(path).map_err(|source| PipelineError::Bank { doc_id: None, source });
        }
    }
    Ok(AcuBank::new(cfg.embedder.dim))
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Wall-clock seconds per pipeline stage. Kept in its own block so
/// determinism comparisons can ignore it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub extraction_seconds: f64,
    pub embedding_seconds: f64,
    pub retrieval_seconds: f64,
    pub evaluation_seconds: f64,
    pub scoring_seconds: f64,
    pub banking_seconds: f64,
}

impl StageTimings {
    fn add(&mut self, other: &StageTimings) {
        self.extraction_seconds += other.extraction_seconds;
        self.embedding_seconds += other.embedding_seconds;
        self.retrieval_seconds += other.retrieval_seconds;
        self.evaluation_seconds += other.evaluation_seconds;
        self.scoring_seconds += other.scoring_seconds;
        self.banking_seconds += other.banking_seconds;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDocument {
    pub doc_id: String,
    pub reason: String,
}

/// One line of `scores.jsonl`: the document score plus its gold label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    #[serde(flatten)]
    pub score: DocumentScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_label: Option<NoveltyGoldLabel>,
}

/// A correlation result with its strength band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCorrelation {
    #[serde(flatten)]
    pub result: CorrelationResult,
    pub strength: StrengthClass,
}

/// Outcome of a corpus run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub config: RunConfig,
    pub n_documents: usize,
    pub n_scored: usize,
    pub n_skipped: usize,
    pub skipped: Vec<SkippedDocument>,
    pub correlations: BTreeMap<String, ReportCorrelation>,
    pub token_ledger: LedgerTotals,
    pub scores: Vec<ScoreLine>,
    pub timing: StageTimings,
}

/// `report.json` view: summary, correlations, and ledger without the
/// per-document scores (those live in `scores.jsonl`).
#[derive(Serialize)]
struct ReportJson<'a> {
    format_version: u32,
    config: &'a RunConfig,
    n_documents: usize,
    n_scored: usize,
    n_skipped: usize,
    skipped: &'a [SkippedDocument],
    correlations: &'a BTreeMap<String, ReportCorrelation>,
    token_ledger: &'a LedgerTotals,
    timing: &'a StageTimings,
}

impl RunReport {
    /// The `scores.jsonl` body, one compact JSON object per line.
    pub fn scores_jsonl(&self) -> String {
        let mut out = String::new();
        for line in &self.scores {
            out.push_str(&serde_json::to_string(line).expect("score serializes"));
            out.push('\n');
        }
        out
    }

    /// Write `report.json` and `scores.jsonl` under `out_dir`.
    pub fn write_files(&self, out_dir: &Path) -> Result<(), PipelineError> {
        std::fs::create_dir_all(out_dir)?;
        let view = ReportJson {
            format_version: self.format_version,
            config: &self.config,
            n_documents: self.n_documents,
            n_scored: self.n_scored,
            n_skipped: self.n_skipped,
            skipped: &self.skipped,
            correlations: &self.correlations,
            token_ledger: &self.token_ledger,
            timing: &self.timing,
        };
        let mut report = serde_json::to_string_pretty(&view).expect("report serializes");
        report.push('\n');
        std::fs::write(out_dir.join("report.json"), report)?;
        std::fs::write(out_dir.join("scores.jsonl"), self.scores_jsonl())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Document processing
// ---------------------------------------------------------------------------

/// Shared context for processing documents against one configuration.
pub struct Pipeline<'a> {
    pub cfg: &'a RunConfig,
    pub gateway: &'a LlmGateway,
    pub embedder: &'a dyn Embedder,
    pub example: ExtractionExample,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a RunConfig, gateway: &'a LlmGateway, embedder: &'a dyn Embedder) -> Self {
        Self { cfg, gateway, embedder, example: ExtractionExample::default() }
    }

    fn extract_and_embed(
        &self,
        doc: &Document,
        timings: &mut StageTimings,
    ) -> Result<(ExtractionResult, Vec<EmbeddingVector>), PipelineError> {
        let t0 = Instant::now();
        let extraction = extract(doc, self.gateway, &self.example, self.cfg.max_acus_per_doc)
            .map_err(|source| PipelineError::Extraction { doc_id: doc.id.clone(), source })?;
        timings.extraction_seconds += t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let texts: Vec<String> = extraction.acus.iter().map(|a| a.text.clone()).collect();
        let vectors = self
            .embedder
            .embed(&texts)
            .map_err(|source| PipelineError::Embedding { doc_id: doc.id.clone(), source })?;
        timings.embedding_seconds += t0.elapsed().as_secs_f64();
        Ok((extraction, vectors))
    }

    fn bank_acus(
        &self,
        doc: &Document,
        bank: &mut AcuBank,
        db_id: &str,
        extraction: &ExtractionResult,
        vectors: &[EmbeddingVector],
        keep: impl Fn(usize) -> bool,
        timings: &mut StageTimings,
    ) -> Result<usize, PipelineError> {
        let t0 = Instant::now();
        let records: Vec<NewAcuRecord> = extraction
            .acus
            .iter()
            .zip(vectors)
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, (acu, vector))| NewAcuRecord {
                acu_id: acu.acu_id.clone(),
                doc_id: acu.doc_id.clone(),
                text: acu.text.clone(),
                vector: vector.clone(),
            })
            .collect();
        let inserted = bank
            .insert(db_id, records)
            .map_err(|source| PipelineError::Bank { doc_id: Some(doc.id.clone()), source })?;
        timings.banking_seconds += t0.elapsed().as_secs_f64();
        Ok(inserted)
    }

    /// Extract a source document and bank all of its ACUs.
    pub fn bank_document(&self, doc: &Document, bank: &mut AcuBank) -> Result<usize, PipelineError> {
        self.bank_document_timed(doc, bank, &mut StageTimings::default())
    }

    fn bank_document_timed(
        &self,
        doc: &Document,
        bank: &mut AcuBank,
        timings: &mut StageTimings,
    ) -> Result<usize, PipelineError> {
        let db_id = bank_database_id(self.cfg.layout, doc).to_string();
        bank.ensure_cluster(&db_id)
            .map_err(|source| PipelineError::Bank { doc_id: Some(doc.id.clone()), source })?;
        let (extraction, vectors) = self.extract_and_embed(doc, timings)?;
        self.bank_acus(doc, bank, &db_id, &extraction, &vectors, |_| true, timings)
    }

    /// Score one target document against the bank, then (per flags) insert
    /// its ACUs as history for the documents after it.
    pub fn process_document(
        &self,
        doc: &Document,
        bank: &mut AcuBank,
    ) -> Result<DocumentScore, PipelineError> {
        self.process_document_timed(doc, bank, &mut StageTimings::default())
    }

    fn process_document_timed(
        &self,
        doc: &Document,
        bank: &mut AcuBank,
        timings: &mut StageTimings,
    ) -> Result<DocumentScore, PipelineError> {
        if doc.role != DocumentRole::Target {
            return Err(PipelineError::NotScorable(doc.id.clone()));
        }
        let db_id = bank_database_id(self.cfg.layout, doc).to_string();
        bank.ensure_cluster(&db_id)
            .map_err(|source| PipelineError::Bank { doc_id: Some(doc.id.clone()), source })?;
        let (extraction, vectors) = self.extract_and_embed(doc, timings)?;

        let evcfg = &self.cfg.evaluator;
        let verdicts = {
            let t0 = Instant::now();
            let mut hits_per_target = Vec::with_capacity(vectors.len());
            for vector in &vectors {
                let hits = bank
                    .search_top_k(&db_id, vector, evcfg.retrieval_k, evcfg.retrieval_min_sim)
                    .map_err(|source| PipelineError::Bank { doc_id: Some(doc.id.clone()), source })?;
                hits_per_target.push(hits);
            }
            timings.retrieval_seconds += t0.elapsed().as_secs_f64();

            let t0 = Instant::now();
            let verdicts = match evcfg.kind {
                EvaluatorKind::CosSim => extraction
                    .acus
                    .iter()
                    .zip(&hits_per_target)
                    .map(|(acu, hits)| evaluate_cossim(acu, hits, evcfg))
                    .collect(),
                EvaluatorKind::Nli => {
                    evaluate_nli(&extraction.acus, &hits_per_target, self.gateway, evcfg)
                        .map_err(|source| PipelineError::Novelty { doc_id: doc.id.clone(), source })?
                }
                EvaluatorKind::Qa => evaluate_qa(
                    &extraction.acus,
                    &hits_per_target,
                    self.gateway,
                    self.embedder,
                    evcfg,
                )
                .map_err(|source| PipelineError::Novelty { doc_id: doc.id.clone(), source })?,
            };
            timings.evaluation_seconds += t0.elapsed().as_secs_f64();
            verdicts
        };

        let t0 = Instant::now();
        let saliences: Vec<bool> = extraction.acus.iter().map(|a| a.salient).collect();
        let score = novascore(&verdicts, &saliences, &self.cfg.weights)
            .map_err(|source| PipelineError::Scoring { doc_id: doc.id.clone(), source })?;
        timings.scoring_seconds += t0.elapsed().as_secs_f64();

        if self.cfg.flags.bank_scored_targets {
            let bank_non_novel = self.cfg.flags.bank_non_novel;
            self.bank_acus(
                doc,
                bank,
                &db_id,
                &extraction,
                &vectors,
                |i| bank_non_novel || verdicts[i].is_novel,
                timings,
            )?;
        }
        Ok(score)
    }
}

/// Score one target document. Free-function form of
/// [`Pipeline::process_document`].
pub fn process_document(
    doc: &Document,
    bank: &mut AcuBank,
    cfg: &RunConfig,
    gateway: &LlmGateway,
    embedder: &dyn Embedder,
) -> Result<DocumentScore, PipelineError> {
    Pipeline::new(cfg, gateway, embedder).process_document(doc, bank)
}

// ---------------------------------------------------------------------------
// Corpus runs
// ---------------------------------------------------------------------------

struct ClusterOutcome {
    bank: AcuBank,
    scores: Vec<ScoreLine>,
    skipped: Vec<SkippedDocument>,
    timings: StageTimings,
}

fn run_steps(
    pipeline: &Pipeline<'_>,
    steps: &[PlanStep<'_>],
    bank: &mut AcuBank,
) -> Result<(Vec<ScoreLine>, Vec<SkippedDocument>, StageTimings), PipelineError> {
    let mut scores = Vec::new();
    let mut skipped = Vec::new();
    let mut timings = StageTimings::default();
    for step in steps {
        match step.action {
            PlanAction::BankOnly => {
                match pipeline.bank_document_timed(step.doc, bank, &mut timings) {
                    Ok(_) => {}
                    Err(e) if e.is_document_degradable() => {
                        log::warn!("skipping source {}: {e}", step.doc.id);
                        skipped.push(SkippedDocument {
                            doc_id: step.doc.id.clone(),
                            reason: e.to_string(),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
            PlanAction::ScoreThenBank => {
                match pipeline.process_document_timed(step.doc, bank, &mut timings) {
                    Ok(score) => scores.push(ScoreLine { score, gold_label: step.doc.gold_label }),
                    Err(e) if e.is_document_degradable() => {
                        log::warn!("skipping document {}: {e}", step.doc.id);
                        skipped.push(SkippedDocument {
                            doc_id: step.doc.id.clone(),
                            reason: e.to_string(),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok((scores, skipped, timings))
}

/// Execute the corpus plan and assemble the run report. `jobs` caps
/// cluster-level parallelism; chronological layouts and scripted backends
/// always run sequentially (the scripted FIFO is order-sensitive).
pub fn run_corpus_with(
    corpus: &Corpus,
    cfg: &RunConfig,
    gateway: &LlmGateway,
    embedder: &dyn Embedder,
    mut bank: AcuBank,
    jobs: usize,
) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let pipeline = Pipeline::new(cfg, gateway, embedder);
    let plan = processing_plan(corpus);
    let n_documents = plan.len();

    let sequential = jobs <= 1
        || cfg.layout == CorpusLayout::Chronological
        || cfg.backend.kind == BackendKind::Scripted;

    let (scores, skipped, timings) = if sequential {
        let (scores, skipped, timings) = run_steps(&pipeline, &plan, &mut bank)?;
        (scores, skipped, timings)
    } else {
        // Group plan steps by cluster in first-appearance order; each group
        // runs sequentially on its own split-off cluster database.
        let mut order: Vec<&str> = Vec::new();
        let mut groups: Vec<Vec<PlanStep<'_>>> = Vec::new();
        for step in &plan {
            let cluster = step.doc.cluster_id.as_str();
            match order.iter().position(|&c| c == cluster) {
                Some(i) => groups[i].push(*step),
                None => {
                    order.push(cluster);
                    groups.push(vec![*step]);
                }
            }
        }
        let work: Mutex<VecDeque<(usize, AcuBank, Vec<PlanStep<'_>>)>> = Mutex::new(
            order
                .iter()
                .zip(groups)
                .enumerate()
                .map(|(i, (cluster, steps))| (i, bank.split_cluster(cluster), steps))
                .collect(),
        );
        let n_groups = order.len();
        let results: Mutex<Vec<Option<Result<ClusterOutcome, PipelineError>>>> =
            Mutex::new((0..n_groups).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(n_groups) {
                scope.spawn(|| loop {
                    let item = work.lock().expect("work queue").pop_front();
                    let Some((idx, mut sub_bank, steps)) = item else { break };
                    let outcome = run_steps(&pipeline, &steps, &mut sub_bank).map(
                        |(scores, skipped, timings)| ClusterOutcome {
                            bank: sub_bank,
                            scores,
                            skipped,
                            timings,
                        },
                    );
                    results.lock().expect("results")[idx] = Some(outcome);
                });
            }
        });
        let mut scores = Vec::new();
        let mut skipped = Vec::new();
        let mut timings = StageTimings::default();
        for slot in results.into_inner().expect("results") {
            let outcome = slot.expect("every cluster ran")?;
            bank.absorb(outcome.bank)
                .map_err(|source| PipelineError::Bank { doc_id: None, source })?;
            scores.extend(outcome.scores);
            skipped.extend(outcome.skipped);
            timings.add(&outcome.timings);
        }
        (scores, skipped, timings)
    };

    let correlations = compute_correlations(&scores);
    Ok(RunReport {
        format_version: REPORT_FORMAT_VERSION,
        config: cfg.clone(),
        n_documents,
        n_scored: scores.len(),
        n_skipped: skipped.len(),
        skipped,
        correlations,
        token_ledger: gateway.ledger_totals(),
        scores,
        timing: timings,
    })
}

/// Run a corpus from configuration alone: builds the backend and embedder,
/// opens (or creates) the bank, and executes the plan. The bank is treated
/// as a read-only input; in-run inserts are not persisted.
pub fn run_corpus(corpus: &Corpus, cfg: &RunConfig) -> Result<RunReport, PipelineError> {
    run_corpus_jobs(corpus, cfg, 1)
}

/// [`run_corpus`] with a cluster-parallelism cap.
pub fn run_corpus_jobs(
    corpus: &Corpus,
    cfg: &RunConfig,
    jobs: usize,
) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let embedder = build_embedder(&cfg.embedder)
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let gateway = build_gateway(&cfg.backend)?;
    let bank = open_bank(cfg)?;
    run_corpus_with(corpus, cfg, &gateway, embedder.as_ref(), bank, jobs)
}

fn compute_correlations(scores: &[ScoreLine]) -> BTreeMap<String, ReportCorrelation> {
    let labeled: Vec<(&ScoreLine, NoveltyGoldLabel)> = scores
        .iter()
        .filter_map(|line| line.gold_label.map(|g| (line, g)))
        .collect();
    let mut out = BTreeMap::new();
    if labeled.len() < 3 {
        return out;
    }
    let xs: Vec<f64> = labeled.iter().map(|(l, _)| l.score.novascore).collect();
    let graded: Vec<f64> = labeled.iter().map(|(_, g)| g.numeric(LabelMode::Graded)).collect();
    let binary: Vec<f64> = labeled.iter().map(|(_, g)| g.numeric(LabelMode::Binary)).collect();

    let mut insert = |result: Result<CorrelationResult, stats::StatsError>| {
        if let Ok(result) = result {
            let strength = classify_strength(result.statistic, result.method);
            out.insert(result.method.as_str().to_string(), ReportCorrelation { result, strength });
        }
    };
    insert(stats::point_biserial(&binary, &xs));
    insert(stats::pearson(&xs, &graded));
    insert(stats::spearman(&xs, &graded));
    insert(stats::kendall(&xs, &graded));
    out
}
