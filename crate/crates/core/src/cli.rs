//! Operator command surface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::acubank::{bench_search, write_bench_csv, BankError};
use crate::corpus::{load_corpus, processing_plan, PlanAction};
use crate::embedding::{build_embedder, EmbeddingError};
use crate::extraction::ExtractError;
use crate::llm::LlmError;
use crate::model::{EvaluatorKind, LabelMode, NoveltyGoldLabel};
use crate::novelty::NoveltyError;
use crate::pipeline::{
    build_gateway, open_bank, run_corpus_with, Pipeline, PipelineError, RunConfig, ScoreLine,
};
use crate::scoring::{grid_search, novascore_from_flags, GridError, GridSpec, Objective, RangeSpec};
use crate::stats::{self, classify_strength, CorrelationResult};

#[derive(Parser)]
#[command(
    name = "novascore",
    version,
    about = "Document-level novelty scoring over atomic content units"
)]
struct Cli {
    /// Cap on cluster-level parallelism (clustered layouts, remote backend).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bank source documents only; targets are left unscored.
    Index {
        /// Corpus documents.jsonl.
        #[arg(long)]
        corpus: PathBuf,
        /// Bank directory to create or extend.
        #[arg(long)]
        bank: PathBuf,
        /// Run config JSON (mirrors the RunConfig schema).
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full pipeline over a corpus and write report artifacts.
    Score {
        /// Corpus documents.jsonl.
        #[arg(long)]
        corpus: PathBuf,
        /// Bank directory to read as history (not modified).
        #[arg(long)]
        bank: Option<PathBuf>,
        /// Run config JSON (mirrors the RunConfig schema).
        #[arg(long)]
        config: PathBuf,
        /// Novelty evaluator override: cossim, nli, or qa.
        #[arg(long)]
        evaluator: Option<String>,
        /// Output directory for report.json and scores.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute correlations offline from a scores.jsonl file.
    EvalCorr {
        /// scores.jsonl produced by `score`.
        #[arg(long)]
        scores: PathBuf,
        /// Comma-separated metrics: pb, pearson, spearman, kendall.
        #[arg(long, default_value = "pb,pearson,spearman,kendall")]
        metrics: String,
    },
    /// Re-aggregate stored per-ACU verdicts over a weight-parameter lattice
    /// (verdicts do not depend on the weights, only the aggregation does).
    GridSearch {
        /// scores.jsonl with per-ACU breakdowns and gold labels.
        #[arg(long = "scores-per-params")]
        scores_per_params: PathBuf,
        /// Alpha range as lo:hi:step, endpoints inclusive.
        #[arg(long, default_value = "0:2:0.25")]
        alpha: String,
        /// Beta range as lo:hi:step, endpoints inclusive.
        #[arg(long, default_value = "0:0.8:0.1")]
        beta: String,
        /// Gamma range as lo:hi:step, endpoints inclusive.
        #[arg(long, default_value = "0.5:1:0.05")]
        gamma: String,
        /// Objective statistic: pb, pearson, spearman, or kendall.
        #[arg(long)]
        objective: String,
        /// Optional CSV path for the full alpha,beta,gamma,statistic surface.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time top-k search over synthetic banks of increasing size.
    BenchSearch {
        /// Comma-separated ascending bank sizes.
        #[arg(long)]
        sizes: String,
        /// Vector dimension of the synthetic records.
        #[arg(long, default_value_t = 256)]
        dim: usize,
        /// Warm queries measured per size.
        #[arg(long, default_value_t = 100)]
        queries: usize,
        /// CSV output path (size,mean_seconds,p95_seconds).
        #[arg(long)]
        out: PathBuf,
        /// Seed for the synthetic record generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

fn classify_pipeline_error(e: &PipelineError) -> i32 {
    let backend_down = matches!(
        e,
        PipelineError::Extraction {
            source: ExtractError::Llm(LlmError::BackendUnavailable { .. }),
            ..
        } | PipelineError::Embedding {
            source: EmbeddingError::BackendUnavailable { .. },
            ..
        } | PipelineError::Novelty {
            source: NoveltyError::Llm(LlmError::BackendUnavailable { .. }),
            ..
        } | PipelineError::Novelty {
            source: NoveltyError::Embedding(EmbeddingError::BackendUnavailable { .. }),
            ..
        }
    );
    if backend_down {
        3
    } else {
        2
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        Self { code: classify_pipeline_error(&e), message: e.to_string() }
    }
}

/// Parse argv and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index { corpus, bank, config } => cmd_index(&corpus, &bank, &config),
        Command::Score { corpus, bank, config, evaluator, out } => {
            cmd_score(&corpus, bank.as_deref(), &config, evaluator.as_deref(), &out, cli.jobs)
        }
        Command::EvalCorr { scores, metrics } => cmd_eval_corr(&scores, &metrics),
        Command::GridSearch { scores_per_params, alpha, beta, gamma, objective, out } => {
            cmd_grid_search(&scores_per_params, &alpha, &beta, &gamma, &objective, out.as_deref())
        }
        Command::BenchSearch { sizes, dim, queries, out, seed } => {
            cmd_bench_search(&sizes, dim, queries, &out, seed)
        }
    }
}

fn load_run_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("bad config {}: {e}", path.display())))
}

fn parse_evaluator(s: &str) -> Result<EvaluatorKind, CliError> {
    match s {
        "cossim" => Ok(EvaluatorKind::CosSim),
        "nli" => Ok(EvaluatorKind::Nli),
        "qa" => Ok(EvaluatorKind::Qa),
        other => Err(CliError::usage(format!(
            "unknown evaluator `{other}` (expected cossim, nli, or qa)"
        ))),
    }
}

fn cmd_index(corpus_path: &Path, bank_path: &Path, config_path: &Path) -> Result<(), CliError> {
    let mut cfg = load_run_config(config_path)?;
    cfg.bank_path = Some(bank_path.to_path_buf());
    cfg.validate()?;
    let corpus = load_corpus(corpus_path, cfg.layout)
        .map_err(|e| CliError::data(e.to_string()))?;
    let gateway = build_gateway(&cfg.backend)?;
    let embedder = build_embedder(&cfg.embedder)
        .map_err(|e| CliError::data(format!("embedder: {e}")))?;
    let mut bank = open_bank(&cfg)?;
    let pipeline = Pipeline::new(&cfg, &gateway, embedder.as_ref());
    let mut banked_docs = 0usize;
    let mut banked_acus = 0usize;
    for step in processing_plan(&corpus) {
        if step.action == PlanAction::BankOnly {
            banked_acus += pipeline.bank_document(step.doc, &mut bank)?;
            banked_docs += 1;
        }
    }
    bank.persist(bank_path)
        .map_err(|e| CliError::data(format!("cannot persist bank: {e}")))?;
    let summary = json!({
        "banked_documents": banked_docs,
        "banked_acus": banked_acus,
        "clusters": bank.clusters().collect::<Vec<_>>(),
        "bank": bank_path.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
    Ok(())
}

fn cmd_score(
    corpus_path: &Path,
    bank_path: Option<&Path>,
    config_path: &Path,
    evaluator: Option<&str>,
    out_dir: &Path,
    jobs: usize,
) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::usage("--jobs must be >= 1"));
    }
    let mut cfg = load_run_config(config_path)?;
    if let Some(bank) = bank_path {
        cfg.bank_path = Some(bank.to_path_buf());
    }
    if let Some(ev) = evaluator {
        cfg.evaluator.kind = parse_evaluator(ev)?;
    }
    cfg.validate()?;
    let corpus = load_corpus(corpus_path, cfg.layout)
        .map_err(|e| CliError::data(e.to_string()))?;
    let gateway = build_gateway(&cfg.backend)?;
    let embedder = build_embedder(&cfg.embedder)
        .map_err(|e| CliError::data(format!("embedder: {e}")))?;
    // The bank is an input here: in-run inserts stay in memory so that a
    // rerun over the same inputs reproduces the same scores.
    let bank = open_bank(&cfg)?;
    let report = run_corpus_with(&corpus, &cfg, &gateway, embedder.as_ref(), bank, jobs)?;
    report.write_files(out_dir)?;
    let summary = json!({
        "n_documents": report.n_documents,
        "n_scored": report.n_scored,
        "n_skipped": report.n_skipped,
        "correlations": report.correlations,
        "out": out_dir.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
    Ok(())
}

fn load_score_lines(path: &Path) -> Result<Vec<ScoreLine>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read scores {}: {e}", path.display())))?;
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ScoreLine = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!("bad score line {} in {}: {e}", i + 1, path.display()))
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

fn labeled_lines(lines: &[ScoreLine]) -> Result<Vec<(&ScoreLine, NoveltyGoldLabel)>, CliError> {
    let labeled: Vec<(&ScoreLine, NoveltyGoldLabel)> =
        lines.iter().filter_map(|l| l.gold_label.map(|g| (l, g))).collect();
    if labeled.len() < 3 {
        return Err(CliError::data(format!(
            "need at least 3 documents with gold labels, found {}",
            labeled.len()
        )));
    }
    Ok(labeled)
}

fn cmd_eval_corr(scores_path: &Path, metrics: &str) -> Result<(), CliError> {
    let lines = load_score_lines(scores_path)?;
    let labeled = labeled_lines(&lines)?;
    let xs: Vec<f64> = labeled.iter().map(|(l, _)| l.score.novascore).collect();
    let graded: Vec<f64> = labeled.iter().map(|(_, g)| g.numeric(LabelMode::Graded)).collect();
    let binary: Vec<f64> = labeled.iter().map(|(_, g)| g.numeric(LabelMode::Binary)).collect();

    let mut out = serde_json::Map::new();
    for metric in metrics.split(',').map(str::trim).filter(|m| !m.is_empty()) {
        let result: Result<CorrelationResult, stats::StatsError> = match metric {
            "pb" | "point_biserial" => stats::point_biserial(&binary, &xs),
            "pearson" => stats::pearson(&xs, &graded),
            "spearman" => stats::spearman(&xs, &graded),
            "kendall" | "kendall_b" => stats::kendall(&xs, &graded),
            other => {
                return Err(CliError::usage(format!(
                    "unknown metric `{other}` (expected pb, pearson, spearman, kendall)"
                )))
            }
        };
        let result = result.map_err(|e| CliError::data(format!("{metric}: {e}")))?;
        let strength = classify_strength(result.statistic, result.method);
        out.insert(
            result.method.as_str().to_string(),
            json!({
                "statistic": result.statistic,
                "p_value": result.p_value,
                "n": result.n,
                "method": result.method.as_str(),
                "strength": strength.as_str(),
            }),
        );
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::Value::Object(out)).expect("json")
    );
    Ok(())
}

fn parse_range(name: &'static str, s: &str) -> Result<RangeSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("--{name} must be lo:hi:step, got `{s}`")));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    match nums {
        Ok(v) if v[2] > 0.0 && v[0] <= v[1] => Ok(RangeSpec::new(v[0], v[1], v[2])),
        _ => Err(CliError::usage(format!("--{name} must be lo:hi:step with step > 0, got `{s}`"))),
    }
}

fn parse_objective(s: &str) -> Result<Objective, CliError> {
    match s {
        "pb" | "point_biserial" => Ok(Objective::PointBiserial),
        "pearson" => Ok(Objective::Pearson),
        "spearman" => Ok(Objective::Spearman),
        "kendall" | "kendall_b" => Ok(Objective::Kendall),
        other => Err(CliError::usage(format!(
            "unknown objective `{other}` (expected pb, pearson, spearman, kendall)"
        ))),
    }
}

fn cmd_grid_search(
    scores_path: &Path,
    alpha: &str,
    beta: &str,
    gamma: &str,
    objective: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec = GridSpec {
        alpha: parse_range("alpha", alpha)?,
        beta: parse_range("beta", beta)?,
        gamma: parse_range("gamma", gamma)?,
        objective: parse_objective(objective)?,
    };
    let lines = load_score_lines(scores_path)?;
    let labeled = labeled_lines(&lines)?;
    let mode = match spec.objective {
        Objective::PointBiserial => LabelMode::Binary,
        _ => LabelMode::Graded,
    };
    // Per-ACU novelty/salience verdicts are parameter-independent; only the
    // aggregation changes across the lattice.
    let docs: Vec<(Vec<String>, Vec<(bool, bool)>, f64)> = labeled
        .iter()
        .map(|(line, gold)| {
            let ids: Vec<String> = line.score.per_acu.iter().map(|a| a.acu_id.clone()).collect();
            let flags: Vec<(bool, bool)> =
                line.score.per_acu.iter().map(|a| (a.is_novel, a.salient)).collect();
            (ids, flags, gold.numeric(mode))
        })
        .collect();
    let result = grid_search(
        |params| {
            docs.iter()
                .map(|(ids, flags, gold)| {
                    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
                    let score = novascore_from_flags("doc", &id_refs, flags, params)
                        .expect("stored breakdowns are non-empty");
                    (score.novascore, *gold)
                })
                .collect()
        },
        &spec,
    )
    .map_err(|e| match e {
        GridError::InvalidRange { .. } => CliError::usage(e.to_string()),
        _ => CliError::data(e.to_string()),
    })?;
    if let Some(path) = out {
        let mut buf = Vec::new();
        result.write_surface_csv(&mut buf).map_err(|e| CliError::data(e.to_string()))?;
        fs::write(path, buf).map_err(|e| CliError::data(e.to_string()))?;
    }
    let summary = json!({
        "alpha": result.best_params.alpha,
        "beta": result.best_params.beta,
        "gamma": result.best_params.gamma,
        "statistic": result.best_statistic,
        "objective": objective,
        "lattice_points": result.surface.len(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary"));
    Ok(())
}

fn cmd_bench_search(
    sizes: &str,
    dim: usize,
    queries: usize,
    out: &Path,
    seed: u64,
) -> Result<(), CliError> {
    let parsed: Result<Vec<usize>, _> = sizes
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<usize>)
        .collect();
    let sizes = parsed.map_err(|e| CliError::usage(format!("bad --sizes: {e}")))?;
    if sizes.is_empty() {
        return Err(CliError::usage("--sizes must list at least one bank size"));
    }
    if dim == 0 {
        return Err(CliError::usage("--dim must be >= 1"));
    }
    let rows = bench_search(&sizes, dim, queries, seed).map_err(|e| match e {
        BankError::InvalidBenchSpec => CliError::usage(e.to_string()),
        other => CliError::data(other.to_string()),
    })?;
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf).map_err(|e| CliError::data(e.to_string()))?;
    fs::write(out, buf).map_err(|e| CliError::data(e.to_string()))?;
    println!("{}", serde_json::to_string_pretty(&rows).expect("rows"));
    Ok(())
}
