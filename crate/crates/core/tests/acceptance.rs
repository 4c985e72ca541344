//! Acceptance suite: one test per criterion, each printing a pass line and
//! enforcing its stated tolerance and runtime budget.
//!
//! Oracles here are coded independently of the library paths they check:
//! retrieval against a fresh scan-sort-filter, statistics against direct
//! textbook formulas with p-values from statrs distributions.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use novascore::acubank::{bench_search, random_unit_vector, AcuBank, NewAcuRecord};
use novascore::corpus::{load_corpus, CorpusLayout};
use novascore::embedding::{Embedder, EmbeddingError, EmbeddingVector};
use novascore::llm::{ScriptedBackend, TemplateId};
use novascore::model::{EvaluatorKind, WeightParams};
use novascore::novelty::{
    evaluate_cossim, evaluate_nli, evaluate_qa, qa_is_non_novel, EvaluatorConfig,
};
use novascore::pipeline::{run_corpus, BackendConfig, BackendKind, PipelineFlags, RunConfig};
use novascore::scoring::{
    grid_search, non_salient_weight, novascore_from_flags, GridSpec, Objective,
};
use novascore::stats::{
    classify_strength, classification_metrics, kendall, pearson, point_biserial, spearman,
    CorrMethod, StrengthClass,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn budget(start: Instant, limit: Duration, criterion: u32) {
    let elapsed = start.elapsed();
    assert!(
        elapsed <= limit,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} > {limit:?}"
    );
}

// ---------------------------------------------------------------------------
// 1. Weight-curve exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_weight_curve_exactness() {
    let start = Instant::now();
    let curved = WeightParams::curved();
    assert!((non_salient_weight(&curved, 0.0) - 0.575).abs() <= 1e-12);
    assert!((non_salient_weight(&curved, 0.5) - 0.7).abs() <= 1e-12);
    assert!((non_salient_weight(&curved, 1.0) - 0.825).abs() <= 1e-12);

    let mut prev = f64::NEG_INFINITY;
    for i in 0..=1000 {
        let p = i as f64 / 1000.0;
        let w = non_salient_weight(&curved, p);
        assert!(w >= prev, "weight curve decreased at p_s={p}");
        prev = w;
    }

    let flat = WeightParams::no_adjustment();
    for i in 0..=1000 {
        assert_eq!(non_salient_weight(&flat, i as f64 / 1000.0), 1.0);
    }
    budget(start, Duration::from_secs(1), 1);
    println!("[PASS] criterion 1: weight-curve exactness (0.575/0.7/0.825, monotone, flat at 1)");
}

// ---------------------------------------------------------------------------
// 2. Aggregation identity
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_aggregation_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let flat = WeightParams::no_adjustment();
    for case in 0..1000 {
        let n = rng.random_range(1..=50);
        let flags: Vec<(bool, bool)> =
            (0..n).map(|_| (rng.random::<bool>(), rng.random::<bool>())).collect();
        let ids: Vec<String> = (0..n).map(|i| format!("d#{i}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();

        let score = novascore_from_flags("d", &id_refs, &flags, &flat).unwrap();
        let ratio = flags.iter().filter(|(nv, _)| *nv).count() as f64 / n as f64;
        assert!(
            (score.novascore - ratio).abs() <= 1e-12,
            "case {case}: flat-weight score {} != novelty ratio {ratio}",
            score.novascore
        );

        let params = WeightParams::new(
            rng.random_range(0.0..2.0),
            rng.random_range(0.0..0.8),
            rng.random_range(0.5..1.0),
        )
        .unwrap();
        let scored = novascore_from_flags("d", &id_refs, &flags, &params).unwrap();
        assert!((0.0..=1.0).contains(&scored.novascore), "case {case}: out of bounds");

        let mut shuffled = flags.clone();
        shuffled.shuffle(&mut rng);
        let reshuffled = novascore_from_flags("d", &id_refs, &shuffled, &params).unwrap();
        assert_eq!(
            scored.novascore.to_bits(),
            reshuffled.novascore.to_bits(),
            "case {case}: permutation changed the score"
        );
    }
    budget(start, Duration::from_secs(5), 2);
    println!("[PASS] criterion 2: aggregation identity over 1000 seeded fixtures");
}

// ---------------------------------------------------------------------------
// 3. Retrieval oracle
// ---------------------------------------------------------------------------

/// Independent scan-sort-filter reference over raw vectors.
fn oracle_search(
    records: &[(u64, Vec<f64>)],
    query: &[f64],
    k: usize,
    min_sim: f64,
) -> Vec<(u64, f64)> {
    let mut scored: Vec<(u64, f64)> = Vec::new();
    for (seq, vector) in records {
        let mut dot = 0.0;
        for i in 0..vector.len() {
            dot += vector[i] * query[i];
        }
        let sim = dot.clamp(-1.0, 1.0);
        if sim >= min_sim {
            scored.push((*seq, sim));
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.into_iter().take(k).collect()
}

fn jitter(rng: &mut ChaCha8Rng, base: &EmbeddingVector, scale: f64) -> EmbeddingVector {
    let values: Vec<f64> = base
        .values()
        .iter()
        .map(|v| v + rng.random_range(-scale..=scale))
        .collect();
    EmbeddingVector::normalized(values).unwrap()
}

#[test]
fn criterion_3_retrieval_oracle() {
    let start = Instant::now();
    let dim = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for case in 0..200 {
        let n = rng.random_range(1..=500);
        let mut bank = AcuBank::new(dim);
        let mut raw: Vec<(u64, Vec<f64>)> = Vec::with_capacity(n);
        let mut vectors: Vec<EmbeddingVector> = Vec::with_capacity(n);
        for i in 0..n {
            let roll: f64 = rng.random();
            let vector = if i > 0 && roll < 0.2 {
                // Exact duplicate of an earlier record: exercises tie order.
                vectors[rng.random_range(0..i)].clone()
            } else if i > 0 && roll < 0.5 {
                let base = vectors[rng.random_range(0..i)].clone();
                jitter(&mut rng, &base, 0.05)
            } else {
                random_unit_vector(&mut rng, dim)
            };
            raw.push((i as u64, vector.values().to_vec()));
            vectors.push(vector.clone());
            bank.insert(
                "c",
                vec![NewAcuRecord {
                    acu_id: format!("r{i}"),
                    doc_id: format!("d{i}"),
                    text: String::new(),
                    vector,
                }],
            )
            .unwrap();
        }
        let query = if rng.random::<bool>() {
            let base = vectors[rng.random_range(0..n)].clone();
            jitter(&mut rng, &base, 0.08)
        } else {
            random_unit_vector(&mut rng, dim)
        };
        let hits = bank.search_top_k("c", &query, 5, 0.6).unwrap();
        let expected = oracle_search(&raw, query.values(), 5, 0.6);
        assert_eq!(hits.len(), expected.len(), "case {case}: hit count differs");
        for (hit, (seq, sim)) in hits.iter().zip(&expected) {
            assert_eq!(hit.record.inserted_seq, *seq, "case {case}: order differs");
            assert_eq!(hit.similarity, *sim, "case {case}: similarity differs");
        }
    }
    budget(start, Duration::from_secs(30), 3);
    println!("[PASS] criterion 3: retrieval matches brute-force oracle on 200 seeded banks");
}

// ---------------------------------------------------------------------------
// 4. Statistics oracle
// ---------------------------------------------------------------------------

fn oracle_pearson(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    let r = r.clamp(-1.0, 1.0);
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * ((n - 2.0) / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, n - 2.0).unwrap();
        2.0 * (1.0 - dist.cdf(t.abs()))
    };
    (r, p.clamp(0.0, 1.0))
}

/// Ranks straight from the definition: 1 + |{v < v_i}| + (|{v == v_i}| - 1)/2.
fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&vi| {
            let less = v.iter().filter(|&&u| u < vi).count() as f64;
            let equal = v.iter().filter(|&&u| u == vi).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn oracle_spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    oracle_pearson(&oracle_ranks(x), &oracle_ranks(y))
}

/// Tau-b from O(n^2) pair counting, p from the tie-corrected normal
/// approximation of S = C - D.
fn oracle_kendall(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                tx += 1;
            } else if dy == 0.0 {
                ty += 1;
            } else if dx.signum() == dy.signum() {
                c += 1;
            } else {
                d += 1;
            }
        }
    }
    let tot = (n * (n - 1) / 2) as i64;
    let joint = tot - c - d - tx - ty;
    let xtie = tx + joint;
    let ytie = ty + joint;
    let s = c - d;
    let tau = s as f64 / (((tot - xtie) as f64) * ((tot - ytie) as f64)).sqrt();

    let group_sizes = |v: &[f64]| -> Vec<f64> {
        let mut sorted = v.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut sizes = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                j += 1;
            }
            sizes.push((j - i + 1) as f64);
            i = j + 1;
        }
        sizes
    };
    let nf = n as f64;
    let xs = group_sizes(x);
    let ys = group_sizes(y);
    let term = |sizes: &[f64], f: &dyn Fn(f64) -> f64| sizes.iter().map(|&t| f(t)).sum::<f64>();
    let var_s = (nf * (nf - 1.0) * (2.0 * nf + 5.0)
        - term(&xs, &|t| t * (t - 1.0) * (2.0 * t + 5.0))
        - term(&ys, &|t| t * (t - 1.0) * (2.0 * t + 5.0)))
        / 18.0
        + term(&xs, &|t| t * (t - 1.0)) * term(&ys, &|t| t * (t - 1.0))
            / (2.0 * nf * (nf - 1.0))
        + term(&xs, &|t| t * (t - 1.0) * (t - 2.0)) * term(&ys, &|t| t * (t - 1.0) * (t - 2.0))
            / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    let normal = Normal::new(0.0, 1.0).unwrap();
    let z = s as f64 / var_s.sqrt();
    let p = 2.0 * (1.0 - normal.cdf(z.abs()));
    (tau, p.clamp(0.0, 1.0))
}

#[test]
fn criterion_4_statistics_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let n = 50;
    for case in 0..100 {
        // Half continuous, half discretized to force ties; always inject some
        // signal so inputs are never constant.
        let discretize = case % 2 == 1;
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let base = i as f64 / n as f64;
            let mut xv: f64 = base + rng.random_range(-0.8..0.8);
            let mut yv: f64 = base + rng.random_range(-0.8..0.8);
            if discretize {
                xv = (xv * 4.0).round() / 4.0;
                yv = (yv * 4.0).round() / 4.0;
            }
            x.push(xv);
            y.push(yv);
        }
        let (er, ep) = oracle_pearson(&x, &y);
        let got = pearson(&x, &y).unwrap();
        assert!((got.statistic - er).abs() <= 1e-9, "case {case}: pearson r");
        assert!((got.p_value - ep).abs() <= 1e-6, "case {case}: pearson p");

        let (er, ep) = oracle_spearman(&x, &y);
        let got = spearman(&x, &y).unwrap();
        assert!((got.statistic - er).abs() <= 1e-9, "case {case}: spearman rho");
        assert!((got.p_value - ep).abs() <= 1e-6, "case {case}: spearman p");

        let (er, ep) = oracle_kendall(&x, &y);
        let got = kendall(&x, &y).unwrap();
        assert!((got.statistic - er).abs() <= 1e-9, "case {case}: kendall tau-b");
        assert!((got.p_value - ep).abs() <= 1e-6, "case {case}: kendall p");

        // Point-biserial: binarize x, compare against pearson bit-for-bit.
        let median = {
            let mut s = x.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            s[n / 2]
        };
        let binary: Vec<f64> = x.iter().map(|&v| if v > median { 1.0 } else { 0.0 }).collect();
        if binary.iter().any(|&b| b == 1.0) && binary.iter().any(|&b| b == 0.0) {
            let pb = point_biserial(&binary, &y).unwrap();
            let pe = pearson(&binary, &y).unwrap();
            assert_eq!(pb.statistic.to_bits(), pe.statistic.to_bits(), "case {case}: pb bits");
            assert_eq!(pb.p_value.to_bits(), pe.p_value.to_bits(), "case {case}: pb p bits");
            let (er, ep) = oracle_pearson(&binary, &y);
            assert!((pb.statistic - er).abs() <= 1e-9, "case {case}: pb r");
            assert!((pb.p_value - ep).abs() <= 1e-6, "case {case}: pb p");
        }
    }

    // Hand-derived values.
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
    assert!((r.statistic - 9.0 / 84.0f64.sqrt()).abs() <= 1e-9);
    let r = point_biserial(&[0.0, 0.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((r.statistic - 2.0 / 5.0f64.sqrt()).abs() <= 1e-9);
    let r = kendall(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((r.statistic - 5.0 / 30.0f64.sqrt()).abs() <= 1e-9);

    budget(start, Duration::from_secs(10), 4);
    println!("[PASS] criterion 4: four statistics match textbook oracle on 100 seeded pairs");
}

// ---------------------------------------------------------------------------
// 5. End-to-end determinism and correctness
// ---------------------------------------------------------------------------

fn fixture_config() -> RunConfig {
    RunConfig {
        evaluator: EvaluatorConfig::new(EvaluatorKind::CosSim),
        weights: WeightParams::curved(),
        embedder: novascore::embedding::EmbedderConfig {
            kind: novascore::embedding::EmbedderKind::DeterministicHash,
            endpoint: None,
            model_name: None,
            dim: 256,
            batch_size: 32,
        },
        backend: BackendConfig {
            kind: BackendKind::Scripted,
            endpoint: None,
            model_name: "scripted".into(),
            script_path: Some(fixture("script.jsonl")),
        },
        bank_path: None,
        layout: CorpusLayout::Clustered,
        flags: PipelineFlags::default(),
        seed: 7,
        max_acus_per_doc: None,
    }
}

#[test]
fn criterion_5_end_to_end_golden_and_determinism() {
    let start = Instant::now();
    let corpus = load_corpus(&fixture("documents.jsonl"), CorpusLayout::Clustered).unwrap();
    let cfg = fixture_config();

    let report1 = run_corpus(&corpus, &cfg).unwrap();
    let report2 = run_corpus(&corpus, &cfg).unwrap();
    assert_eq!(
        report1.scores_jsonl(),
        report2.scores_jsonl(),
        "two identical runs must produce byte-identical scores.jsonl"
    );
    assert_eq!(report1.n_skipped, 0, "no document should be skipped: {:?}", report1.skipped);

    let golden: HashMap<String, serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(fixture("golden_scores.json")).unwrap())
            .unwrap();
    assert_eq!(report1.n_scored, golden.len());
    for line in &report1.scores {
        let expect = &golden[&line.score.doc_id];
        assert_eq!(
            line.score.novascore,
            expect["novascore"].as_f64().unwrap(),
            "doc {}: novascore",
            line.score.doc_id
        );
        assert_eq!(line.score.n_acus as u64, expect["n_acus"].as_u64().unwrap());
        assert_eq!(line.score.salience_ratio, expect["salience_ratio"].as_f64().unwrap());
        assert_eq!(line.score.w_ns_used, expect["w_ns_used"].as_f64().unwrap());
        for (i, acu) in line.score.per_acu.iter().enumerate() {
            assert_eq!(
                acu.is_novel,
                expect["novel"][i].as_bool().unwrap(),
                "doc {} acu {i}: novelty",
                line.score.doc_id
            );
            assert_eq!(
                acu.salient,
                expect["salient"][i].as_bool().unwrap(),
                "doc {} acu {i}: salience",
                line.score.doc_id
            );
        }
        assert!(line.score.is_self_consistent(1e-12));
    }

    // The worked example and the duplicate document land exactly.
    let by_id: HashMap<&str, f64> =
        report1.scores.iter().map(|l| (l.score.doc_id.as_str(), l.score.novascore)).collect();
    assert_eq!(by_id["t1"], 0.425);
    assert_eq!(by_id["t2"], 0.0);

    budget(start, Duration::from_secs(30), 5);
    println!("[PASS] criterion 5: end-to-end golden scores exact, reruns byte-identical");
}

// ---------------------------------------------------------------------------
// 6. Evaluator decision rules
// ---------------------------------------------------------------------------

/// Embedder stub: the designated target maps to e1, everything else to a
/// vector at cosine exactly 0.85 from e1.
struct ThresholdEmbedder;

impl Embedder for ThresholdEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbeddingError> {
        texts
            .iter()
            .map(|t| {
                if t == "target unit" {
                    EmbeddingVector::normalized(vec![1.0, 0.0])
                } else {
                    EmbeddingVector::normalized(vec![0.85, (1.0f64 - 0.85 * 0.85).sqrt()])
                }
            })
            .collect()
    }
}

#[test]
fn criterion_6_evaluator_decision_rules() {
    use novascore::model::{Acu, EvidenceTrace, NliLabel};

    let start = Instant::now();
    let acu = |text: &str| Acu {
        acu_id: "t#0".into(),
        doc_id: "t".into(),
        ordinal: 0,
        text: text.into(),
        salient: false,
    };
    let cfg_cs = EvaluatorConfig::new(EvaluatorKind::CosSim);
    let cfg_nli = EvaluatorConfig::new(EvaluatorKind::Nli);
    let cfg_qa = EvaluatorConfig::new(EvaluatorKind::Qa);

    // Empty hits => novel with zero token usage, all three evaluators.
    let gateway = novascore::llm::LlmGateway::new(Box::new(ScriptedBackend::new()), "t");
    let v = evaluate_cossim(&acu("x"), &[], &cfg_cs);
    assert!(v.is_novel);
    let v = evaluate_nli(&[acu("x")], &[vec![]], &gateway, &cfg_nli).unwrap();
    assert!(v[0].is_novel);
    let v = evaluate_qa(&[acu("x")], &[vec![]], &gateway, &ThresholdEmbedder, &cfg_qa).unwrap();
    assert!(v[0].is_novel);
    let totals = gateway.ledger_totals();
    assert_eq!(totals.nli_evaluator.prompt_tokens + totals.nli_evaluator.completion_tokens, 0);
    assert_eq!(totals.qa_evaluator.prompt_tokens + totals.qa_evaluator.completion_tokens, 0);

    // NLI label table: entailment => non-novel; neutral/contradiction => novel.
    let mut bank = AcuBank::new(2);
    bank.insert(
        "c",
        vec![NewAcuRecord {
            acu_id: "h#0".into(),
            doc_id: "h".into(),
            text: "historic unit".into(),
            vector: EmbeddingVector::normalized(vec![1.0, 0.0]).unwrap(),
        }],
    )
    .unwrap();
    let query = EmbeddingVector::normalized(vec![1.0, 0.0]).unwrap();
    for (label, expect_novel) in
        [("entailment", false), ("neutral", true), ("contradiction", true)]
    {
        let hits = bank.search_top_k("c", &query, 5, 0.6).unwrap();
        let backend = ScriptedBackend::new();
        backend.push_response(
            TemplateId::NliBatch,
            format!(r#"{{"nli_results":[{{"id":1,"nli":"{label}"}}]}}"#),
        );
        let gateway = novascore::llm::LlmGateway::new(Box::new(backend), "t");
        let v = evaluate_nli(&[acu("claim")], &[hits], &gateway, &cfg_nli).unwrap();
        assert_eq!(v[0].is_novel, expect_novel, "label {label}");
        match &v[0].evidence.trace {
            EvidenceTrace::Nli { label: Some(l) } => {
                assert_eq!(*l, NliLabel::parse(label).unwrap())
            }
            other => panic!("wrong trace {other:?}"),
        }
    }

    // QA at answer similarity exactly 0.85: non-novel (inclusive threshold).
    let hits = bank.search_top_k("c", &query, 5, 0.6).unwrap();
    let backend = ScriptedBackend::new();
    backend.push_response(TemplateId::QaQuestionGen, r#"{"questions_list":[["a?","b?","c?"]]}"#);
    backend.push_response(TemplateId::QaAnswering, r#"{"answers":["consolidated answer"]}"#);
    let gateway = novascore::llm::LlmGateway::new(Box::new(backend), "t");
    let v = evaluate_qa(&[acu("target unit")], &[hits], &gateway, &ThresholdEmbedder, &cfg_qa)
        .unwrap();
    match &v[0].evidence.trace {
        EvidenceTrace::Qa { answer_similarity, .. } => {
            assert_eq!(answer_similarity.unwrap(), 0.85, "stub must produce exactly 0.85")
        }
        other => panic!("wrong trace {other:?}"),
    }
    assert!(!v[0].is_novel, "similarity exactly 0.85 is non-novel");
    assert!(qa_is_non_novel(0.85, 0.85));

    budget(start, Duration::from_secs(5), 6);
    println!("[PASS] criterion 6: evaluator decision table (short-circuit, labels, 0.85 inclusive)");
}

// ---------------------------------------------------------------------------
// 7. Scaling behavior
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_search_scales_linearly() {
    let start = Instant::now();
    let rows = bench_search(&[1_000, 10_000, 100_000], 256, 100, 42).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(
        rows[2].mean_seconds > rows[0].mean_seconds,
        "search over 100k must be slower than over 1k"
    );

    // Least-squares fit of mean time against size; R^2 of the linear model.
    let xs: Vec<f64> = rows.iter().map(|r| r.size as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_seconds).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    assert!(r2 >= 0.9, "linear fit R^2 = {r2}, rows: {rows:?}");

    budget(start, Duration::from_secs(300), 7);
    println!(
        "[PASS] criterion 7: search time linear in bank size (R^2 = {r2:.4}, means {:?})",
        ys
    );
}

// ---------------------------------------------------------------------------
// 8. Grid-search recovery
// ---------------------------------------------------------------------------

/// (n, salient, novel_salient, novel_non_salient) per document.
fn flags_for(n: usize, s: usize, novel_salient: usize, novel_non_salient: usize) -> Vec<(bool, bool)> {
    let mut flags = Vec::with_capacity(n);
    for i in 0..s {
        flags.push((i < novel_salient, true));
    }
    for i in 0..(n - s) {
        flags.push((i < novel_non_salient, false));
    }
    flags
}

fn scores_at(docs: &[Vec<(bool, bool)>], params: &WeightParams) -> Vec<f64> {
    docs.iter()
        .map(|flags| {
            let ids: Vec<String> = (0..flags.len()).map(|i| format!("d#{i}")).collect();
            let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
            novascore_from_flags("d", &id_refs, flags, params).unwrap().novascore
        })
        .collect()
}

#[test]
fn criterion_8_grid_search_recovery() {
    let start = Instant::now();

    // Planted fixture: gold is the curved-parameter score plus small noise,
    // over documents spanning salience ratios and novelty mixes.
    let shapes: [(usize, usize, usize, usize); 16] = [
        (4, 0, 0, 2),
        (4, 0, 0, 4),
        (8, 2, 1, 3),
        (8, 2, 2, 6),
        (4, 1, 1, 1),
        (2, 1, 1, 1),
        (4, 2, 1, 0),
        (8, 4, 3, 2),
        (4, 3, 2, 1),
        (8, 6, 3, 2),
        (4, 4, 2, 0),
        (8, 8, 5, 0),
        (5, 1, 0, 4),
        (5, 4, 4, 1),
        (10, 3, 2, 5),
        (10, 7, 4, 3),
    ];
    let docs: Vec<Vec<(bool, bool)>> =
        shapes.iter().map(|&(n, s, a, b)| flags_for(n, s, a, b)).collect();
    let planted = WeightParams::curved();
    let golds: Vec<f64> = scores_at(&docs, &planted)
        .into_iter()
        .enumerate()
        .map(|(i, s)| s + (((i * 37) % 11) as f64 - 5.0) / 1000.0)
        .collect();

    let spec = GridSpec { objective: Objective::Pearson, ..GridSpec::default() };
    let result = grid_search(
        |params| scores_at(&docs, params).into_iter().zip(golds.iter().copied()).collect(),
        &spec,
    )
    .unwrap();
    assert!(
        (result.best_params.alpha - 1.0).abs() <= 1e-9
            && (result.best_params.beta - 0.5).abs() <= 1e-9
            && (result.best_params.gamma - 0.7).abs() <= 1e-9,
        "planted parameters not recovered: {:?} (statistic {})",
        result.best_params,
        result.best_statistic
    );
    assert_eq!(result.surface.len(), 9 * 9 * 11);

    // Identity fixture: gold is the exact novelty ratio; the optimum must be
    // a no-adjustment point with correlation 1.
    let shapes: [(usize, usize, usize, usize); 6] = [
        (4, 2, 1, 1),
        (4, 1, 0, 1),
        (4, 3, 3, 1),
        (8, 2, 1, 5),
        (2, 1, 0, 0),
        (8, 4, 2, 2),
    ];
    let docs: Vec<Vec<(bool, bool)>> =
        shapes.iter().map(|&(n, s, a, b)| flags_for(n, s, a, b)).collect();
    let golds: Vec<f64> = docs
        .iter()
        .map(|flags| flags.iter().filter(|(nv, _)| *nv).count() as f64 / flags.len() as f64)
        .collect();
    let result = grid_search(
        |params| scores_at(&docs, params).into_iter().zip(golds.iter().copied()).collect(),
        &spec,
    )
    .unwrap();
    assert_eq!(result.best_params.alpha, 0.0, "identity fixture must pick alpha = 0");
    assert_eq!(result.best_params.gamma, 1.0, "identity fixture must pick gamma = 1");
    assert!(result.best_statistic >= 1.0 - 1e-9, "correlation {}", result.best_statistic);

    budget(start, Duration::from_secs(60), 8);
    println!("[PASS] criterion 8: grid search recovers planted (1, 0.5, 0.7) and identity (0, _, 1)");
}

// ---------------------------------------------------------------------------
// 9. Strength classification
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_strength_classification() {
    assert_eq!(classify_strength(0.70, CorrMethod::Pearson), StrengthClass::Strong);
    assert_eq!(classify_strength(0.05, CorrMethod::KendallB), StrengthClass::Negligible);
    assert_eq!(classify_strength(0.626, CorrMethod::PointBiserial), StrengthClass::Moderate);
    // Band edges are inclusive at the lower bound.
    assert_eq!(classify_strength(0.10, CorrMethod::Pearson), StrengthClass::Weak);
    assert_eq!(classify_strength(0.90, CorrMethod::Pearson), StrengthClass::VeryStrong);
    assert_eq!(classify_strength(0.38, CorrMethod::Spearman), StrengthClass::Moderate);
    assert_eq!(classify_strength(0.06, CorrMethod::KendallB), StrengthClass::Weak);

    // Sanity against classification_metrics shape used in reports.
    let report = classification_metrics(&[1, 1, 0], &[1, 0, 0]).unwrap();
    assert!((report.accuracy - 2.0 / 3.0).abs() < 1e-12);

    println!("[PASS] criterion 9: strength cutoffs reproduce (0.70 strong, 0.626 moderate, 0.05 negligible)");
}
