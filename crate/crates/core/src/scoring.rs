//! Score aggregation: the dynamic non-salient weight curve, the document
//! score, and the hyperparameter grid search over (alpha, beta, gamma).

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AcuScore, DocumentScore, NoveltyVerdict, WeightParams, SALIENT_WEIGHT};
use crate::stats::{self, StatsError};

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("document has no ACUs to aggregate")]
    EmptyDocument,
    #[error("verdicts and salience flags are misaligned: {verdicts} vs {saliences}")]
    LengthMismatch { verdicts: usize, saliences: usize },
}

/// Weight of a non-salient ACU at salience ratio `p_s`:
/// `clamp(min(1, alpha * (p_s - beta)^3 + gamma), 0, 1)`.
///
/// The upper cap keeps non-salient ACUs at or below the salient weight; the
/// lower clamp at 0 keeps scores in [0, 1] at extreme parameter corners.
pub fn non_salient_weight(params: &WeightParams, p_s: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_s), "salience ratio out of range: {p_s}");
    let d = p_s - params.beta;
    let raw = params.alpha * (d * d * d) + params.gamma;
    raw.min(SALIENT_WEIGHT).max(0.0)
}

/// Aggregate per-ACU novelty and salience into a document score.
///
/// Novel salient ACUs contribute weight 1, novel non-salient ACUs contribute
/// [`non_salient_weight`], non-novel ACUs contribute 0; the sum is divided by
/// the ACU count. Computed from counts so the result is exactly invariant
/// under reordering of the (verdict, salience) pairs.
pub fn novascore(
    verdicts: &[NoveltyVerdict],
    saliences: &[bool],
    params: &WeightParams,
) -> Result<DocumentScore, ScoreError> {
    if verdicts.len() != saliences.len() {
        return Err(ScoreError::LengthMismatch {
            verdicts: verdicts.len(),
            saliences: saliences.len(),
        });
    }
    let flags: Vec<(bool, bool)> = verdicts
        .iter()
        .zip(saliences)
        .map(|(v, &s)| (v.is_novel, s))
        .collect();
    let doc_id = verdicts
        .first()
        .map(|v| doc_id_of(&v.acu_id))
        .unwrap_or_default();
    let acu_ids: Vec<&str> = verdicts.iter().map(|v| v.acu_id.as_str()).collect();
    novascore_from_flags(&doc_id, &acu_ids, &flags, params)
}

fn doc_id_of(acu_id: &str) -> String {
    acu_id.rsplit_once('#').map(|(d, _)| d.to_string()).unwrap_or_else(|| acu_id.to_string())
}

/// Count-based aggregation over raw (is_novel, salient) flags; the core of
/// [`novascore`], also used when re-aggregating stored breakdowns under new
/// weight parameters.
pub fn novascore_from_flags(
    doc_id: &str,
    acu_ids: &[&str],
    flags: &[(bool, bool)],
    params: &WeightParams,
) -> Result<DocumentScore, ScoreError> {
    let n = flags.len();
    if n == 0 {
        return Err(ScoreError::EmptyDocument);
    }
    debug_assert_eq!(acu_ids.len(), n);
    let salient_count = flags.iter().filter(|(_, s)| *s).count();
    let novel_salient = flags.iter().filter(|(nv, s)| *nv && *s).count();
    let novel_non_salient = flags.iter().filter(|(nv, s)| *nv && !*s).count();
    let p_s = salient_count as f64 / n as f64;
    let w_ns = non_salient_weight(params, p_s);
    let raw = novel_salient as f64 * SALIENT_WEIGHT + w_ns * novel_non_salient as f64;
    let score = raw / n as f64;
    let per_acu = flags
        .iter()
        .enumerate()
        .map(|(i, &(is_novel, salient))| AcuScore {
            acu_id: acu_ids[i].to_string(),
            is_novel,
            salient,
            weight: if salient { SALIENT_WEIGHT } else { w_ns },
        })
        .collect();
    Ok(DocumentScore {
        doc_id: doc_id.to_string(),
        novascore: score,
        n_acus: n,
        salience_ratio: p_s,
        w_ns_used: w_ns,
        per_acu,
    })
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid range {name}: lo={lo}, hi={hi}, step={step}")]
    InvalidRange { name: &'static str, lo: f64, hi: f64, step: f64 },
    #[error("grid search needs at least 3 labeled documents, got {0}")]
    TooFewDocuments(usize),
    #[error("all gold values are identical; the objective is undefined")]
    DegenerateLabels,
    #[error("point-biserial objective requires binary 0/1 gold values")]
    NonBinaryGold,
    #[error("no lattice point produced a computable statistic")]
    NoComputablePoint,
    #[error("weight parameters invalid at lattice point: {0}")]
    BadParams(String),
}

/// Inclusive `lo:hi:step` lattice along one axis. Points are generated by
/// index arithmetic (`lo + i * step`) so accumulated drift cannot skip the
/// endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl RangeSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Self {
        Self { lo, hi, step }
    }

    fn validate(&self, name: &'static str) -> Result<(), GridError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite())
            || self.lo > self.hi
            || self.step <= 0.0
        {
            return Err(GridError::InvalidRange {
                name,
                lo: self.lo,
                hi: self.hi,
                step: self.step,
            });
        }
        Ok(())
    }

    /// Lattice points, inclusive of both endpoints (within a small relative
    /// snap tolerance on the upper end).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.lo + i as f64 * self.step)
            .filter(|&v| v <= self.hi + self.step * 1e-9)
            .collect()
    }
}

/// Objective statistic maximized by the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    PointBiserial,
    Pearson,
    Spearman,
    Kendall,
}

/// Search space over the weight parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: RangeSpec,
    pub beta: RangeSpec,
    pub gamma: RangeSpec,
    pub objective: Objective,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            alpha: RangeSpec::new(0.0, 2.0, 0.25),
            beta: RangeSpec::new(0.0, 0.8, 0.1),
            gamma: RangeSpec::new(0.5, 1.0, 0.05),
            objective: Objective::Pearson,
        }
    }
}

/// One evaluated lattice point. `statistic` is NaN where the objective was
/// not computable (e.g. constant scores).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub statistic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best_params: WeightParams,
    pub best_statistic: f64,
    pub surface: Vec<GridPoint>,
}

impl GridSearchResult {
    /// Export the full surface as `alpha,beta,gamma,statistic` CSV.
    pub fn write_surface_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "alpha,beta,gamma,statistic")?;
        for p in &self.surface {
            writeln!(w, "{},{},{},{}", p.alpha, p.beta, p.gamma, p.statistic)?;
        }
        Ok(())
    }
}

/// Tie order: smaller alpha, then beta closer to 0.5, then larger gamma —
/// the mildest adjustment wins.
fn preferred(a: &WeightParams, b: &WeightParams) -> bool {
    if a.alpha != b.alpha {
        return a.alpha < b.alpha;
    }
    let da = (a.beta - 0.5).abs();
    let db = (b.beta - 0.5).abs();
    if da != db {
        return da < db;
    }
    if a.beta != b.beta {
        return a.beta < b.beta;
    }
    a.gamma > b.gamma
}

/// Evaluate the objective correlation at every lattice point and return the
/// maximizing parameters together with the full surface.
///
/// `doc_scores_fn` maps weight parameters to aligned (score, gold numeric)
/// pairs; gold values must not depend on the parameters.
pub fn grid_search<F>(doc_scores_fn: F, spec: &GridSpec) -> Result<GridSearchResult, GridError>
where
    F: Fn(&WeightParams) -> Vec<(f64, f64)>,
{
    spec.alpha.validate("alpha")?;
    spec.beta.validate("beta")?;
    spec.gamma.validate("gamma")?;

    let probe_params = WeightParams::new(spec.alpha.lo, spec.beta.lo, spec.gamma.lo)
        .map_err(|e| GridError::BadParams(e.to_string()))?;
    let probe = doc_scores_fn(&probe_params);
    if probe.len() < 3 {
        return Err(GridError::TooFewDocuments(probe.len()));
    }
    let golds: Vec<f64> = probe.iter().map(|&(_, g)| g).collect();
    if golds.iter().all(|&g| g == golds[0]) {
        return Err(GridError::DegenerateLabels);
    }
    if spec.objective == Objective::PointBiserial && golds.iter().any(|&g| g != 0.0 && g != 1.0) {
        return Err(GridError::NonBinaryGold);
    }

    let mut surface = Vec::new();
    let mut best: Option<(WeightParams, f64)> = None;
    for &alpha in &spec.alpha.points() {
        for &beta in &spec.beta.points() {
            for &gamma in &spec.gamma.points() {
                let params = WeightParams::new(alpha, beta, gamma)
                    .map_err(|e| GridError::BadParams(e.to_string()))?;
                let pairs = doc_scores_fn(&params);
                let statistic = objective_statistic(&pairs, spec.objective);
                surface.push(GridPoint { alpha, beta, gamma, statistic });
                if statistic.is_nan() {
                    continue;
                }
                let replace = match &best {
                    None => true,
                    Some((bp, bs)) => {
                        statistic > *bs || (statistic == *bs && preferred(&params, bp))
                    }
                };
                if replace {
                    best = Some((params, statistic));
                }
            }
        }
    }
    let (best_params, best_statistic) = best.ok_or(GridError::NoComputablePoint)?;
    Ok(GridSearchResult { best_params, best_statistic, surface })
}

fn objective_statistic(pairs: &[(f64, f64)], objective: Objective) -> f64 {
    let scores: Vec<f64> = pairs.iter().map(|&(s, _)| s).collect();
    let golds: Vec<f64> = pairs.iter().map(|&(_, g)| g).collect();
    let result: Result<_, StatsError> = match objective {
        Objective::Pearson => stats::pearson(&scores, &golds),
        Objective::Spearman => stats::spearman(&scores, &golds),
        Objective::Kendall => stats::kendall(&scores, &golds),
        Objective::PointBiserial => stats::point_biserial(&golds, &scores),
    };
    result.map(|r| r.statistic).unwrap_or(f64::NAN)
}
