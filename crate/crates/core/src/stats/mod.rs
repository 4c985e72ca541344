//! Correlation statistics with significance, strength classification, and
//! binary classification metrics.
//!
//! Pearson, Point-Biserial (Pearson on 0/1 input), Spearman (Pearson on
//! average ranks), and Kendall tau-b with tie corrections. P-values use the
//! t transform for the Pearson family and the tie-corrected normal
//! approximation for tau-b, all on the hand-rolled CDFs in [`special`].

pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use special::{normal_cdf, student_t_cdf};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least {min} samples, got {n}")]
    InsufficientData { n: usize, min: usize },
    #[error("{0} input is constant")]
    ConstantInput(&'static str),
    #[error("binary input contains a single class only")]
    SingleClass,
    #[error("input is not binary 0/1")]
    NotBinary,
    #[error("input contains a non-finite value")]
    NonFinite,
}

/// Correlation family; drives p-value method and strength cutoffs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrMethod {
    Pearson,
    PointBiserial,
    Spearman,
    KendallB,
}

impl CorrMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrMethod::Pearson => "pearson",
            CorrMethod::PointBiserial => "point_biserial",
            CorrMethod::Spearman => "spearman",
            CorrMethod::KendallB => "kendall_b",
        }
    }
}

/// A correlation statistic with its two-sided p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub method: CorrMethod,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 3 {
        return Err(StatsError::InsufficientData { n: x.len(), min: 3 });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Two-sided p-value for a Pearson-family statistic via
/// t = r * sqrt((n-2) / (1 - r^2)) against Student-t(n-2).
fn pearson_family_p_value(r: f64, n: usize) -> f64 {
    let one_minus_r2 = 1.0 - r * r;
    if one_minus_r2 <= 0.0 {
        return 0.0;
    }
    let dof = (n - 2) as f64;
    let t = r * (dof / one_minus_r2).sqrt();
    (2.0 * (1.0 - student_t_cdf(t.abs(), dof))).clamp(0.0, 1.0)
}

fn pearson_with_method(x: &[f64], y: &[f64], method: CorrMethod) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y)?;
    let n = x.len();
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ConstantInput("x"));
    }
    if syy == 0.0 {
        return Err(StatsError::ConstantInput("y"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(CorrelationResult { statistic: r, p_value: pearson_family_p_value(r, n), n, method })
}

/// Pearson product-moment correlation with a two-sided t-test p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    pearson_with_method(x, y, CorrMethod::Pearson)
}

/// Point-Biserial correlation: Pearson with one variable binary-coded.
/// Identical to [`pearson`] on the same input, bit for bit.
pub fn point_biserial(binary: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if binary.iter().any(|&b| b != 0.0 && b != 1.0) {
        return Err(StatsError::NotBinary);
    }
    let ones = binary.iter().filter(|&&b| b == 1.0).count();
    if !binary.is_empty() && (ones == 0 || ones == binary.len()) {
        return Err(StatsError::SingleClass);
    }
    pearson_with_method(binary, y, CorrMethod::PointBiserial)
}

/// Average ranks (1-based); tied values receive the mean rank of their block.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share the block mean.
        let mean_rank = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = mean_rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson applied to average ranks, p-value via
/// the same t transform on rho.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson_with_method(&rx, &ry, CorrMethod::Spearman)
}

/// Kendall tau-b with tie corrections in both variables.
///
/// Discordant pairs are counted in O(n log n) by merge-sort inversion
/// counting after sorting by (x, y); the p-value uses the tie-corrected
/// asymptotic normal variance of S = C - D.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y)?;
    let n = x.len();

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("finite")
            .then(y[a].partial_cmp(&y[b]).expect("finite"))
    });

    // Tie statistics over x groups and joint (x, y) groups.
    let mut x_tie_sizes: Vec<u64> = Vec::new();
    let mut joint_ties: u64 = 0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        x_tie_sizes.push((j - i + 1) as u64);
        let mut k = i;
        while k <= j {
            let mut m = k;
            while m + 1 <= j && y[idx[m + 1]] == y[idx[k]] {
                m += 1;
            }
            let t = (m - k + 1) as u64;
            joint_ties += t * (t - 1) / 2;
            k = m + 1;
        }
        i = j + 1;
    }

    let mut y_sorted_by_x: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let discordant = count_inversions(&mut y_sorted_by_x);

    let mut y_tie_sizes: Vec<u64> = Vec::new();
    let mut ys: Vec<f64> = y.to_vec();
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && ys[j + 1] == ys[i] {
            j += 1;
        }
        y_tie_sizes.push((j - i + 1) as u64);
        i = j + 1;
    }

    let pairs = |t: u64| t * (t - 1) / 2;
    let tot = pairs(n as u64);
    let xtie: u64 = x_tie_sizes.iter().map(|&t| pairs(t)).sum();
    let ytie: u64 = y_tie_sizes.iter().map(|&t| pairs(t)).sum();
    if xtie == tot {
        return Err(StatsError::ConstantInput("x"));
    }
    if ytie == tot {
        return Err(StatsError::ConstantInput("y"));
    }

    let con_minus_dis =
        tot as i64 - xtie as i64 - ytie as i64 + joint_ties as i64 - 2 * discordant as i64;
    let denom = ((tot - xtie) as f64 * (tot - ytie) as f64).sqrt();
    let tau = (con_minus_dis as f64 / denom).clamp(-1.0, 1.0);

    // Tie-corrected asymptotic variance of S.
    let nf = n as f64;
    let size_term = |sizes: &[u64], f: &dyn Fn(f64) -> f64| -> f64 {
        sizes.iter().map(|&t| f(t as f64)).sum()
    };
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = size_term(&x_tie_sizes, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = size_term(&y_tie_sizes, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = size_term(&x_tie_sizes, &|t| t * (t - 1.0));
    let u1 = size_term(&y_tie_sizes, &|t| t * (t - 1.0));
    let t2 = size_term(&x_tie_sizes, &|t| t * (t - 1.0) * (t - 2.0));
    let u2 = size_term(&y_tie_sizes, &|t| t * (t - 1.0) * (t - 2.0));
    let var_s = (v0 - vt - vu) / 18.0
        + t1 * u1 / (2.0 * nf * (nf - 1.0))
        + t2 * u2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));

    let p_value = if var_s > 0.0 {
        let z = con_minus_dis as f64 / var_s.sqrt();
        (2.0 * (1.0 - normal_cdf(z.abs()))).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(CorrelationResult { statistic: tau, p_value, n, method: CorrMethod::KendallB })
}

/// Strict inversions (a[i] > a[j], i < j) via merge sort; `a` ends sorted.
fn count_inversions(a: &mut [f64]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mut buf = vec![0.0; n];
    merge_count(a, &mut buf)
}

fn merge_count(a: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = a.split_at_mut(mid);
        merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..])
    };
    let mut i = 0;
    let mut j = mid;
    let mut k = 0;
    while i < mid && j < n {
        if a[i] <= a[j] {
            buf[k] = a[i];
            i += 1;
        } else {
            // a[i..mid] are all strictly greater than a[j].
            inv += (mid - i) as u64;
            buf[k] = a[j];
            j += 1;
        }
        k += 1;
    }
    buf[k..k + (mid - i)].copy_from_slice(&a[i..mid]);
    buf[k + (mid - i)..].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    inv
}

// ---------------------------------------------------------------------------
// Strength classification
// ---------------------------------------------------------------------------

/// Interpretation band of a correlation magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrengthClass {
    Negligible,
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl StrengthClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StrengthClass::Negligible => "negligible",
            StrengthClass::Weak => "weak",
            StrengthClass::Moderate => "moderate",
            StrengthClass::Strong => "strong",
            StrengthClass::VeryStrong => "very_strong",
        }
    }
}

/// Classify |statistic| with per-family cutoffs. Bands are half-open with
/// inclusive lower bounds: Pearson/Point-Biserial 0.10/0.40/0.70/0.90,
/// Spearman 0.10/0.38/0.68/0.89, Kendall 0.06/0.26/0.49/0.71.
pub fn classify_strength(statistic: f64, method: CorrMethod) -> StrengthClass {
    let cutoffs = match method {
        CorrMethod::Pearson | CorrMethod::PointBiserial => [0.10, 0.40, 0.70, 0.90],
        CorrMethod::Spearman => [0.10, 0.38, 0.68, 0.89],
        CorrMethod::KendallB => [0.06, 0.26, 0.49, 0.71],
    };
    let s = statistic.abs();
    debug_assert!(s <= 1.0 + 1e-12);
    if s < cutoffs[0] {
        StrengthClass::Negligible
    } else if s < cutoffs[1] {
        StrengthClass::Weak
    } else if s < cutoffs[2] {
        StrengthClass::Moderate
    } else if s < cutoffs[3] {
        StrengthClass::Strong
    } else {
        StrengthClass::VeryStrong
    }
}

// ---------------------------------------------------------------------------
// Classification metrics
// ---------------------------------------------------------------------------

/// Precision/recall/F1 of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Binary classification report: accuracy, macro/weighted F1, per-class rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Standard binary classification metrics. Classes with zero support report
/// precision/recall/F1 of 0 with support 0; the weighted average then
/// ignores them.
pub fn classification_metrics(pred: &[u8], gold: &[u8]) -> Result<ClassificationReport, StatsError> {
    if pred.len() != gold.len() {
        return Err(StatsError::LengthMismatch { x: pred.len(), y: gold.len() });
    }
    if pred.is_empty() {
        return Err(StatsError::InsufficientData { n: 0, min: 1 });
    }
    if pred.iter().chain(gold).any(|&v| v > 1) {
        return Err(StatsError::NotBinary);
    }
    let n = pred.len();
    let correct = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    let mut per_class = Vec::with_capacity(2);
    for class in [0u8, 1u8] {
        let tp = pred.iter().zip(gold).filter(|&(&p, &g)| p == class && g == class).count();
        let fp = pred.iter().zip(gold).filter(|&(&p, &g)| p == class && g != class).count();
        let fneg = pred.iter().zip(gold).filter(|&(&p, &g)| p != class && g == class).count();
        let support = tp + fneg;
        let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
        let recall = if support > 0 { tp as f64 / support as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.push(ClassMetrics { class, precision, recall, f1, support });
    }
    let macro_f1 = (per_class[0].f1 + per_class[1].f1) / 2.0;
    let weighted_f1 = per_class
        .iter()
        .map(|c| c.f1 * c.support as f64)
        .sum::<f64>()
        / n as f64;
    Ok(ClassificationReport {
        accuracy: correct as f64 / n as f64,
        macro_f1,
        weighted_f1,
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_perfect_correlations() {
        let x = [1.0, 2.0, 3.0, 5.0];
        let r = pearson(&x, &x).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = pearson(&x, &neg).unwrap();
        assert_eq!(r.statistic, -1.0);
    }

    #[test]
    fn pearson_hand_value() {
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r.statistic - 9.0 / 84.0f64.sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn pearson_rejects_constant_and_mismatch() {
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::ConstantInput("x")
        );
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn point_biserial_hand_value_and_identity_with_pearson() {
        let b = [0.0, 0.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        let pb = point_biserial(&b, &y).unwrap();
        assert!((pb.statistic - 2.0 / 5.0f64.sqrt()).abs() <= 1e-9);
        let pe = pearson(&b, &y).unwrap();
        assert_eq!(pb.statistic.to_bits(), pe.statistic.to_bits());
        assert_eq!(pb.p_value.to_bits(), pe.p_value.to_bits());
    }

    #[test]
    fn point_biserial_sign_and_single_class() {
        let pb = point_biserial(&[1.0, 0.0, 1.0, 0.0], &[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert!(pb.statistic > 0.0);
        let pb = point_biserial(&[0.0, 1.0, 0.0, 1.0], &[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert!(pb.statistic < 0.0);
        assert_eq!(
            point_biserial(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::SingleClass
        );
        assert_eq!(
            point_biserial(&[0.5, 1.0, 0.0], &[1.0, 2.0, 3.0]).unwrap_err(),
            StatsError::NotBinary
        );
    }

    #[test]
    fn spearman_monotone_and_hand_value() {
        let x = [1.0f64, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert_eq!(spearman(&x, &y).unwrap().statistic, 1.0);
        let r = spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r.statistic - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn average_rank_ties_get_block_mean() {
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[2.0, 2.0, 2.0, 1.0]), vec![3.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn kendall_extremes_and_hand_value() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall(&x, &rev).unwrap().statistic, -1.0);
        assert_eq!(kendall(&x, &x).unwrap().statistic, 1.0);
        let r = kendall(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r.statistic - 5.0 / 30.0f64.sqrt()).abs() <= 1e-9);
    }

    #[test]
    fn classify_strength_table_values() {
        assert_eq!(classify_strength(0.70, CorrMethod::Pearson), StrengthClass::Strong);
        assert_eq!(classify_strength(0.626, CorrMethod::PointBiserial), StrengthClass::Moderate);
        assert_eq!(classify_strength(0.05, CorrMethod::KendallB), StrengthClass::Negligible);
        assert_eq!(classify_strength(0.06, CorrMethod::KendallB), StrengthClass::Weak);
        assert_eq!(classify_strength(-0.91, CorrMethod::Spearman), StrengthClass::VeryStrong);
        assert_eq!(classify_strength(0.38, CorrMethod::Spearman), StrengthClass::Moderate);
    }

    #[test]
    fn classification_metrics_hand_values() {
        let r = classification_metrics(&[1, 1, 0], &[1, 0, 0]).unwrap();
        assert!((r.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
        let perfect = classification_metrics(&[0, 1, 1], &[0, 1, 1]).unwrap();
        assert_eq!(perfect.accuracy, 1.0);
        assert_eq!(perfect.macro_f1, 1.0);
    }

    #[test]
    fn classification_metrics_zero_support_class() {
        let r = classification_metrics(&[1, 1, 1], &[1, 1, 1]).unwrap();
        let class0 = &r.per_class[0];
        assert_eq!(class0.support, 0);
        assert_eq!(class0.f1, 0.0);
        assert_eq!(r.weighted_f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 0.5);
    }
}
