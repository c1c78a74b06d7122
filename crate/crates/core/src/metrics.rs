//! Agreement between HR labels and engine scores: correlations on
//! top-and-bottom percentile subsets, MAE, per-category metrics and score
//! distributions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{weighted_sum, Category, JobPosition, ScoreVector, ScoringWeights};
use crate::pipeline::ScreeningRecord;

/// Smallest series a correlation is computed on.
pub const MIN_CORRELATION_N: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} values, got {n}")]
    TooShort { n: usize, min: usize },
    #[error("series is constant; correlation is undefined")]
    DegenerateSeries,
    #[error("no records")]
    EmptyInput,
    #[error("percentile {0} is outside 1..=50")]
    InvalidPercentile(u32),
    #[error("percentile {p}: only {n} records in subset, need {min}")]
    InsufficientData { p: u32, n: usize, min: usize },
}

fn check_pair(x: &[f64], y: &[f64], min: usize) -> Result<(), MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min {
        return Err(MetricsError::TooShort { n: x.len(), min });
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample Pearson correlation, computed in two passes.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    check_pair(x, y, MIN_CORRELATION_N)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateSeries);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    check_pair(x, y, MIN_CORRELATION_N)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

pub fn mae(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    check_pair(x, y, 1)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / x.len() as f64)
}

/// HR labels and engine scores for one resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub resume_id: String,
    pub job: JobPosition,
    pub hr_scores: ScoreVector,
    pub ai_scores: ScoreVector,
    pub hr_final: f64,
    pub ai_final: f64,
}

impl EvaluationRecord {
    pub fn new(
        resume_id: impl Into<String>,
        job: JobPosition,
        hr_scores: ScoreVector,
        ai_scores: ScoreVector,
        weights: &ScoringWeights,
    ) -> Self {
        Self {
            resume_id: resume_id.into(),
            job,
            hr_final: weighted_sum(&hr_scores, weights),
            ai_final: weighted_sum(&ai_scores, weights),
            hr_scores,
            ai_scores,
        }
    }
}

/// Nearest-rank cut values `(low, high)` for a `p`% top-and-bottom subset:
/// with `k = ceil(p·n/100)`, the k-th smallest and k-th largest values.
pub fn percentile_cuts(values: &[f64], p: u32) -> Result<(f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if !(1..=50).contains(&p) {
        return Err(MetricsError::InvalidPercentile(p));
    }
    let n = values.len();
    let k = ((p as usize * n).div_ceil(100)).max(1);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok((sorted[k - 1], sorted[n - k]))
}

/// Records whose HR final score is at or below the low cut or at or above
/// the high cut, in input order. Ties at a cut are included.
pub fn percentile_subset(
    records: &[EvaluationRecord],
    p: u32,
) -> Result<Vec<&EvaluationRecord>, MetricsError> {
    let finals: Vec<f64> = records.iter().map(|r| r.hr_final).collect();
    let (low, high) = percentile_cuts(&finals, p)?;
    Ok(records
        .iter()
        .filter(|r| r.hr_final <= low || r.hr_final >= high)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub pc: Option<f64>,
    pub sc: Option<f64>,
    pub mae: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Counts per unit-width bin over [0, 10]; the last bin includes 10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub hr: Vec<usize>,
    pub ai: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 10;

fn bin_counts(values: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut counts = vec![0; HISTOGRAM_BINS];
    for v in values {
        let i = (v.floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1);
        counts[i] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_total: usize,
    pub pc: BTreeMap<u32, f64>,
    pub sc: BTreeMap<u32, f64>,
    pub n_subset: BTreeMap<u32, usize>,
    /// Percentiles whose correlations could not be computed, with the reason.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unavailable: BTreeMap<u32, String>,
    pub mae: f64,
    pub per_category: BTreeMap<Category, CategoryMetrics>,
    pub mean_hr: f64,
    pub mean_ai: f64,
    pub histogram: Histogram,
}

pub fn evaluate_run(
    records: &[EvaluationRecord],
    percentiles: &[u32],
) -> Result<MetricsReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let ps: BTreeSet<u32> = percentiles.iter().copied().collect();
    if let Some(&bad) = ps.iter().find(|p| !(1..=50).contains(*p)) {
        return Err(MetricsError::InvalidPercentile(bad));
    }
    let hr: Vec<f64> = records.iter().map(|r| r.hr_final).collect();
    let ai: Vec<f64> = records.iter().map(|r| r.ai_final).collect();

    let mut report = MetricsReport {
        n_total: records.len(),
        pc: BTreeMap::new(),
        sc: BTreeMap::new(),
        n_subset: BTreeMap::new(),
        unavailable: BTreeMap::new(),
        mae: mae(&hr, &ai)?,
        per_category: BTreeMap::new(),
        mean_hr: mean(&hr),
        mean_ai: mean(&ai),
        histogram: Histogram {
            edges: (0..=HISTOGRAM_BINS).map(|i| i as f64).collect(),
            hr: bin_counts(hr.iter().copied()),
            ai: bin_counts(ai.iter().copied()),
        },
    };

    for p in ps {
        let subset = percentile_subset(records, p)?;
        report.n_subset.insert(p, subset.len());
        if subset.len() < MIN_CORRELATION_N {
            let e = MetricsError::InsufficientData {
                p,
                n: subset.len(),
                min: MIN_CORRELATION_N,
            };
            report.unavailable.insert(p, e.to_string());
            continue;
        }
        let x: Vec<f64> = subset.iter().map(|r| r.hr_final).collect();
        let y: Vec<f64> = subset.iter().map(|r| r.ai_final).collect();
        match (pearson(&x, &y), spearman(&x, &y)) {
            (Ok(pc), Ok(sc)) => {
                report.pc.insert(p, pc);
                report.sc.insert(p, sc);
            }
            (Err(e), _) | (_, Err(e)) => {
                report.unavailable.insert(p, e.to_string());
            }
        }
    }

    for c in Category::ALL {
        let x: Vec<f64> = records.iter().map(|r| r.hr_scores.get(c)).collect();
        let y: Vec<f64> = records.iter().map(|r| r.ai_scores.get(c)).collect();
        let pc = pearson(&x, &y);
        let sc = spearman(&x, &y);
        let note = pc
            .as_ref()
            .err()
            .or(sc.as_ref().err())
            .map(|e| e.to_string());
        report.per_category.insert(
            c,
            CategoryMetrics {
                pc: pc.ok(),
                sc: sc.ok(),
                mae: mae(&x, &y)?,
                note,
            },
        );
    }
    Ok(report)
}

impl MetricsReport {
    /// True when every requested percentile produced correlations.
    pub fn complete(&self) -> bool {
        self.unavailable.is_empty()
    }

    /// Table columns: PC and SC per percentile (largest first), then MAE.
    pub fn table_columns(&self) -> Vec<(String, Option<f64>)> {
        let mut ps: Vec<u32> = self
            .n_subset
            .keys()
            .chain(self.unavailable.keys())
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        ps.reverse();
        let mut cols = Vec::new();
        for p in ps {
            cols.push((format!("PC{p}"), self.pc.get(&p).copied()));
            cols.push((format!("SC{p}"), self.sc.get(&p).copied()));
        }
        cols.push(("MAE".to_string(), Some(self.mae)));
        cols
    }

    /// One-row plain-text table of [`MetricsReport::table_columns`].
    pub fn table_text(&self, model: &str) -> String {
        let cols = self.table_columns();
        let width = model.len().max("Model".len());
        let mut out = format!("{:<width$}", "Model");
        for (name, _) in &cols {
            let _ = write!(out, "  {name:>6}");
        }
        out.push('\n');
        let _ = write!(out, "{model:<width$}");
        for (_, v) in &cols {
            match v {
                Some(v) => {
                    let _ = write!(out, "  {v:>6.2}");
                }
                None => {
                    let _ = write!(out, "  {:>6}", "n/a");
                }
            }
        }
        out.push('\n');
        out
    }
}

/// Per-resume HR and engine scores, for scatter plots.
pub fn scatter_csv(records: &[EvaluationRecord]) -> String {
    let mut out = String::from("resume_id,job_title,job_level,hr_final,ai_final");
    for side in ["hr", "ai"] {
        for c in Category::ALL {
            let _ = write!(out, ",{side}_{c}");
        }
    }
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.resume_id),
            csv_field(&r.job.title),
            r.job.level,
            r.hr_final,
            r.ai_final
        );
        for s in [&r.hr_scores, &r.ai_scores] {
            for v in s.rounded() {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_low,bin_high,hr_count,ai_count\n");
    for i in 0..h.hr.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            h.edges[i],
            h.edges[i + 1],
            h.hr[i],
            h.ai[i]
        );
    }
    out
}

/// Per-category means of both score sets plus agreement metrics.
pub fn categories_csv(records: &[EvaluationRecord], report: &MetricsReport) -> String {
    let mut out = String::from("category,bound,mean_hr,mean_ai,pc,sc,mae\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for c in Category::ALL {
        let m = &report.per_category[&c];
        let hr: Vec<f64> = records.iter().map(|r| r.hr_scores.get(c)).collect();
        let ai: Vec<f64> = records.iter().map(|r| r.ai_scores.get(c)).collect();
        let _ = writeln!(
            out,
            "{c},{},{},{},{},{},{}",
            c.bound(),
            mean(&hr),
            mean(&ai),
            opt(m.pc),
            opt(m.sc),
            m.mae
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One HR label line: `{"resume_id": ..., "scores": [5 numbers]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrLabel {
    pub resume_id: String,
    pub scores: ScoreVector,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct JoinError {
    /// Successful results without a label.
    pub results_without_label: Vec<String>,
    /// Labels without any screening record.
    pub labels_without_result: Vec<String>,
    pub duplicate_labels: Vec<String>,
    pub duplicate_results: Vec<String>,
}

impl std::fmt::Display for JoinError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (what, ids) in [
            ("results without a label", &self.results_without_label),
            ("labels without a result", &self.labels_without_result),
            ("duplicate label ids", &self.duplicate_labels),
            ("duplicate result ids", &self.duplicate_results),
        ] {
            if !ids.is_empty() {
                parts.push(format!("{what}: {}", ids.join(", ")));
            }
        }
        write!(f, "{}", parts.join("; "))
    }
}

impl std::error::Error for JoinError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub records: Vec<EvaluationRecord>,
    /// Labeled resumes whose screening failed; excluded from metrics.
    pub failed: Vec<String>,
}

/// Joins screening output with HR labels on resume id, in result order.
pub fn join_labels(
    results: &[ScreeningRecord],
    labels: &[HrLabel],
    weights: &ScoringWeights,
) -> Result<Joined, JoinError> {
    let mut err = JoinError::default();
    let mut by_id: BTreeMap<&str, &HrLabel> = BTreeMap::new();
    for l in labels {
        if by_id.insert(&l.resume_id, l).is_some() {
            err.duplicate_labels.push(l.resume_id.clone());
        }
    }
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        let id = r.resume_id();
        if !seen.insert(id) {
            err.duplicate_results.push(id.to_string());
            continue;
        }
        match (r, by_id.get(id)) {
            (ScreeningRecord::Ok(res), Some(label)) => records.push(EvaluationRecord::new(
                id,
                res.job.clone(),
                label.scores,
                res.scores,
                weights,
            )),
            (ScreeningRecord::Ok(_), None) => err.results_without_label.push(id.to_string()),
            (ScreeningRecord::Failed(_), Some(_)) => failed.push(id.to_string()),
            (ScreeningRecord::Failed(_), None) => {}
        }
    }
    err.labels_without_result = by_id
        .keys()
        .filter(|id| !seen.contains(**id))
        .map(|id| id.to_string())
        .collect();
    if err == JoinError::default() {
        Ok(Joined { records, failed })
    } else {
        Err(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::JobLevel;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 5.0, 9.0, 2.0];
        assert!(close(pearson(&x, &x).unwrap(), 1.0, 1e-12));
        assert!(close(
            pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            -1.0,
            1e-12
        ));
        // means 3 and 3.4; Sxy = 12, Sxx = 10, Syy = 21.2
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 7.0]).unwrap();
        assert!(close(r, 12.0 / 212f64.sqrt(), 1e-12));
        assert!(close(r, 0.8242, 1e-3));
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(MetricsError::LengthMismatch(2, 3))
        );
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(MetricsError::TooShort { .. })
        ));
        assert_eq!(
            pearson(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]),
            Err(MetricsError::DegenerateSeries)
        );
    }

    #[test]
    fn spearman_examples() {
        assert!(close(
            spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]).unwrap(),
            1.0,
            1e-12
        ));
        assert_eq!(average_ranks(&[1.0, 1.0, 2.0]), [1.5, 1.5, 3.0]);
        // ranks x = [1.5, 1.5, 3], y = [1, 3, 2]: deviations [-.5, -.5, 1]
        // and [-1, 1, 0] are orthogonal, so Sxy = 0
        let r = spearman(&[1.0, 1.0, 2.0], &[3.0, 5.0, 4.0]).unwrap();
        assert!(close(r, 0.0, 1e-12));
        let r = spearman(&[1.0, 1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap();
        // y ranks [1, 2, 3]: Sxy = 1.5, Sxx = 1.5, Syy = 2
        assert!(close(r, 1.5 / (1.5f64 * 2.0).sqrt(), 1e-12));
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 1.5);
        assert_eq!(mae(&[3.0], &[5.0]).unwrap(), 2.0);
        assert!(mae(&[], &[]).is_err());
    }

    fn rec(id: usize, hr: f64, ai: f64) -> EvaluationRecord {
        EvaluationRecord {
            resume_id: format!("r{id:03}"),
            job: JobPosition::new("HR Manager", JobLevel::Mid),
            hr_scores: ScoreVector::zero(),
            ai_scores: ScoreVector::zero(),
            hr_final: hr,
            ai_final: ai,
        }
    }

    #[test]
    fn percentile_subset_examples() {
        let rs: Vec<_> = (1..=20).map(|i| rec(i, i as f64, i as f64)).collect();
        let pick = |p| -> Vec<f64> {
            percentile_subset(&rs, p)
                .unwrap()
                .iter()
                .map(|r| r.hr_final)
                .collect()
        };
        assert_eq!(pick(10), [1.0, 2.0, 19.0, 20.0]);
        assert_eq!(pick(50).len(), 20);
        let same: Vec<_> = (0..7).map(|i| rec(i, 5.0, 1.0)).collect();
        assert_eq!(percentile_subset(&same, 10).unwrap().len(), 7);
        assert_eq!(percentile_subset(&[], 10), Err(MetricsError::EmptyInput));
        assert!(percentile_subset(&rs, 0).is_err());
        assert!(percentile_subset(&rs, 51).is_err());
    }

    #[test]
    fn perfect_agreement_report() {
        let rs: Vec<_> = (1..=30)
            .map(|i| rec(i, (i % 11) as f64 * 0.9, (i % 11) as f64 * 0.9))
            .collect();
        let rep = evaluate_run(&rs, &[10, 15, 20]).unwrap();
        assert!(rep.complete());
        for p in [10, 15, 20] {
            assert!(close(rep.pc[&p], 1.0, 1e-12));
            assert!(close(rep.sc[&p], 1.0, 1e-12));
        }
        assert_eq!(rep.mae, 0.0);
        assert_eq!(rep.histogram.hr, rep.histogram.ai);
        let names: Vec<String> = rep.table_columns().into_iter().map(|c| c.0).collect();
        assert_eq!(
            names,
            ["PC20", "SC20", "PC15", "SC15", "PC10", "SC10", "MAE"]
        );
        let text = rep.table_text("engine");
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("1.00"));
    }

    #[test]
    fn too_few_records_are_reported_per_percentile() {
        let rs = [rec(1, 1.0, 2.0), rec(2, 5.0, 4.0)];
        let rep = evaluate_run(&rs, &[10, 20]).unwrap();
        assert!(!rep.complete());
        assert!(rep.unavailable[&10].contains("only 2"));
        assert_eq!(rep.mae, 1.0);
    }

    #[test]
    fn histogram_bins() {
        assert_eq!(
            bin_counts([0.0, 0.99, 1.0, 9.5, 10.0].into_iter()),
            [2, 1, 0, 0, 0, 0, 0, 0, 0, 2]
        );
    }

    #[test]
    fn join_reports_unmatched_ids() {
        let labels = vec![
            HrLabel {
                resume_id: "a".into(),
                scores: ScoreVector::zero(),
            },
            HrLabel {
                resume_id: "zz".into(),
                scores: ScoreVector::zero(),
            },
        ];
        let err = join_labels(&[], &labels, &ScoringWeights::default()).unwrap_err();
        assert_eq!(err.labels_without_result, ["a", "zz"]);
        assert!(err.to_string().contains("labels without a result: a, zz"));
    }

    fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..60).prop_flat_map(|n| {
            (
                proptest::collection::vec(-50.0..50.0f64, n),
                proptest::collection::vec(-50.0..50.0f64, n),
            )
        })
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_monotone_maps((x, y) in series()) {
            let base = spearman(&x, &y);
            prop_assume!(base.is_ok());
            let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            let fy: Vec<f64> = y.iter().map(|v| (v / 10.0).exp()).collect();
            prop_assert!(close(spearman(&fx, &fy).unwrap(), base.unwrap(), 1e-12));
        }

        #[test]
        fn pearson_invariant_under_positive_affine_maps((x, y) in series(), a in 0.01..100.0f64, b in -100.0..100.0f64) {
            let base = pearson(&x, &y).unwrap();
            let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!(close(pearson(&ax, &y).unwrap(), base, 1e-9));
        }

        #[test]
        fn subsets_are_nested(finals in proptest::collection::vec(0u8..=100, 1..120)) {
            let rs: Vec<_> = finals.iter().enumerate().map(|(i, &f)| rec(i, f as f64 / 10.0, 0.0)).collect();
            let ids = |p| percentile_subset(&rs, p).unwrap().iter().map(|r| r.resume_id.clone()).collect::<BTreeSet<_>>();
            let (a, b, c, d) = (ids(10), ids(15), ids(20), ids(50));
            prop_assert!(a.is_subset(&b) && b.is_subset(&c) && c.is_subset(&d));
            prop_assert_eq!(d.len(), rs.len());
        }

        #[test]
        fn mae_triangle(
            v in (1usize..50).prop_flat_map(|n| (
                proptest::collection::vec(-10.0..10.0f64, n),
                proptest::collection::vec(-10.0..10.0f64, n),
                proptest::collection::vec(-10.0..10.0f64, n),
            ))
        ) {
            let (x, y, z) = v;
            prop_assert!(mae(&x, &z).unwrap() <= mae(&x, &y).unwrap() + mae(&y, &z).unwrap() + 1e-12);
        }
    }
}
