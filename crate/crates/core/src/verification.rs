//! Verification protocol: claim confirmation, receiver operating
//! characteristic construction, and the canonical ROC CSV form.
//!
//! A run holds, for every probe, one distance-like score per gallery
//! subject ("small means match"); each probe contributes one true claim
//! (its own subject) and L−1 false claims. A claim is confirmed when its
//! score is at or below the threshold, and the ROC sweeps 100 equally
//! spaced thresholds across the observed score range.

use crate::error::{Error, Result};
use std::path::Path;

/// Number of threshold levels in every ROC.
pub const ROC_POINTS: usize = 100;

/// The confirmation rule: a claim passes iff its score is at or below the
/// threshold (scores are distance-like, so small means similar).
#[inline]
pub fn confirm_claim(score: f64, threshold: f64) -> bool {
    score <= threshold
}

/// Scores for every (probe, claimed subject) pair of an experiment, plus
/// the ground truth needed to split claims into true and false.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRun {
    subject_ids: Vec<String>,
    probe_ids: Vec<String>,
    /// Per probe: index of its true subject in `subject_ids`.
    true_subjects: Vec<usize>,
    /// Per probe: one distance-like score per subject, aligned to
    /// `subject_ids`.
    scores: Vec<Vec<f64>>,
}

impl VerificationRun {
    pub fn new(subject_ids: Vec<String>) -> VerificationRun {
        VerificationRun {
            subject_ids,
            probe_ids: Vec::new(),
            true_subjects: Vec::new(),
            scores: Vec::new(),
        }
    }

    /// Record one probe's scores against every subject. The true subject
    /// must be one of the run's gallery subjects.
    pub fn push_probe(
        &mut self,
        probe_id: &str,
        true_subject: &str,
        scores: Vec<f64>,
    ) -> Result<()> {
        let idx = self
            .subject_ids
            .iter()
            .position(|s| s == true_subject)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "probe {probe_id}: subject {true_subject} is not in the gallery"
                ))
            })?;
        if scores.len() != self.subject_ids.len() {
            return Err(Error::InvalidArgument(format!(
                "probe {probe_id}: {} scores for {} subjects",
                scores.len(),
                self.subject_ids.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "probe {probe_id}: non-finite score"
            )));
        }
        self.probe_ids.push(probe_id.to_string());
        self.true_subjects.push(idx);
        self.scores.push(scores);
        Ok(())
    }

    pub fn subject_ids(&self) -> &[String] {
        &self.subject_ids
    }

    pub fn probe_ids(&self) -> &[String] {
        &self.probe_ids
    }

    pub fn probe_count(&self) -> usize {
        self.probe_ids.len()
    }

    /// All true-claim scores (each probe against its own subject).
    fn true_claim_scores(&self) -> Vec<f64> {
        self.scores
            .iter()
            .zip(&self.true_subjects)
            .map(|(row, &t)| row[t])
            .collect()
    }

    /// All false-claim scores (each probe against every other subject).
    fn false_claim_scores(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.scores.len() * self.subject_ids.len().saturating_sub(1));
        for (row, &t) in self.scores.iter().zip(&self.true_subjects) {
            for (s, &score) in row.iter().enumerate() {
                if s != t {
                    out.push(score);
                }
            }
        }
        out
    }
}

/// One hundred (threshold, P_F, P_V) triples, non-decreasing in all three
/// components along the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    thresholds: Vec<f64>,
    /// `(p_false_alarm, p_verification)` per threshold.
    points: Vec<(f64, f64)>,
}

/// Sweep 100 equally spaced thresholds over the observed score range and
/// count confirmations: P_V over true claims, P_F over false claims.
pub fn build_roc(run: &VerificationRun) -> Result<RocCurve> {
    let mut true_scores = run.true_claim_scores();
    let mut false_scores = run.false_claim_scores();
    if true_scores.is_empty() {
        return Err(Error::InvalidArgument(
            "run has no true claims (no probes)".into(),
        ));
    }
    if false_scores.is_empty() {
        return Err(Error::InvalidArgument(
            "run has no false claims (need at least 2 gallery subjects)".into(),
        ));
    }
    true_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    false_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = true_scores[0].min(false_scores[0]);
    let hi = true_scores[true_scores.len() - 1].max(false_scores[false_scores.len() - 1]);

    let mut thresholds = Vec::with_capacity(ROC_POINTS);
    let mut points = Vec::with_capacity(ROC_POINTS);
    for k in 0..ROC_POINTS {
        // The last threshold must be the max score itself, not a rounded
        // `lo + range` that can land one ulp short of confirming it.
        let t = if k == ROC_POINTS - 1 {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (ROC_POINTS - 1) as f64
        };
        // Sorted inputs turn "count of scores ≤ t" into a partition search.
        let pv = true_scores.partition_point(|&s| confirm_claim(s, t)) as f64
            / true_scores.len() as f64;
        let pf = false_scores.partition_point(|&s| confirm_claim(s, t)) as f64
            / false_scores.len() as f64;
        thresholds.push(t);
        points.push((pf, pv));
    }
    Ok(RocCurve { thresholds, points })
}

impl RocCurve {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `(p_false_alarm, p_verification)` pairs in threshold order.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Verification rate at a false-alarm budget: the largest P_V among
    /// points with P_F ≤ `pf_limit` (0 when even the lowest threshold
    /// exceeds the budget). The curve is monotone, so this is the last
    /// qualifying point.
    pub fn pv_at_pf(&self, pf_limit: f64) -> f64 {
        self.points
            .iter()
            .filter(|(pf, _)| *pf <= pf_limit + 1e-12)
            .map(|&(_, pv)| pv)
            .fold(0.0, f64::max)
    }

    /// Write the canonical CSV: fixed header, then one row per threshold.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("threshold,p_false_alarm,p_verification\n");
        for (t, (pf, pv)) in self.thresholds.iter().zip(&self.points) {
            out.push_str(&format!("{t},{pf},{pv}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Read a CSV written by [`RocCurve::write_csv`].
    pub fn read_csv(path: &Path) -> Result<RocCurve> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        match lines.next() {
            Some("threshold,p_false_alarm,p_verification") => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{}: missing ROC CSV header",
                    path.display()
                )))
            }
        }
        let mut thresholds = Vec::new();
        let mut points = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = || -> Result<f64> {
                fields
                    .next()
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "{}: malformed ROC row on line {}",
                            path.display(),
                            lineno + 2
                        ))
                    })
            };
            let t = next()?;
            let pf = next()?;
            let pv = next()?;
            thresholds.push(t);
            points.push((pf, pv));
        }
        if thresholds.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{}: ROC CSV has no data rows",
                path.display()
            )));
        }
        Ok(RocCurve { thresholds, points })
    }
}
