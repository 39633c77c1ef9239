//! Segmentation quality metrics against ground truth.
//!
//! Per image: confusion counts, false negative rate FN/(TP+FN) and false
//! positive rate FP/(TN+FP). Corpus numbers are unweighted means of the
//! per-image rates. Degenerate denominators (a truth mask with no road,
//! or no background) yield rate 0 plus a flag in the report rather than a
//! NaN that would poison the means.

use crate::buffer::BinaryMask;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

/// Per-pixel tally of pred against truth.
pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<ConfusionCounts> {
    if pred.width() != truth.width() || pred.height() != truth.height() {
        return Err(Error::DimensionMismatch(format!(
            "confusion: {}x{} vs {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let mut c = ConfusionCounts {
        true_positive: 0,
        false_positive: 0,
        true_negative: 0,
        false_negative: 0,
    };
    for (&p, &t) in pred.bits().iter().zip(truth.bits()) {
        match (p, t) {
            (true, true) => c.true_positive += 1,
            (true, false) => c.false_positive += 1,
            (false, true) => c.false_negative += 1,
            (false, false) => c.true_negative += 1,
        }
    }
    Ok(c)
}

/// FN / (TP + FN); 0 when the truth has no positives.
pub fn fnr(c: &ConfusionCounts) -> f64 {
    let denom = c.true_positive + c.false_negative;
    if denom == 0 {
        0.0
    } else {
        c.false_negative as f64 / denom as f64
    }
}

/// FP / (TN + FP); 0 when the truth has no negatives.
pub fn fpr(c: &ConfusionCounts) -> f64 {
    let denom = c.true_negative + c.false_positive;
    if denom == 0 {
        0.0
    } else {
        c.false_positive as f64 / denom as f64
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ImageMetrics {
    pub id: String,
    pub fnr: f64,
    pub fpr: f64,
    /// Empty for well-posed images; "no_road_in_truth" and/or
    /// "no_background_in_truth" when a rate denominator was zero.
    pub degenerate_flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MetricsReport {
    pub per_image: Vec<ImageMetrics>,
    pub mean_fnr: f64,
    pub mean_fpr: f64,
}

impl MetricsReport {
    /// `id,fnr,fpr` rows with a header, for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,fnr,fpr\n");
        for row in &self.per_image {
            out.push_str(&format!("{},{},{}\n", row.id, row.fnr, row.fpr));
        }
        out
    }
}

/// Evaluates (prediction, truth) mask pairs; rows come back sorted by
/// image id, and the means are unweighted over images.
pub fn evaluate_corpus(pairs: &[(&str, &BinaryMask, &BinaryMask)]) -> Result<MetricsReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus("no mask pairs to evaluate".into()));
    }
    let mut per_image = Vec::with_capacity(pairs.len());
    for (id, pred, truth) in pairs {
        let c = confusion(pred, truth).map_err(|e| match e {
            Error::DimensionMismatch(msg) => Error::DimensionMismatch(format!("image {id}: {msg}")),
            other => other,
        })?;
        let mut degenerate_flags = Vec::new();
        if c.true_positive + c.false_negative == 0 {
            degenerate_flags.push("no_road_in_truth".to_string());
        }
        if c.true_negative + c.false_positive == 0 {
            degenerate_flags.push("no_background_in_truth".to_string());
        }
        per_image.push(ImageMetrics {
            id: id.to_string(),
            fnr: fnr(&c),
            fpr: fpr(&c),
            degenerate_flags,
        });
    }
    per_image.sort_by(|a, b| a.id.cmp(&b.id));
    let n = per_image.len() as f64;
    let mean_fnr = per_image.iter().map(|m| m.fnr).sum::<f64>() / n;
    let mean_fpr = per_image.iter().map(|m| m.fpr).sum::<f64>() / n;
    Ok(MetricsReport {
        per_image,
        mean_fnr,
        mean_fpr,
    })
}
