//! Robustness metrics over per-reference prediction sets.
//!
//! Evaluation data is grouped by reference: one image, `p` positive sentences
//! with ground-truth masks, and `n` negative sentences whose correct answer
//! is the empty mask. The headline metric is robust IoU,
//!
//! ```text
//! rIoU = mean over references of
//!        Σ_j |m̂_j ∩ m_j|  /  ( Σ_j |m̂_j ∪ m_j| + Σ_k |m̃_k| )
//! ```
//!
//! where the `m̂`/`m` pairs range over positive predictions and ground truths
//! and `m̃_k` are the masks predicted for negative sentences — every pixel
//! predicted for a negative input inflates the denominator. Mean Robust
//! Recall is the instance-level complement: the fraction of negative inputs
//! answered with an exact 0-pixel mask, averaged per reference. mRR alone is
//! gameable (answer "no object" everywhere and it saturates at 1.0), which is
//! why reports always pair it with rIoU.
//!
//! All per-reference accumulation is integer-exact, with one division per
//! reference; reductions run in ascending `ref_id` order so results are
//! bit-identical under any input permutation.

use alloc::vec::Vec;
use core::fmt;

use crate::mask::{BinaryMask, MaskError};

/// Thresholds reported by [`aggregate_report`] unless overridden.
pub const DEFAULT_PRECISION_THRESHOLDS: [f64; 3] = [0.5, 0.7, 0.9];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    /// No references (or no qualifying references) to aggregate.
    EmptyInput,
    /// A reference needs at least one positive pair.
    NoPositives { ref_id: u64 },
    /// Robust recall is undefined for a reference without negatives.
    NoNegatives { ref_id: u64 },
    /// Precision thresholds must lie strictly inside (0, 1).
    InvalidThreshold,
    /// All positive predictions are empty, so the comparison metric R has a
    /// zero denominator.
    DegenerateDenominator,
    /// Masks inside one reference must share a shape.
    Mask(MaskError),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyInput => write!(f, "no references to evaluate"),
            MetricsError::NoPositives { ref_id } => {
                write!(f, "reference {ref_id} has no positive pairs")
            }
            MetricsError::NoNegatives { ref_id } => {
                write!(f, "reference {ref_id} has no negative predictions")
            }
            MetricsError::InvalidThreshold => {
                write!(f, "precision threshold must be strictly between 0 and 1")
            }
            MetricsError::DegenerateDenominator => {
                write!(f, "all positive predictions are empty; R is undefined")
            }
            MetricsError::Mask(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MetricsError {}

impl From<MaskError> for MetricsError {
    fn from(e: MaskError) -> Self {
        MetricsError::Mask(e)
    }
}

/// One reference's predictions: positive (prediction, ground-truth) pairs and
/// the masks predicted for its negative sentences.
#[derive(Debug, Clone)]
pub struct ReferenceEval {
    ref_id: u64,
    positives: Vec<(BinaryMask, BinaryMask)>,
    negatives: Vec<BinaryMask>,
}

impl ReferenceEval {
    /// Requires at least one positive pair and identical shapes across every
    /// mask in the reference.
    pub fn new(
        ref_id: u64,
        positives: Vec<(BinaryMask, BinaryMask)>,
        negatives: Vec<BinaryMask>,
    ) -> Result<Self, MetricsError> {
        let first = positives
            .first()
            .ok_or(MetricsError::NoPositives { ref_id })?;
        let shape = (first.0.width(), first.0.height());
        let all = positives
            .iter()
            .flat_map(|(p, g)| [p, g])
            .chain(negatives.iter());
        for mask in all {
            if (mask.width(), mask.height()) != shape {
                return Err(MetricsError::Mask(MaskError::ShapeMismatch {
                    left: shape,
                    right: (mask.width(), mask.height()),
                }));
            }
        }
        Ok(Self {
            ref_id,
            positives,
            negatives,
        })
    }

    pub fn ref_id(&self) -> u64 {
        self.ref_id
    }

    pub fn positives(&self) -> &[(BinaryMask, BinaryMask)] {
        &self.positives
    }

    pub fn negatives(&self) -> &[BinaryMask] {
        &self.negatives
    }
}

/// Aggregated metric values for one evaluation run.
///
/// `r2vos_r` is `None` when every positive prediction is empty (the metric's
/// denominator is zero); all other fields are always populated.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub r_iou: f64,
    pub m_rr: f64,
    pub m_iou: f64,
    pub o_iou: f64,
    /// `(threshold, precision)` pairs, ascending by threshold.
    pub precision_at: Vec<(f64, f64)>,
    pub r2vos_r: Option<f64>,
    pub reference_count: usize,
}

/// Indices of `refs` in ascending `ref_id` order — the fixed reduction order
/// that makes every aggregate independent of input permutation.
fn eval_order(refs: &[ReferenceEval]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..refs.len()).collect();
    order.sort_by_key(|&i| refs[i].ref_id);
    order
}

/// Robust IoU (mean over references).
///
/// Each reference contributes one term computed from integer sums followed by
/// a single division. A denominator of zero (all positives empty-vs-empty and
/// no negative pixels) contributes 1.0, consistent with the empty-vs-empty
/// IoU convention; it cannot arise in well-formed benchmark data.
pub fn r_iou(refs: &[ReferenceEval]) -> Result<f64, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let order = eval_order(refs);
    let mut total = 0.0;
    for &i in &order {
        let r = &refs[i];
        let mut inter: u64 = 0;
        let mut union: u64 = 0;
        for (pred, gt) in &r.positives {
            inter += pred.intersection_area(gt)?;
            union += pred.union_area(gt)?;
        }
        let neg: u64 = r.negatives.iter().map(BinaryMask::area).sum();
        let denom = union + neg;
        total += if denom == 0 {
            1.0
        } else {
            inter as f64 / denom as f64
        };
    }
    Ok(total / refs.len() as f64)
}

/// Fraction of this reference's negative predictions that are exact 0-pixel
/// masks.
pub fn robust_recall(r: &ReferenceEval) -> Result<f64, MetricsError> {
    if r.negatives.is_empty() {
        return Err(MetricsError::NoNegatives { ref_id: r.ref_id });
    }
    let empty = r.negatives.iter().filter(|m| m.is_empty()).count();
    Ok(empty as f64 / r.negatives.len() as f64)
}

/// Mean robust recall over references that have at least one negative.
///
/// References without negatives are skipped (their recall is undefined), not
/// counted as 1.0.
pub fn mean_robust_recall(refs: &[ReferenceEval]) -> Result<f64, MetricsError> {
    let order = eval_order(refs);
    let mut total = 0.0;
    let mut count = 0usize;
    for &i in &order {
        if !refs[i].negatives.is_empty() {
            total += robust_recall(&refs[i])?;
            count += 1;
        }
    }
    if count == 0 {
        return Err(MetricsError::EmptyInput);
    }
    Ok(total / count as f64)
}

/// Mean IoU over all positive pairs of all references. Negatives do not
/// participate.
pub fn mean_iou(refs: &[ReferenceEval]) -> Result<f64, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let order = eval_order(refs);
    let mut total = 0.0;
    let mut pairs = 0usize;
    for &i in &order {
        for (pred, gt) in &refs[i].positives {
            total += pred.iou(gt)?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Overall IoU: summed intersections over summed unions across all positive
/// pairs, integer sums throughout. Defined as 1.0 if every pair is
/// empty-vs-empty.
pub fn overall_iou(refs: &[ReferenceEval]) -> Result<f64, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let order = eval_order(refs);
    let mut inter: u64 = 0;
    let mut union: u64 = 0;
    for &i in &order {
        for (pred, gt) in &refs[i].positives {
            inter += pred.intersection_area(gt)?;
            union += pred.union_area(gt)?;
        }
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(inter as f64 / union as f64)
    }
}

/// Fraction of positive pairs whose IoU is strictly greater than `threshold`.
///
/// Strict: a pair at exactly the threshold does not pass.
pub fn precision_at(refs: &[ReferenceEval], threshold: f64) -> Result<f64, MetricsError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(MetricsError::InvalidThreshold);
    }
    if refs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let order = eval_order(refs);
    let mut passing = 0usize;
    let mut pairs = 0usize;
    for &i in &order {
        for (pred, gt) in &refs[i].positives {
            if pred.iou(gt)? > threshold {
                passing += 1;
            }
            pairs += 1;
        }
    }
    Ok(passing as f64 / pairs as f64)
}

/// The comparison metric `R = 1 − Σ_neg |m̃| / Σ_pos |m̂|` over predicted
/// areas. Measures robustness only — it is blind to segmentation quality.
pub fn r2vos_r(refs: &[ReferenceEval]) -> Result<f64, MetricsError> {
    if refs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let order = eval_order(refs);
    let mut pos: u64 = 0;
    let mut neg: u64 = 0;
    for &i in &order {
        pos += refs[i].positives.iter().map(|(p, _)| p.area()).sum::<u64>();
        neg += refs[i].negatives.iter().map(BinaryMask::area).sum::<u64>();
    }
    if pos == 0 {
        return Err(MetricsError::DegenerateDenominator);
    }
    Ok(1.0 - neg as f64 / pos as f64)
}

/// Computes every metric in one pass over the references.
///
/// `r2vos_r` degenerates to `None` instead of failing the whole report when
/// all positive predictions are empty; every other component error
/// propagates.
pub fn aggregate_report(
    refs: &[ReferenceEval],
    thresholds: &[f64],
) -> Result<MetricReport, MetricsError> {
    let mut precision = Vec::with_capacity(thresholds.len());
    let mut sorted = thresholds.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite threshold"));
    for &t in &sorted {
        precision.push((t, precision_at(refs, t)?));
    }
    let r = match r2vos_r(refs) {
        Ok(v) => Some(v),
        Err(MetricsError::DegenerateDenominator) => None,
        Err(e) => return Err(e),
    };
    Ok(MetricReport {
        r_iou: r_iou(refs)?,
        m_rr: mean_robust_recall(refs)?,
        m_iou: mean_iou(refs)?,
        o_iou: overall_iou(refs)?,
        precision_at: precision,
        r2vos_r: r,
        reference_count: refs.len(),
    })
}
