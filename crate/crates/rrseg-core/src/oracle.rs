//! Naive reference implementations of every metric, used to cross-check the
//! production path.
//!
//! Everything here works on explicit pixel sets with per-pixel loops and
//! deliberately shares no code with [`crate::metrics`] beyond the public
//! `BinaryMask` accessors. Compiled only for tests (feature `oracle`).

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::mask::BinaryMask;
use crate::metrics::ReferenceEval;

pub type PixelSet = BTreeSet<(u32, u32)>;

pub fn pixel_set(mask: &BinaryMask) -> PixelSet {
    let mut set = PixelSet::new();
    for x in 0..mask.width() {
        for y in 0..mask.height() {
            if mask.get(x, y) {
                set.insert((x, y));
            }
        }
    }
    set
}

pub fn intersection_area(a: &BinaryMask, b: &BinaryMask) -> u64 {
    let sa = pixel_set(a);
    let sb = pixel_set(b);
    sa.intersection(&sb).count() as u64
}

pub fn union_area(a: &BinaryMask, b: &BinaryMask) -> u64 {
    let sa = pixel_set(a);
    let sb = pixel_set(b);
    sa.union(&sb).count() as u64
}

pub fn iou(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let union = union_area(a, b);
    if union == 0 {
        1.0
    } else {
        intersection_area(a, b) as f64 / union as f64
    }
}

fn by_ref_id(refs: &[ReferenceEval]) -> Vec<&ReferenceEval> {
    let mut sorted: Vec<&ReferenceEval> = refs.iter().collect();
    sorted.sort_by_key(|r| r.ref_id());
    sorted
}

pub fn r_iou(refs: &[ReferenceEval]) -> f64 {
    let sorted = by_ref_id(refs);
    let mut total = 0.0;
    for r in &sorted {
        let mut inter = 0u64;
        let mut union = 0u64;
        for (pred, gt) in r.positives() {
            inter += intersection_area(pred, gt);
            union += union_area(pred, gt);
        }
        let mut neg = 0u64;
        for m in r.negatives() {
            neg += pixel_set(m).len() as u64;
        }
        let denom = union + neg;
        total += if denom == 0 {
            1.0
        } else {
            inter as f64 / denom as f64
        };
    }
    total / sorted.len() as f64
}

pub fn mean_robust_recall(refs: &[ReferenceEval]) -> f64 {
    let sorted = by_ref_id(refs);
    let mut total = 0.0;
    let mut count = 0usize;
    for r in &sorted {
        if r.negatives().is_empty() {
            continue;
        }
        let empty = r
            .negatives()
            .iter()
            .filter(|m| pixel_set(m).is_empty())
            .count();
        total += empty as f64 / r.negatives().len() as f64;
        count += 1;
    }
    total / count as f64
}

pub fn mean_iou(refs: &[ReferenceEval]) -> f64 {
    let sorted = by_ref_id(refs);
    let mut total = 0.0;
    let mut pairs = 0usize;
    for r in &sorted {
        for (pred, gt) in r.positives() {
            total += iou(pred, gt);
            pairs += 1;
        }
    }
    total / pairs as f64
}

pub fn overall_iou(refs: &[ReferenceEval]) -> f64 {
    let sorted = by_ref_id(refs);
    let mut inter = 0u64;
    let mut union = 0u64;
    for r in &sorted {
        for (pred, gt) in r.positives() {
            inter += intersection_area(pred, gt);
            union += union_area(pred, gt);
        }
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn precision_at(refs: &[ReferenceEval], threshold: f64) -> f64 {
    let sorted = by_ref_id(refs);
    let mut passing = 0usize;
    let mut pairs = 0usize;
    for r in &sorted {
        for (pred, gt) in r.positives() {
            if iou(pred, gt) > threshold {
                passing += 1;
            }
            pairs += 1;
        }
    }
    passing as f64 / pairs as f64
}

/// Returns `None` when all positive predicted areas are zero.
pub fn r2vos_r(refs: &[ReferenceEval]) -> Option<f64> {
    let sorted = by_ref_id(refs);
    let mut pos = 0u64;
    let mut neg = 0u64;
    for r in &sorted {
        for (pred, _) in r.positives() {
            pos += pixel_set(pred).len() as u64;
        }
        for m in r.negatives() {
            neg += pixel_set(m).len() as u64;
        }
    }
    if pos == 0 {
        None
    } else {
        Some(1.0 - neg as f64 / pos as f64)
    }
}
