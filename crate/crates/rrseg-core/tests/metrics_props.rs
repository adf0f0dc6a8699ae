//! Metrics cross-checked against the naive pixel-set oracle, plus the
//! monotonicity properties that make rIoU a robustness metric.

use proptest::prelude::*;
use rrseg_core::mask::BinaryMask;
use rrseg_core::metrics::{
    aggregate_report, mean_robust_recall, r_iou, robust_recall, ReferenceEval,
    DEFAULT_PRECISION_THRESHOLDS,
};
use rrseg_core::oracle;
use rrseg_core::rng::SplitMix64;

fn random_mask(rng: &mut SplitMix64, w: u32, h: u32, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.uniform() < density).unwrap()
}

/// Randomized references with masks up to 16x16, 1–4 positives, 0–10
/// negatives, mixed densities including empty masks.
fn random_references(seed: u64, count: usize) -> Vec<ReferenceEval> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|i| {
            let w = 1 + rng.below(16) as u32;
            let h = 1 + rng.below(16) as u32;
            let positives = (0..1 + rng.below(4))
                .map(|_| {
                    let pd = rng.uniform();
                    let gd = rng.uniform();
                    (
                        random_mask(&mut rng, w, h, pd),
                        random_mask(&mut rng, w, h, gd),
                    )
                })
                .collect();
            let negatives = (0..rng.below(11))
                .map(|_| {
                    // Bias towards genuinely empty negative predictions.
                    let d = if rng.uniform() < 0.4 {
                        0.0
                    } else {
                        rng.uniform() * 0.5
                    };
                    random_mask(&mut rng, w, h, d)
                })
                .collect();
            ReferenceEval::new(i as u64, positives, negatives).unwrap()
        })
        .collect()
}

#[test]
fn all_metrics_match_oracle_on_randomized_references() {
    let refs = random_references(2024, 220);
    let report = aggregate_report(&refs, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    let tol = 1e-12;
    assert!((report.r_iou - oracle::r_iou(&refs)).abs() < tol);
    assert!((report.m_rr - oracle::mean_robust_recall(&refs)).abs() < tol);
    assert!((report.m_iou - oracle::mean_iou(&refs)).abs() < tol);
    assert!((report.o_iou - oracle::overall_iou(&refs)).abs() < tol);
    for &(t, p) in &report.precision_at {
        assert!((p - oracle::precision_at(&refs, t)).abs() < tol);
    }
    match (report.r2vos_r, oracle::r2vos_r(&refs)) {
        (Some(a), Some(b)) => assert!((a - b).abs() < tol),
        (a, b) => panic!("r2vos mismatch: {a:?} vs {b:?}"),
    }
    // Range invariants.
    for v in [report.r_iou, report.m_rr, report.m_iou, report.o_iou] {
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(report.r2vos_r.unwrap() <= 1.0);
}

#[test]
fn metrics_match_oracle_under_shuffling() {
    let mut refs = random_references(7, 60);
    let forward = aggregate_report(&refs, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    refs.reverse();
    let backward = aggregate_report(&refs, &DEFAULT_PRECISION_THRESHOLDS).unwrap();
    assert_eq!(forward, backward, "aggregation must be order independent");
}

fn arb_reference() -> impl Strategy<Value = ReferenceEval> {
    (1u32..10, 1u32..10, 0u64..1_000_000).prop_map(|(w, h, seed)| {
        let mut rng = SplitMix64::new(seed);
        let positives = (0..1 + rng.below(3))
            .map(|_| {
                let pd = rng.uniform();
                let gd = rng.uniform();
                (
                    random_mask(&mut rng, w, h, pd),
                    random_mask(&mut rng, w, h, gd),
                )
            })
            .collect();
        let negatives = (1..=1 + rng.below(4))
            .map(|_| {
                let d = rng.uniform() * 0.7;
                random_mask(&mut rng, w, h, d)
            })
            .collect();
        ReferenceEval::new(42, positives, negatives).unwrap()
    })
}

proptest! {
    /// Growing any negative prediction never increases rIoU.
    #[test]
    fn enlarging_a_negative_never_increases_r_iou(r in arb_reference(), pick: u64) {
        let base = r_iou(std::slice::from_ref(&r)).unwrap();
        let (w, h) = (r.positives()[0].0.width(), r.positives()[0].0.height());
        let n = (w as u64) * (h as u64);
        let idx = (pick % r.negatives().len() as u64) as usize;
        let mut grown_neg = r.negatives().to_vec();
        for off in 0..n {
            let p = (pick.wrapping_mul(31) + off) % n;
            let (x, y) = ((p / h as u64) as u32, (p % h as u64) as u32);
            if !grown_neg[idx].get(x, y) {
                grown_neg[idx].set(x, y, true);
                break;
            }
        }
        let grown = ReferenceEval::new(r.ref_id(), r.positives().to_vec(), grown_neg).unwrap();
        prop_assert!(r_iou(&[grown]).unwrap() <= base + 1e-15);
    }

    /// Emptying a negative prediction never decreases rIoU or robust recall.
    #[test]
    fn emptying_a_negative_never_hurts(r in arb_reference(), pick: u64) {
        let base_riou = r_iou(std::slice::from_ref(&r)).unwrap();
        let base_rr = robust_recall(&r).unwrap();
        let (w, h) = (r.positives()[0].0.width(), r.positives()[0].0.height());
        let idx = (pick % r.negatives().len() as u64) as usize;
        let mut negs = r.negatives().to_vec();
        negs[idx] = BinaryMask::new(w, h).unwrap();
        let emptied = ReferenceEval::new(r.ref_id(), r.positives().to_vec(), negs).unwrap();
        prop_assert!(r_iou(std::slice::from_ref(&emptied)).unwrap() >= base_riou - 1e-15);
        prop_assert!(robust_recall(&emptied).unwrap() >= base_rr - 1e-15);
    }

    /// mRR is the mean of per-reference recalls.
    #[test]
    fn mean_rr_is_mean_of_rrs(a in arb_reference(), b in arb_reference()) {
        let expected = (robust_recall(&a).unwrap() + robust_recall(&b).unwrap()) / 2.0;
        let refs = [
            ReferenceEval::new(1, a.positives().to_vec(), a.negatives().to_vec()).unwrap(),
            ReferenceEval::new(2, b.positives().to_vec(), b.negatives().to_vec()).unwrap(),
        ];
        prop_assert!((mean_robust_recall(&refs).unwrap() - expected).abs() < 1e-15);
    }
}
