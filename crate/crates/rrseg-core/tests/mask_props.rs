//! Property tests for mask algebra and the RLE codec.

use proptest::prelude::*;
use rrseg_core::mask::{rle_decode, rle_encode, BinaryMask};

fn arb_mask(max_side: u32) -> impl Strategy<Value = BinaryMask> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (
                Just(w),
                Just(h),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(w, h, bits)| {
            BinaryMask::from_fn(w, h, |x, y| bits[(x * h + y) as usize]).unwrap()
        })
}

fn arb_mask_pair(max_side: u32) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(w, h)| {
            let n = (w * h) as usize;
            (
                Just(w),
                Just(h),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(w, h, a, b)| {
            (
                BinaryMask::from_fn(w, h, |x, y| a[(x * h + y) as usize]).unwrap(),
                BinaryMask::from_fn(w, h, |x, y| b[(x * h + y) as usize]).unwrap(),
            )
        })
}

proptest! {
    #[test]
    fn rle_round_trip(mask in arb_mask(64)) {
        let rle = rle_encode(&mask);
        prop_assert_eq!(rle.counts().iter().sum::<u64>(), mask.pixel_count());
        let back = rle_decode(&rle).unwrap();
        prop_assert_eq!(back, mask);
    }

    #[test]
    fn encoded_counts_are_canonical(mask in arb_mask(32)) {
        let rle = rle_encode(&mask);
        // Only a single leading zero is ever produced.
        for (i, &c) in rle.counts().iter().enumerate() {
            prop_assert!(c > 0 || i == 0);
        }
    }

    #[test]
    fn set_algebra_symmetry((a, b) in arb_mask_pair(32)) {
        prop_assert_eq!(
            a.intersection_area(&b).unwrap(),
            b.intersection_area(&a).unwrap()
        );
        prop_assert_eq!(a.union_area(&b).unwrap(), b.union_area(&a).unwrap());
    }

    #[test]
    fn inclusion_exclusion((a, b) in arb_mask_pair(32)) {
        let inter = a.intersection_area(&b).unwrap();
        let union = a.union_area(&b).unwrap();
        prop_assert_eq!(union + inter, a.area() + b.area());
    }

    #[test]
    fn adding_pixels_is_monotone((a, b) in arb_mask_pair(16), extra: u64) {
        // Turn one background pixel of `a` into foreground.
        let n = a.pixel_count();
        let mut grown = a.clone();
        let start = extra % n;
        let h = a.height() as u64;
        for off in 0..n {
            let p = (start + off) % n;
            let (x, y) = ((p / h) as u32, (p % h) as u32);
            if !grown.get(x, y) {
                grown.set(x, y, true);
                break;
            }
        }
        prop_assert!(grown.intersection_area(&b).unwrap() >= a.intersection_area(&b).unwrap());
        prop_assert!(grown.union_area(&b).unwrap() >= a.union_area(&b).unwrap());
    }

    #[test]
    fn iou_is_bounded((a, b) in arb_mask_pair(24)) {
        let iou = a.iou(&b).unwrap();
        prop_assert!((0.0..=1.0).contains(&iou));
    }
}

mod oracle_equivalence {
    use super::*;
    use rrseg_core::oracle;

    proptest! {
        /// Random pairs agree with the brute-force per-pixel loop.
        #[test]
        fn set_algebra_matches_pixel_loop((a, b) in arb_mask_pair(8)) {
            prop_assert_eq!(
                a.intersection_area(&b).unwrap(),
                oracle::intersection_area(&a, &b)
            );
            prop_assert_eq!(a.union_area(&b).unwrap(), oracle::union_area(&a, &b));
            let iou = a.iou(&b).unwrap();
            prop_assert!((iou - oracle::iou(&a, &b)).abs() < 1e-15);
        }
    }
}
