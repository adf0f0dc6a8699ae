//! Binary segmentation masks, a run-length codec, and exact set algebra.
//!
//! Masks are bit-packed in column-major scan order: pixel `(x, y)` lives at
//! flat index `x * height + y`. Run-length counts follow the same scan and
//! alternate background/foreground starting with a background run (a leading
//! zero marks a mask whose first pixel is foreground), which is the layout
//! used by the dominant annotation ecosystem, so converting existing
//! uncompressed annotations is a field-renaming exercise.
//!
//! All area computations are exact integers; the only division in this module
//! happens at the final ratio in [`BinaryMask::iou`].

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors from mask construction, algebra, and the RLE codec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskError {
    /// Width or height is zero.
    ZeroDimension,
    /// Two masks in a binary operation disagree on shape.
    ShapeMismatch { left: (u32, u32), right: (u32, u32) },
    /// RLE counts do not sum to `width * height`.
    RleSumMismatch { expected: u64, found: u64 },
    /// Two adjacent zero-length runs (only a single leading zero is allowed).
    RleAdjacentZeroRuns { index: usize },
}

impl fmt::Display for MaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskError::ZeroDimension => write!(f, "mask width and height must be non-zero"),
            MaskError::ShapeMismatch { left, right } => write!(
                f,
                "mask shape mismatch: {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            MaskError::RleSumMismatch { expected, found } => write!(
                f,
                "malformed RLE: counts sum to {found}, expected width*height = {expected}"
            ),
            MaskError::RleAdjacentZeroRuns { index } => {
                write!(
                    f,
                    "malformed RLE: adjacent zero-length runs at index {index}"
                )
            }
        }
    }
}

impl core::error::Error for MaskError {}

/// A dense binary mask over a `width x height` pixel grid.
///
/// Bits are packed into `u64` words in column-major order. Padding bits past
/// `width * height` are kept at zero so equality and popcounts can work on
/// whole words.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    words: Vec<u64>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, area {})",
            self.width,
            self.height,
            self.area()
        )
    }
}

impl BinaryMask {
    /// All-background mask.
    pub fn new(width: u32, height: u32) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::ZeroDimension);
        }
        let bits = width as u64 * height as u64;
        let words = bits.div_ceil(64) as usize;
        Ok(Self {
            width,
            height,
            words: vec![0; words],
        })
    }

    pub fn from_fn(
        width: u32,
        height: u32,
        mut f: impl FnMut(u32, u32) -> bool,
    ) -> Result<Self, MaskError> {
        let mut mask = Self::new(width, height)?;
        for x in 0..width {
            for y in 0..height {
                if f(x, y) {
                    mask.set(x, y, true);
                }
            }
        }
        Ok(mask)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Total pixels in the grid (`width * height`).
    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    #[inline]
    fn flat(&self, x: u32, y: u32) -> u64 {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        x as u64 * self.height as u64 + y as u64
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        let p = self.flat(x, y);
        self.words[(p >> 6) as usize] >> (p & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let p = self.flat(x, y);
        let word = &mut self.words[(p >> 6) as usize];
        if value {
            *word |= 1 << (p & 63);
        } else {
            *word &= !(1 << (p & 63));
        }
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_shape(&self, other: &Self) -> Result<(), MaskError> {
        if self.width != other.width || self.height != other.height {
            return Err(MaskError::ShapeMismatch {
                left: (self.width, self.height),
                right: (other.width, other.height),
            });
        }
        Ok(())
    }

    /// `|a ∩ b|`, exact.
    pub fn intersection_area(&self, other: &Self) -> Result<u64, MaskError> {
        self.check_shape(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum())
    }

    /// `|a ∪ b|`, exact.
    pub fn union_area(&self, other: &Self) -> Result<u64, MaskError> {
        self.check_shape(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a | b).count_ones() as u64)
            .sum())
    }

    /// Intersection over union.
    ///
    /// Defined as 1.0 when both masks are empty: an empty prediction against
    /// an empty ground truth is a perfect answer. This convention is isolated
    /// here and reused by every metric built on top.
    pub fn iou(&self, other: &Self) -> Result<f64, MaskError> {
        let inter = self.intersection_area(other)?;
        let union = self.union_area(other)?;
        if union == 0 {
            Ok(1.0)
        } else {
            Ok(inter as f64 / union as f64)
        }
    }

    /// Pixels in column-major scan order.
    pub fn scan_bits(&self) -> impl Iterator<Item = bool> + '_ {
        let n = self.pixel_count();
        (0..n).map(move |p| self.words[(p >> 6) as usize] >> (p & 63) & 1 == 1)
    }
}

/// Run-length encoded form of a [`BinaryMask`].
///
/// `counts` alternate background/foreground along the column-major scan,
/// beginning with a background run; a mask whose first pixel is foreground
/// therefore starts with a single zero count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RleMask {
    width: u32,
    height: u32,
    counts: Vec<u64>,
}

impl RleMask {
    /// Validates the run-length invariants: counts sum to `width * height`
    /// and no two adjacent counts are both zero.
    pub fn new(width: u32, height: u32, counts: Vec<u64>) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::ZeroDimension);
        }
        let expected = width as u64 * height as u64;
        let found: u64 = counts.iter().sum();
        if found != expected {
            return Err(MaskError::RleSumMismatch { expected, found });
        }
        for (i, pair) in counts.windows(2).enumerate() {
            if pair[0] == 0 && pair[1] == 0 {
                return Err(MaskError::RleAdjacentZeroRuns { index: i });
            }
        }
        Ok(Self {
            width,
            height,
            counts,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Foreground area without decoding (sum of odd-indexed runs).
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).sum()
    }
}

/// Encodes a mask into canonical RLE (no zero counts except a possible
/// leading one).
pub fn rle_encode(mask: &BinaryMask) -> RleMask {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run: u64 = 0;
    for bit in mask.scan_bits() {
        if bit == current {
            run += 1;
        } else {
            counts.push(run);
            current = bit;
            run = 1;
        }
    }
    counts.push(run);
    RleMask {
        width: mask.width(),
        height: mask.height(),
        counts,
    }
}

/// Decodes an RLE back to a dense mask; exact inverse of [`rle_encode`].
pub fn rle_decode(rle: &RleMask) -> Result<BinaryMask, MaskError> {
    let expected = rle.width as u64 * rle.height as u64;
    let found: u64 = rle.counts.iter().sum();
    if found != expected {
        return Err(MaskError::RleSumMismatch { expected, found });
    }
    let mut mask = BinaryMask::new(rle.width, rle.height)?;
    let mut p: u64 = 0;
    let mut value = false;
    let height = rle.height as u64;
    for &count in &rle.counts {
        if value {
            for q in p..p + count {
                mask.set((q / height) as u32, (q % height) as u32, true);
            }
        }
        p += count;
        value = !value;
    }
    Ok(mask)
}
