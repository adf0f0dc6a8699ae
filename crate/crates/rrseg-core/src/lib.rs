//! Core algorithms for building and scoring robust referring image
//! segmentation (R-RIS) benchmarks.
//!
//! In the robust task variant, a referring expression may describe an object
//! that is absent from — or wrongly described in — the image; the correct
//! answer for such a *negative* sentence is an exact 0-pixel mask. This crate
//! provides the pieces needed to construct and evaluate that setting:
//!
//! - [`mask`] — bit-packed binary masks, a column-major run-length codec, and
//!   exact integer set algebra;
//! - [`metrics`] — rIoU, mean Robust Recall, mIoU/oIoU, Precision@X, and the
//!   comparison metric R, aggregated per reference;
//! - [`lexicon`] / [`expr`] / [`gen`] — a deterministic lexicon tagger and the
//!   five negative-sentence generation strategies with validity checking;
//! - [`model`] — a desk-scale, f64 numerical reference of a token-based
//!   vision–language fusion segmentation model (cross-attention fusion with
//!   conditional and blank tokens, FPN-like decoding, segmentation and
//!   existence losses) with reverse-mode gradients and finite-difference
//!   checking;
//! - [`prompt`] — text-prompt concatenation for multi-sentence references.
//!
//! The crate is `no_std`-compatible (requires `alloc`); IO, file formats and
//! the command-line surface live in the companion `rrseg` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod expr;
pub mod gen;
pub mod lexicon;
pub mod mask;
pub mod math;
pub mod metrics;
pub mod model;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod prompt;
pub mod rng;

pub use mask::{BinaryMask, MaskError, RleMask};
pub use metrics::{MetricReport, MetricsError, ReferenceEval};
