//! Desk-scale f64 numerical reference of the token-fusion segmentation
//! model: cross-attention fusion with conditional and blank tokens, an
//! FPN-like decoder, segmentation/existence losses, and reverse-mode
//! gradients verified by finite differences.

use alloc::string::String;
use core::fmt;

pub mod config;
pub mod gradcheck;
pub mod net;
pub mod ops;
pub mod params;
pub mod scalar;
pub mod tape;
pub mod tensor;
pub mod train;

pub use config::{ModelConfig, QueryMode};
pub use gradcheck::{
    grad_check, model_grad_check, model_gradient, model_value, synthetic_input, GradCheckReport,
    GradCheckSample, ModelInput, DEFAULT_STEP, DEFAULT_TOLERANCE,
};
pub use net::{
    binary_head, cross_entropy_2class, encoder_forward, exist_loss, fpn_decode,
    majority_downsample, model_loss, patch_embed, predict_mask, run_model, seg_loss, standardize,
    total_loss, upsample2_nearest, vltf_forward, EncoderTrace, ForwardTrace, ModelOutputs,
    VltfTrace, NORM_EPS,
};
pub use ops::{linear, mhca, softmax};
pub use params::{
    init_flat, param_count, BinaryHeadParams, FpnParams, LinearParams, MhcaParams,
    PatchEmbedParams, ToyModelParams, VltfParams,
};
pub use scalar::Scalar;
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
pub use train::{batch_loss, synthetic_batch, train_demo};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    BadConfig { detail: String },
    ShapeMismatch { detail: String },
    TokenOverflow { len: usize, max: usize },
    BadTokenId { id: usize, vocab: usize },
    EmptyText,
    BadImageSize { height: usize, width: usize },
    WrongParamCount { expected: usize, found: usize },
    NonFinite { detail: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::BadConfig { detail } => write!(f, "bad model config: {detail}"),
            ModelError::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
            ModelError::TokenOverflow { len, max } => {
                write!(f, "expression has {len} tokens, the maximum is {max}")
            }
            ModelError::BadTokenId { id, vocab } => {
                write!(f, "token id {id} outside vocabulary of {vocab}")
            }
            ModelError::EmptyText => write!(f, "expression has no tokens"),
            ModelError::BadImageSize { height, width } => {
                write!(f, "image {height}x{width} must have sides divisible by 32")
            }
            ModelError::WrongParamCount { expected, found } => {
                write!(
                    f,
                    "parameter vector has {found} values, expected {expected}"
                )
            }
            ModelError::NonFinite { detail } => write!(f, "non-finite value: {detail}"),
        }
    }
}

impl core::error::Error for ModelError {}
