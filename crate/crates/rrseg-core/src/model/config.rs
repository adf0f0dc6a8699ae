//! Model hyperparameters.

use alloc::format;
use alloc::string::String;

use super::ModelError;
use crate::prompt::MAX_TEXT_TOKENS;

/// Which stream queries the binary existence head's cross attention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryMode {
    /// High-resolution decoder features as the query, fusion tokens as
    /// key/value (the stronger configuration).
    Vision,
    /// Fusion tokens as the query, decoder features as key/value.
    Tokens,
}

impl QueryMode {
    pub fn label(self) -> &'static str {
        match self {
            QueryMode::Vision => "V",
            QueryMode::Tokens => "T",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "V" => Some(QueryMode::Vision),
            "T" => Some(QueryMode::Tokens),
            _ => None,
        }
    }
}

/// Desk-scale model configuration. The loss weights, token counts and text
/// length ship with the reference defaults (λ = 0.4, γ = 1.0, 20 conditional
/// and 10 blank tokens, 20-token expressions); the channel widths are sized
/// for fast f64 verification rather than accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub in_channels: usize,
    /// Channels of the four vision stages (strides 4/8/16/32).
    pub stage_channels: [usize; 4],
    /// Common fusion width inside each VLTF.
    pub fusion_dim: usize,
    pub heads: usize,
    /// Conditional (memory) token count K_c.
    pub cond_tokens: usize,
    /// Blank token count K_b.
    pub blank_tokens: usize,
    pub lang_vocab: usize,
    pub lang_dim: usize,
    pub max_text_len: usize,
    pub decoder_dim: usize,
    /// Weight of the auxiliary (coarse) segmentation losses, λ.
    pub lambda_aux: f64,
    /// Weight of the existence loss, γ.
    pub gamma_exist: f64,
    pub seed: u64,
    pub query_mode: QueryMode,
    pub init_scale: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            in_channels: 3,
            stage_channels: [8, 12, 16, 20],
            fusion_dim: 16,
            heads: 2,
            cond_tokens: 20,
            blank_tokens: 10,
            lang_vocab: 128,
            lang_dim: 12,
            max_text_len: MAX_TEXT_TOKENS,
            decoder_dim: 16,
            lambda_aux: 0.4,
            gamma_exist: 1.0,
            seed: 0,
            query_mode: QueryMode::Vision,
            init_scale: 0.02,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |detail: String| Err(ModelError::BadConfig { detail });
        if self.in_channels == 0
            || self.stage_channels.contains(&0)
            || self.fusion_dim == 0
            || self.heads == 0
            || self.lang_vocab == 0
            || self.lang_dim == 0
            || self.decoder_dim == 0
            || self.max_text_len == 0
            || self.cond_tokens == 0
        {
            return bad(String::from("dimensions must be non-zero"));
        }
        if !self.fusion_dim.is_multiple_of(self.heads) {
            return bad(format!(
                "fusion_dim {} not divisible by heads {}",
                self.fusion_dim, self.heads
            ));
        }
        if !(0.0..=1.0).contains(&self.lambda_aux) {
            return bad(format!("lambda_aux {} outside [0, 1]", self.lambda_aux));
        }
        if !self.gamma_exist.is_finite() || self.gamma_exist < 0.0 {
            return bad(format!("gamma_exist {} invalid", self.gamma_exist));
        }
        if !self.init_scale.is_finite() || self.init_scale <= 0.0 {
            return bad(format!("init_scale {} invalid", self.init_scale));
        }
        Ok(())
    }
}
