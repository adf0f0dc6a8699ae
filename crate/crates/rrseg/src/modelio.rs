//! Model configuration files, trace dumps, and gradient-check reports.

use std::path::Path;

use rrseg_core::model::{ForwardTrace, GradCheckReport, ModelConfig, QueryMode, Tensor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::read_json;

/// On-disk model configuration; every field is optional and falls back to
/// the reference defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfigFile {
    pub in_channels: Option<usize>,
    pub stage_channels: Option<[usize; 4]>,
    pub fusion_dim: Option<usize>,
    pub heads: Option<usize>,
    pub cond_tokens: Option<usize>,
    pub blank_tokens: Option<usize>,
    pub lang_vocab: Option<usize>,
    pub lang_dim: Option<usize>,
    pub max_text_len: Option<usize>,
    pub decoder_dim: Option<usize>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    /// "V" (decoder features query) or "T" (tokens query).
    pub query_mode: Option<String>,
    pub init_scale: Option<f64>,
}

impl ModelConfigFile {
    pub fn into_config(self) -> Result<ModelConfig> {
        let defaults = ModelConfig::default();
        let query_mode = match self.query_mode {
            None => defaults.query_mode,
            Some(label) => QueryMode::from_label(&label).ok_or_else(|| {
                Error::Validation(format!("query_mode must be \"V\" or \"T\", got {label:?}"))
            })?,
        };
        let cfg = ModelConfig {
            in_channels: self.in_channels.unwrap_or(defaults.in_channels),
            stage_channels: self.stage_channels.unwrap_or(defaults.stage_channels),
            fusion_dim: self.fusion_dim.unwrap_or(defaults.fusion_dim),
            heads: self.heads.unwrap_or(defaults.heads),
            cond_tokens: self.cond_tokens.unwrap_or(defaults.cond_tokens),
            blank_tokens: self.blank_tokens.unwrap_or(defaults.blank_tokens),
            lang_vocab: self.lang_vocab.unwrap_or(defaults.lang_vocab),
            lang_dim: self.lang_dim.unwrap_or(defaults.lang_dim),
            max_text_len: self.max_text_len.unwrap_or(defaults.max_text_len),
            decoder_dim: self.decoder_dim.unwrap_or(defaults.decoder_dim),
            lambda_aux: self.lambda.unwrap_or(defaults.lambda_aux),
            gamma_exist: self.gamma.unwrap_or(defaults.gamma_exist),
            seed: self.seed.unwrap_or(defaults.seed),
            query_mode,
            init_scale: self.init_scale.unwrap_or(defaults.init_scale),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Loads a config file, or the defaults when no path is given.
pub fn load_model_config(path: Option<&Path>) -> Result<ModelConfig> {
    match path {
        None => Ok(ModelConfig::default()),
        Some(p) => read_json::<ModelConfigFile>(p)?.into_config(),
    }
}

fn tensor_json(t: &Tensor<f64>) -> Value {
    json!({ "shape": t.shape(), "data": t.data() })
}

/// Serializes a forward trace for inspection: attention maps, token values,
/// mask score shapes, and the existence probability.
pub fn trace_json(trace: &ForwardTrace) -> Value {
    let attention: serde_json::Map<String, Value> = trace
        .attention_maps()
        .into_iter()
        .map(|(name, t)| (name, tensor_json(t)))
        .collect();
    let tokens: Vec<Value> = trace
        .vltf
        .iter()
        .enumerate()
        .map(|(i, v)| {
            json!({
                "stage": i + 2,
                "conditional": tensor_json(&v.cond_tokens),
                "blank": tensor_json(&v.blank_tokens),
            })
        })
        .collect();
    json!({
        "exist_prob": trace.exist_prob,
        "attention": Value::Object(attention),
        "tokens": tokens,
        "mask_score_shapes": trace
            .mask_scores
            .iter()
            .map(|m| m.shape().to_vec())
            .collect::<Vec<_>>(),
        "v1_shape": trace.v1.shape(),
    })
}

pub fn gradcheck_json(report: &GradCheckReport) -> Value {
    json!({
        "passed": report.passed(),
        "max_rel_error": report.max_rel_error,
        "tolerance": report.tolerance,
        "samples": report.samples.len(),
        "worst": report.worst().map(|s| json!({
            "index": s.index,
            "analytic": s.analytic,
            "numeric": s.numeric,
            "rel_error": s.rel_error,
        })),
    })
}
