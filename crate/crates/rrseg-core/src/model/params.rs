//! Parameter structures and their canonical flat layout.
//!
//! All learned values live in one flat `Vec<f64>`; [`ToyModelParams::from_slice`]
//! reinterprets it (for `f64` or tape variables alike) in a fixed order so
//! gradient checking can perturb single coordinates and read matching
//! adjoints. Initialization walks the same layout: weight matrices draw from
//! `N(0, 1/fan_in)` so activations keep their scale through the stack (the
//! stubs have no interposed normalization layers to rescue a flat tiny
//! init), while biases, the embedding table, and the memory/blank tokens use
//! the configured `init_scale`. [`param_count`] mirrors the layout and is
//! pinned to `from_slice` by tests.

use alloc::vec::Vec;

use super::config::{ModelConfig, QueryMode};
use super::scalar::Scalar;
use super::tensor::Tensor;
use super::ModelError;
use crate::rng::SplitMix64;

/// Affine map `y = x W + b` with `W: [inputs, outputs]`, `b: [outputs]`.
#[derive(Debug, Clone)]
pub struct LinearParams<S> {
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
}

impl<S: Scalar> LinearParams<S> {
    pub fn inputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[1]
    }
}

/// Multi-head cross attention projections. Query and key/value sides may
/// have different input widths; the attention itself runs at `model_dim`.
#[derive(Debug, Clone)]
pub struct MhcaParams<S> {
    pub query: LinearParams<S>,
    pub key: LinearParams<S>,
    pub value: LinearParams<S>,
    pub output: LinearParams<S>,
    pub heads: usize,
}

impl<S: Scalar> MhcaParams<S> {
    pub fn model_dim(&self) -> usize {
        self.query.outputs()
    }
}

/// One vision-language token fusion block.
///
/// `memory_tokens` seed the conditional tokens; `blank_tokens` are learnable
/// but bypass both language-facing attentions — they only ever meet the
/// vision stream in the third attention, which keeps them from absorbing
/// language information.
#[derive(Debug, Clone)]
pub struct VltfParams<S> {
    pub vision_proj: LinearParams<S>,
    pub language_proj: LinearParams<S>,
    /// Attention 1: language queries vision.
    pub mhca_lang_vision: MhcaParams<S>,
    /// Attention 2: memory tokens query the vision-aware language feature.
    pub mhca_memory: MhcaParams<S>,
    /// Attention 3: vision queries the conditional+blank token set.
    pub mhca_vision_tokens: MhcaParams<S>,
    /// `[K_c, fusion_dim]`.
    pub memory_tokens: Tensor<S>,
    /// `[K_b, fusion_dim]`.
    pub blank_tokens: Tensor<S>,
    pub output_proj: LinearParams<S>,
}

/// Strided patch embedding: each output position is a linear map of the
/// flattened `stride x stride` input patch.
#[derive(Debug, Clone)]
pub struct PatchEmbedParams<S> {
    pub proj: LinearParams<S>,
    pub stride: usize,
}

/// Lateral projections and per-level 2-channel mask heads of the FPN-like
/// decoder.
#[derive(Debug, Clone)]
pub struct FpnParams<S> {
    pub laterals: [LinearParams<S>; 4],
    pub mask_heads: [LinearParams<S>; 4],
}

#[derive(Debug, Clone)]
pub struct BinaryHeadParams<S> {
    pub mhca: MhcaParams<S>,
    /// Final projection to the existence logit.
    pub classifier: LinearParams<S>,
}

/// Every learned value of the desk-scale model.
#[derive(Debug, Clone)]
pub struct ToyModelParams<S> {
    pub stages: [PatchEmbedParams<S>; 4],
    /// `[vocab, lang_dim]` token-id embedding table (the language stub).
    pub lang_embed: Tensor<S>,
    /// Fusion blocks attached to stages 2..4.
    pub vltfs: [VltfParams<S>; 3],
    pub fpn: FpnParams<S>,
    pub binary_head: BinaryHeadParams<S>,
}

#[derive(Clone, Copy)]
enum ParamKind {
    /// Weight matrix; drawn at `1/sqrt(fan_in)`.
    Weight { fan_in: usize },
    /// Bias, embedding, or token vector; drawn at `init_scale`.
    Flat,
}

/// Where parameter values come from while building the structures: an
/// existing flat slice, or a seeded initializer recording what it draws.
trait ParamSource {
    type Scalar: Scalar;
    fn tensor(
        &mut self,
        shape: &[usize],
        kind: ParamKind,
    ) -> Result<Tensor<Self::Scalar>, ModelError>;
}

struct SliceSource<'a, S> {
    data: &'a [S],
    pos: usize,
}

impl<'a, S: Scalar> ParamSource for SliceSource<'a, S> {
    type Scalar = S;

    fn tensor(&mut self, shape: &[usize], _kind: ParamKind) -> Result<Tensor<S>, ModelError> {
        let n: usize = shape.iter().product();
        let end = self.pos + n;
        if end > self.data.len() {
            return Err(ModelError::WrongParamCount {
                expected: end,
                found: self.data.len(),
            });
        }
        let t = Tensor::new(shape.to_vec(), self.data[self.pos..end].to_vec());
        self.pos = end;
        Ok(t)
    }
}

struct InitSource {
    rng: SplitMix64,
    init_scale: f64,
    drawn: Vec<f64>,
}

impl ParamSource for InitSource {
    type Scalar = f64;

    fn tensor(&mut self, shape: &[usize], kind: ParamKind) -> Result<Tensor<f64>, ModelError> {
        let n: usize = shape.iter().product();
        let std = match kind {
            ParamKind::Weight { fan_in } => 1.0 / crate::math::sqrt(fan_in as f64),
            ParamKind::Flat => self.init_scale,
        };
        let data: Vec<f64> = (0..n).map(|_| self.rng.normal() * std).collect();
        self.drawn.extend_from_slice(&data);
        Ok(Tensor::new(shape.to_vec(), data))
    }
}

struct Builder<'c, P> {
    cfg: &'c ModelConfig,
    source: P,
}

impl<'c, P: ParamSource> Builder<'c, P> {
    fn linear(
        &mut self,
        inputs: usize,
        outputs: usize,
    ) -> Result<LinearParams<P::Scalar>, ModelError> {
        Ok(LinearParams {
            weight: self
                .source
                .tensor(&[inputs, outputs], ParamKind::Weight { fan_in: inputs })?,
            bias: self.source.tensor(&[outputs], ParamKind::Flat)?,
        })
    }

    fn mhca(&mut self, q_in: usize, kv_in: usize) -> Result<MhcaParams<P::Scalar>, ModelError> {
        let dim = self.cfg.fusion_dim;
        Ok(MhcaParams {
            query: self.linear(q_in, dim)?,
            key: self.linear(kv_in, dim)?,
            value: self.linear(kv_in, dim)?,
            output: self.linear(dim, dim)?,
            heads: self.cfg.heads,
        })
    }

    fn vltf(&mut self, vision_channels: usize) -> Result<VltfParams<P::Scalar>, ModelError> {
        let f = self.cfg.fusion_dim;
        Ok(VltfParams {
            vision_proj: self.linear(vision_channels, f)?,
            language_proj: self.linear(self.cfg.lang_dim, f)?,
            mhca_lang_vision: self.mhca(f, f)?,
            mhca_memory: self.mhca(f, f)?,
            mhca_vision_tokens: self.mhca(f, f)?,
            memory_tokens: self
                .source
                .tensor(&[self.cfg.cond_tokens, f], ParamKind::Flat)?,
            blank_tokens: self
                .source
                .tensor(&[self.cfg.blank_tokens, f], ParamKind::Flat)?,
            output_proj: self.linear(f, vision_channels)?,
        })
    }

    fn model(&mut self) -> Result<ToyModelParams<P::Scalar>, ModelError> {
        let cfg = self.cfg;
        let [c1, c2, c3, c4] = cfg.stage_channels;
        let stages = [
            PatchEmbedParams {
                proj: self.linear(4 * 4 * cfg.in_channels, c1)?,
                stride: 4,
            },
            PatchEmbedParams {
                proj: self.linear(2 * 2 * c1, c2)?,
                stride: 2,
            },
            PatchEmbedParams {
                proj: self.linear(2 * 2 * c2, c3)?,
                stride: 2,
            },
            PatchEmbedParams {
                proj: self.linear(2 * 2 * c3, c4)?,
                stride: 2,
            },
        ];
        let lang_embed = self
            .source
            .tensor(&[cfg.lang_vocab, cfg.lang_dim], ParamKind::Flat)?;
        let vltfs = [self.vltf(c2)?, self.vltf(c3)?, self.vltf(c4)?];
        let d = cfg.decoder_dim;
        let fpn = FpnParams {
            laterals: [
                self.linear(c1, d)?,
                self.linear(c2, d)?,
                self.linear(c3, d)?,
                self.linear(c4, d)?,
            ],
            mask_heads: [
                self.linear(d, 2)?,
                self.linear(d, 2)?,
                self.linear(d, 2)?,
                self.linear(d, 2)?,
            ],
        };
        let (q_in, kv_in) = binary_head_dims(cfg);
        let binary_head = BinaryHeadParams {
            mhca: self.mhca(q_in, kv_in)?,
            classifier: self.linear(cfg.fusion_dim, 1)?,
        };
        Ok(ToyModelParams {
            stages,
            lang_embed,
            vltfs,
            fpn,
            binary_head,
        })
    }
}

/// Query/key input widths of the binary head attention for the configured
/// query mode.
fn binary_head_dims(cfg: &ModelConfig) -> (usize, usize) {
    match cfg.query_mode {
        QueryMode::Vision => (cfg.decoder_dim, cfg.fusion_dim),
        QueryMode::Tokens => (cfg.fusion_dim, cfg.decoder_dim),
    }
}

impl<S: Scalar> ToyModelParams<S> {
    /// Reinterprets a flat parameter slice; fails unless its length is
    /// exactly [`param_count`].
    pub fn from_slice(cfg: &ModelConfig, data: &[S]) -> Result<Self, ModelError> {
        cfg.validate()?;
        let mut builder = Builder {
            cfg,
            source: SliceSource { data, pos: 0 },
        };
        let params = builder.model()?;
        if builder.source.pos != data.len() {
            return Err(ModelError::WrongParamCount {
                expected: builder.source.pos,
                found: data.len(),
            });
        }
        Ok(params)
    }
}

fn linear_count(inputs: usize, outputs: usize) -> usize {
    inputs * outputs + outputs
}

fn mhca_count(q_in: usize, kv_in: usize, dim: usize) -> usize {
    linear_count(q_in, dim) + 2 * linear_count(kv_in, dim) + linear_count(dim, dim)
}

fn vltf_count(cfg: &ModelConfig, vision_channels: usize) -> usize {
    let f = cfg.fusion_dim;
    linear_count(vision_channels, f)
        + linear_count(cfg.lang_dim, f)
        + 3 * mhca_count(f, f, f)
        + cfg.cond_tokens * f
        + cfg.blank_tokens * f
        + linear_count(f, vision_channels)
}

/// Total scalar parameter count for a configuration; the length
/// [`ToyModelParams::from_slice`] expects.
pub fn param_count(cfg: &ModelConfig) -> usize {
    let [c1, c2, c3, c4] = cfg.stage_channels;
    let d = cfg.decoder_dim;
    let (q_in, kv_in) = binary_head_dims(cfg);
    linear_count(4 * 4 * cfg.in_channels, c1)
        + linear_count(2 * 2 * c1, c2)
        + linear_count(2 * 2 * c2, c3)
        + linear_count(2 * 2 * c3, c4)
        + cfg.lang_vocab * cfg.lang_dim
        + vltf_count(cfg, c2)
        + vltf_count(cfg, c3)
        + vltf_count(cfg, c4)
        + [c1, c2, c3, c4]
            .iter()
            .map(|&c| linear_count(c, d))
            .sum::<usize>()
        + 4 * linear_count(d, 2)
        + mhca_count(q_in, kv_in, cfg.fusion_dim)
        + linear_count(cfg.fusion_dim, 1)
}

/// Draws a fresh flat parameter vector from the configured seed.
pub fn init_flat(cfg: &ModelConfig) -> Result<Vec<f64>, ModelError> {
    cfg.validate()?;
    let mut builder = Builder {
        cfg,
        source: InitSource {
            rng: SplitMix64::new(cfg.seed),
            init_scale: cfg.init_scale,
            drawn: Vec::with_capacity(param_count(cfg)),
        },
    };
    builder.model()?;
    Ok(builder.source.drawn)
}

impl ToyModelParams<f64> {
    pub fn init(cfg: &ModelConfig) -> Result<(Vec<f64>, Self), ModelError> {
        let flat = init_flat(cfg)?;
        let params = Self::from_slice(cfg, &flat)?;
        Ok((flat, params))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn param_count_matches_from_slice() {
        for mode in [QueryMode::Vision, QueryMode::Tokens] {
            let cfg = ModelConfig {
                query_mode: mode,
                ..ModelConfig::default()
            };
            let n = param_count(&cfg);
            assert_eq!(init_flat(&cfg).unwrap().len(), n);
            let zeros = vec![0.0f64; n];
            ToyModelParams::from_slice(&cfg, &zeros).expect("exact count must parse");
            assert!(ToyModelParams::from_slice(&cfg, &zeros[..n - 1]).is_err());
            let more = vec![0.0f64; n + 1];
            assert!(ToyModelParams::from_slice(&cfg, &more).is_err());
        }
    }

    #[test]
    fn init_is_seeded() {
        let cfg = ModelConfig::default();
        let a = init_flat(&cfg).unwrap();
        let b = init_flat(&cfg).unwrap();
        assert_eq!(a, b);
        let other = init_flat(&ModelConfig {
            seed: 1,
            ..ModelConfig::default()
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn init_scales_weights_by_fan_in_and_tokens_flat() {
        let cfg = ModelConfig::default();
        let (_, params) = ToyModelParams::init(&cfg).unwrap();
        // Stage-1 patch embedding has fan-in 48.
        let w = &params.stages[0].proj.weight;
        let rms = (w.data().iter().map(|x| x * x).sum::<f64>() / w.numel() as f64).sqrt();
        let expected = 1.0 / (48.0f64).sqrt();
        assert!(
            (rms - expected).abs() < 0.25 * expected,
            "rms {rms}, expected {expected}"
        );
        // Embedding table follows init_scale.
        let e = &params.lang_embed;
        let erms = (e.data().iter().map(|x| x * x).sum::<f64>() / e.numel() as f64).sqrt();
        assert!(
            (erms - cfg.init_scale).abs() < 0.2 * cfg.init_scale,
            "rms {erms}"
        );
    }

    #[test]
    fn blank_token_slice_is_separate_from_memory() {
        let cfg = ModelConfig::default();
        let (_, params) = ToyModelParams::init(&cfg).unwrap();
        let v = &params.vltfs[0];
        assert_eq!(v.memory_tokens.shape(), &[20, 16]);
        assert_eq!(v.blank_tokens.shape(), &[10, 16]);
        assert_ne!(v.memory_tokens.data()[0], v.blank_tokens.data()[0]);
    }
}
