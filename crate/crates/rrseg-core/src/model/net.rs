//! The desk-scale fusion segmentation model.
//!
//! Pipeline: a 4-stage strided patch-embedding vision stub produces features
//! at strides 4/8/16/32; a token-embedding language stub produces the
//! expression feature. Stages 2–4 each raw-output a feature `R_i`, a VLTF
//! block fuses it with language into `F_i`, and stage `i+1` consumes
//! `R_i + σ(F_i)` where σ standardizes each channel over spatial positions.
//! An FPN-like decoder turns `(V_1, F_2, F_3, F_4)` into per-level
//! segmentation features and 2-channel mask score maps, and a binary head
//! cross-attends the high-resolution decoder features with the last VLTF's
//! conditional+blank tokens to predict whether the referred object exists.
//!
//! Inside a VLTF: language queries vision (attention 1), learnable memory
//! tokens query the vision-aware language feature and become conditional
//! tokens (attention 2), blank tokens are concatenated unchanged — they never
//! see the language stream — and vision queries the combined token set
//! (attention 3). Keeping blank tokens language-blind gives the model
//! capacity to explain image regions unrelated to the expression, which is
//! what lets it answer "no object" without collapsing on positive inputs.
//!
//! Everything is written over a generic [`Scalar`], so the same code runs as
//! plain `f64` or on the gradient tape.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::config::{ModelConfig, QueryMode};
use super::ops::{linear, mhca};
use super::params::{BinaryHeadParams, FpnParams, PatchEmbedParams, ToyModelParams, VltfParams};
use super::scalar::Scalar;
use super::tensor::Tensor;
use super::ModelError;
use crate::mask::BinaryMask;

/// Epsilon inside σ's variance square root.
pub const NORM_EPS: f64 = 1e-6;

/// Per-channel standardization over spatial positions: zero mean, unit
/// variance (ε-guarded). Input `[H, W, C]`.
pub fn standardize<S: Scalar>(t: &Tensor<S>) -> Tensor<S> {
    let (h, w, c) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let n = h * w;
    let inv_n = 1.0 / n as f64;
    let mut out = Vec::with_capacity(t.numel());
    out.extend_from_slice(t.data());
    for ch in 0..c {
        let mut sum = t.data()[ch];
        for p in 1..n {
            sum = sum + t.data()[p * c + ch];
        }
        let mean = sum.mul_const(inv_n);
        let mut var_sum = {
            let d = t.data()[ch] - mean;
            d * d
        };
        for p in 1..n {
            let d = t.data()[p * c + ch] - mean;
            var_sum = var_sum + d * d;
        }
        let inv_std = var_sum.mul_const(inv_n).add_const(NORM_EPS).sqrt();
        for p in 0..n {
            out[p * c + ch] = (t.data()[p * c + ch] - mean) / inv_std;
        }
    }
    Tensor::new(vec![h, w, c], out)
}

/// Strided patch embedding: each output position is an affine map of its
/// flattened `stride x stride` patch. `[H, W, C_in] -> [H/s, W/s, C_out]`.
pub fn patch_embed<S: Scalar>(
    input: &Tensor<S>,
    params: &PatchEmbedParams<S>,
) -> Result<Tensor<S>, ModelError> {
    let s = params.stride;
    let (h, w, c_in) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    if h % s != 0 || w % s != 0 {
        return Err(ModelError::ShapeMismatch {
            detail: format!("patch embed: {h}x{w} not divisible by stride {s}"),
        });
    }
    if params.proj.inputs() != s * s * c_in {
        return Err(ModelError::ShapeMismatch {
            detail: format!(
                "patch embed: weight expects {} inputs, patch has {}",
                params.proj.inputs(),
                s * s * c_in
            ),
        });
    }
    let (oh, ow) = (h / s, w / s);
    let c_out = params.proj.outputs();
    let mut patches: Vec<S> = Vec::with_capacity(oh * ow * s * s * c_in);
    for i in 0..oh {
        for j in 0..ow {
            for pi in 0..s {
                for pj in 0..s {
                    for ch in 0..c_in {
                        patches.push(input.at(&[i * s + pi, j * s + pj, ch]));
                    }
                }
            }
        }
    }
    let flat = Tensor::new(vec![oh * ow, s * s * c_in], patches);
    let projected = linear(&flat, &params.proj)?;
    Ok(projected.reshape(vec![oh, ow, c_out]))
}

/// Values and attention maps recorded by one VLTF block.
#[derive(Debug, Clone)]
pub struct VltfTrace<S> {
    /// Fused multi-modal feature, same shape as the vision input.
    pub fused: Tensor<S>,
    /// Conditional tokens `[K_c, fusion_dim]` (after attention 2).
    pub cond_tokens: Tensor<S>,
    /// Blank tokens `[K_b, fusion_dim]` exactly as they entered attention 3.
    pub blank_tokens: Tensor<S>,
    /// `[heads, T, HW]` — language queries vision.
    pub attn_lang_vision: Tensor<S>,
    /// `[heads, K_c, T]` — memory tokens query the language feature.
    pub attn_memory: Tensor<S>,
    /// `[heads, HW, K_c + K_b]` — vision queries the token set.
    pub attn_vision_tokens: Tensor<S>,
}

/// One fusion block: vision `[H, W, C_v]` and language `[T, C_l]` in, fused
/// feature of the vision input's shape out.
pub fn vltf_forward<S: Scalar>(
    params: &VltfParams<S>,
    vision: &Tensor<S>,
    language: &Tensor<S>,
) -> Result<VltfTrace<S>, ModelError> {
    let (h, w, c_v) = (vision.shape()[0], vision.shape()[1], vision.shape()[2]);
    let hw = h * w;
    let vision_flat = vision.clone().reshape(vec![hw, c_v]);
    let v = linear(&vision_flat, &params.vision_proj)?;
    let l = linear(language, &params.language_proj)?;

    // Attention 1: language queries vision -> vision-aware language feature.
    let (lang_vision, attn_lang_vision) = mhca(&params.mhca_lang_vision, &l, &v, &v)?;
    // Attention 2: memory tokens query that feature -> conditional tokens.
    let (cond_tokens, attn_memory) = mhca(
        &params.mhca_memory,
        &params.memory_tokens,
        &lang_vision,
        &lang_vision,
    )?;
    // Blank tokens join here, untouched by either language-facing attention.
    let blank_tokens = params.blank_tokens.clone();
    let tokens = cond_tokens.concat_rows(&blank_tokens);
    // Attention 3: vision queries the token set.
    let (token_context, attn_vision_tokens) =
        mhca(&params.mhca_vision_tokens, &v, &tokens, &tokens)?;
    let fused = linear(&token_context, &params.output_proj)?.reshape(vec![h, w, c_v]);

    Ok(VltfTrace {
        fused,
        cond_tokens,
        blank_tokens,
        attn_lang_vision,
        attn_memory,
        attn_vision_tokens,
    })
}

/// Nearest-neighbor x2 upsampling of `[H, W, C]`.
pub fn upsample2_nearest<S: Scalar>(t: &Tensor<S>) -> Tensor<S> {
    let (h, w, c) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    Tensor::from_fn(vec![2 * h, 2 * w, c], |flat| {
        let ch = flat % c;
        let rest = flat / c;
        let j = rest % (2 * w);
        let i = rest / (2 * w);
        t.at(&[i / 2, j / 2, ch])
    })
}

fn lateral<S: Scalar>(
    t: &Tensor<S>,
    proj: &super::params::LinearParams<S>,
) -> Result<Tensor<S>, ModelError> {
    let (h, w, c) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let flat = t.clone().reshape(vec![h * w, c]);
    Ok(linear(&flat, proj)?.reshape(vec![h, w, proj.outputs()]))
}

/// Full forward trace. For `S = f64` this is the inspectable
/// [`ForwardTrace`]; on the tape it carries the differentiable graph.
#[derive(Debug, Clone)]
pub struct ModelOutputs<S> {
    /// Stage-1 vision feature (stride 4), never fused.
    pub v1: Tensor<S>,
    /// Raw stage outputs R_2..R_4 before fusion.
    pub raw_stages: [Tensor<S>; 3],
    /// VLTF traces for stages 2..4 (fused features, tokens, attentions).
    pub vltf: [VltfTrace<S>; 3],
    /// Decoder features S_1..S_4, finest to coarsest.
    pub seg_features: [Tensor<S>; 4],
    /// 2-channel mask score maps M_1..M_4 (`[H_i, W_i, 2]`).
    pub mask_scores: [Tensor<S>; 4],
    /// Existence probability ê.
    pub exist_prob: S,
    /// Binary head attention map.
    pub attn_binary: Tensor<S>,
}

/// `f64` instantiation of the trace, as dumped and inspected.
pub type ForwardTrace = ModelOutputs<f64>;

impl<S: Scalar> ModelOutputs<S> {
    /// Every attention tensor in the trace, labeled, for normalization
    /// checks and dumping. Rows are the last axis.
    pub fn attention_maps(&self) -> Vec<(alloc::string::String, &Tensor<S>)> {
        let mut maps = Vec::new();
        for (i, trace) in self.vltf.iter().enumerate() {
            let stage = i + 2;
            maps.push((format!("vltf{stage}.lang_vision"), &trace.attn_lang_vision));
            maps.push((format!("vltf{stage}.memory"), &trace.attn_memory));
            maps.push((
                format!("vltf{stage}.vision_tokens"),
                &trace.attn_vision_tokens,
            ));
        }
        maps.push((
            alloc::string::String::from("binary_head"),
            &self.attn_binary,
        ));
        maps
    }

    /// Conditional+blank token set of the last VLTF (the binary head input).
    pub fn last_tokens(&self) -> Tensor<S> {
        let last = &self.vltf[2];
        last.cond_tokens.concat_rows(&last.blank_tokens)
    }
}

fn embed_language<S: Scalar>(
    params: &ToyModelParams<S>,
    cfg: &ModelConfig,
    token_ids: &[usize],
) -> Result<Tensor<S>, ModelError> {
    if token_ids.is_empty() {
        return Err(ModelError::EmptyText);
    }
    if token_ids.len() > cfg.max_text_len {
        return Err(ModelError::TokenOverflow {
            len: token_ids.len(),
            max: cfg.max_text_len,
        });
    }
    let dim = cfg.lang_dim;
    let mut data = Vec::with_capacity(token_ids.len() * dim);
    for &id in token_ids {
        if id >= cfg.lang_vocab {
            return Err(ModelError::BadTokenId {
                id,
                vocab: cfg.lang_vocab,
            });
        }
        for d in 0..dim {
            data.push(params.lang_embed.data()[id * dim + d]);
        }
    }
    Ok(Tensor::new(vec![token_ids.len(), dim], data))
}

/// Encoder-side trace: stage features and the three VLTF traces.
#[derive(Debug, Clone)]
pub struct EncoderTrace<S> {
    pub v1: Tensor<S>,
    /// Raw stage outputs R_2..R_4 before fusion.
    pub raw_stages: [Tensor<S>; 3],
    pub vltf: [VltfTrace<S>; 3],
}

/// Runs the fused encoder: stage 1 is never fused; stages 2..4 interleave
/// with VLTFs, each next stage consuming `R_i + σ(F_i)`.
///
/// `image` is `[H, W, in_channels]` with `H`, `W` divisible by 32;
/// `token_ids` is a non-empty expression of at most `max_text_len` ids.
pub fn encoder_forward<S: Scalar>(
    params: &ToyModelParams<S>,
    cfg: &ModelConfig,
    image: &Tensor<S>,
    token_ids: &[usize],
) -> Result<EncoderTrace<S>, ModelError> {
    if image.rank() != 3 || image.shape()[2] != cfg.in_channels {
        return Err(ModelError::ShapeMismatch {
            detail: format!(
                "image must be [H, W, {}], got {:?}",
                cfg.in_channels,
                image.shape()
            ),
        });
    }
    let (h, w) = (image.shape()[0], image.shape()[1]);
    if h % 32 != 0 || w % 32 != 0 || h == 0 || w == 0 {
        return Err(ModelError::BadImageSize {
            height: h,
            width: w,
        });
    }

    let language = embed_language(params, cfg, token_ids)?;
    let v1 = patch_embed(image, &params.stages[0])?;
    let r2 = patch_embed(&v1, &params.stages[1])?;
    let t2 = vltf_forward(&params.vltfs[0], &r2, &language)?;
    let x3 = r2.add(&standardize(&t2.fused));
    let r3 = patch_embed(&x3, &params.stages[2])?;
    let t3 = vltf_forward(&params.vltfs[1], &r3, &language)?;
    let x4 = r3.add(&standardize(&t3.fused));
    let r4 = patch_embed(&x4, &params.stages[3])?;
    let t4 = vltf_forward(&params.vltfs[2], &r4, &language)?;

    Ok(EncoderTrace {
        v1,
        raw_stages: [r2, r3, r4],
        vltf: [t2, t3, t4],
    })
}

/// Decoder features `S_1..S_4` and mask score maps `M_1..M_4`.
pub type DecodeOutputs<S> = ([Tensor<S>; 4], [Tensor<S>; 4]);

/// FPN-like decode: lateral projections, nearest x2 upsampling and addition
/// from coarsest to finest, then per-level 2-channel mask heads. Returns
/// `(S_1..S_4, M_1..M_4)`.
pub fn fpn_decode<S: Scalar>(
    params: &FpnParams<S>,
    v1: &Tensor<S>,
    f2: &Tensor<S>,
    f3: &Tensor<S>,
    f4: &Tensor<S>,
) -> Result<DecodeOutputs<S>, ModelError> {
    let p4 = lateral(f4, &params.laterals[3])?;
    let p3 = lateral(f3, &params.laterals[2])?.add(&upsample2_nearest(&p4));
    let p2 = lateral(f2, &params.laterals[1])?.add(&upsample2_nearest(&p3));
    let p1 = lateral(v1, &params.laterals[0])?.add(&upsample2_nearest(&p2));
    let seg_features = [p1, p2, p3, p4];
    let mut mask_scores = Vec::with_capacity(4);
    for (i, s) in seg_features.iter().enumerate() {
        mask_scores.push(lateral(s, &params.mask_heads[i])?);
    }
    let mask_scores: [Tensor<S>; 4] = match mask_scores.try_into() {
        Ok(arr) => arr,
        Err(_) => unreachable!("built from four levels"),
    };
    Ok((seg_features, mask_scores))
}

/// Runs the full model: encoder fusion, FPN-like decoding, binary head.
pub fn run_model<S: Scalar>(
    params: &ToyModelParams<S>,
    cfg: &ModelConfig,
    image: &Tensor<S>,
    token_ids: &[usize],
) -> Result<ModelOutputs<S>, ModelError> {
    let encoder = encoder_forward(params, cfg, image, token_ids)?;
    let EncoderTrace {
        v1,
        raw_stages,
        vltf,
    } = encoder;
    let (seg_features, mask_scores) = fpn_decode(
        &params.fpn,
        &v1,
        &vltf[0].fused,
        &vltf[1].fused,
        &vltf[2].fused,
    )?;

    // Binary existence head over S_1 and the last VLTF's token set.
    let tokens = vltf[2].cond_tokens.concat_rows(&vltf[2].blank_tokens);
    let s1 = &seg_features[0];
    let (hw1, d) = (s1.shape()[0] * s1.shape()[1], s1.shape()[2]);
    let s1_flat = s1.clone().reshape(vec![hw1, d]);
    let (exist_prob, attn_binary) =
        binary_head(&params.binary_head, cfg.query_mode, &s1_flat, &tokens)?;

    Ok(ModelOutputs {
        v1,
        raw_stages,
        vltf,
        seg_features,
        mask_scores,
        exist_prob,
        attn_binary,
    })
}

/// Existence probability from decoder features and fusion tokens.
///
/// The configured query mode picks which side queries the attention; the
/// context rows are mean-pooled and projected to one sigmoid logit.
pub fn binary_head<S: Scalar>(
    params: &BinaryHeadParams<S>,
    mode: QueryMode,
    decoder_features: &Tensor<S>,
    tokens: &Tensor<S>,
) -> Result<(S, Tensor<S>), ModelError> {
    let (context, attn) = match mode {
        QueryMode::Vision => mhca(&params.mhca, decoder_features, tokens, tokens)?,
        QueryMode::Tokens => mhca(&params.mhca, tokens, decoder_features, decoder_features)?,
    };
    let rows = context.shape()[0];
    let dim = context.shape()[1];
    let inv = 1.0 / rows as f64;
    let mut pooled = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut acc = context.data()[c];
        for r in 1..rows {
            acc = acc + context.data()[r * dim + c];
        }
        pooled.push(acc.mul_const(inv));
    }
    let pooled = Tensor::new(vec![1, dim], pooled);
    let logit = linear(&pooled, &params.classifier)?.data()[0];
    Ok((logit.sigmoid(), attn))
}

/// Ground truth downsampled to `[out_h, out_w]` by per-cell majority vote,
/// ties counting as foreground. Row-major over (row, col).
pub fn majority_downsample(
    gt: &BinaryMask,
    out_h: usize,
    out_w: usize,
) -> Result<Vec<bool>, ModelError> {
    let (h, w) = (gt.height() as usize, gt.width() as usize);
    if out_h == 0 || out_w == 0 || h % out_h != 0 || w % out_w != 0 {
        return Err(ModelError::ShapeMismatch {
            detail: format!("cannot downsample {h}x{w} mask to {out_h}x{out_w}"),
        });
    }
    let (fh, fw) = (h / out_h, w / out_w);
    let cell = (fh * fw) as u64;
    let mut out = Vec::with_capacity(out_h * out_w);
    for i in 0..out_h {
        for j in 0..out_w {
            let mut fg = 0u64;
            for y in i * fh..(i + 1) * fh {
                for x in j * fw..(j + 1) * fw {
                    if gt.get(x as u32, y as u32) {
                        fg += 1;
                    }
                }
            }
            out.push(2 * fg >= cell);
        }
    }
    Ok(out)
}

/// Mean per-pixel 2-class cross entropy of softmaxed scores against a
/// boolean target grid. `scores: [H, W, 2]`, `target` row-major `H*W`.
#[allow(clippy::needless_range_loop)] // p indexes the scores and target grids in lockstep
pub fn cross_entropy_2class<S: Scalar>(
    scores: &Tensor<S>,
    target: &[bool],
) -> Result<S, ModelError> {
    let (h, w) = (scores.shape()[0], scores.shape()[1]);
    if scores.rank() != 3 || scores.shape()[2] != 2 || target.len() != h * w {
        return Err(ModelError::ShapeMismatch {
            detail: format!(
                "cross entropy: scores {:?} vs target length {}",
                scores.shape(),
                target.len()
            ),
        });
    }
    let n = h * w;
    let mut total: Option<S> = None;
    for p in 0..n {
        let z0 = scores.data()[2 * p];
        let z1 = scores.data()[2 * p + 1];
        let max = z0.val().max(z1.val());
        let e0 = z0.add_const(-max).exp();
        let e1 = z1.add_const(-max).exp();
        let lse = (e0 + e1).ln();
        let z_true = if target[p] { z1 } else { z0 };
        let loss = -(z_true.add_const(-max) - lse);
        total = Some(match total {
            Some(t) => t + loss,
            None => loss,
        });
    }
    Ok(total.expect("non-empty grid").mul_const(1.0 / n as f64))
}

/// Segmentation loss: CE against the finest map plus λ-weighted CE against
/// the three coarser maps, each with a majority-pooled ground truth.
pub fn seg_loss<S: Scalar>(
    mask_scores: &[Tensor<S>; 4],
    gt: &BinaryMask,
    lambda: f64,
) -> Result<S, ModelError> {
    let mut levels = mask_scores.iter().map(|m| {
        let target = majority_downsample(gt, m.shape()[0], m.shape()[1])?;
        cross_entropy_2class(m, &target)
    });
    let fine = levels.next().expect("four levels")?;
    let mut aux: Option<S> = None;
    for level in levels {
        let level = level?;
        aux = Some(match aux {
            Some(a) => a + level,
            None => level,
        });
    }
    Ok(fine + aux.expect("three aux levels").mul_const(lambda))
}

/// Binary cross entropy of the existence prediction: `−(e·ln ê + (1−e)·ln(1−ê))`.
pub fn exist_loss<S: Scalar>(exist_prob: S, exists: bool) -> S {
    if exists {
        -exist_prob.ln()
    } else {
        -(exist_prob.lift(1.0) - exist_prob).ln()
    }
}

/// Total training loss `L_s + γ·L_e`.
pub fn total_loss<S: Scalar>(seg: S, exist: S, gamma: f64) -> S {
    seg + exist.mul_const(gamma)
}

/// Convenience: full forward plus loss for one sample.
pub fn model_loss<S: Scalar>(
    params: &ToyModelParams<S>,
    cfg: &ModelConfig,
    image: &Tensor<S>,
    token_ids: &[usize],
    gt: &BinaryMask,
    exists: bool,
) -> Result<S, ModelError> {
    let outputs = run_model(params, cfg, image, token_ids)?;
    let seg = seg_loss(&outputs.mask_scores, gt, cfg.lambda_aux)?;
    let exist = exist_loss(outputs.exist_prob, exists);
    Ok(total_loss(seg, exist, cfg.gamma_exist))
}

/// Inference rule: existence below 0.5 forces an exact 0-pixel mask;
/// otherwise the finest score map is argmaxed per pixel and upsampled
/// (nearest) to the input resolution. Score ties resolve to background.
pub fn predict_mask(trace: &ForwardTrace) -> BinaryMask {
    let m1 = &trace.mask_scores[0];
    let (h1, w1) = (m1.shape()[0], m1.shape()[1]);
    // Stage 1 sits at stride 4 of the input.
    let (h, w) = (h1 * 4, w1 * 4);
    let mut mask = BinaryMask::new(w as u32, h as u32).expect("trace implies non-zero dimensions");
    if trace.exist_prob < 0.5 {
        return mask;
    }
    for y in 0..h {
        for x in 0..w {
            let bg = m1.at(&[y / 4, x / 4, 0]);
            let fg = m1.at(&[y / 4, x / 4, 1]);
            if fg > bg {
                mask.set(x as u32, y as u32, true);
            }
        }
    }
    mask
}
