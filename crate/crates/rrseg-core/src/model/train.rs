//! Minimal full-batch gradient-descent demo on synthetic data.
//!
//! Exists to show the loss decreasing through the complete differentiable
//! pipeline with a 1:1 positive/negative sample mix — it makes no accuracy
//! claims whatsoever.

use alloc::vec::Vec;

use super::config::ModelConfig;
use super::gradcheck::ModelInput;
use super::net::model_loss;
use super::params::ToyModelParams;
use super::tape::Tape;
use super::tensor::Tensor;
use super::ModelError;
use crate::mask::BinaryMask;
use crate::rng::SplitMix64;

/// Synthetic training batch: alternating positive samples (random rectangle
/// ground truth) and negative samples (all-zero ground truth), 1:1.
pub fn synthetic_batch(
    cfg: &ModelConfig,
    image_h: usize,
    image_w: usize,
    count: usize,
    seed: u64,
) -> Vec<ModelInput> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|i| {
            let image = Tensor::from_fn(alloc::vec![image_h, image_w, cfg.in_channels], |_| {
                rng.normal()
            });
            let tokens = 3 + rng.below(5);
            let token_ids = (0..tokens).map(|_| rng.below(cfg.lang_vocab)).collect();
            let exists = i % 2 == 0;
            let mut gt = BinaryMask::new(image_w as u32, image_h as u32).expect("non-zero");
            if exists {
                let x0 = rng.below(image_w / 2);
                let y0 = rng.below(image_h / 2);
                let bw = 1 + rng.below(image_w - x0);
                let bh = 1 + rng.below(image_h - y0);
                for x in x0..x0 + bw {
                    for y in y0..y0 + bh {
                        gt.set(x as u32, y as u32, true);
                    }
                }
            }
            ModelInput {
                image,
                token_ids,
                gt,
                exists,
            }
        })
        .collect()
}

/// Mean total loss over a batch at `theta` (f64 path).
pub fn batch_loss(
    cfg: &ModelConfig,
    theta: &[f64],
    batch: &[ModelInput],
) -> Result<f64, ModelError> {
    let params = ToyModelParams::from_slice(cfg, theta)?;
    let mut total = 0.0;
    for sample in batch {
        total += model_loss(
            &params,
            cfg,
            &sample.image,
            &sample.token_ids,
            &sample.gt,
            sample.exists,
        )?;
    }
    Ok(total / batch.len() as f64)
}

/// Runs `steps` full-batch gradient-descent updates in place.
///
/// Returns the loss trajectory: the batch loss before each update plus the
/// final loss, `steps + 1` values.
pub fn train_demo(
    cfg: &ModelConfig,
    theta: &mut [f64],
    batch: &[ModelInput],
    steps: usize,
    learning_rate: f64,
) -> Result<Vec<f64>, ModelError> {
    if batch.is_empty() {
        return Err(ModelError::BadConfig {
            detail: alloc::string::String::from("training batch is empty"),
        });
    }
    let mut losses = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        let tape = Tape::new();
        let vars: Vec<_> = theta.iter().map(|&v| tape.var(v)).collect();
        let params = ToyModelParams::from_slice(cfg, &vars)?;
        let mut total = None;
        for sample in batch {
            let image = Tensor::new(
                sample.image.shape().to_vec(),
                sample.image.data().iter().map(|&v| tape.var(v)).collect(),
            );
            let loss = model_loss(
                &params,
                cfg,
                &image,
                &sample.token_ids,
                &sample.gt,
                sample.exists,
            )?;
            total = Some(match total {
                Some(t) => t + loss,
                None => loss,
            });
        }
        use super::scalar::Scalar;
        let mean = total
            .expect("non-empty batch")
            .mul_const(1.0 / batch.len() as f64);
        losses.push(mean.val());
        let grads = mean.backward();
        for (t, v) in theta.iter_mut().zip(&vars) {
            *t -= learning_rate * grads.wrt(*v);
        }
    }
    losses.push(batch_loss(cfg, theta, batch)?);
    Ok(losses)
}
