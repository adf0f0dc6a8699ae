//! Finite-difference verification of reverse-mode gradients.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::config::ModelConfig;
use super::net::model_loss;
use super::params::ToyModelParams;
use super::tape::Tape;
use super::tensor::Tensor;
use super::ModelError;
use crate::mask::BinaryMask;
use crate::math;
use crate::rng::SplitMix64;

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Default pass tolerance on the max relative error.
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckSample {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub samples: Vec<GradCheckSample>,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }

    /// The worst sample, for diagnostics.
    pub fn worst(&self) -> Option<&GradCheckSample> {
        self.samples
            .iter()
            .max_by(|a, b| a.rel_error.partial_cmp(&b.rel_error).expect("finite"))
    }
}

/// Relative error with an absolute floor: gradient pairs below the floor
/// compare on absolute difference, keeping central-difference truncation
/// noise (~h² ≈ 1e-10) from dominating genuinely tiny gradients.
fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = math::abs(analytic).max(math::abs(numeric)).max(1e-3);
    math::abs(analytic - numeric) / denom
}

/// Compares `grad_fn` against central differences of `value_fn` on
/// `sample_size` distinct random coordinates of `theta`.
///
/// The two closures must evaluate the same function; `grad_fn` returns the
/// full gradient. Returns an error if any compared quantity is non-finite.
pub fn grad_check(
    theta: &[f64],
    value_fn: impl Fn(&[f64]) -> f64,
    grad_fn: impl Fn(&[f64]) -> Vec<f64>,
    sample_size: usize,
    step: f64,
    tolerance: f64,
    seed: u64,
) -> Result<GradCheckReport, ModelError> {
    assert!(step > 0.0 && tolerance > 0.0);
    if theta.is_empty() || sample_size == 0 {
        return Err(ModelError::BadConfig {
            detail: String::from("gradient check needs parameters and a sample size"),
        });
    }
    let analytic = grad_fn(theta);
    assert_eq!(analytic.len(), theta.len(), "gradient length mismatch");
    if let Some(i) = analytic.iter().position(|g| !g.is_finite()) {
        return Err(ModelError::NonFinite {
            detail: format!("analytic gradient at parameter {i}"),
        });
    }

    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = Vec::with_capacity(sample_size.min(theta.len()));
    let mut chosen = alloc::collections::BTreeSet::new();
    while indices.len() < sample_size.min(theta.len()) {
        let i = rng.below(theta.len());
        if chosen.insert(i) {
            indices.push(i);
        }
    }

    let mut perturbed = theta.to_vec();
    let mut samples = Vec::with_capacity(indices.len());
    let mut max_rel_error: f64 = 0.0;
    for &i in &indices {
        let original = perturbed[i];
        perturbed[i] = original + step;
        let plus = value_fn(&perturbed);
        perturbed[i] = original - step;
        let minus = value_fn(&perturbed);
        perturbed[i] = original;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(ModelError::NonFinite {
                detail: format!("loss under perturbation of parameter {i}"),
            });
        }
        let numeric = (plus - minus) / (2.0 * step);
        let rel_error = relative_error(analytic[i], numeric);
        max_rel_error = max_rel_error.max(rel_error);
        samples.push(GradCheckSample {
            index: i,
            analytic: analytic[i],
            numeric,
            rel_error,
        });
    }
    Ok(GradCheckReport {
        samples,
        max_rel_error,
        tolerance,
    })
}

/// One complete model input for loss evaluation.
#[derive(Debug, Clone)]
pub struct ModelInput {
    pub image: Tensor<f64>,
    pub token_ids: Vec<usize>,
    pub gt: BinaryMask,
    pub exists: bool,
}

/// A deterministic synthetic input sized for `image_h x image_w`.
pub fn synthetic_input(cfg: &ModelConfig, image_h: usize, image_w: usize, seed: u64) -> ModelInput {
    let mut rng = SplitMix64::new(seed);
    let image = Tensor::from_fn(alloc::vec![image_h, image_w, cfg.in_channels], |_| {
        rng.normal()
    });
    let token_count = 3 + rng.below(cfg.max_text_len.saturating_sub(3).max(1)).min(5);
    let token_ids: Vec<usize> = (0..token_count)
        .map(|_| rng.below(cfg.lang_vocab))
        .collect();
    let mut gt = BinaryMask::new(image_w as u32, image_h as u32).expect("non-zero dims");
    let x0 = rng.below(image_w / 2);
    let y0 = rng.below(image_h / 2);
    let bw = 1 + rng.below(image_w - x0);
    let bh = 1 + rng.below(image_h - y0);
    for x in x0..x0 + bw {
        for y in y0..y0 + bh {
            gt.set(x as u32, y as u32, true);
        }
    }
    ModelInput {
        image,
        token_ids,
        gt,
        exists: true,
    }
}

/// Full analytic gradient of the model's total loss at `theta`.
pub fn model_gradient(
    cfg: &ModelConfig,
    theta: &[f64],
    input: &ModelInput,
) -> Result<Vec<f64>, ModelError> {
    let tape = Tape::new();
    let vars: Vec<_> = theta.iter().map(|&v| tape.var(v)).collect();
    let params = ToyModelParams::from_slice(cfg, &vars)?;
    let image = Tensor::new(
        input.image.shape().to_vec(),
        input.image.data().iter().map(|&v| tape.var(v)).collect(),
    );
    let loss = model_loss(
        &params,
        cfg,
        &image,
        &input.token_ids,
        &input.gt,
        input.exists,
    )?;
    let grads = loss.backward();
    Ok(vars.iter().map(|v| grads.wrt(*v)).collect())
}

/// f64 total loss at `theta`.
pub fn model_value(
    cfg: &ModelConfig,
    theta: &[f64],
    input: &ModelInput,
) -> Result<f64, ModelError> {
    let params = ToyModelParams::from_slice(cfg, theta)?;
    model_loss(
        &params,
        cfg,
        &input.image,
        &input.token_ids,
        &input.gt,
        input.exists,
    )
}

/// Checks the model's reverse-mode gradient against central differences on
/// `sample_size` randomly chosen parameters.
///
/// `corrupt_gradient` deliberately offsets every analytic component — a
/// harness self-test proving the check can fail.
#[allow(clippy::too_many_arguments)]
pub fn model_grad_check(
    cfg: &ModelConfig,
    theta: &[f64],
    input: &ModelInput,
    sample_size: usize,
    step: f64,
    tolerance: f64,
    seed: u64,
    corrupt_gradient: bool,
) -> Result<GradCheckReport, ModelError> {
    // Surface real input problems before entering the closures.
    model_value(cfg, theta, input)?;
    let value_fn = |t: &[f64]| {
        model_value(cfg, t, input).expect("validated input cannot fail on perturbation")
    };
    let grad_fn = |t: &[f64]| {
        let mut g = model_gradient(cfg, t, input).expect("validated input cannot fail");
        if corrupt_gradient {
            for v in &mut g {
                *v += 1.0;
            }
        }
        g
    };
    grad_check(theta, value_fn, grad_fn, sample_size, step, tolerance, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quadratic_probe_is_machine_precision() {
        // f(x) = sum x_i^2: central differences are exact for quadratics.
        let theta = vec![0.3, -1.2, 2.5, 0.0, 7.1];
        let report = grad_check(
            &theta,
            |t| t.iter().map(|x| x * x).sum(),
            |t| t.iter().map(|x| 2.0 * x).collect(),
            5,
            1e-5,
            DEFAULT_TOLERANCE,
            0,
        )
        .unwrap();
        assert!(report.passed());
        assert!(report.max_rel_error < 1e-9, "{}", report.max_rel_error);
    }

    #[test]
    fn corrupted_gradient_fails() {
        let theta = vec![1.0, 2.0];
        let report = grad_check(
            &theta,
            |t| t.iter().map(|x| x * x).sum(),
            |t| t.iter().map(|x| 2.0 * x + 1.0).collect(),
            2,
            1e-5,
            DEFAULT_TOLERANCE,
            0,
        )
        .unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn near_zero_gradients_compare_absolutely() {
        // Both routes agree that the gradient is ~0; the floor keeps the
        // relative error from blowing up on noise.
        let theta = vec![0.0, 0.0];
        let report = grad_check(
            &theta,
            |t| t.iter().map(|x| x * x * x).sum(),
            |t| t.iter().map(|x| 3.0 * x * x).collect(),
            2,
            1e-5,
            DEFAULT_TOLERANCE,
            1,
        )
        .unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
